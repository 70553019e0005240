"""Cross-section meshes, the periodic product mesh, and cross-section moments."""

from dataclasses import dataclass, field

import numpy as np


class CrossSectionMesh:
    """Structured quadrilateral mesh of a centered, area-1 cross-section.

    nodes: (n_nodes, 2) coordinates; elements: (n_elem, 4) node indices,
    counterclockwise.
    """

    def __init__(self, nodes, elements):
        self.nodes = np.asarray(nodes, dtype=float)
        self.elements = np.asarray(elements, dtype=int)
        self.areas = _quad_areas(self.nodes, self.elements)
        if np.any(self.areas <= 0):
            raise ValueError("degenerate or inverted elements")

    @property
    def n_nodes(self):
        return len(self.nodes)

    def total_area(self):
        return float(np.sum(self.areas))


def _quad_areas(nodes, elements):
    p = nodes[elements]  # (n_elem, 4, 2)
    x, y = p[:, :, 0], p[:, :, 1]
    return 0.5 * np.abs(
        np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1))


def build_rectangle(aspect, nx, ny):
    """Axis-aligned rectangle with side ratio `aspect`, scaled to area 1.

    The mesh is uniform nx-by-ny, centered at the origin, so all the
    normalisation identities (zero first moments, zero mixed moment) hold by
    construction.
    """
    if aspect <= 0:
        raise ValueError("aspect must be positive")
    if nx < 2 or ny < 2:
        raise ValueError("need at least 2 cells per direction")
    a = np.sqrt(aspect)   # side along x1
    b = 1.0 / a           # side along x2, so a*b = 1
    xs = np.linspace(-a / 2, a / 2, nx + 1)
    ys = np.linspace(-b / 2, b / 2, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * (ny + 1) + j

    elements = []
    for i in range(nx):
        for j in range(ny):
            elements.append([nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)])
    return CrossSectionMesh(nodes, np.array(elements))


def is_centrally_symmetric(mesh, tol=1e-10):
    """Check invariance of the node set under x -> -x.

    Returns (flag, pairing) where pairing[i] is the node index of -node_i
    (or None when the mesh is not symmetric).
    """
    nodes = mesh.nodes
    order = np.lexsort((nodes[:, 1], nodes[:, 0]))
    pairing = np.full(len(nodes), -1, dtype=int)
    # match -node_i against the sorted node list
    for i, p in enumerate(-nodes):
        lo, hi = 0, len(order)
        j = np.searchsorted(nodes[order, 0], p[0] - tol)
        found = -1
        while j < len(order):
            cand = order[j]
            if nodes[cand, 0] > p[0] + tol:
                break
            if abs(nodes[cand, 1] - p[1]) <= tol and abs(nodes[cand, 0] - p[0]) <= tol:
                found = cand
                break
            j += 1
        if found < 0:
            return False, None
        pairing[i] = found
    return True, pairing


class ProductMesh:
    """Tensor mesh of the cross-section with a uniform periodic y-grid.

    The y-grid has n_y nodes y_q = -1/2 + q/n_y (q = 0..n_y-1); the node at
    y = 1/2 is identified with y = -1/2. Product node index = q * n_cross + i.
    """

    def __init__(self, cross, n_y):
        if n_y < 2:
            raise ValueError("need at least 2 cells along y")
        self.cross = cross
        self.n_y = int(n_y)
        self.y_nodes = -0.5 + np.arange(self.n_y) / self.n_y

    @property
    def n_nodes(self):
        return self.cross.n_nodes * self.n_y

    @property
    def n_dof(self):
        return 3 * self.n_nodes

    def node_index(self, q, i_cross):
        return q * self.cross.n_nodes + i_cross

    def node_coords(self):
        """(n_nodes, 3) array of (x1, x2, y) coordinates."""
        nc = np.tile(self.cross.nodes, (self.n_y, 1))
        yy = np.repeat(self.y_nodes, self.cross.n_nodes)
        return np.column_stack([nc, yy])


def cross_mass(mesh):
    """Scalar Q1 mass matrix of the cross-section mesh (dense; the
    cross-sections in play are small)."""
    g = 1.0 / np.sqrt(3.0)
    pts = np.array([[-g, -g], [g, -g], [g, g], [-g, g]])
    n = mesh.n_nodes
    M = np.zeros((n, n))
    p = mesh.nodes[mesh.elements]
    for (xi, eta) in pts:
        N = 0.25 * np.array([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                             (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])
        dNdxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
        dNdeta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
        J11 = np.einsum("a,ea->e", dNdxi, p[:, :, 0])
        J12 = np.einsum("a,ea->e", dNdxi, p[:, :, 1])
        J21 = np.einsum("a,ea->e", dNdeta, p[:, :, 0])
        J22 = np.einsum("a,ea->e", dNdeta, p[:, :, 1])
        detJ = J11 * J22 - J12 * J21
        Me = np.einsum("e,a,b->eab", detJ, N, N)
        for e, elem in enumerate(mesh.elements):
            M[np.ix_(elem, elem)] += Me[e]
    return M


@dataclass
class MomentData:
    """Second moments of the cross-section and the induced weight matrices."""
    c1: float
    c2: float
    C_stretch: np.ndarray = field(init=False)
    C_rod: np.ndarray = field(init=False)

    def __post_init__(self):
        self.C_stretch = np.diag([self.c1 + self.c2, 1.0])
        self.C_rod = np.diag([1.0, 1.0, self.c1 + self.c2, 1.0])

    def C_bend(self, chi):
        return np.diag([1.0 + chi ** 2 * self.c1, 1.0 + chi ** 2 * self.c2])

    def C_rod_chi(self, chi):
        out = np.zeros((4, 4))
        out[:2, :2] = self.C_bend(chi)
        out[2:, 2:] = self.C_stretch
        return out


def compute_moments(mesh):
    """Element-exact second moments c1 = int x1^2, c2 = int x2^2.

    Uses 2x2 Gauss quadrature on the bilinear geometry, which is exact for
    quadratic monomials on parallelogram elements.
    """
    g = 1.0 / np.sqrt(3.0)
    pts = np.array([[-g, -g], [g, -g], [g, g], [-g, g]])
    c1 = c2 = 0.0
    p = mesh.nodes[mesh.elements]  # (n_elem, 4, 2)
    for (xi, eta) in pts:
        N = 0.25 * np.array([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                             (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])
        dNdxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
        dNdeta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
        xq = np.einsum("a,eai->ei", N, p)
        J11 = np.einsum("a,ea->e", dNdxi, p[:, :, 0])
        J12 = np.einsum("a,ea->e", dNdxi, p[:, :, 1])
        J21 = np.einsum("a,ea->e", dNdeta, p[:, :, 0])
        J22 = np.einsum("a,ea->e", dNdeta, p[:, :, 1])
        detJ = J11 * J22 - J12 * J21
        c1 += np.sum(detJ * xq[:, 0] ** 2)
        c2 += np.sum(detJ * xq[:, 1] ** 2)
    return MomentData(c1=float(c1), c2=float(c2))
