"""FE machinery on the periodic product mesh.

Vector Q1 elements on quad-times-segment product cells, 2x2x2 Gauss
quadrature, periodic identification of the y = 1/2 plane with y = -1/2. The
fiber stiffness splits as K(chi) = K_ss + chi*K_sx + chi^2*K_xx, so sweeps in
chi reuse one assembly.

Strains are engineering Voigt vectors (e11, e22, e33, 2e23, 2e13, 2e12); the
shifted part of the strain is i*chi*B_x u with B_x carrying (u3, u2, u1) into
slots (e33, 2e23, 2e13).
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularSystem(Exception):
    pass


class IncompatibleLoad(Exception):
    pass


class NoConvergence(Exception):
    pass


class PairingMismatch(Exception):
    pass


_GAUSS_1D = np.array([-1.0, 1.0]) / np.sqrt(3.0)


def _reference_data(hx, hy, hz):
    """Shape values, physical gradients, B-matrices and weights at the 8 Gauss
    points of a brick with edge lengths (hx, hy, hz)."""
    pts = []
    for gz in _GAUSS_1D:
        for gy in _GAUSS_1D:
            for gx in _GAUSS_1D:
                pts.append((gx, gy, gz))
    pts = np.array(pts)  # (8, 3)

    # local nodes: bottom quad ccw then top quad, reference coords in {-1,1}^3
    loc = np.array([[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
                    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]], dtype=float)

    n_g = len(pts)
    N = np.zeros((n_g, 8))
    G = np.zeros((n_g, 3, 8))  # physical gradients d/dx1, d/dx2, d/dy
    scale = np.array([2.0 / hx, 2.0 / hy, 2.0 / hz])
    for g, (x, y, z) in enumerate(pts):
        for a in range(8):
            sx, sy, sz = loc[a]
            N[g, a] = (1 + sx * x) * (1 + sy * y) * (1 + sz * z) / 8.0
            G[g, 0, a] = sx * (1 + sy * y) * (1 + sz * z) / 8.0 * scale[0]
            G[g, 1, a] = (1 + sx * x) * sy * (1 + sz * z) / 8.0 * scale[1]
            G[g, 2, a] = (1 + sx * x) * (1 + sy * y) * sz / 8.0 * scale[2]

    Bs = np.zeros((n_g, 6, 24))
    Bx = np.zeros((n_g, 6, 24))
    for g in range(n_g):
        for a in range(8):
            d1, d2, dy = G[g, :, a]
            na = N[g, a]
            c0, c1, c2 = 3 * a, 3 * a + 1, 3 * a + 2
            Bs[g, 0, c0] = d1
            Bs[g, 1, c1] = d2
            Bs[g, 2, c2] = dy
            Bs[g, 3, c1] = dy
            Bs[g, 3, c2] = d2
            Bs[g, 4, c0] = dy
            Bs[g, 4, c2] = d1
            Bs[g, 5, c0] = d2
            Bs[g, 5, c1] = d1
            Bx[g, 2, c2] = na
            Bx[g, 3, c1] = na
            Bx[g, 4, c0] = na
    w = hx * hy * hz / 8.0
    return pts, N, G, Bs, Bx, w


class AssembledForms:
    """Assembled fiber forms plus the Gauss-point machinery the corrector
    chains are built from."""

    def __init__(self, profile, mesh):
        self.profile = profile
        self.mesh = mesh
        cross = mesh.cross
        n_y = mesh.n_y
        hz = 1.0 / n_y

        # uniform rectangle cross mesh: all elements share one geometry
        e0 = cross.nodes[cross.elements[0]]
        hx = float(np.max(e0[:, 0]) - np.min(e0[:, 0]))
        hy = float(np.max(e0[:, 1]) - np.min(e0[:, 1]))
        self.pts_ref, self.N, self.G, self.Bs, self.Bx, self.w = _reference_data(hx, hy, hz)

        n_ec = len(cross.elements)
        self.n_elem = n_ec * n_y

        # element connectivity: element (q, e) has bottom quad at y-level q
        nodes = np.zeros((self.n_elem, 8), dtype=int)
        for q in range(n_y):
            top = (q + 1) % n_y
            base = q * n_ec
            nodes[base:base + n_ec, :4] = cross.elements + q * cross.n_nodes
            nodes[base:base + n_ec, 4:] = cross.elements + top * cross.n_nodes
        self.elem_nodes = nodes
        self.elem_dofs = (3 * nodes[:, :, None] + np.arange(3)).reshape(self.n_elem, 24)
        self.elem_ylayer = np.repeat(np.arange(n_y), n_ec)

        # physical Gauss coordinates (x1, x2, y) per element
        coords = np.zeros((self.n_elem, 8, 3))
        cx = cross.nodes[nodes[:, :4] % cross.n_nodes]  # using bottom quad cross nodes
        # cross coords per gauss point from bilinear shapes in (x1, x2)
        N2 = self.N[:, :4] + self.N[:, 4:]  # collapse the y direction
        coords[:, :, :2] = np.einsum("ga,eai->egi", N2, cx)
        ybot = mesh.y_nodes[self.elem_ylayer]
        coords[:, :, 2] = ybot[:, None] + (self.pts_ref[:, 2] + 1) / 2.0 * hz
        self.gauss_coords = coords

        # stiffness matrix at Gauss points, per y-layer (no x-hat dependence)
        D = np.zeros((n_y, 8, 6, 6))
        for q in range(n_y):
            for g in range(8):
                yq = mesh.y_nodes[q] + (self.pts_ref[g, 2] + 1) / 2.0 * hz
                D[q, g] = profile.evaluate(yq).voigt
        self.D = D

        self._assemble_matrices()
        self._build_constraints()
        self._saddle = None

    # -- assembly ---------------------------------------------------------

    def _assemble_matrices(self):
        mesh = self.mesh
        n_y = mesh.n_y
        n_ec = len(mesh.cross.elements)
        n_dof = mesh.n_dof
        w = self.w

        Me = np.zeros((24, 24))
        for g in range(8):
            for c in range(3):
                Me[c::3, c::3] += w * np.outer(self.N[g], self.N[g])

        rows_all, cols_all = [], []
        dss, dsx, dxx, dm = [], [], [], []
        for q in range(n_y):
            Kss = np.zeros((24, 24))
            Kxx = np.zeros((24, 24))
            Ksx = np.zeros((24, 24), dtype=complex)
            for g in range(8):
                Dg = self.D[q, g]
                Bsg, Bxg = self.Bs[g], self.Bx[g]
                Kss += w * Bsg.T @ Dg @ Bsg
                Kxx += w * Bxg.T @ Dg @ Bxg
                Ksx += 1j * w * (Bsg.T @ Dg @ Bxg - Bxg.T @ Dg @ Bsg)
            dofs = self.elem_dofs[q * n_ec:(q + 1) * n_ec]
            r = np.repeat(dofs, 24, axis=1).ravel()
            c = np.tile(dofs, (1, 24)).ravel()
            rows_all.append(r)
            cols_all.append(c)
            dss.append(np.tile(Kss.ravel(), n_ec))
            dsx.append(np.tile(Ksx.ravel(), n_ec))
            dxx.append(np.tile(Kxx.ravel(), n_ec))
            dm.append(np.tile(Me.ravel(), n_ec))
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        shape = (n_dof, n_dof)
        self.K_ss = sp.coo_matrix((np.concatenate(dss), (rows, cols)), shape).tocsr()
        self.K_sx = sp.coo_matrix((np.concatenate(dsx), (rows, cols)), shape).tocsr()
        self.K_xx = sp.coo_matrix((np.concatenate(dxx), (rows, cols)), shape).tocsr()
        self.M = sp.coo_matrix((np.concatenate(dm), (rows, cols)), shape).tocsr()

    def K(self, chi):
        if chi == 0:
            return self.K_ss.astype(complex)
        return (self.K_ss + chi * self.K_sx + chi ** 2 * self.K_xx).tocsr()

    def _build_constraints(self):
        coords = self.mesh.node_coords()
        n = self.mesh.n_nodes
        basis = np.zeros((4, 3 * n))
        basis[0, 0::3] = 1.0
        basis[1, 1::3] = 1.0
        basis[2, 2::3] = 1.0
        basis[3, 0::3] = coords[:, 1]
        basis[3, 1::3] = -coords[:, 0]
        self.kernel_fields = basis        # rigid motions of the cross-section motion space
        self.R = np.array([self.M @ b for b in basis])  # constraint rows (M-weighted)

    # -- Gauss-point field algebra ---------------------------------------

    def gather(self, u):
        return u[self.elem_dofs]

    def strain(self, u):
        """sym-grad of u as engineering Voigt vectors at Gauss points,
        shape (n_elem, 8, 6)."""
        return np.einsum("gcd,ed->egc", self.Bs, self.gather(u))

    def xstrain(self, u):
        """B_x u at Gauss points; multiply by i*chi to get the shifted strain."""
        return np.einsum("gcd,ed->egc", self.Bx, self.gather(u))

    def values(self, u):
        """Field values at Gauss points, shape (n_elem, 8, 3)."""
        ue = self.gather(u).reshape(self.n_elem, 8, 3)
        return np.einsum("ga,eac->egc", self.N, ue)

    def gradients(self, u):
        """Full gradients at Gauss points, shape (n_elem, 8, 3 comps, 3 dirs)."""
        ue = self.gather(u).reshape(self.n_elem, 8, 3)
        return np.einsum("gda,eac->egcd", self.G, ue)

    def stress(self, field):
        """Apply the stiffness to a Voigt strain field at Gauss points."""
        return np.einsum("egcd,egd->egc", self.D[self.elem_ylayer], field)

    def dual_S(self, field):
        """Dual vector of v -> int field : conj(sym-grad v)."""
        contrib = self.w * np.einsum("gcd,egc->ed", self.Bs, field)
        b = np.zeros(self.mesh.n_dof, dtype=complex)
        np.add.at(b, self.elem_dofs, contrib)
        return b

    def dual_X(self, field, chi):
        """Dual vector of v -> int field : conj(i chi X v)."""
        contrib = (-1j * chi) * self.w * np.einsum("gcd,egc->ed", self.Bx, field)
        b = np.zeros(self.mesh.n_dof, dtype=complex)
        np.add.at(b, self.elem_dofs, contrib)
        return b

    def integrate(self, field, test):
        """int field : conj(test) over the product domain, both given as
        Gauss-point Voigt arrays."""
        return self.w * np.einsum("egc,egc->", field, np.conj(test))

    def integrate_values(self, vals):
        """Componentwise integral of a Gauss-point value field (n_elem, 8, 3)."""
        return self.w * np.einsum("egc->c", vals)

    def interpolate(self, fn):
        """Nodal interpolation of fn(x1, x2, y) -> 3-vector (vectorised over
        an (n, 3) coordinate array)."""
        return np.asarray(fn(self.mesh.node_coords())).reshape(-1)

    # -- norms ------------------------------------------------------------

    def norm_sq_l2(self, u, component=None):
        vals = self.values(u)
        if component is not None:
            vals = vals[:, :, component:component + 1]
        return float(self.w * np.sum(np.abs(vals) ** 2))

    def norm_sq_h1(self, u, component=None, chi=None, eps=None):
        """Squared H1 norm by Gauss quadrature.

        With chi/eps given, the longitudinal derivative is measured in the
        eps-scaled fiber metric eps^-2 |d_y u + i chi u|^2; otherwise the plain
        gradient on the product domain is used.
        """
        vals = self.values(u)
        grads = self.gradients(u)
        if component is not None:
            vals = vals[:, :, component:component + 1]
            grads = grads[:, :, component:component + 1, :]
        out = np.sum(np.abs(vals) ** 2) + np.sum(np.abs(grads[..., 0]) ** 2) \
            + np.sum(np.abs(grads[..., 1]) ** 2)
        if chi is None:
            out += np.sum(np.abs(grads[..., 2]) ** 2)
        else:
            out += np.sum(np.abs(grads[..., 2] + 1j * chi * vals) ** 2) / eps ** 2
        return float(self.w * out)

    # -- solvers ----------------------------------------------------------

    def kernel_residuals(self, load):
        """|<rigid motion, load>| for the four rigid-motion fields."""
        return np.abs(self.kernel_fields @ np.asarray(load, dtype=complex))

    def saddle_solver(self):
        if self._saddle is None:
            self._saddle = SaddleSolver(self)
        return self._saddle


class SaddleSolver:
    """One sparse LU of [[K_ss, R^H], [R, 0]]; solves every constrained cell
    and corrector problem (the left-hand side is chi-independent).

    For t*K_ss the solution is u(1)/t, so a single factorisation serves all
    scalings.
    """

    def __init__(self, forms, tol=1e-8):
        self.forms = forms
        self.tol = tol
        R = sp.csr_matrix(forms.R.astype(complex))
        n = forms.mesh.n_dof
        A = sp.bmat([[forms.K_ss.astype(complex), R.conj().T],
                     [R, None]], format="csc")
        try:
            self.lu = spla.splu(A)
        except RuntimeError as exc:
            raise SingularSystem(str(exc))
        self.n = n
        self.last_residual = 0.0

    def solve(self, load, t=1.0, check=True):
        load = np.asarray(load, dtype=complex)
        res = self.forms.kernel_residuals(load)
        scale = np.linalg.norm(load)
        self.last_residual = float(np.max(res) / scale) if scale > 0 else 0.0
        if check and scale > 0 and np.max(res) > self.tol * scale:
            raise IncompatibleLoad(
                "load has kernel residual %.3e relative" % (np.max(res) / scale))
        rhs = np.concatenate([load, np.zeros(4, dtype=complex)])
        sol = self.lu.solve(rhs)
        return sol[:self.n] / t


def assemble(profile, mesh):
    """Assemble the fiber forms for a profile on a product mesh."""
    return AssembledForms(profile, mesh)


def solve_resolvent(forms, chi, t, load_field):
    """Solve (t K(chi) + M) u = M f. Strictly positive definite, no
    constraints needed."""
    A = (t * forms.K(chi) + forms.M.astype(complex)).tocsc()
    b = forms.M @ np.asarray(load_field, dtype=complex)
    try:
        return spla.splu(A).solve(b)
    except RuntimeError as exc:
        raise SingularSystem(str(exc))


class ResolventSolver:
    """Cached factorisation of (t K(chi) + M) for repeated loads."""

    def __init__(self, forms, chi, t):
        self.forms = forms
        A = (t * forms.K(chi) + forms.M.astype(complex)).tocsc()
        self.lu = spla.splu(A)

    def solve(self, load_field):
        return self.lu.solve(self.forms.M @ np.asarray(load_field, dtype=complex))


def smallest_eigs(forms, chi, k, tol=0):
    """k smallest eigenpairs of K(chi) u = lambda M u via shift-invert."""
    K = forms.K(chi)
    scale = float(np.abs(K.diagonal()).mean())
    sigma = -1e-8 * scale
    # fixed start vector: ARPACK's default is random, which makes the
    # achieved residuals (and bit-stability) run-dependent
    v0 = np.ones(forms.mesh.n_dof)
    try:
        vals, vecs = spla.eigsh(K, k=k, M=forms.M.astype(complex), sigma=sigma,
                                which="LM", tol=tol, v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise NoConvergence(str(exc))
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def symmetry_permutation(mesh, pairing):
    """Lift a cross-section node pairing to a product-mesh dof permutation."""
    cross = mesh.cross
    if np.max(np.abs(cross.nodes[pairing] + cross.nodes)) > 1e-8:
        raise PairingMismatch("pairing does not map nodes to their negatives")
    n_c = cross.n_nodes
    perm_nodes = np.zeros(mesh.n_nodes, dtype=int)
    for q in range(mesh.n_y):
        perm_nodes[q * n_c:(q + 1) * n_c] = q * n_c + pairing
    return perm_nodes


def project_symmetry(u, which, mesh, pairing):
    """Project onto the bend (u-hat even, u3 odd) or stretch (complement)
    parity class under x-hat -> -x-hat."""
    perm_nodes = symmetry_permutation(mesh, pairing)
    v = np.asarray(u).reshape(mesh.n_nodes, 3)
    vr = v[perm_nodes]  # field values at the mirrored node
    even = 0.5 * (v + vr)
    odd = 0.5 * (v - vr)
    out = np.zeros_like(v)
    if which == "bend":
        out[:, :2] = even[:, :2]
        out[:, 2] = odd[:, 2]
    elif which == "stretch":
        out[:, :2] = odd[:, :2]
        out[:, 2] = even[:, 2]
    else:
        raise ValueError("which must be 'bend' or 'stretch'")
    return out.reshape(-1)
