"""Heterogeneous elasticity tensors and periodic layered profiles.

Tensors are stored as 6x6 stiffness matrices in the engineering (Voigt)
convention with strain ordering (e11, e22, e33, 2*e23, 2*e13, 2*e12), so that
the elastic energy density is e^T C e for the engineering strain vector e.
"""

import numpy as np

# (i, j) index pairs behind each Voigt slot, 0-based
_VOIGT_PAIRS = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)]

# Mandel weights turning the engineering matrix into the symmetric-matrix
# quadratic form: eigenvalues of P^T C P are the eigenvalues of the map
# E -> A E on symmetric matrices.
_MANDEL = np.diag([1.0, 1.0, 1.0, np.sqrt(2.0), np.sqrt(2.0), np.sqrt(2.0)])


class ElasticityTensor:
    """A constant rank-4 stiffness tensor with minor and major symmetries."""

    def __init__(self, voigt):
        C = np.asarray(voigt, dtype=float)
        if C.shape != (6, 6):
            raise ValueError("expected a 6x6 stiffness matrix")
        # enforce major symmetry exactly
        self.voigt = 0.5 * (C + C.T)

    def full(self):
        """Return the rank-4 array A[i,j,k,l] equivalent to the 6x6 matrix."""
        A = np.zeros((3, 3, 3, 3))
        for a, (i, j) in enumerate(_VOIGT_PAIRS):
            for b, (k, l) in enumerate(_VOIGT_PAIRS):
                v = self.voigt[a, b]
                A[i, j, k, l] = v
                A[j, i, k, l] = v
                A[i, j, l, k] = v
                A[j, i, l, k] = v
        return A

    def contract(self, E):
        """Apply the tensor to a symmetric 3x3 matrix, returning the stress."""
        E = np.asarray(E)
        e = np.array([E[0, 0], E[1, 1], E[2, 2],
                      E[1, 2] + E[2, 1], E[0, 2] + E[2, 0], E[0, 1] + E[1, 0]])
        s = self.voigt @ e
        S = np.array([[s[0], s[5], s[4]],
                      [s[5], s[1], s[3]],
                      [s[4], s[3], s[2]]])
        return S

    def __eq__(self, other):
        return isinstance(other, ElasticityTensor) and np.array_equal(self.voigt, other.voigt)


def make_isotropic(lam, mu):
    """Isotropic stiffness with Lame parameters (lam, mu).

    Contraction with a symmetric strain E gives lam*tr(E)*I + 2*mu*E.
    """
    if mu <= 0 or 3 * lam + 2 * mu <= 0:
        raise ValueError("isotropic parameters must satisfy mu > 0 and 3*lambda + 2*mu > 0")
    C = np.zeros((6, 6))
    C[:3, :3] = lam
    C[:3, :3] += 2 * mu * np.eye(3)
    C[3:, 3:] = mu * np.eye(3)
    return ElasticityTensor(C)


def check_coercivity(t):
    """Smallest eigenvalue of the stiffness as a quadratic form on symmetric matrices.

    Positive iff the tensor is coercive; the (possibly negative) value is
    returned unchanged so the caller can decide what to do with it.
    """
    mandel = _MANDEL @ t.voigt @ _MANDEL
    return float(np.linalg.eigvalsh(mandel)[0])


def check_rod_material_symmetry(t, tol=1e-12):
    """True iff the in-plane/axial shear couplings forbidden for rod problems vanish.

    The forbidden entries are A_{ijk3} and A_{i333} with i, j, k in {1, 2},
    which in Voigt indices are the rows {11, 22, 33, 12} against the columns
    {23, 13}.
    """
    rows = [0, 1, 2, 5]
    cols = [3, 4]
    block = t.voigt[np.ix_(rows, cols)]
    return bool(np.max(np.abs(block)) <= tol)


class MaterialProfile:
    """A y-periodic piecewise-constant stiffness profile on Y = [-1/2, 1/2).

    layers: list of (a, b, ElasticityTensor) with half-open intervals [a, b)
    that partition [-1/2, 1/2) exactly.
    """

    def __init__(self, layers):
        layers = sorted(layers, key=lambda t: t[0])
        if not layers:
            raise ValueError("profile needs at least one layer")
        if abs(layers[0][0] + 0.5) > 1e-14 or abs(layers[-1][1] - 0.5) > 1e-14:
            raise ValueError("layers must cover [-1/2, 1/2)")
        for (a0, b0, _), (a1, _, _) in zip(layers, layers[1:]):
            if abs(b0 - a1) > 1e-14:
                raise ValueError("layers must be contiguous and disjoint")
        self.layers = [(float(a), float(b), t) for a, b, t in layers]

    def evaluate(self, y):
        """Stiffness at y, with exact 1-periodic extension.

        A point on a layer interface resolves to the layer on its right
        (half-open convention).
        """
        yw = y - np.floor(y + 0.5)  # wrap into [-1/2, 1/2)
        for a, b, t in self.layers:
            if a - 1e-14 <= yw < b - 1e-14:
                return t
        # numerical wrap can land at 0.5 - tiny; the last layer owns it
        return self.layers[-1][2]

    @staticmethod
    def constant(tensor):
        return MaterialProfile([(-0.5, 0.5, tensor)])


def profile_from_json(obj):
    """Build a MaterialProfile from the JSON layer schema.

    Schema: {"layers": [{"from": a, "to": b, "model": {"isotropic": {"lambda":
    l, "mu": m}}}, {"from": ..., "to": ..., "model": {"voigt": [[...]]}}]}.
    """
    layers = []
    for lay in obj["layers"]:
        model = lay["model"]
        if "isotropic" in model:
            p = model["isotropic"]
            t = make_isotropic(p["lambda"], p["mu"])
        elif "voigt" in model:
            t = ElasticityTensor(model["voigt"])
        else:
            raise ValueError("unknown material model: %s" % sorted(model))
        layers.append((lay["from"], lay["to"], t))
    return MaterialProfile(layers)
