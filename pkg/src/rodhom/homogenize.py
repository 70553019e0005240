"""Cell problems, effective rod tensors, and first-order corrector maps.

The coefficient vector m = (m1, m2, m3, m4) collects two bending curvatures,
the torsion rate and the stretching rate. The associated strain data are the
J-matrices; their chi-scaled versions are Lambda^bend = (i chi)^2 J^bend and
Lambda^stretch = i chi J^stretch, which we realise through the diagonal
scaling G(chi) = diag((i chi)^2, (i chi)^2, i chi, i chi).
"""

from dataclasses import dataclass

import numpy as np


def j_matrix(m, xhat):
    """The symmetric 3x3 strain pattern of a Bernoulli-Navier motion with
    coefficients m at cross-section point xhat."""
    x1, x2 = xhat
    J = np.zeros((3, 3), dtype=np.result_type(np.asarray(m).dtype, float))
    J[2, 2] = -x1 * m[0] - x2 * m[1] + m[3]
    J[0, 2] = J[2, 0] = x2 * m[2] / 2.0
    J[1, 2] = J[2, 1] = -x1 * m[2] / 2.0
    return J


def j_voigt(m, coords):
    """J as engineering Voigt vectors over an (..., 3) coordinate array."""
    coords = np.asarray(coords)
    x1, x2 = coords[..., 0], coords[..., 1]
    out = np.zeros(coords.shape[:-1] + (6,), dtype=np.result_type(np.asarray(m).dtype, float))
    out[..., 2] = -x1 * m[0] - x2 * m[1] + m[3]
    out[..., 3] = -x1 * m[2]
    out[..., 4] = x2 * m[2]
    return out


def g_scaling(chi):
    """G(chi): coefficient scaling turning J into Lambda."""
    ic = 1j * chi
    return np.array([ic ** 2, ic ** 2, ic, ic])


def lambda_matrix(chi, m, xhat):
    return j_matrix(g_scaling(chi) * np.asarray(m, dtype=complex), xhat)


def lambda_voigt(chi, m, coords):
    return j_voigt(g_scaling(chi) * np.asarray(m, dtype=complex), coords)


# regimes select which coefficient slots are active
_REGIME_SLOTS = {"bend": [0, 1], "stretch": [2, 3], "rod": [0, 1, 2, 3]}


def regime_coeffs(regime, m):
    """Lift a regime coefficient vector into the 4-slot layout."""
    full = np.zeros(4, dtype=complex)
    full[_REGIME_SLOTS[regime]] = m
    return full


def solve_cell(forms, data_field, check=True):
    """Corrector u with int A(sym-grad u + data) : conj(sym-grad v) = 0 for
    all periodic v, posed on the rigid-motion quotient."""
    load = -forms.dual_S(forms.stress(data_field))
    return forms.saddle_solver().solve(load, check=check)


def cell_basis(forms):
    """Cell correctors for the four canonical J-data, cached on the forms.

    Every chi-dependent corrector is a linear combination of these (the data
    depend on chi only through G(chi)).
    """
    if not hasattr(forms, "_cell_basis"):
        sols = []
        for k in range(4):
            m = np.zeros(4)
            m[k] = 1.0
            data = j_voigt(m, forms.gauss_coords)
            sols.append(solve_cell(forms, data))
        forms._cell_basis = np.array(sols)
    return forms._cell_basis


def corrector_map_B1(forms, regime, chi):
    """Linear map m -> first-order corrector with Lambda_{chi,m} data."""
    basis = cell_basis(forms)
    slots = _REGIME_SLOTS[regime]
    g = g_scaling(chi)

    def apply(m):
        coeff = np.zeros(4, dtype=complex)
        coeff[slots] = g[slots] * np.asarray(m, dtype=complex)
        return coeff @ basis

    return apply


@dataclass
class RodTensor:
    A_rod: np.ndarray
    A_bend: np.ndarray
    A_stretch: np.ndarray
    eta: float


def rod_tensor(forms):
    """Effective 4x4 rod stiffness from the four cell problems."""
    basis = cell_basis(forms)
    data = [j_voigt(np.eye(4)[k], forms.gauss_coords) for k in range(4)]
    A = np.zeros((4, 4))
    for k in range(4):
        sigma = forms.stress(data[k] + forms.strain(basis[k]))
        for d in range(4):
            A[d, k] = forms.integrate(sigma, data[d]).real
    A = 0.5 * (A + A.T)
    eta = float(np.linalg.eigvalsh(A)[0])
    return RodTensor(A_rod=A, A_bend=A[:2, :2].copy(),
                     A_stretch=A[2:, 2:].copy(), eta=eta)


def chi_tensor(forms, chi, regime="rod", direct=True):
    """The Hermitian effective matrix at quasimomentum chi.

    With direct=True the complex cell problems with Lambda data are solved
    as such; otherwise the chi-scaling of the J-basis solutions is used
    (the two agree to solver precision, which tests assert).
    """
    slots = _REGIME_SLOTS[regime]
    n = len(slots)
    if not direct:
        G = np.diag(g_scaling(chi)[slots])
        Afull = rod_tensor(forms).A_rod[np.ix_(slots, slots)]
        return G.conj().T @ Afull @ G
    A = np.zeros((n, n), dtype=complex)
    datas = []
    sols = []
    for k in slots:
        m = np.zeros(4)
        m[k] = 1.0
        data = lambda_voigt(chi, m, forms.gauss_coords)
        datas.append(data)
        sols.append(solve_cell(forms, data))
    for kk in range(n):
        sigma = forms.stress(datas[kk] + forms.strain(sols[kk]))
        for dd in range(n):
            A[dd, kk] = forms.integrate(sigma, datas[dd])
    return 0.5 * (A + A.conj().T)
