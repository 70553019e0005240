"""Brute-force torsion-constant oracle: Prandtl stress function on a
rectangle, finite differences. Validation-only; not part of the library."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def torsion_constant(a=1.0, b=1.0, n=80):
    """Saint-Venant torsion constant of an a-by-b rectangle.

    Solves -laplace(phi) = 2 with phi = 0 on the boundary and returns
    2 * int phi. For the unit square the value is 0.140577 * a^4.
    """
    hx, hy = a / n, b / n
    nx = ny = n - 1  # interior points

    def idx(i, j):
        return i * ny + j

    main = 2.0 / hx ** 2 + 2.0 / hy ** 2
    diags = []
    rows, cols, vals = [], [], []
    for i in range(nx):
        for j in range(ny):
            k = idx(i, j)
            rows.append(k); cols.append(k); vals.append(main)
            if i > 0:
                rows.append(k); cols.append(idx(i - 1, j)); vals.append(-1.0 / hx ** 2)
            if i < nx - 1:
                rows.append(k); cols.append(idx(i + 1, j)); vals.append(-1.0 / hx ** 2)
            if j > 0:
                rows.append(k); cols.append(idx(i, j - 1)); vals.append(-1.0 / hy ** 2)
            if j < ny - 1:
                rows.append(k); cols.append(idx(i, j + 1)); vals.append(-1.0 / hy ** 2)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny))
    phi = spla.spsolve(A, np.full(nx * ny, 2.0))
    return 2.0 * float(np.sum(phi)) * hx * hy
