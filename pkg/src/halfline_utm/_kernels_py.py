"""NumPy fallback implementations of the hot quadrature kernels."""

import numpy as np

BACKEND = "numpy"

# Cap on temporary matrix size; larger requests are processed in row blocks.
_BLOCK_ELEMENTS = 4_000_000


def phase_matrix(zeta, y):
    """exp(-1j * outer(zeta, y)) as a (len(zeta), len(y)) complex matrix."""
    zeta = np.ascontiguousarray(zeta, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return np.exp(-1j * zeta[:, None] * y[None, :])


def weighted_phase_apply(zeta, y, coef):
    """out[i] = sum_j coef[j] * exp(-1j*zeta[i]*y[j]) without the full matrix."""
    zeta = np.ascontiguousarray(zeta, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.float64)
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    n = zeta.size
    out = np.empty(n, dtype=np.complex128)
    block = max(1, _BLOCK_ELEMENTS // max(y.size, 1))
    for start in range(0, n, block):
        z = zeta[start:start + block]
        out[start:start + block] = np.exp(-1j * z[:, None] * y[None, :]) @ coef
    return out
