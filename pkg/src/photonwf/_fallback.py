"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

# number of k-points per block in fourier_sum; bounds the phase matrix size
_BLOCK = 4096


def fourier_sum(kvec, omega, amps, points, t, nthreads=1):
    """out[p, c] = sum_j amps[j, c] * exp(i (k_j . X_p - omega_j t))."""
    kvec = np.ascontiguousarray(kvec, dtype=np.float64)
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    points = np.ascontiguousarray(points, dtype=np.float64)
    out = np.zeros((points.shape[0], amps.shape[1]), dtype=np.complex128)
    for start in range(0, kvec.shape[0], _BLOCK):
        sl = slice(start, start + _BLOCK)
        phase = points @ kvec[sl].T - omega[sl] * t
        out += np.exp(1j * phase) @ amps[sl]
    return out


def stencil_derivative(f, valid, h, nthreads=1):
    """First derivative along the last axis; see ``_kernels.stencil_derivative``."""
    f = np.asarray(f, dtype=np.complex128)
    v = np.asarray(valid, dtype=bool)
    n = f.shape[-1]
    d = np.zeros_like(f)
    ok = np.zeros(f.shape, dtype=bool)

    inner = v[:, :-4] & v[:, 1:-3] & v[:, 2:-2] & v[:, 3:-1] & v[:, 4:]
    d[:, 2:-2] = (f[:, :-4] - 8.0 * f[:, 1:-3] + 8.0 * f[:, 3:-1] - f[:, 4:]) / (12.0 * h)
    ok[:, 2:-2] = inner
    for i in range(2):
        ok[:, i] = v[:, i] & v[:, i + 1] & v[:, i + 2]
        d[:, i] = (-3.0 * f[:, i] + 4.0 * f[:, i + 1] - f[:, i + 2]) / (2.0 * h)
        j = n - 1 - i
        ok[:, j] = v[:, j] & v[:, j - 1] & v[:, j - 2]
        d[:, j] = (3.0 * f[:, j] - 4.0 * f[:, j - 1] + f[:, j - 2]) / (2.0 * h)
    d[~ok] = 0.0
    return d, ok.astype(np.uint8)
