"""Position-space synthesis by direct quadrature over the k-grid.

    E(X, t) = (2 pi)^-3/2 sum_k sqrt(hbar w / 2 eps0) f e^{i(k.X - w t)} dk^3 + c.c.
    H(X, t) = same with sqrt(hbar w / 2 mu0) w x f
    A(X, t) = (2 pi)^-3/2 / i  sum_k sqrt(hbar / 2 eps0 w) f e^{...} dk^3 + c.c.
    F(X, t) = (2 pi)^-3/2 sum_k f e^{...} dk^3          (laboratory amplitude)
    Ft(xi, t) = (2 pi)^-3/2 sum_k ft e^{...} dk^3       (own-frame amplitude)

The k-sums run through ``backend.fourier_sum`` (compiled or numpy).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .gauge import varpi_field
from .wavefunction import TwoComponentWavefunction, VectorWavefunction

NORM = (2.0 * np.pi) ** -1.5


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants entering the field prefactors (natural units by default)."""

    hbar: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    c: float = 1.0


NATURAL = UnitSystem()
SI = UnitSystem(hbar=1.054571817e-34, eps0=8.8541878128e-12, mu0=1.25663706212e-6,
                c=299792458.0)


@dataclass(frozen=True)
class SpatialSampling:
    points: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] == 0:
            raise ValueError("sampling needs a nonempty (P, 3) array of points")
        if not np.all(np.isfinite(p)):
            raise ValueError("sampling points must be finite")
        object.__setattr__(self, "points", p)

    @classmethod
    def lattice(cls, center, half_width, n, time=0.0):
        """Regular lattice; also returns the cell volume."""
        center = np.broadcast_to(np.asarray(center, float), (3,))
        hw = np.broadcast_to(np.asarray(half_width, float), (3,))
        n = np.broadcast_to(np.asarray(n, int), (3,))
        axes = [np.linspace(c - w, c + w, m) if m > 1 else np.array([c])
                for c, w, m in zip(center, hw, n)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
        cell = np.prod([2 * w / (m - 1) for w, m in zip(hw, n) if m > 1])
        return cls(pts, time), float(cell)

    @classmethod
    def plane(cls, origin, e1, e2, extent1, extent2, n1, n2, time=0.0):
        """Rectangular patch origin + a e1 + b e2, |a| <= extent1, |b| <= extent2."""
        a = np.linspace(-extent1, extent1, n1)
        b = np.linspace(-extent2, extent2, n2)
        A, B = np.meshgrid(a, b, indexing="ij")
        pts = (np.asarray(origin, float) + A[..., None] * np.asarray(e1, float)
               + B[..., None] * np.asarray(e2, float))
        return cls(pts.reshape(-1, 3), time)

    @classmethod
    def line(cls, origin, direction, s_min, s_max, n, time=0.0):
        d = np.asarray(direction, float)
        d = d / np.linalg.norm(d)
        s = np.linspace(s_min, s_max, n)
        return cls(np.asarray(origin, float) + s[:, None] * d, time)


@dataclass
class FieldSnapshot:
    points: np.ndarray
    time: float
    E: np.ndarray
    H: np.ndarray
    A: np.ndarray
    F: np.ndarray

    def intensity(self):
        return np.sum(np.abs(self.F) ** 2, axis=-1)

    def to_csv(self, path):
        from .io import write_csv

        cols = ["x", "y", "z", "Ex", "Ey", "Ez", "Hx", "Hy", "Hz", "Ax", "Ay", "Az", "F2"]
        rows = np.column_stack([self.points, self.E, self.H, self.A, self.intensity()])
        write_csv(path, cols, rows)


def _ksum(state, amps, sampling: SpatialSampling, backend_name=None):
    """(2 pi)^-3/2 dk^3 sum over usable k of amps e^{i(k.X - w (t - t_state))}."""
    grid = state.grid
    m = state.mask
    kvec = grid.k[m]
    omega = grid.kmag[m]
    a = amps[m].reshape(kvec.shape[0], -1)
    out = backend.fourier_sum(kvec, omega, a, sampling.points, sampling.time - state.time,
                              backend=backend_name)
    return out * (NORM * grid.weight)


def vector_F(f: VectorWavefunction, sampling, backend_name=None):
    return _ksum(f, f.values, sampling, backend_name)


def position_amplitude(ft: TwoComponentWavefunction, sampling, backend_name=None):
    return _ksum(ft, ft.values, sampling, backend_name)


def synthesize_EH(f: VectorWavefunction, sampling, units=NATURAL, backend_name=None):
    grid = f.grid
    omega = units.c * grid.kmag
    w = grid.k / np.where(grid.kmag > 0, grid.kmag, 1.0)[..., None]
    ae = np.sqrt(units.hbar * omega / (2 * units.eps0))[..., None] * f.values
    ah = np.sqrt(units.hbar * omega / (2 * units.mu0))[..., None] * np.cross(w, f.values)
    both = _ksum(f, np.concatenate([ae, ah], axis=-1), _scaled(sampling, units), backend_name)
    return 2 * both[:, :3].real, 2 * both[:, 3:].real


def synthesize_A(f: VectorWavefunction, sampling, units=NATURAL, backend_name=None):
    grid = f.grid
    omega = units.c * np.where(grid.kmag > 0, grid.kmag, 1.0)
    amps = np.sqrt(units.hbar / (2 * units.eps0 * omega))[..., None] * f.values / 1j
    return 2 * _ksum(f, amps, _scaled(sampling, units), backend_name).real


def _scaled(sampling, units):
    # phases use omega t = c |k| t; fold c into time
    if units.c == 1.0:
        return sampling
    return SpatialSampling(sampling.points, sampling.time * units.c)


def snapshot(f: VectorWavefunction, sampling, units=NATURAL, backend_name=None):
    E, H = synthesize_EH(f, sampling, units, backend_name)
    A = synthesize_A(f, sampling, units, backend_name)
    F = vector_F(f, sampling, backend_name)
    return FieldSnapshot(sampling.points, sampling.time, E, H, A, F)


# ---- derived checks ---------------------------------------------------------

def _stencil_points(points, delta):
    offs = np.array([-2, -1, 1, 2], dtype=float) * delta
    pts = []
    for axis in range(3):
        for o in offs:
            p = points.copy()
            p[:, axis] += o
            pts.append(p)
    return np.concatenate(pts, axis=0)


def divergence(fn, sampling, delta):
    """Fourth-order central-difference divergence of a synthesized vector field.

    ``fn(sampling) -> (P, 3)`` real array. Returns ``(div, scale)`` with
    ``scale`` the Frobenius norm of the full Jacobian at each point, the
    natural yardstick for a relative divergence.
    """
    P = sampling.points.shape[0]
    vals = fn(SpatialSampling(_stencil_points(sampling.points, delta), sampling.time))
    vals = vals.reshape(3, 4, P, 3)
    w = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * delta)
    jac = np.einsum("s,aspc->pac", w, vals)
    return np.trace(jac, axis1=1, axis2=2), np.sqrt(np.sum(jac**2, axis=(1, 2)))


def time_derivative(fn, sampling, dt):
    """Fourth-order central difference in time of ``fn(sampling)``."""
    t = sampling.time
    vals = [fn(SpatialSampling(sampling.points, t + s * dt)) for s in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * dt)


def parseval(values, cell):
    """sum |F|^2 * cell volume."""
    return float(np.sum(np.abs(values) ** 2) * cell)


def pi_kernel(grid, gauge, separations, mask=None, backend_name=None):
    """Pi(d) = (2 pi)^-3 sum_k varpi e^{i k.d} dk^3 at separations d, shape (P, 3, 2)."""
    varpi, m = varpi_field(grid, gauge)
    if mask is not None:
        m = m & mask
    amps = varpi[m].reshape(-1, 6).astype(complex)
    out = backend.fourier_sum(grid.k[m], np.zeros(amps.shape[0]), amps,
                              np.asarray(separations, float), 0.0, backend=backend_name)
    return out.reshape(-1, 3, 2) * (grid.weight / (2 * np.pi) ** 3)


def F_from_own_frame(ft: TwoComponentWavefunction, X, xi_points, xi_cell, backend_name=None):
    """F(X) = sum_xi Pi(X - xi) Ft(xi) dxi^3 by direct double quadrature."""
    Ft = position_amplitude(ft, SpatialSampling(xi_points, ft.time), backend_name)
    X = np.atleast_2d(np.asarray(X, float))
    out = np.zeros((X.shape[0], 3), dtype=complex)
    for p, x in enumerate(X):
        pi = pi_kernel(ft.grid, ft.gauge, x - xi_points, ft.mask, backend_name)
        out[p] = np.einsum("qia,qa->i", pi, Ft) * xi_cell
    return out


def dual_lattice(grid, time=0.0):
    """Position lattice conjugate to the k-grid: one full period 2 pi / dk per axis.

    On it the discrete transform is unitary, so Parseval and the Pi-kernel
    composition are exact up to rounding.
    """
    dk = grid.spacing
    n = np.asarray(grid.n)
    dx = 2 * np.pi / (n * dk)
    axes = [np.arange(m) * d - (m // 2) * d for m, d in zip(n, dx)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
    return SpatialSampling(pts, time), float(np.prod(dx))


def envelope_centroid(sampling, values, direction):
    """Intensity-weighted mean of the coordinate along ``direction``."""
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    inten = np.sum(np.abs(values) ** 2, axis=-1) if values.ndim > 1 else np.abs(values) ** 2
    return float(np.sum(inten * (sampling.points @ d)) / np.sum(inten))
