"""Momentum-associated triads, Berry potential/field and gauge-change angles.

For a unit gauge vector I the triad at k is

    v = I x k / |I x k|,   u = v x w,   w = k / |k|,

and the Berry potential is A_B = (I.k) / (|k| |I x k|) v, whose curl is the
unit monopole field -w/|k|^2. Everything is undefined on the line k || +/-I.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularGauge, ZeroWavevector
from .kgrid import DEFAULT_EPS_CONE, Field, KGrid, gradient

DEFAULT_EPS_K = 1e-6


@dataclass(frozen=True)
class BerryGauge:
    """Constant real unit vector I fixing the transverse axes of every triad."""

    I: tuple

    def __post_init__(self):
        a = np.asarray(self.I, dtype=float).reshape(3)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError(f"Berry gauge vector must be a unit vector, |I| = {np.linalg.norm(a)}")
        object.__setattr__(self, "I", tuple(a.tolist()))

    @classmethod
    def from_vector(cls, vec):
        a = np.asarray(vec, dtype=float).reshape(3)
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise ValueError("gauge vector must be nonzero")
        return cls(tuple((a / nrm).tolist()))

    @property
    def vector(self):
        return np.asarray(self.I)


def as_gauge(g):
    if isinstance(g, BerryGauge):
        return g
    return BerryGauge.from_vector(g)


@dataclass(frozen=True)
class Triad:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def varpi(self):
        """3x2 matrix with columns (u, v)."""
        return np.stack([self.u, self.v], axis=-1)


def _triad_arrays(k, I):
    """Unchecked vectorized triad; NaN where k || I or k = 0."""
    k = np.asarray(k, dtype=float)
    kmag = np.linalg.norm(k, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = k / kmag
        ixk = np.cross(I, k)
        v = ixk / np.linalg.norm(ixk, axis=-1, keepdims=True)
    u = np.cross(v, w)
    return u, v, w


def check_point(k, gauge, eps_cone=DEFAULT_EPS_CONE, eps_k=DEFAULT_EPS_K):
    k = np.asarray(k, dtype=float).reshape(3)
    kmag = np.linalg.norm(k)
    if kmag < eps_k:
        raise ZeroWavevector(f"|k| = {kmag:g} below {eps_k:g}")
    I = as_gauge(gauge).vector
    angle = np.arctan2(np.linalg.norm(np.cross(I, k)), abs(I @ k))
    if angle < eps_cone:
        raise SingularGauge(f"k is {angle:.3g} rad from the gauge axis (cone {eps_cone:g})")
    return k


def triad_at(k, gauge, eps_cone=DEFAULT_EPS_CONE, eps_k=DEFAULT_EPS_K) -> Triad:
    k = check_point(k, gauge, eps_cone, eps_k)
    u, v, w = _triad_arrays(k, as_gauge(gauge).vector)
    return Triad(u, v, w)


def varpi_at(k, gauge, **kw):
    return triad_at(k, gauge, **kw).varpi


def berry_potential(k, gauge, eps_cone=DEFAULT_EPS_CONE, eps_k=DEFAULT_EPS_K):
    k = check_point(k, gauge, eps_cone, eps_k)
    return _potential_arrays(k, as_gauge(gauge).vector)


def _potential_arrays(k, I):
    k = np.asarray(k, dtype=float)
    kmag = np.linalg.norm(k, axis=-1, keepdims=True)
    ixk = np.cross(I, k)
    s = np.linalg.norm(ixk, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return (k @ I)[..., None] / (kmag * s) * (ixk / s)


def berry_field_analytic(k, eps_k=DEFAULT_EPS_K):
    """Monopole field -k/|k|^3."""
    k = np.asarray(k, dtype=float)
    kmag = np.linalg.norm(k, axis=-1, keepdims=True)
    if np.any(kmag < eps_k):
        raise ZeroWavevector("berry field requested at |k| ~ 0")
    return -k / kmag**3


def _angle_arrays(k, I, I2):
    u, v, _ = _triad_arrays(k, I)
    u2, _, _ = _triad_arrays(k, I2)
    return np.arctan2(np.sum(u2 * v, axis=-1), np.sum(u2 * u, axis=-1))


def gauge_angle(k, gauge, gauge2, eps_cone=DEFAULT_EPS_CONE, eps_k=DEFAULT_EPS_K):
    """Angle phi in (-pi, pi] with u' = u cos phi + v sin phi at k."""
    check_point(k, gauge, eps_cone, eps_k)
    check_point(k, gauge2, eps_cone, eps_k)
    phi = float(_angle_arrays(np.asarray(k, float), as_gauge(gauge).vector, as_gauge(gauge2).vector))
    return np.pi if phi == -np.pi else phi


def rotation_sigma3(phi):
    """exp(-i sigma3 phi) = [[cos, -sin], [sin, cos]], broadcast over phi."""
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


# ---- grid-valued versions ---------------------------------------------------

def _grid_gauge(grid: KGrid, gauge):
    return as_gauge(grid.gauge if gauge is None else gauge)


def gauge_mask(grid: KGrid, gauge):
    """Grid mask recomputed for ``gauge`` (same cone angle and eps_k)."""
    return grid.with_gauge(as_gauge(gauge).I).mask


def triad_field(grid: KGrid, gauge=None):
    """(u, v, w, mask) on the grid; masked points hold zeros."""
    g = _grid_gauge(grid, gauge)
    mask = grid.mask if gauge is None else grid.mask & gauge_mask(grid, g)
    u, v, w = _triad_arrays(grid.k, g.vector)
    m = mask[..., None]
    return np.where(m, u, 0.0), np.where(m, v, 0.0), np.where(m, w, 0.0), mask


def varpi_field(grid: KGrid, gauge=None):
    u, v, _, mask = triad_field(grid, gauge)
    return np.stack([u, v], axis=-1), mask


def berry_potential_field(grid: KGrid, gauge=None) -> Field:
    g = _grid_gauge(grid, gauge)
    mask = grid.mask & gauge_mask(grid, g)
    a = _potential_arrays(grid.k, g.vector)
    return Field(grid, np.where(mask[..., None], a, 0.0), mask)


def berry_field_on_grid(grid: KGrid) -> Field:
    kmag = np.where(grid.kmag > 0, grid.kmag, 1.0)
    h = -grid.k / kmag[..., None] ** 3
    return Field(grid, np.where(grid.mask[..., None], h, 0.0))


def gauge_angle_field(grid: KGrid, gauge, gauge2) -> Field:
    """Real field phi(k) relating the triads of two gauges; masked where either is singular."""
    g1, g2 = as_gauge(gauge), as_gauge(gauge2)
    mask = grid.mask & gauge_mask(grid, g1) & gauge_mask(grid, g2)
    phi = _angle_arrays(grid.k, g1.vector, g2.vector)
    return Field(grid, np.where(mask, phi, 0.0), mask)


def phase_gradient(phi: Field) -> Field:
    """grad phi with 2*pi jumps removed along each differentiation axis."""
    comps, mask = [], phi.mask
    for axis in range(3):
        unwrapped = np.unwrap(np.where(phi.mask, phi.values, 0.0), axis=axis)
        d = gradient(phi.replace(values=unwrapped), axis)
        comps.append(d.values.real)
        mask = mask & d.mask
    return phi.replace(values=np.stack(comps, axis=-1), mask=mask)


def monopole_flux(radius=1.0, n_theta=64, n_phi=64, field=berry_field_analytic):
    """Flux of ``field`` out of the sphere |k| = radius by Gauss-Legendre x trapezoid."""
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    phis = np.arange(n_phi) * (2 * np.pi / n_phi)
    ct, ph = np.meshgrid(x, phis, indexing="ij")
    st = np.sqrt(1 - ct**2)
    normal = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1)
    integrand = np.sum(field(radius * normal) * normal, axis=-1) * radius**2
    return float(np.sum(integrand * wx[:, None]) * (2 * np.pi / n_phi))
