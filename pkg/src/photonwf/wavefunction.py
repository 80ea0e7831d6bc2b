"""Vector and two-component k-space wavefunctions and the maps between them.

A vector wavefunction f(k) is transverse (f . w = 0). In a Berry gauge I it
is carried by the unconstrained spinor ft = varpi^T f, with varpi = (u v)
the 3x2 matrix of transverse triad axes; f = varpi ft recovers it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PacketTouchesBoundary, PacketTouchesSingularCone, TransversalityViolated
from .gauge import (
    BerryGauge,
    as_gauge,
    check_point,
    gauge_angle_field,
    gauge_mask,
    rotation_sigma3,
    triad_field,
    varpi_field,
)
from .kgrid import Field, KGrid, inner

TRANSVERSE_TOL = 1e-10
PACKET_TAIL = 1e-8


@dataclass(frozen=True, eq=False)
class VectorWavefunction(Field):
    """Transverse 3-component amplitude f(k) at ``time``."""

    time: float = 0.0


@dataclass(frozen=True, eq=False)
class TwoComponentWavefunction(Field):
    """Spinor amplitude ft(k) = (f_u, f_v) in Berry gauge ``gauge``."""

    time: float = 0.0
    gauge: BerryGauge = None

    def __post_init__(self):
        g = as_gauge(self.grid.gauge if self.gauge is None else self.gauge)
        object.__setattr__(self, "gauge", g)
        if self.mask is None:
            mask = self.grid.mask
            if g.I != tuple(self.grid.gauge):
                mask = mask & gauge_mask(self.grid, g)
            object.__setattr__(self, "mask", mask)
        super().__post_init__()


def alpha(sigma):
    """Helicity eigenvector (1, i sigma)/sqrt(2) of sigma3."""
    if sigma not in (1, -1):
        raise ValueError(f"helicity must be +1 or -1, got {sigma}")
    return np.array([1.0, 1j * sigma]) / np.sqrt(2.0)


def norm(state: Field) -> float:
    return float(np.real(inner(state, state)))


def normalized(state: Field):
    return state.replace(values=state.values / np.sqrt(norm(state)))


def transversality_residual(f: VectorWavefunction) -> float:
    """max |f^dag w| / max |f| over usable points."""
    _, _, w, mask = triad_field(f.grid)
    m = mask & f.mask
    fmax = np.abs(f.values[m]).max(initial=0.0)
    if fmax == 0:
        return 0.0
    return float(np.abs(np.sum(np.conj(f.values) * w, axis=-1))[m].max() / fmax)


def project(f: VectorWavefunction, gauge=None) -> TwoComponentWavefunction:
    """ft = varpi^dag f in ``gauge`` (default: the grid's gauge)."""
    res = transversality_residual(f)
    if res > TRANSVERSE_TOL:
        raise TransversalityViolated(f"max |f.w| / max |f| = {res:.3g}")
    g = as_gauge(f.grid.gauge if gauge is None else gauge)
    varpi, mask = varpi_field(f.grid, g)
    mask = mask & f.mask
    ft = np.einsum("...ia,...i->...a", varpi, f.values)
    ft[~mask] = 0.0
    return TwoComponentWavefunction(f.grid, ft, mask, time=f.time, gauge=g)


def embed(ft: TwoComponentWavefunction) -> VectorWavefunction:
    """f = varpi ft."""
    varpi, mask = varpi_field(ft.grid, ft.gauge)
    mask = mask & ft.mask
    f = np.einsum("...ia,...a->...i", varpi, ft.values)
    f[~mask] = 0.0
    return VectorWavefunction(ft.grid, f, mask, time=ft.time)


def gauge_transform(ft: TwoComponentWavefunction, gauge2) -> TwoComponentWavefunction:
    """Re-express ``ft`` in ``gauge2``: ft' = exp(i sigma3 phi) ft."""
    g2 = as_gauge(gauge2)
    phi = gauge_angle_field(ft.grid, ft.gauge, g2)
    mask = ft.mask & phi.mask
    rot = rotation_sigma3(-phi.values)  # exp(+i sigma3 phi)
    out = np.einsum("...ab,...b->...a", rot, ft.values)
    out[~mask] = 0.0
    return TwoComponentWavefunction(ft.grid, out, mask, time=ft.time, gauge=g2)


def evolve(state: Field, dt: float):
    """Free evolution: multiply by exp(-i |k| dt) (c = 1)."""
    phase = np.exp(-1j * state.grid.kmag * dt)
    vals = state.values * phase.reshape(phase.shape + (1,) * (state.values.ndim - 3))
    if hasattr(state, "time"):
        return state.replace(values=vals, time=state.time + dt)
    return state.replace(values=vals)


def rotate_about_wavevector(f: VectorWavefunction, phi) -> VectorWavefunction:
    """f' = exp(-i (Sigma.w) phi) f, a right-handed rotation of f by phi about w."""
    phi = phi.values if isinstance(phi, Field) else phi
    phi = np.broadcast_to(np.asarray(phi, dtype=float), f.grid.shape)
    _, _, w, mask = triad_field(f.grid)
    c, s = np.cos(phi)[..., None], np.sin(phi)[..., None]
    wdotf = np.sum(w * f.values, axis=-1, keepdims=True)
    out = f.values * c + np.cross(w, f.values) * s + w * wdotf * (1 - c)
    return f.replace(values=out, mask=f.mask & mask)


def helicity_state(profile: Field, sigma, gauge=None, time=0.0) -> TwoComponentWavefunction:
    """ft = alpha_sigma * profile for a scalar profile field."""
    vals = profile.values[..., None] * alpha(sigma)
    return TwoComponentWavefunction(profile.grid, vals, None, time=time, gauge=gauge)


def gaussian_profile(grid: KGrid, k0, widths):
    """exp(-sum_i (k_i - k0_i)^2 / (2 s_i^2)), unnormalized."""
    s = np.broadcast_to(np.asarray(widths, dtype=float), (3,))
    d = (grid.k - np.asarray(k0, dtype=float)) / s
    return np.exp(-0.5 * np.sum(d * d, axis=-1))


def _boundary_max(a):
    faces = [a[0], a[-1], a[:, 0], a[:, -1], a[:, :, 0], a[:, :, -1]]
    return max(float(np.abs(f).max()) for f in faces)


def make_gaussian_packet(grid: KGrid, k0, divergence, sigma, gauge=None,
                         tail=PACKET_TAIL) -> TwoComponentWavefunction:
    """Normalized helicity eigenpacket alpha_sigma * N exp(-|k-k0|^2 / 2s^2).

    ``divergence`` is the angular width in radians (scalar or per axis);
    the k-space width is ``s = divergence * |k0|``. The packet must fall
    below ``tail`` times its peak on the box faces and on masked points.
    """
    g = as_gauge(grid.gauge if gauge is None else gauge)
    k0 = check_point(k0, g, grid.eps_cone, grid.eps_k)
    s = np.asarray(divergence, dtype=float) * np.linalg.norm(k0)
    prof = gaussian_profile(grid, k0, s)
    peak = prof.max()
    if _boundary_max(prof) > tail * peak:
        raise PacketTouchesBoundary(
            f"packet reaches {_boundary_max(prof) / peak:.2e} of its peak on the box faces"
        )
    mask = grid.mask & gauge_mask(grid, g)
    if np.any(~mask) and prof[~mask].max() > tail * peak:
        raise PacketTouchesSingularCone(
            f"packet reaches {prof[~mask].max() / peak:.2e} of its peak on masked points"
        )
    state = helicity_state(Field(grid, prof, mask), sigma, gauge=g)
    return normalized(state)


def random_spinor(rng):
    """Haar-random unit spinor."""
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


def random_smooth_state(grid: KGrid, rng, gauge=None, width_range=(0.125, 0.25),
                        center_range=0.25, phase_scale=0.3) -> TwoComponentWavefunction:
    """Random Gaussian spinor packet with a low-order polynomial phase.

    Widths are drawn per axis as fractions ``width_range`` of the box edge,
    the center uniformly within ``center_range`` of the half width around
    the box center, and the phase has linear and quadratic terms of
    magnitude ~``phase_scale`` rad per packet width.
    """
    g = as_gauge(grid.gauge if gauge is None else gauge)
    edge = 2.0 * np.asarray(grid.half_width)
    hw = np.asarray(grid.half_width)
    s = rng.uniform(*width_range, size=3) * edge
    c = np.asarray(grid.center) + rng.uniform(-center_range, center_range, size=3) * hw
    d = (grid.k - c) / s
    lin = rng.uniform(-1, 1, size=3) * phase_scale
    quad = rng.uniform(-1, 1, size=(3, 3)) * phase_scale * 0.5
    quad = 0.5 * (quad + quad.T)
    phase = d @ lin + np.einsum("...i,ij,...j->...", d, quad, d)
    prof = np.exp(-0.5 * np.sum(d * d, axis=-1) + 1j * phase)
    state = TwoComponentWavefunction(grid, prof[..., None] * random_spinor(rng), None, gauge=g)
    state = state.replace(values=np.where(state.mask[..., None], state.values, 0.0))
    return normalized(state)


def random_transverse_state(grid: KGrid, rng, **kw) -> VectorWavefunction:
    return embed(random_smooth_state(grid, rng, **kw))
