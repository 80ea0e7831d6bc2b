"""Sampled momentum-space box, singular-cone mask, stencils and quadrature.

Every field in the package lives on a uniform Cartesian k-lattice. Points
too close to the origin or to the singular line of the Berry gauge are
masked; masked samples are ignored by every reduction and poison any
difference stencil that reads them.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import backend
from .errors import GridError

DEFAULT_EPS_CONE = 1e-2


def _vec3(x, name):
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.size == 1:
        a = np.repeat(a, 3)
    if a.size != 3:
        raise GridError(f"{name} must have 3 components, got {a.size}")
    return a


@dataclass(frozen=True, eq=False)
class KGrid:
    """Uniform k-box ``center +/- half_width`` with ``n`` samples per axis.

    ``mask`` is True at usable points, i.e. where ``|k| >= eps_k`` and the
    angle between k and the line through +/-``gauge`` is at least
    ``eps_cone``.
    """

    center: tuple
    half_width: tuple
    n: tuple
    gauge: tuple
    eps_cone: float = DEFAULT_EPS_CONE
    eps_k: float = 1e-6

    @property
    def shape(self):
        return tuple(self.n)

    @cached_property
    def axes(self):
        return tuple(
            np.linspace(c - w, c + w, m)
            for c, w, m in zip(self.center, self.half_width, self.n)
        )

    @cached_property
    def spacing(self):
        return np.array([2.0 * w / (m - 1) for w, m in zip(self.half_width, self.n)])

    @property
    def weight(self):
        """Quadrature weight dkx*dky*dkz."""
        return float(np.prod(self.spacing))

    @cached_property
    def k(self):
        """Wavevectors, shape ``n + (3,)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    @cached_property
    def kmag(self):
        return np.linalg.norm(self.k, axis=-1)

    @cached_property
    def mask(self):
        I = np.asarray(self.gauge, dtype=float)
        k = self.k
        along = np.abs(k @ I)
        across = np.linalg.norm(np.cross(I, k), axis=-1)
        angle = np.arctan2(across, along)
        m = (self.kmag >= self.eps_k) & (angle >= self.eps_cone)
        m.setflags(write=False)
        return m

    @property
    def masked_fraction(self):
        return 1.0 - float(np.count_nonzero(self.mask)) / self.mask.size

    @property
    def volume(self):
        """Volume of the union of sample cells, n * dk per axis.

        This is what the uniform-weight quadrature assigns to the box; it
        exceeds the span 2 * half_width by one cell per axis.
        """
        return float(np.prod(np.asarray(self.n) * self.spacing))

    def interior(self, shell):
        """Boolean array that is False within ``shell`` layers of the box faces."""
        inside = np.zeros(self.shape, dtype=bool)
        if all(2 * shell < m for m in self.n):
            inside[tuple(slice(shell, m - shell) for m in self.n)] = True
        return inside

    def with_gauge(self, gauge):
        """Same lattice, mask recomputed for another gauge vector."""
        vec = getattr(gauge, "I", gauge)
        return dataclasses.replace(self, gauge=tuple(float(x) for x in vec))

    def header(self):
        return {
            "center": list(self.center),
            "half_width": list(self.half_width),
            "n": list(self.n),
            "gauge": list(self.gauge),
            "eps_cone": self.eps_cone,
            "eps_k": self.eps_k,
        }


def build_grid(center, half_width, n, gauge_I, eps_cone=DEFAULT_EPS_CONE, eps_k=None,
               max_masked_fraction=0.5):
    """Validate parameters and build a :class:`KGrid`.

    ``eps_k`` defaults to ``1e-6 * |center|`` (``1e-6`` when the box is
    centered on the origin). Raises :class:`GridError` for even or too
    small ``n``, non-positive widths, a non-unit gauge vector, a
    non-positive cone angle, or when more than ``max_masked_fraction`` of
    the points fall inside the mask.
    """
    center = _vec3(center, "center")
    half_width = _vec3(half_width, "half_width")
    n = np.asarray(n, dtype=int).reshape(-1)
    if n.size == 1:
        n = np.repeat(n, 3)
    if n.size != 3 or np.any(n < 5) or np.any(n % 2 == 0):
        raise GridError(f"n must be odd and >= 5 on every axis, got {n.tolist()}")
    if np.any(half_width <= 0):
        raise GridError("half_width must be positive")
    I = _vec3(gauge_I, "gauge_I")
    if abs(np.linalg.norm(I) - 1.0) > 1e-9:
        raise GridError(f"gauge vector must be a unit vector, |I| = {np.linalg.norm(I)}")
    if not eps_cone > 0:
        raise GridError("eps_cone must be positive: the Berry potential diverges on the gauge axis")
    if eps_k is None:
        cmag = float(np.linalg.norm(center))
        eps_k = 1e-6 * cmag if cmag > 0 else 1e-6
    grid = KGrid(
        center=tuple(center.tolist()),
        half_width=tuple(half_width.tolist()),
        n=tuple(int(x) for x in n),
        gauge=tuple(I.tolist()),
        eps_cone=float(eps_cone),
        eps_k=float(eps_k),
    )
    if grid.masked_fraction > max_masked_fraction:
        raise GridError(
            f"{grid.masked_fraction:.1%} of grid points are masked; "
            "the box is dominated by the singular cone or the origin"
        )
    return grid


@dataclass(frozen=True, eq=False)
class Field:
    """Values sampled on a grid, shape ``grid.shape + component_shape``.

    ``mask`` marks usable points; it starts as the grid mask and shrinks
    when difference stencils read masked samples.
    """

    grid: KGrid
    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape[:3] != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)
        if self.mask is None:
            object.__setattr__(self, "mask", self.grid.mask)

    @property
    def ncomp(self):
        return int(np.prod(self.values.shape[3:], dtype=int))

    def masked_values(self):
        """Values with masked points set to zero."""
        m = self.mask.reshape(self.mask.shape + (1,) * (self.values.ndim - 3))
        return np.where(m, self.values, 0)

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


def gradient(field: Field, axis: int) -> Field:
    """d/dk_axis of ``field``; see ``_kernels.stencil_derivative`` for the stencil."""
    comp = field.values.ndim - 3
    # differentiated axis goes last, behind any component axes
    vals = np.moveaxis(np.asarray(field.values, dtype=complex), axis, -1)
    m = np.moveaxis(field.mask, axis, -1)
    m = np.broadcast_to(m.reshape(m.shape[:2] + (1,) * comp + m.shape[2:]), vals.shape)
    n = vals.shape[-1]
    d, ok = backend.stencil_derivative(
        vals.reshape(-1, n), m.reshape(-1, n), field.grid.spacing[axis]
    )
    d = np.moveaxis(d.reshape(vals.shape), -1, axis)
    ok = ok.reshape(vals.shape)[(slice(None),) * 2 + (0,) * comp]
    ok = np.moveaxis(ok, -1, axis)
    return field.replace(values=d, mask=ok & field.mask)


def curl(field: Field) -> Field:
    """Curl of a 3-vector field (last axis holds the components)."""
    if field.values.shape[3:] != (3,):
        raise ValueError("curl needs a 3-component field")

    def comp(c):
        return field.replace(values=field.values[..., c])

    d = {(c, a): gradient(comp(c), a) for c in range(3) for a in range(3) if c != a}
    out = np.stack(
        [
            d[(2, 1)].values - d[(1, 2)].values,
            d[(0, 2)].values - d[(2, 0)].values,
            d[(1, 0)].values - d[(0, 1)].values,
        ],
        axis=-1,
    )
    mask = field.mask.copy()
    for v in d.values():
        mask &= v.mask
    return field.replace(values=out, mask=mask)


def integrate(field: Field):
    """``weight * sum`` over unmasked points; one value per component."""
    vals = field.values[field.mask]
    total = vals.sum(axis=0) * field.grid.weight
    return total if np.ndim(total) else total[()]


def inner(a: Field, b: Field, mask=None):
    """Quadrature of sum_c conj(a_c) b_c over points usable in both fields."""
    m = a.mask & b.mask
    if mask is not None:
        m = m & mask
    prod = np.conj(a.values) * b.values
    if prod.ndim > 3:
        prod = prod.reshape(prod.shape[:3] + (-1,)).sum(axis=-1)
    return prod[m].sum() * a.grid.weight


def norm2(field: Field, mask=None):
    return float(np.real(inner(field, field, mask)))
