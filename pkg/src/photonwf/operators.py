"""Operator calculus on two-component wavefunctions.

Operators act on :class:`TwoComponentWavefunction` states and return new
states. Multiplicative operators are functions of k (possibly matrices in
spinor space); the canonical position is ``i d/dk`` evaluated with the grid
stencil, so products of operators are nested stencil applications.

Pauli matrices follow the triad convention: sigma1 = diag(1, -1),
sigma2 = [[0, 1], [1, 0]], sigma3 = [[0, -i], [i, 0]]; sigma3 is the
helicity.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .errors import IncompatibleGauge, ZeroIntensity
from .gauge import BerryGauge, as_gauge, berry_potential_field, triad_field
from .kgrid import KGrid, gradient
from .wavefunction import TwoComponentWavefunction, random_smooth_state

PAULI = np.array(
    [
        [[1, 0], [0, -1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
    ],
    dtype=complex,
)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0

# (Sigma_k)_ij = -i eps_ijk
SPIN_MATRICES = -1j * np.moveaxis(LEVI_CIVITA, 2, 0)


def commutator_matrix(a, b):
    return a @ b - b @ a


# ---- state arithmetic -------------------------------------------------------

def _lin(coeffs, states):
    """sum_n c_n * state_n with the intersection of their masks."""
    vals = sum(c * s.values for c, s in zip(coeffs, states))
    mask = states[0].mask
    for s in states[1:]:
        mask = mask & s.mask
    return states[0].replace(values=vals, mask=mask)


def _zero_like(state):
    return state.replace(values=np.zeros_like(state.values, dtype=complex))


class Op:
    """Scalar (single Cartesian component) linear operator.

    ``order`` counts nested k-derivatives, used to size the boundary shell
    excluded from identity checks. ``gauge`` is None for gauge-independent
    operators.
    """

    def __init__(self, name, fn, order=0, gauge=None):
        self.name = name
        self.fn = fn
        self.order = order
        self.gauge = gauge

    def __call__(self, state):
        if self.gauge is not None and state.gauge != self.gauge:
            raise IncompatibleGauge(
                f"{self.name} is defined in gauge {self.gauge.I}, state is in {state.gauge.I}"
            )
        return self.fn(state)

    def __repr__(self):
        return f"Op({self.name})"

    @staticmethod
    def _merge_gauge(a, b):
        ga = getattr(a, "gauge", None)
        gb = getattr(b, "gauge", None)
        if ga is not None and gb is not None and ga != gb:
            raise IncompatibleGauge(f"cannot combine operators in gauges {ga.I} and {gb.I}")
        return ga if ga is not None else gb

    def __add__(self, other):
        return _sum_op([(1, self), (1, other)])

    def __sub__(self, other):
        return _sum_op([(1, self), (-1, other)])

    def __neg__(self):
        return _sum_op([(-1, self)])

    def __rmul__(self, c):
        return _sum_op([(c, self)])

    def __matmul__(self, other):
        """Operator product: (A @ B) f = A(B f)."""
        gauge = Op._merge_gauge(self, other)
        return Op(f"{self.name}{other.name}", lambda s: self(other(s)),
                  self.order + other.order, gauge)


def _sum_op(terms):
    gauge = None
    for _, op in terms:
        gauge = Op._merge_gauge(Op("", None, 0, gauge), op)
    name = " + ".join(f"{c}*{op.name}" if c != 1 else op.name for c, op in terms)
    order = max(op.order for _, op in terms)
    return Op(f"({name})", lambda s: _lin([c for c, _ in terms], [op(s) for _, op in terms]),
              order, gauge)


def commutator(a: Op, b: Op) -> Op:
    return a @ b - b @ a


class VectorOp:
    """Three Cartesian components of a vector operator."""

    def __init__(self, name, comps, gauge_dependent=False, gauge=None):
        self.name = name
        self.comps = list(comps)
        self.gauge_dependent = gauge_dependent
        self.gauge = gauge

    def __getitem__(self, i) -> Op:
        return self.comps[i]

    def apply(self, state):
        return [c(state) for c in self.comps]

    def dot(self, n) -> Op:
        n = np.asarray(n, dtype=float)
        return _sum_op([(float(n[i]), self.comps[i]) for i in range(3) if n[i] != 0])

    def __add__(self, other):
        g = Op._merge_gauge(self, other)
        return VectorOp(f"({self.name}+{other.name})",
                        [a + b for a, b in zip(self.comps, other.comps)],
                        self.gauge_dependent or other.gauge_dependent, g)


# ---- pointwise building blocks ----------------------------------------------

def _mult_scalar(name, fn_field, gauge=None):
    """Multiply by a real/complex scalar function of k, given as fn_field(grid)."""

    def apply(state):
        g = fn_field(state.grid)
        return state.replace(values=state.values * g[..., None])

    return Op(name, apply, 0, gauge)


def _mult_matrix(name, mat, fn_field=None, gauge=None):
    """Multiply by a 2x2 matrix, optionally times a scalar function of k."""

    def apply(state):
        out = np.einsum("ab,...b->...a", mat, state.values)
        if fn_field is not None:
            out = out * fn_field(state.grid)[..., None]
        return state.replace(values=out)

    return Op(name, apply, 0, gauge)


@lru_cache(maxsize=32)
def _triad(grid: KGrid, gauge: BerryGauge):
    return triad_field(grid, gauge)


@lru_cache(maxsize=32)
def _potential(grid: KGrid, gauge: BerryGauge):
    return berry_potential_field(grid, gauge).values


@lru_cache(maxsize=32)
def _m_coeff(grid: KGrid, gauge: BerryGauge):
    """(I.k)/|I x k| u, the spatial factor of the concentrated OAM."""
    u, _, _, mask = _triad(grid, gauge)
    I = gauge.vector
    s = np.linalg.norm(np.cross(I, grid.k), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(mask, (grid.k @ I) / s, 0.0)
    return c[..., None] * u


@lru_cache(maxsize=32)
def _j_closed_coeff(grid: KGrid, gauge: BerryGauge):
    """(I x v)/(I.u)."""
    u, v, _, mask = _triad(grid, gauge)
    I = gauge.vector
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.cross(I, v) / (u @ I)[..., None]
    return np.where(mask[..., None], out, 0.0)


def _w_field(grid):
    kmag = np.where(grid.kmag > 0, grid.kmag, 1.0)
    return grid.k / kmag[..., None]


def _apply_mask_of(gauge):
    """Restrict a state's mask to points regular in ``gauge``."""

    def restrict(state):
        mask = _triad(state.grid, gauge)[3]
        return state.replace(mask=state.mask & mask)

    return restrict


# ---- the operator set -------------------------------------------------------

def identity() -> Op:
    return Op("1", lambda s: s.replace(values=s.values.copy()))


def op_omega() -> Op:
    """Hamiltonian omega = c|k| (c = 1)."""
    return _mult_scalar("omega", lambda g: g.kmag)


def op_pauli() -> VectorOp:
    return VectorOp("sigma", [_mult_matrix(f"sigma{i + 1}", PAULI[i]) for i in range(3)])


def op_helicity() -> Op:
    return _mult_matrix("sigma3", PAULI[2])


def op_spin(gauge=None) -> VectorOp:
    """s = sigma3 w; identical in every gauge."""
    comps = [_mult_matrix(f"s{i}", PAULI[2], lambda g, i=i: _w_field(g)[..., i]) for i in range(3)]
    return VectorOp("s", comps)


def op_momentum() -> VectorOp:
    return VectorOp("p", [_mult_scalar(f"p{i}", lambda g, i=i: g.k[..., i]) for i in range(3)])


def op_canonical_position() -> VectorOp:
    """xi = i grad_k."""

    def comp(i):
        def apply(state):
            d = gradient(state, i)
            return d.replace(values=1j * d.values)

        return Op(f"xi{i}", apply, order=1)

    return VectorOp("xi", [comp(i) for i in range(3)])


def op_b_analytic(gauge) -> VectorOp:
    """b = sigma3 A_B."""
    g = as_gauge(gauge)
    comps = [
        _mult_matrix(f"b{i}", PAULI[2], lambda grid, i=i: _potential(grid, g)[..., i], gauge=g)
        for i in range(3)
    ]
    return VectorOp("b", comps, gauge_dependent=True, gauge=g)


def b_numeric_matrices(grid: KGrid, gauge):
    """i varpi^dag (d varpi / dk_i) by stencil differentiation of u and v.

    Returns an array of shape ``grid.shape + (3, 2, 2)`` (axis, row, col)
    and the mask of points where the stencil is usable.
    """
    from .kgrid import Field

    g = as_gauge(gauge)
    u, v, _, mask = _triad(grid, g)
    varpi = np.stack([u, v], axis=-1)  # (..., 3, 2)
    out = np.zeros(grid.shape + (3, 2, 2), dtype=complex)
    m = mask.copy()
    for axis in range(3):
        d = gradient(Field(grid, varpi, mask), axis)
        out[..., axis, :, :] = 1j * np.einsum("...ia,...ib->...ab", varpi, d.values.real)
        m &= d.mask
    return out, m


def op_b_numeric(gauge) -> VectorOp:
    g = as_gauge(gauge)
    cache = {}

    def comp(i):
        def apply(state):
            key = id(state.grid)
            if key not in cache:
                cache.clear()
                cache[key] = b_numeric_matrices(state.grid, g)
            mats, m = cache[key]
            out = np.einsum("...ab,...b->...a", mats[..., i, :, :], state.values)
            return state.replace(values=out, mask=state.mask & m)

        return Op(f"bnum{i}", apply, 0, g)

    return VectorOp("b_numeric", [comp(i) for i in range(3)], gauge_dependent=True, gauge=g)


op_b = op_b_analytic


def op_position(gauge) -> VectorOp:
    """x = xi + b."""
    xi, b = op_canonical_position(), op_b_analytic(gauge)
    comps = [xi[i] + b[i] for i in range(3)]
    for i, c in enumerate(comps):
        c.name = f"x{i}"
    return VectorOp("x", comps, gauge_dependent=True, gauge=as_gauge(gauge))


def _cross_ops(a: VectorOp, bvec: VectorOp, name, sign=1.0):
    """sign * (a x b) with components a_j b_k - a_k b_j (operator order kept)."""
    comps = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        c = _sum_op([(sign, a[j] @ bvec[k]), (-sign, a[k] @ bvec[j])])
        c.name = f"{name}{i}"
        comps.append(c)
    return comps


def op_canonical_oam() -> VectorOp:
    """lambda = -p x xi."""
    return VectorOp("lambda", _cross_ops(op_momentum(), op_canonical_position(), "lambda", -1.0))


def op_m(gauge) -> VectorOp:
    """m = b x p = sigma3 (I.k)/|I x k| u."""
    g = as_gauge(gauge)
    comps = [
        _mult_matrix(f"m{i}", PAULI[2], lambda grid, i=i: _m_coeff(grid, g)[..., i], gauge=g)
        for i in range(3)
    ]
    return VectorOp("m", comps, gauge_dependent=True, gauge=g)


def op_m_cross(gauge) -> VectorOp:
    """m assembled as the operator product b x p."""
    g = as_gauge(gauge)
    return VectorOp("bxp", _cross_ops(op_b_analytic(g), op_momentum(), "bxp"), True, g)


def op_oam(gauge) -> VectorOp:
    """l = lambda + m."""
    g = as_gauge(gauge)
    lam, m = op_canonical_oam(), op_m(g)
    comps = [lam[i] + m[i] for i in range(3)]
    for i, c in enumerate(comps):
        c.name = f"l{i}"
    return VectorOp("l", comps, True, g)


def op_oam_cross(gauge) -> VectorOp:
    """l = -p x x, built directly from the laboratory position."""
    g = as_gauge(gauge)
    return VectorOp("-pxx", _cross_ops(op_momentum(), op_position(g), "pxx", -1.0), True, g)


def op_total_j(gauge) -> VectorOp:
    """j = s + l."""
    g = as_gauge(gauge)
    s, l = op_spin(), op_oam(g)
    comps = [s[i] + l[i] for i in range(3)]
    for i, c in enumerate(comps):
        c.name = f"j{i}"
    return VectorOp("j", comps, True, g)


def op_total_j_closed(gauge) -> VectorOp:
    """j = lambda + sigma3 (I x v)/(I.u)."""
    g = as_gauge(gauge)
    lam = op_canonical_oam()
    extra = [
        _mult_matrix(f"jx{i}", PAULI[2], lambda grid, i=i: _j_closed_coeff(grid, g)[..., i], gauge=g)
        for i in range(3)
    ]
    comps = [lam[i] + extra[i] for i in range(3)]
    return VectorOp("j_closed", comps, True, g)


# ---- expectations and polarization -----------------------------------------

def expectation(op: Op, state, shell=0):
    """<state| op |state> / <state|state> over points usable in both."""
    out = op(state)
    mask = out.mask & state.mask
    if shell:
        mask = mask & state.grid.interior(shell)
    num = np.sum(np.conj(state.values) * out.values, axis=-1)[mask].sum()
    den = np.sum(np.abs(state.values) ** 2, axis=-1)[mask].sum()
    return num / den


def expectation_vector(vop: VectorOp, state, shell=0):
    return np.array([expectation(c, state, shell) for c in vop.comps])


def poincare_local(state: TwoComponentWavefunction, tol=0.0):
    """Per-point Stokes triple (sigma1, sigma2, sigma3 expectations)/intensity.

    Returns ``(stokes, mask)``; raises :class:`ZeroIntensity` if any usable
    point has intensity <= ``tol``.
    """
    f = state.values
    inten = np.sum(np.abs(f) ** 2, axis=-1)
    mask = state.mask
    if np.any(inten[mask] <= tol):
        raise ZeroIntensity("Poincare vector undefined at dark points")
    num = np.einsum("...a,iab,...b->...i", np.conj(f), PAULI, f).real
    with np.errstate(invalid="ignore", divide="ignore"):
        st = np.where(mask[..., None], num / inten[..., None], 0.0)
    return st, mask


def poincare_vector(state: TwoComponentWavefunction, lab_frame=False, min_intensity=0.0):
    """Per-point Stokes parameters and the intensity-weighted average.

    With ``lab_frame`` the per-point vector is returned as
    s1 u + s2 v + s3 w in Cartesian components.
    """
    st, mask = poincare_local(state, min_intensity)
    inten = np.sum(np.abs(state.values) ** 2, axis=-1) * mask
    mean = np.tensordot(inten, st, axes=3) / inten.sum()
    if not lab_frame:
        return st, mean
    u, v, w, _ = _triad(state.grid, state.gauge)
    vec = st[..., 0:1] * u + st[..., 1:2] * v + st[..., 2:3] * w
    return vec, np.tensordot(inten, vec, axes=3) / inten.sum()


# ---- commutator harness -----------------------------------------------------

@dataclass
class OperatorReport:
    name: str
    identity: str
    residuals: list
    tolerance: float
    shell: int
    grid: dict = field(default_factory=dict)
    expectations: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return float(max(self.residuals)) if self.residuals else 0.0

    @property
    def median_residual(self):
        return float(np.median(self.residuals)) if self.residuals else 0.0

    @property
    def passed(self):
        return self.max_residual <= self.tolerance

    def to_dict(self):
        d = asdict(self)
        d.update(max_residual=self.max_residual, median_residual=self.median_residual,
                 passed=self.passed)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# Default random-state family for identity checks: broad smooth envelopes
# keep the fourth-order stencil error far below the identity tolerances.
HARNESS_WIDTHS = (1.0, 1.5)


def harness_states(grid, gauge, trials, seed=0, width_range=HARNESS_WIDTHS):
    rng = np.random.default_rng(seed)
    return [random_smooth_state(grid, rng, gauge=gauge, width_range=width_range)
            for _ in range(trials)]


def residual(op: Op, state, shell):
    out = op(state)
    mask = out.mask & state.mask & state.grid.interior(shell)
    num = np.sum(np.abs(out.values) ** 2, axis=-1)[mask].sum()
    den = np.sum(np.abs(state.values) ** 2, axis=-1)[mask].sum()
    return float(np.sqrt(num / den))


def commutator_residual(a: Op, b: Op, expected: Op | None, states, tolerance=np.inf,
                        name=None, identity=""):
    """Residual ||([a, b] - expected) f|| / ||f|| for each state.

    The boundary shell dropped from the norms is two layers per nested
    derivative (at least two layers).
    """
    Op._merge_gauge(a, b)
    c = commutator(a, b)
    if expected is not None:
        c = c - expected
    shell = 2 * max(1, a.order + b.order)
    res = [residual(c, s, shell) for s in states]
    grid = states[0].grid.header() if states else {}
    return OperatorReport(name or f"[{a.name},{b.name}]", identity, res, float(tolerance),
                          shell, grid)
