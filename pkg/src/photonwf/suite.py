"""Named identity checks shared by ``photon verify`` and the acceptance tests.

Each check returns a :class:`Check` holding the identity it tests, the
largest residual found and the tolerance it is held to.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from . import gauge as gz
from . import operators as ops
from .kgrid import Field, build_grid, curl
from .wavefunction import (
    TwoComponentWavefunction,
    alpha,
    embed,
    gauge_transform,
    norm,
    project,
    random_smooth_state,
)


@dataclass
class Check:
    name: str
    identity: str
    residual: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28s} residual={self.residual:.3e}  tol={self.tolerance:.1e}  {self.identity}"


def _eps(i, j):
    """Return (k, sign) with eps_ijk = sign, for i != j."""
    k = 3 - i - j
    return k, ops.LEVI_CIVITA[i, j, k]


def _mult_field(name, mat, coeff_fn, gauge=None):
    return ops._mult_matrix(name, mat, coeff_fn, gauge)


# ---- algebraic ---------------------------------------------------------------

def check_pauli_algebra():
    P = ops.PAULI
    res = max(
        np.abs(ops.commutator_matrix(P[i], P[j]) - 2j * sum(ops.LEVI_CIVITA[i, j, k] * P[k] for k in range(3))).max()
        for i in range(3) for j in range(3)
    )
    sq = max(np.abs(P[i] @ P[i] - np.eye(2)).max() for i in range(3))
    return Check("pauli_algebra", "[sigma_i, sigma_j] = 2i eps_ijk sigma_k; sigma_i^2 = 1",
                 float(max(res, sq)), 1e-12)


def check_spin_matrix_algebra():
    S = ops.SPIN_MATRICES
    res = max(
        np.abs(ops.commutator_matrix(S[i], S[j]) - 1j * sum(ops.LEVI_CIVITA[i, j, k] * S[k] for k in range(3))).max()
        for i in range(3) for j in range(3)
    )
    return Check("spin_matrix_algebra", "[Sigma_i, Sigma_j] = i eps_ijk Sigma_k", float(res), 1e-12)


def random_k_points(rng, count, gauge, kmin=0.5, kmax=20.0, eps_cone=1e-2):
    """Random wavevectors outside the singular cone of ``gauge``."""
    I = gz.as_gauge(gauge).vector
    out = np.empty((0, 3))
    while out.shape[0] < count:
        d = rng.normal(size=(2 * count, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        k = d * rng.uniform(kmin, kmax, size=(2 * count, 1))
        ang = np.arctan2(np.linalg.norm(np.cross(I, k), axis=1), np.abs(k @ I))
        out = np.concatenate([out, k[ang >= eps_cone]])
    return out[:count]


def check_quasi_unitarity(rng, count=10_000, gauges=None):
    gauges = gauges or [gz.BerryGauge.from_vector(rng.normal(size=3)) for _ in range(3)]
    left = right = 0.0
    for g in gauges:
        k = random_k_points(rng, count // len(gauges), g)
        u, v, w = gz._triad_arrays(k, g.vector)
        varpi = np.stack([u, v], -1)
        vtv = np.einsum("nia,nib->nab", varpi, varpi)
        vvt = np.einsum("nia,nja->nij", varpi, varpi)
        left = max(left, float(np.abs(vtv - np.eye(2)).max()))
        right = max(right, float(np.abs(vvt - (np.eye(3) - np.einsum("ni,nj->nij", w, w))).max()))
    return [
        Check("quasi_unitarity_left", "varpi^dag varpi = I2", left, 1e-12, {"points": count}),
        Check("quasi_unitarity_right", "varpi varpi^dag = I3 - w w^dag", right, 1e-12, {"points": count}),
    ]


def check_round_trips(grid, rng, states=20):
    worst_vec = worst_spin = 0.0
    for _ in range(states):
        ft = random_smooth_state(grid, rng)
        f = embed(ft)
        back = embed(project(f))
        scale = np.abs(f.values).max()
        worst_vec = max(worst_vec, float(np.abs(back.values - f.values).max() / scale))
        worst_spin = max(worst_spin, float(np.abs(project(f).values - ft.values).max()
                                           / np.abs(ft.values).max()))
    return [
        Check("embed_project_round_trip", "varpi varpi^dag f = f for transverse f",
              worst_vec, 1e-10, {"states": states}),
        Check("project_embed_round_trip", "varpi^dag varpi ft = ft", worst_spin, 1e-10,
              {"states": states}),
    ]


# ---- commutator table --------------------------------------------------------

def _worst(reports):
    return max(r.max_residual for r in reports)


def _pairs(distinct=True):
    return [(i, j) for i in range(3) for j in range(3) if (i != j or not distinct)]


def _table_entry(name, identity, tol, make_reports):
    reports = make_reports()
    return Check(name, identity, _worst(reports), tol,
                 {"shell": max(r.shell for r in reports),
                  "median": float(np.median([r.median_residual for r in reports]))})


def _vector_algebra(vop, expected_vec, states):
    """[A_i, A_j] - i eps_ijk E_k for i < j."""
    reps = []
    for i, j in ((0, 1), (1, 2), (2, 0)):
        k, sgn = _eps(i, j)
        reps.append(ops.commutator_residual(vop[i], vop[j], (1j * sgn) * expected_vec[k], states))
    return reps


def _zero_commutators(a, b, states, distinct=False):
    pairs = [(i, j) for i in range(3) for j in range(3) if not (distinct and i >= j)]
    return [ops.commutator_residual(a[i], b[j], None, states) for i, j in pairs]


def _omega_commutators(vop, states):
    om = ops.op_omega()
    return [ops.commutator_residual(vop[i], om, None, states) for i in range(3)]


def _operator_difference(a: ops.VectorOp, b: ops.VectorOp, states, shell=2):
    res = 0.0
    for i in range(3):
        diff = a[i] - b[i]
        for s in states:
            res = max(res, ops.residual(diff, s, shell))
    return res


def berry_field_op(gauge):
    """i sigma3 H_B components, the expected value of x x x."""
    return [
        ops._mult_matrix(f"H{k}", ops.PAULI[2],
                         lambda grid, k=k: (-grid.k / np.where(grid.kmag > 0, grid.kmag, 1.0)[..., None] ** 3)[..., k])
        for k in range(3)
    ]


def commutator_table(grid, gauge, states):
    """The full commutator table evaluated on ``states``."""
    g = gz.as_gauge(gauge)
    s, p, xi = ops.op_spin(), ops.op_momentum(), ops.op_canonical_position()
    b, x = ops.op_b_analytic(g), ops.op_position(g)
    lam, m, l, j = ops.op_canonical_oam(), ops.op_m(g), ops.op_oam(g), ops.op_total_j(g)
    one = ops.identity()
    H = berry_field_op(g)
    checks = []

    def add(name, identity, tol, fn):
        checks.append(_table_entry(name, identity, tol, fn))

    add("spin_commute", "[s_i, s_j] = 0", 1e-12, lambda: _zero_commutators(s, s, states, True))
    add("momentum_commute", "[p_i, p_j] = 0", 1e-12, lambda: _zero_commutators(p, p, states, True))
    add("momentum_omega", "[p, omega] = 0", 1e-12, lambda: _omega_commutators(p, states))
    add("xi_commute", "[xi_i, xi_j] = 0", 1e-8, lambda: _zero_commutators(xi, xi, states, True))
    add("xi_p_canonical", "[xi_i, p_j] = i delta_ij", 1e-6, lambda: [
        ops.commutator_residual(xi[a], p[c], (1j * one) if a == c else None, states)
        for a in range(3) for c in range(3)])
    add("b_commute", "[b_i, b_j] = 0", 1e-12, lambda: _zero_commutators(b, b, states, True))
    add("b_omega", "[b, omega] = 0", 1e-12, lambda: _omega_commutators(b, states))
    add("position_noncommuting", "x x x = i sigma3 H_B, H_B = -w/k^2", 1e-3,
        lambda: _vector_algebra(x, H, states))
    add("lambda_algebra", "[lambda_i, lambda_j] = i eps_ijk lambda_k", 1e-5,
        lambda: _vector_algebra(lam, lam, states))
    add("lambda_omega", "[lambda, omega] = 0", 1e-5, lambda: _omega_commutators(lam, states))
    add("m_commute", "[m_i, m_j] = 0", 1e-12, lambda: _zero_commutators(m, m, states, True))
    add("m_omega", "[m, omega] = 0", 1e-12, lambda: _omega_commutators(m, states))
    add("l_s", "[l_i, s_j] = i eps_ijk s_k", 1e-4, lambda: [
        ops.commutator_residual(l[a], s[c], (1j * _eps(a, c)[1]) * s[_eps(a, c)[0]] if a != c else None, states)
        for a in range(3) for c in range(3)])
    ls = [l[k] - s[k] for k in range(3)]
    add("l_algebra", "[l_i, l_j] = i eps_ijk (l_k - s_k)", 1e-4, lambda: _vector_algebra(l, ls, states))
    add("l_omega", "[l, omega] = 0", 1e-5, lambda: _omega_commutators(l, states))
    add("j_algebra", "[j_i, j_j] = i eps_ijk j_k", 1e-4, lambda: _vector_algebra(j, j, states))
    add("j_omega", "[j, omega] = 0", 1e-5, lambda: _omega_commutators(j, states))
    add("s_omega", "[s, omega] = 0", 1e-12, lambda: _omega_commutators(s, states))

    checks.append(Check("m_equals_b_cross_p", "m = b x p", _operator_difference(m, ops.op_m_cross(g), states), 1e-10))
    checks.append(Check("l_equals_minus_p_cross_x", "l = lambda + m = -p x x",
                        _operator_difference(l, ops.op_oam_cross(g), states), 1e-8))
    checks.append(Check("j_closed_form", "s + l = lambda + sigma3 (I x v)/(I.u)",
                        _operator_difference(j, ops.op_total_j_closed(g), states), 1e-8))
    jI, lI = j.dot(g.vector), lam.dot(g.vector)
    res = max(ops.residual(jI - lI, st, 2) for st in states)
    checks.append(Check("j_dot_I", "j.I = lambda.I", res, 1e-8))
    return checks


def b_numeric_check(grid, gauge):
    """Pointwise i varpi^dag grad varpi against sigma3 A_B."""
    g = gz.as_gauge(gauge)
    mats, mask = ops.b_numeric_matrices(grid, g)
    A = gz.berry_potential_field(grid, g).values
    analytic = A[..., :, None, None] * ops.PAULI[2]
    inner = mask & grid.interior(2)
    dev = np.abs(mats - analytic)[inner].max()
    return Check("b_numeric_vs_analytic", "i varpi^dag grad varpi = sigma3 A_B",
                 float(dev / np.abs(A[inner]).max()), 1e-4)


# ---- Berry-gauge geometry ------------------------------------------------------

def check_berry_curl(grid, gauge=None):
    A = gz.berry_potential_field(grid, gauge)
    c = curl(A)
    H = gz.berry_field_on_grid(grid)
    m = c.mask & grid.interior(2)
    err = np.linalg.norm(c.values - H.values, axis=-1)[m] / np.linalg.norm(H.values, axis=-1)[m]
    return Check("berry_curl", "curl A_B = -w/k^2", float(err.max()), 1e-4)


def check_gauge_potential_shift(grid, gauge, gauge2):
    A = gz.berry_potential_field(grid, gauge)
    A2 = gz.berry_potential_field(grid, gauge2)
    dphi = gz.phase_gradient(gz.gauge_angle_field(grid, gauge, gauge2))
    m = dphi.mask & A.mask & A2.mask & grid.interior(2)
    dev = np.linalg.norm(A2.values - A.values - dphi.values, axis=-1)[m].max()
    scale = np.linalg.norm(A.values, axis=-1)[m].max()
    return Check("gauge_potential_shift", "A'_B = A_B + grad phi", float(dev / scale), 1e-4)


def loop_circulation(gauge, polar, radius=1.0, samples=2048):
    """Line integral of A_B around the circle at polar angle ``polar`` from I."""
    I = gz.as_gauge(gauge).vector
    trial = np.array([1.0, 0, 0]) if abs(I[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = trial - (trial @ I) * I
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(I, e1)
    t = np.arange(samples) * (2 * np.pi / samples)
    pts = radius * (np.cos(polar) * I + np.sin(polar) * (np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2))
    tangent = radius * np.sin(polar) * (-np.sin(t)[:, None] * e1 + np.cos(t)[:, None] * e2)
    A = gz._potential_arrays(pts, I)
    return float(np.sum(A * tangent) * (2 * np.pi / samples))


def check_monopole_flux(gauge=(0, 0, 1), radius=1.7):
    flux = gz.monopole_flux(radius)
    # independent route: Stokes on the band between two latitude loops next to the string
    eps = 1e-3
    band = loop_circulation(gauge, np.pi - eps, radius) - loop_circulation(gauge, eps, radius)
    err = max(abs(flux + 4 * np.pi), abs(band + 4 * np.pi)) / (4 * np.pi)
    return Check("monopole_flux", "surface flux of H_B = -4 pi", float(err), 1e-2,
                 {"surface_quadrature": flux, "loop_integrals": band})


# ---- gauge covariance ------------------------------------------------------------

def random_gauge(rng, away_from, min_angle):
    w0 = np.asarray(away_from, float) / np.linalg.norm(away_from)
    while True:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if np.arccos(min(1.0, abs(v @ w0))) >= min_angle:
            return gz.BerryGauge(tuple(v.tolist()))


COVARIANCE_WIDTHS = (0.12, 0.16)


def gauge_covariance_checks(grid, rng, states=10, pairs=5, min_angle=np.pi / 4,
                            width_range=COVARIANCE_WIDTHS):
    """Observables before and after a Berry-gauge change of random states."""
    center = np.asarray(grid.center)
    worst = {"x": 0.0, "p": 0.0, "s": 0.0, "norm": 0.0, "omega": 0.0, "embed": 0.0,
             "stokes12": 0.0, "stokes3": 0.0}
    p, s, om = ops.op_momentum(), ops.op_spin(), ops.op_omega()
    for _ in range(pairs):
        g1, g2 = random_gauge(rng, center, min_angle), random_gauge(rng, center, min_angle)
        x1, x2 = ops.op_position(g1), ops.op_position(g2)
        phi = gz.gauge_angle_field(grid, g1, g2).values
        for _ in range(states):
            st = random_smooth_state(grid, rng, gauge=g1, width_range=width_range, center_range=0.1)
            st2 = gauge_transform(st, g2)
            worst["x"] = max(worst["x"], np.abs(ops.expectation_vector(x1, st) - ops.expectation_vector(x2, st2)).max())
            worst["p"] = max(worst["p"], np.abs(ops.expectation_vector(p, st) - ops.expectation_vector(p, st2)).max())
            worst["s"] = max(worst["s"], np.abs(ops.expectation_vector(s, st) - ops.expectation_vector(s, st2)).max())
            worst["norm"] = max(worst["norm"], abs(norm(st) - norm(st2)))
            worst["omega"] = max(worst["omega"], abs(ops.expectation(om, st) - ops.expectation(om, st2)))
            e1, e2 = embed(st).values, embed(st2).values
            worst["embed"] = max(worst["embed"], np.abs(e1 - e2).max() / np.abs(e1).max())
            st1_, _ = ops.poincare_local(st)
            st2_, _ = ops.poincare_local(st2)
            m = st.mask & st2.mask
            c, sn = np.cos(2 * phi), np.sin(2 * phi)
            pred1 = st1_[..., 0] * c + st1_[..., 1] * sn
            pred2 = -st1_[..., 0] * sn + st1_[..., 1] * c
            dev = max(np.abs(st2_[..., 0] - pred1)[m].max(), np.abs(st2_[..., 1] - pred2)[m].max())
            worst["stokes12"] = max(worst["stokes12"], dev)
            worst["stokes3"] = max(worst["stokes3"], np.abs(st2_[..., 2] - st1_[..., 2])[m].max())
    det = {"states": states, "pairs": pairs, "n": list(grid.n)}
    return [
        Check("gauge_invariant_position", "<x'> in gauge I' = <x> in gauge I", float(worst["x"]), 1e-6, det),
        Check("gauge_invariant_momentum", "<p> unchanged by gauge change", float(worst["p"]), 1e-6, det),
        Check("gauge_invariant_spin", "<s> unchanged by gauge change", float(worst["s"]), 1e-6, det),
        Check("gauge_invariant_norm", "norm unchanged by gauge change", float(worst["norm"]), 1e-6, det),
        Check("gauge_invariant_omega", "<omega> unchanged by gauge change", float(worst["omega"]), 1e-6, det),
        Check("embed_gauge_covariance", "varpi' ft' = varpi ft", float(worst["embed"]), 1e-10, det),
        Check("stokes_rotation", "(s1', s2') = rotation of (s1, s2) by 2 phi", float(worst["stokes12"]), 1e-12, det),
        Check("stokes_helicity_invariant", "s3' = s3", float(worst["stokes3"]), 1e-12, det),
    ]


def berry_phase_checks(grid, rng, pairs=5, min_angle=np.pi / 4):
    from .spinhall import berry_phase_check
    from .wavefunction import gaussian_profile

    center = np.asarray(grid.center)
    worst = 0.0
    for _ in range(pairs):
        g1, g2 = random_gauge(rng, center, min_angle), random_gauge(rng, center, min_angle)
        prof = gaussian_profile(grid, center, 0.15 * np.asarray(grid.half_width))
        for sigma in (1, -1):
            ft = TwoComponentWavefunction(grid, prof[..., None] * alpha(sigma), None, gauge=g1)
            rep = berry_phase_check(embed(ft), g1, g2)
            worst = max(worst, rep.max_modulus_deviation, rep.max_phase_deviation)
    return Check("berry_phase_fit", "varpi' ft_sigma = exp(-i sigma phi) varpi ft_sigma", float(worst), 1e-10)


def default_grid(center_theta=np.pi / 3, kmag=10.0, half_width=0.5, n=33, gauge=(0, 0, 1)):
    c = kmag * np.array([np.sin(center_theta), 0.0, np.cos(center_theta)])
    return build_grid(c, half_width, n, gauge)
