"""Command-line front end.

    photon verify|shift-scan|fields|gauge-demo --config cfg.json --out DIR [--seed N]

The config is one JSON document (natural units, angles in radians); any key
left out takes the default from :data:`DEFAULTS`. Reports are written
atomically and never contain timings, so a fixed seed gives byte-identical
output.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gauge as gz
from . import operators as ops
from . import suite
from .errors import ConfigError, PhotonError, SingularGauge
from .fields import (
    SpatialSampling,
    divergence,
    envelope_centroid,
    snapshot,
    synthesize_A,
    synthesize_EH,
)
from .io import write_csv, write_json
from .kgrid import build_grid
from .spinhall import berry_phase_check, scan_theta
from .wavefunction import (
    VectorWavefunction,
    embed,
    gauge_transform,
    make_gaussian_packet,
    normalized,
    random_smooth_state,
)

logger = logging.getLogger("photonwf")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_T60 = np.pi / 3

DEFAULTS = {
    "seed": 0,
    "grid": {
        "center": [10 * np.sin(_T60), 0.0, 10 * np.cos(_T60)],
        "half_width": 0.5,
        "n": 33,
        "eps_cone": 0.01,
        "eps_k": None,
    },
    "gauge": [0.0, 0.0, 1.0],
    "gauge2": [1.0, 0.0, 0.0],
    "packet": {"k0": None, "divergence": 0.005, "sigma": 1},
    "verify": {
        "trials": 10,
        "quasi_unitarity_points": 10000,
        "round_trip_states": 20,
        "covariance_n": 97,
        "covariance_states": 2,
        "covariance_pairs": 2,
    },
    "scan": {
        "thetas": [np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2],
        "sigmas": [1, -1],
        "k0": 10.0,
        "divergence": 0.01,
        "n": 33,
        "relative_tolerance": 0.02,
    },
    "fields": {
        "times": [0.0, 40.0],
        "plane": {"extent": 30.0, "n": 41},
        "line": {"s_min": -60.0, "s_max": 100.0, "n": 801},
        "divergence_points": 16,
        "divergence_delta": 1e-3,
        "zero": False,
    },
    "gauge_demo": {"position_n": 129, "position_states": 2},
    "tolerances": {},
}


@dataclass
class RunConfig:
    raw: dict
    seed: int
    grid: dict
    gauge: gz.BerryGauge
    gauge2: gz.BerryGauge
    packet: dict
    verify: dict
    scan: dict
    fields: dict
    gauge_demo: dict
    tolerances: dict

    def build_grid(self, **override):
        g = {**self.grid, **override}
        return build_grid(g["center"], g["half_width"], g["n"], self.gauge.vector,
                          eps_cone=g["eps_cone"], eps_k=g["eps_k"])

    def k0(self):
        k0 = self.packet["k0"]
        return np.asarray(self.grid["center"] if k0 is None else k0, float)

    def tol(self, check):
        return float(self.tolerances.get(check.name, check.tolerance))


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and key != "tolerances":
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path + key!r} must be an object")
            out[key] = _merge(base[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def _unit(vec, name):
    try:
        v = np.asarray(vec, dtype=float).reshape(3)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a 3-vector") from None
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0:
        raise ConfigError(f"{name} cannot be normalized")
    return gz.BerryGauge(tuple((v / n).tolist()))


def load_config(path=None, seed=None) -> RunConfig:
    """Parse and validate a JSON config, filling defaults."""
    user = {}
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
    raw = _merge(DEFAULTS, user)
    if seed is not None:
        raw["seed"] = seed
    grid = raw["grid"]
    if not (isinstance(grid["eps_cone"], (int, float)) and grid["eps_cone"] > 0):
        raise ConfigError("grid.eps_cone must be positive") from SingularGauge(
            "a zero cone angle admits wavevectors on the gauge axis")
    cfg = RunConfig(
        raw=raw, seed=int(raw["seed"]), grid=grid,
        gauge=_unit(raw["gauge"], "gauge"), gauge2=_unit(raw["gauge2"], "gauge2"),
        packet=raw["packet"], verify=raw["verify"], scan=raw["scan"],
        fields=raw["fields"], gauge_demo=raw["gauge_demo"], tolerances=raw["tolerances"],
    )
    try:
        cfg.build_grid()
    except PhotonError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc
    if cfg.packet["sigma"] not in (1, -1):
        raise ConfigError("packet.sigma must be +1 or -1")
    return cfg


# ---- commands ----------------------------------------------------------------

def _finish(checks, cfg, out, name, extra=None):
    for c in checks:
        c.tolerance = cfg.tol(c)
    report = {
        "command": name,
        "seed": cfg.seed,
        "config": cfg.raw,
        "checks": [c.to_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    failed = [c.name for c in checks if not c.passed]
    report["first_failure"] = failed[0] if failed else None
    if extra:
        report.update(extra)
    write_json(Path(out) / f"{name}.json", report)
    for c in checks:
        logger.info(c.line())
    if failed:
        print(f"FAILED: {failed[0]} ({len(failed)} of {len(checks)} checks failed)", file=sys.stderr)
        return EXIT_FAIL
    print(f"all {len(checks)} checks passed", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out):
    rng = np.random.default_rng(cfg.seed)
    v = cfg.verify
    grid = cfg.build_grid()
    g, g2 = cfg.gauge, cfg.gauge2
    checks = [suite.check_pauli_algebra(), suite.check_spin_matrix_algebra()]
    checks += suite.check_quasi_unitarity(rng, v["quasi_unitarity_points"])
    checks += suite.check_round_trips(grid, rng, v["round_trip_states"])
    states = ops.harness_states(grid, g, v["trials"], seed=cfg.seed)
    checks += suite.commutator_table(grid, g, states)
    checks.append(suite.b_numeric_check(grid, g))
    checks.append(suite.check_berry_curl(grid, g))
    checks.append(suite.check_gauge_potential_shift(grid, g, g2))
    checks.append(suite.check_monopole_flux(g))
    cov_grid = cfg.build_grid(n=v["covariance_n"])
    checks += suite.gauge_covariance_checks(cov_grid, rng, v["covariance_states"], v["covariance_pairs"])
    checks.append(suite.berry_phase_checks(grid, rng, pairs=v["covariance_pairs"]))
    return _finish(checks, cfg, out, "verify")


def cmd_shift_scan(cfg: RunConfig, out):
    sc = cfg.scan
    thetas = list(sc["thetas"])
    if not thetas:
        raise ConfigError("scan.thetas is empty")
    sigmas = list(sc["sigmas"])
    if not sigmas or any(s not in (1, -1) for s in sigmas):
        raise ConfigError("scan.sigmas must be a nonempty list of +1/-1")
    tol = float(sc["relative_tolerance"])
    blocks = {s: scan_theta(s, sc["k0"], thetas, sc["divergence"], sc["n"], cfg.gauge.vector)
              for s in sigmas}
    rows = []
    checks = []
    for s, results in blocks.items():
        for r in results:
            pm = r.predicted_magnitude
            rows.append([r.theta, r.sigma, r.k0, pm, *r.measured_b, r.relative_error])
            if not r.feasible:
                continue
            label = f"theta={r.theta:.6f} sigma={s:+d}"
            if abs(pm) < 1e-12:
                checks.append(suite.Check(f"shift {label}", "|<b>| <= 1e-4 / k0 at theta = pi/2",
                                          float(np.linalg.norm(r.measured_b) * r.k0), 1e-4))
            else:
                checks.append(suite.Check(f"shift {label}", "<b> = (sigma/k0) cot(theta) v0",
                                          r.relative_error, tol))
    if 1 in blocks and -1 in blocks:
        worst = 0.0
        for a, b in zip(blocks[1], blocks[-1]):
            if a.feasible and b.feasible:
                ma, mb = np.asarray(a.measured_b), np.asarray(b.measured_b)
                scale = max(np.linalg.norm(ma), 1.0 / a.k0)
                worst = max(worst, float(np.linalg.norm(ma + mb) / scale))
        checks.append(suite.Check("helicity_antisymmetry", "<b>(-sigma) = -<b>(sigma)", worst, 1e-6))
    write_csv(Path(out) / "shift_scan.csv",
              ["theta", "sigma", "k0", "predicted", "measured_x", "measured_y", "measured_z",
               "relative_error"], rows)
    extra = {"results": [r.to_dict() for s in blocks for r in blocks[s]],
             "infeasible": [[r.theta, r.sigma, r.message] for s in blocks for r in blocks[s]
                            if not r.feasible]}
    return _finish(checks, cfg, out, "shift_scan", extra)


def _fields_state(cfg):
    grid = cfg.build_grid()
    if cfg.fields["zero"]:
        return VectorWavefunction(grid, np.zeros(grid.shape + (3,), complex), None)
    ft = make_gaussian_packet(grid, cfg.k0(), cfg.packet["divergence"], cfg.packet["sigma"],
                              gauge=cfg.gauge)
    return embed(normalized(ft))


def cmd_fields(cfg: RunConfig, out):
    fc = cfg.fields
    times = [float(t) for t in fc["times"]]
    if not times:
        raise ConfigError("fields.times is empty")
    f = _fields_state(cfg)
    k0 = cfg.k0()
    w0 = k0 / np.linalg.norm(k0)
    trial = np.array([0.0, 1.0, 0.0]) if abs(w0[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e2 = trial - (trial @ w0) * w0
    e2 /= np.linalg.norm(e2)
    out = Path(out)
    files = []
    centroids = []
    for i, t in enumerate(times):
        # plane through the expected focus, spanned by the propagation axis and a transverse axis
        plane = SpatialSampling.plane(w0 * t, w0, e2, fc["plane"]["extent"], fc["plane"]["extent"],
                                      fc["plane"]["n"], fc["plane"]["n"], time=t)
        snap = snapshot(f, plane)
        name = f"fields_t{i:03d}.csv"
        snap.to_csv(out / name)
        files.append({"time": t, "file": name})
        line = SpatialSampling.line(np.zeros(3), w0, fc["line"]["s_min"], fc["line"]["s_max"],
                                    fc["line"]["n"], time=t)
        E, H = synthesize_EH(f, line)
        inten = np.sum(E**2 + H**2, axis=-1)
        centroids.append(envelope_centroid(line, np.sqrt(inten), w0) if inten.sum() > 0 else 0.0)
    checks = []
    zero = bool(fc["zero"])
    if not zero:
        rng = np.random.default_rng(cfg.seed)
        npts = int(fc["divergence_points"])
        pts = w0 * times[0] + rng.normal(scale=0.25 / cfg.packet["divergence"] / np.linalg.norm(k0),
                                         size=(npts, 3))
        samp = SpatialSampling(pts, times[0])
        delta = float(fc["divergence_delta"])
        for label, fn in (("coulomb_A", lambda s: synthesize_A(f, s)),
                          ("divergence_E", lambda s: synthesize_EH(f, s)[0])):
            div, scale = divergence(fn, samp, delta)
            ident = "div A = 0" if label == "coulomb_A" else "div E = 0"
            checks.append(suite.Check(label, ident, float(np.abs(div).max() / scale.max()), 1e-4))
        if len(times) > 1:
            dt = times[-1] - times[0]
            moved = centroids[-1] - centroids[0]
            checks.append(suite.Check("envelope_speed", "envelope moves at c along k0",
                                      float(abs(moved / dt - 1.0)) if dt else 0.0, 0.02))
    else:
        snapmax = 0.0
        for item in files:
            data = np.loadtxt(out / item["file"], delimiter=",", skiprows=1)
            snapmax = max(snapmax, float(np.abs(data[:, 3:]).max()))
        checks.append(suite.Check("zero_state", "f = 0 gives E = H = A = 0", snapmax, 0.0))
    extra = {"snapshots": files, "centroids": centroids, "propagation_axis": w0.tolist()}
    return _finish(checks, cfg, out, "fields", extra)


def cmd_gauge_demo(cfg: RunConfig, out):
    grid = cfg.build_grid()
    g, g2 = cfg.gauge, cfg.gauge2
    checks = []
    A = gz.berry_potential_field(grid, g)
    A2 = gz.berry_potential_field(grid, g2)
    phi = gz.gauge_angle_field(grid, g, g2)
    dphi = gz.phase_gradient(phi)
    m = dphi.mask & A.mask & A2.mask & grid.interior(2)
    if not m.any():
        raise ConfigError("no usable grid points in both gauges")
    dev = float(np.linalg.norm(A2.values - A.values - dphi.values, axis=-1)[m].max())
    checks.append(suite.Check("gauge_potential_shift", "max |A'_B - A_B - grad phi|", dev, 1e-4))

    ft = make_gaussian_packet(grid, cfg.k0(), cfg.packet["divergence"], cfg.packet["sigma"], gauge=g)
    # mix in the other helicity so the Stokes rotation is not trivial
    other = make_gaussian_packet(grid, cfg.k0(), cfg.packet["divergence"], -cfg.packet["sigma"], gauge=g)
    mixed = normalized(ft.replace(values=ft.values + 0.5 * other.values))
    moved = gauge_transform(mixed, g2)
    s1, _ = ops.poincare_local(mixed)
    s2, _ = ops.poincare_local(moved)
    mm = mixed.mask & moved.mask
    c, s = np.cos(2 * phi.values), np.sin(2 * phi.values)
    r1 = s1[..., 0] * c + s1[..., 1] * s
    r2 = -s1[..., 0] * s + s1[..., 1] * c
    stokes = max(np.abs(s2[..., 0] - r1)[mm].max(), np.abs(s2[..., 1] - r2)[mm].max(),
                 np.abs(s2[..., 2] - s1[..., 2])[mm].max())
    checks.append(suite.Check("stokes_rotation", "(s1', s2') rotate by 2 phi, s3' = s3",
                              float(stokes), 1e-12))

    rep = berry_phase_check(embed(ft), g, g2)
    checks.append(suite.Check("berry_phase_fit", "varpi' ft_sigma = exp(-i sigma phi) varpi ft_sigma",
                              max(rep.max_modulus_deviation, rep.max_phase_deviation), 1e-10,
                              {"sigma": rep.sigma, "points": rep.points}))

    # <x> needs broad, well-resolved states; the narrow packet above is too coarse for the stencil
    rng = np.random.default_rng(cfg.seed)
    fine = cfg.build_grid(n=cfg.gauge_demo["position_n"])
    worst = 0.0
    positions = []
    for _ in range(cfg.gauge_demo["position_states"]):
        st = random_smooth_state(fine, rng, gauge=g, width_range=suite.COVARIANCE_WIDTHS, center_range=0.1)
        x1 = ops.expectation_vector(ops.op_position(g), st).real
        x2 = ops.expectation_vector(ops.op_position(g2), gauge_transform(st, g2)).real
        worst = max(worst, float(np.abs(x1 - x2).max()))
        positions.append([x1.tolist(), x2.tolist()])
    checks.append(suite.Check("position_invariance", "<x'> in gauge I' = <x> in gauge I",
                              worst, 1e-6, {"n": fine.n[0]}))
    extra = {"gauge": list(g.vector), "gauge2": list(g2.vector),
             "positions": positions}
    return _finish(checks, cfg, out, "gauge_demo", extra)


COMMANDS = {
    "verify": cmd_verify,
    "shift-scan": cmd_shift_scan,
    "fields": cmd_fields,
    "gauge-demo": cmd_gauge_demo,
}


def build_parser():
    p = argparse.ArgumentParser(prog="photon", description="Photon wavefunction numerics")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        status = COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logger.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    return status


if __name__ == "__main__":
    sys.exit(main())
