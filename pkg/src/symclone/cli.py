"""Command-line interface: ``symclone <command> [options]``.

Every command writes a JSON report or CSV table (to ``--out`` or stdout) and
exits 0 only if its internal checks pass, 1 if a check fails, 2 on bad input.
Relative ``--out`` paths are placed under ``$SYMCLONE_OUT_DIR`` when it is set.
Existing files are never overwritten without ``--force``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .gaussian import (SUBSYSTEMS, ThermalConfig, analytic_stats, corruption_report, histogram_grid,
                       initial_state, pushforward, sample, source_exponent_closed_form, standard_errors,
                       subsystem, summary_stats, target_exponent_closed_form)
from .hamiltonian import spectral_split, symplectic_polar, two_stage_clone
from .io import (OutputExistsError, dump_json, histogram_to_csv, matrix_from_json, matrix_to_json,
                 samples_to_csv, write_text)
from .manifolds import (ConfigLift, EuclideanChart, ExponentialChart, IDENTITY_Q, cotangent_lift,
                        group_clone, group_clone_inverse, lifted_symplectic_check,
                        random_unit_quaternions, torus_clone)
from .matfuncs import mat_exp
from .optics import (BeamGeometry, FwmConfig, OpticalMode, fwm_outputs, modulated_run,
                     phase_match_residual, phase_match_status, pump_noise_series, quadrature_map_check)
from .reference import CLONE_MAP, CONFIG_MAP, GENERATOR_TABLE_TOL, ROTATION_GENERATOR, SHEAR_GENERATOR
from .symplectic import (TIME_REVERSAL, CloningChoices, build_cloning_map, is_antisymplectic,
                         is_generator, is_symplectic, verify_cloning)

OUT_DIR_ENV = "SYMCLONE_OUT_DIR"


class UsageError(Exception):
    pass


# --- parsing helpers -------------------------------------------------------

def _parse_vector(text: str, dtype=float) -> np.ndarray:
    try:
        return np.array([dtype(v) for v in text.replace(" ", "").split(",") if v], dtype=dtype)
    except ValueError as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from None


def _parse_matrix(text: str) -> np.ndarray:
    """``"1,0;0,-1"`` style; integers stay integers."""
    rows = [r for r in text.replace(" ", "").split(";") if r]
    try:
        vals = [[float(v) for v in r.split(",")] for r in rows]
    except ValueError as exc:
        raise UsageError(f"bad matrix {text!r}: {exc}") from None
    M = np.array(vals)
    if M.ndim != 2:
        raise UsageError(f"bad matrix {text!r}: ragged rows")
    return M.astype(np.int64) if np.all(M == np.round(M)) else M


def _load_map(path) -> np.ndarray:
    if path is None:
        return build_cloning_map().matrix
    try:
        return matrix_from_json(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read map {path}: {exc}") from None


def _resolve(path):
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(args, text: str, path=None):
    target = _resolve(path if path is not None else args.out)
    if target is None:
        sys.stdout.write(text)
    else:
        write_text(target, text, force=args.force)


def _finish(report: dict) -> int:
    checks = report.get("checks", {})
    return 0 if all(bool(v) for v in checks.values()) else 1


# --- commands --------------------------------------------------------------

def cmd_make_map(args) -> int:
    F = _parse_matrix(args.F) if args.F else TIME_REVERSAL
    choices = {}
    if args.choices_file:
        try:
            choices = json.loads(Path(args.choices_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read choices file: {exc}") from None
    try:
        cc = CloningChoices(F=F, **{k: tuple(map(tuple, v)) if k != "third_seeds" else tuple(v)
                                    for k, v in choices.items()})
        M = build_cloning_map(cc).matrix
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    out = matrix_to_json(M, label="clone-map")
    out["checks"] = {"symplectic": is_symplectic(M), "cloning": verify_cloning(M, F)}
    _emit(args, dump_json(out))
    return _finish(out)


def _reference_deviation(M, X, Y):
    if M.shape != CLONE_MAP.shape or not np.array_equal(M, CLONE_MAP):
        return None
    return {"X": float(np.max(np.abs(X - SHEAR_GENERATOR))),
            "Y": float(np.max(np.abs(Y - ROTATION_GENERATOR))),
            "tol": GENERATOR_TABLE_TOL}


def _decompose(M, method):
    if method == "polar":
        return symplectic_polar(M)
    return spectral_split(M)


def cmd_decompose(args) -> int:
    M = _load_map(args.map)
    if not is_symplectic(M, args.tol):
        raise UsageError("map is not symplectic")
    if not args.tau > 0:
        raise UsageError("--tau must be positive")
    X, Y = _decompose(M, args.method)
    err = float(np.max(np.abs(mat_exp(X) @ mat_exp(Y) - M)))
    checks = {"reconstruction": err <= 1e-10,
              "X_generator": is_generator(X, args.tol), "Y_generator": is_generator(Y, args.tol)}
    report = {"method": args.method, "tau": args.tau, "X": X, "Y": Y,
              "h1": X / args.tau, "h2": Y / args.tau, "reconstruction_error": err}
    if args.method == "polar":
        P, U = mat_exp(X), mat_exp(Y)
        checks["shear_spd"] = bool(np.allclose(P, P.T, atol=1e-9) and np.linalg.eigvalsh((P + P.T) / 2)[0] > 0)
        checks["rotation_orthogonal"] = bool(np.max(np.abs(U.T @ U - np.eye(len(U)))) <= 1e-9)
    ref = _reference_deviation(M, X, Y)
    if ref is not None:
        report["reference_deviation"] = ref
        checks["reference_tables"] = max(ref["X"], ref["Y"]) <= ref["tol"]
    report["checks"] = checks
    _emit(args, dump_json(report))
    return _finish(report)


def cmd_evolve(args) -> int:
    x0 = _parse_vector(args.x0)
    if args.generators:
        try:
            data = json.loads(Path(args.generators).read_text())
            X, Y = np.array(data["X"], dtype=float), np.array(data["Y"], dtype=float)
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot read generators: {exc}") from None
        M = mat_exp(X) @ mat_exp(Y)
    else:
        M = _load_map(args.map)
        X, Y = _decompose(M, args.method)
    if x0.shape[0] != M.shape[0]:
        raise UsageError(f"x0 has {x0.shape[0]} entries, map is {M.shape[0]}-dimensional")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    traj = two_stage_clone(x0, X, Y, steps=args.steps, tau=args.tau)
    direct = np.asarray(M, dtype=float) @ x0
    err = float(np.max(np.abs(traj.endpoint - direct)))
    _emit(args, traj.to_csv())
    report = {"endpoint": traj.endpoint, "direct": direct, "endpoint_error": err,
              "checks": {"endpoint": err <= args.tol}}
    sys.stderr.write(dump_json(report))
    return _finish(report)


def cmd_thermal(args) -> int:
    if not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    M = _load_map(args.map)
    cfg = ThermalConfig(args.alpha_s, args.alpha, args.alpha, args.mu_q, args.mu_p)
    report = corruption_report(cfg, M)
    checks = {}
    a = args.alpha
    if args.alpha_s == 1 and M.shape == CLONE_MAP.shape and np.array_equal(M, CLONE_MAP):
        final = pushforward(initial_state(cfg), M)
        closed = {"source": source_exponent_closed_form(a), "target": target_exponent_closed_form(a)}
        rel = {}
        for name, ref in closed.items():
            got = subsystem(final, name).exponent_matrix
            rel[name] = float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
        report["closed_form"] = {"delta_s": a * a + 10 * a + 8, "delta_t": a * a + 5 * a + 5,
                                 "source": closed["source"], "target": closed["target"],
                                 "max_relative_error": rel}
        checks["closed_form"] = max(rel.values()) <= 1e-10
    zt = report["zero_temperature"]["max_deviation"]
    checks["zero_temperature"] = all(v is not None and v <= 1e-6 for v in zt.values())
    final_means = {k: np.array(v["mean"]) for k, v in report["subsystems"].items()}
    ideal = {k: np.array(v["ideal_mean"]) for k, v in report["subsystems"].items()}
    checks["means_cloned"] = all(np.allclose(final_means[k], ideal[k], atol=1e-12) for k in SUBSYSTEMS)
    report["checks"] = checks
    _emit(args, dump_json(report))
    return _finish(report)


def _fig2_config(args):
    alpha_m = args.beta / 2
    alpha_t = alpha_m if args.thermal_target else math.inf
    return ThermalConfig(math.inf, alpha_t, alpha_m, args.mu_q, args.mu_p)


def cmd_sample(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required")
    if args.n < 2:
        raise UsageError("--n must be at least 2 to compute statistics")
    if not args.beta > 0:
        raise UsageError("--beta must be positive")
    M = _load_map(args.map)
    final = pushforward(initial_state(_fig2_config(args)), M)
    draws = sample(final, args.n, args.seed, chunk_size=args.chunk_size, workers=args.workers)
    report = {"n": args.n, "seed": args.seed, "beta": args.beta, "subsystems": {}}
    checks = {}
    per = {}
    for name, idx in SUBSYSTEMS.items():
        x = draws[:, list(idx)]
        per[name] = x
        st = summary_stats(x)
        an = analytic_stats(subsystem(final, name))
        se = standard_errors(an, args.n)
        z = {k: (abs(getattr(st, k) - getattr(an, k)) / se[k] if se[k] > 0 else 0.0) for k in se}
        report["subsystems"][name] = {"sample": st.as_dict(), "analytic": an.as_dict(),
                                      "standard_error": se, "z_score": z}
        checks[f"{name}_within_3se"] = max(z.values()) <= 3.0
    report["checks"] = checks
    _emit(args, dump_json(report))
    if args.samples_out:
        write_text(_resolve(args.samples_out), samples_to_csv(per), force=args.force)
    if args.hist_out:
        parts = []
        for name, x in per.items():
            qe, pe, counts = histogram_grid(x, bins=args.bins)
            text = histogram_to_csv(qe, pe, counts, subsystem=name)
            parts.append(text if not parts else text.split("\n", 1)[1])
        write_text(_resolve(args.hist_out), "".join(parts), force=args.force)
    return _finish(report)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"bad complex number {text!r}") from None


def _read_signal(path):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read signal file: {exc}") from None
    names = data.dtype.names or ()
    if not {"t", "re", "im"} <= set(names):
        raise UsageError("signal file needs columns t,re,im")
    data = np.atleast_1d(data)
    return data["t"], data["re"] + 1j * data["im"]


def cmd_optics(args) -> int:
    if args.signal_file:
        t, A1 = _read_signal(args.signal_file)
    else:
        t = np.linspace(0.0, 1.0, args.points)
        A1 = (1 + 0.5 * np.sin(2 * np.pi * 3 * t)) + 2j * np.cos(2 * np.pi * 2 * t)
    if A1.size == 0:
        raise UsageError("empty signal")
    pumps = [_parse_complex(v) for v in args.pumps.split(",")] if args.pumps else [1, 1]
    if len(pumps) != 2:
        raise UsageError("--pumps takes two complex amplitudes A2,A3")
    try:
        cfg = FwmConfig(chi3=args.chi3, eps0=args.eps0, A2=pumps[0], A3=pumps[1],
                        normalize=not args.raw_gains, omega=args.omega, c_tilde=args.c_tilde)
        geom = BeamGeometry.collinear(cfg.k_magnitude, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    eta = pump_noise_series(A1.size, args.noise_std, args.seed) if args.noise_std > 0 else None
    run = modulated_run(A1, cfg, geom, t=t, pump_noise=eta)
    _emit(args, run.to_csv())

    clone, anti = fwm_outputs(OpticalMode(geom.k1, 1.0, cfg.omega), cfg, geom)
    residuals = {"clone": phase_match_residual(clone, cfg.c_tilde),
                 "anticlone": phase_match_residual(anti, cfg.c_tilde)}
    status = {"clone": phase_match_status(clone, cfg.c_tilde),
              "anticlone": phase_match_status(anti, cfg.c_tilde)}
    scale = 1.0 if eta is None else 1.0 + eta
    checks = {
        "conjugation_antisymplectic": quadrature_map_check(),
        "clone_channel": bool(np.allclose(run.clone, cfg.g_clone * scale * A1, rtol=0, atol=1e-12)),
        "anticlone_channel": bool(np.allclose(run.anticlone, cfg.g_anticlone * scale * np.conj(A1),
                                              rtol=0, atol=1e-12)),
        "phase_matched": all(s != "mismatched" for s in status.values()),
    }
    report = {"geometry": geom.as_dict(), "residuals": residuals, "status": status,
              "gains": {"clone": cfg.g_clone, "anticlone": cfg.g_anticlone}, "checks": checks}
    if args.geometry_out:
        write_text(_resolve(args.geometry_out), dump_json(report), force=args.force)
    else:
        sys.stderr.write(dump_json(report))
    return _finish(report)


def _group_su2(n, seed):
    u = random_unit_quaternions(n, seed)
    t = random_unit_quaternions(n, seed + 1)
    m = random_unit_quaternions(n, seed + 2)
    e = np.tile(IDENTITY_Q, (n, 1))
    back = group_clone_inverse(*group_clone(u, t, m))
    fwd = group_clone(*group_clone_inverse(u, t, m))
    cl = group_clone(u, e, e)
    rt = max(float(np.max(np.abs(a - b))) for a, b in zip(back, (u, t, m)))
    rt2 = max(float(np.max(np.abs(a - b))) for a, b in zip(fwd, (u, t, m)))
    clone_err = max(float(np.max(np.abs(a - u))) for a in cl)

    def cmap(x):
        return np.stack(group_clone(x[..., 0, :], x[..., 1, :], x[..., 2, :]), axis=-2)

    chart = ExponentialChart()
    res = []
    for i in range(min(n, 20)):
        pt = random_unit_quaternions(3, seed + 100 + i)
        res.append(lifted_symplectic_check(cmap, chart, pt, seed=seed + i, vectorized=True).residual)
    worst = max(res)
    return {"n": n, "roundtrip_error": rt, "inverse_roundtrip_error": rt2, "clone_error": clone_err,
            "lift_residual_max": worst,
            "checks": {"roundtrip": rt <= 1e-12 and rt2 <= 1e-12, "clone": clone_err <= 1e-12,
                       "lift_symplectic": worst <= 1e-6}}


def _group_torus(n, seed):
    rng = np.random.default_rng(seed)
    s = rng.uniform(0, 1, (n, 2))
    x = np.zeros((n, 6))
    x[:, :2] = s
    y = torus_clone(CLONE_MAP, x)
    want = np.mod(np.concatenate([s, s, s @ TIME_REVERSAL.T], axis=1), 1.0)
    d = np.abs(y - want)
    clone_err = float(np.max(np.minimum(d, 1 - d)))
    z = rng.uniform(0, 1, (n, 6))
    shift = rng.integers(-5, 6, (n, 6))
    d2 = np.abs(torus_clone(CLONE_MAP, z + shift) - torus_clone(CLONE_MAP, z))
    equiv_err = float(np.max(np.minimum(d2, 1 - d2)))
    L = np.asarray(CONFIG_MAP, dtype=float)
    lift = lifted_symplectic_check(lambda q: L @ q, EuclideanChart(), rng.uniform(0, 1, 3),
                                   jacobian=lambda q: L, tol=1e-10)
    return {"n": n, "clone_error": clone_err, "equivariance_error": equiv_err,
            "lift_residual": lift.residual,
            "checks": {"clone": clone_err <= 1e-12, "equivariant": equiv_err <= 1e-12,
                       "lift_symplectic": lift.passed,
                       "config_lift_symplectic": is_symplectic(cotangent_lift(ConfigLift(CONFIG_MAP)))}}


def cmd_group(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    report = _group_su2(args.n, args.seed) if args.demo == "su2" else _group_torus(args.n, args.seed)
    report["demo"] = args.demo
    _emit(args, dump_json(report))
    return _finish(report)


def run_checks() -> dict:
    """Built-in verification suite behind ``--check``."""
    M = build_cloning_map().matrix
    X, Y = spectral_split(M)
    checks = {
        "map_matches_reference": bool(np.array_equal(M, CLONE_MAP)),
        "map_symplectic": is_symplectic(M),
        "map_clones": verify_cloning(M),
        "F_antisymplectic": is_antisymplectic(TIME_REVERSAL),
        "split_reconstructs": float(np.max(np.abs(mat_exp(X) @ mat_exp(Y) - M))) <= 1e-10,
        "split_matches_tables": max(np.max(np.abs(X - SHEAR_GENERATOR)),
                                    np.max(np.abs(Y - ROTATION_GENERATOR))) <= GENERATOR_TABLE_TOL,
        "conjugation_antisymplectic": quadrature_map_check(),
    }
    for a in (0.5, 1, 2, 10, 100):
        final = pushforward(initial_state(ThermalConfig(1, a, a)), M)
        ok = True
        for name, ref in (("source", source_exponent_closed_form(a)),
                          ("target", target_exponent_closed_form(a))):
            got = subsystem(final, name).exponent_matrix
            ok &= np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))
        checks[f"thermal_closed_form_alpha_{a:g}"] = bool(ok)
    checks.update({f"su2_{k}": v for k, v in _group_su2(200, 0)["checks"].items()})
    checks.update({f"torus_{k}": v for k, v in _group_torus(200, 0)["checks"].items()})
    return {"checks": checks, "passed": all(checks.values())}


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symclone", description="Linear symplectic cloning toolkit.")
    p.add_argument("--version", action="store_true", help="print version as JSON and exit")
    p.add_argument("--check", action="store_true", help="run the built-in verification suite")
    sub = p.add_subparsers(dest="command")

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--force", action="store_true", help="overwrite existing outputs")
        sp.set_defaults(func=func)
        return sp

    sp = add("make-map", cmd_make_map, "build a cloning map by Gram-Schmidt")
    sp.add_argument("--F", help="antisymplectic 2x2 matrix, e.g. '1,0;0,-1'")
    sp.add_argument("--choices-file", help="JSON with second_pair, third_seeds, third_pair")

    sp = add("decompose", cmd_decompose, "factor a symplectic map into two Hamiltonian flows")
    sp.add_argument("--map", help="matrix JSON (default: the integer cloning map)")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--method", choices=["spectral", "polar"], default="spectral")
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("evolve", cmd_evolve, "two-stage Hamiltonian trajectory as CSV")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--map")
    g.add_argument("--generators", help="JSON with X and Y, e.g. decompose output")
    sp.add_argument("--method", choices=["spectral", "polar"], default="spectral")
    sp.add_argument("--x0", default="1,1,0,0,0,0")
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("thermal", cmd_thermal, "analytic thermal corruption report")
    sp.add_argument("--alpha", type=float, default=2.0, help="target and machine width (beta/2)")
    sp.add_argument("--alpha-s", type=float, default=1.0)
    sp.add_argument("--mu-q", type=float, default=0.0)
    sp.add_argument("--mu-p", type=float, default=0.0)
    sp.add_argument("--map")

    sp = add("sample", cmd_sample, "Monte Carlo samples and statistics")
    sp.add_argument("--beta", type=float, default=730.0)
    sp.add_argument("--mu-q", type=float, default=5.0)
    sp.add_argument("--mu-p", type=float, default=8.0)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--thermal-target", action="store_true", help="target also thermal (default delta)")
    sp.add_argument("--chunk-size", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--samples-out", help="CSV of samples (subsystem,q,p)")
    sp.add_argument("--hist-out", help="CSV of 2D histogram bins")
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--map")

    sp = add("optics", cmd_optics, "four-wave-mixing channel time series as CSV")
    sp.add_argument("--signal-file", help="CSV with columns t,re,im")
    sp.add_argument("--points", type=int, default=200, help="length of the built-in test signal")
    sp.add_argument("--pumps", help="A2,A3 as complex numbers, e.g. '2,3i'")
    sp.add_argument("--raw-gains", action="store_true", help="use eps0*chi3*pump gains, not unit gains")
    sp.add_argument("--chi3", type=float, default=1.0)
    sp.add_argument("--eps0", type=float, default=1.0)
    sp.add_argument("--omega", type=float, default=1.0)
    sp.add_argument("--c-tilde", type=float, default=1.0)
    sp.add_argument("--delta", type=float, default=0.0, help="transverse offset of the signal beam")
    sp.add_argument("--noise-std", type=float, default=0.0, help="relative pump noise")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--geometry-out", help="JSON geometry and check report")

    sp = add("group", cmd_group, "cloning on SU(2) or the torus")
    sp.add_argument("--demo", choices=["su2", "torus"], default="su2")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=1000)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        sys.stdout.write(json.dumps({"name": "symclone", "version": __version__}) + "\n")
        return 0
    if args.check:
        report = run_checks()
        sys.stdout.write(dump_json(report))
        return 0 if report["passed"] else 1
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, OutputExistsError) as exc:
        sys.stderr.write(f"symclone {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
