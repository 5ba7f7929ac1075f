"""Pipeline orchestration and the ``freebound`` command line.

``run_pipeline`` goes validate, transform, constants, outer solve, extend,
invert and (optionally) compare, writing one CSV per stage plus a
``summary.json``.  Exit status: 0 success, 2 invalid input, 3 no
convergence (whatever was computed is still written).
"""

import argparse
from dataclasses import replace
import json
import math
from pathlib import Path
import sys
import time
import warnings

import numpy as np

from . import _accel
from .config import RunConfig, parse_config
from .constants import compute_constants
from .errors import (
    BlowUpError,
    ConfigError,
    DegenerateGeometryError,
    FreeBoundError,
    HorizonExceededError,
    InvalidInputError,
    InvalidProfileError,
    ConstraintViolationError,
    NoConvergenceError,
    PartialResultError,
)
from .oracle import FrontFixGrid, compare, solve_frontfix
from .physical import invert_chain, residual_report, invert_solution
from .problem import build_transformed_problem, validate_problem
from .quadrature import TimeGrid
from .volterra import HorizonWarning, Segment, extend_solution, outer_solve

EXIT_OK, EXIT_INVALID, EXIT_NOCONV = 0, 2, 3

_INVALID = (ConfigError, InvalidInputError, InvalidProfileError, ConstraintViolationError,
            DegenerateGeometryError)
_NOCONV = (NoConvergenceError, PartialResultError, HorizonExceededError, BlowUpError)


def write_csv(path, header, columns):
    """Columns side by side, 17 significant digits, one header row."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def _write_constants(path, led, sigma):
    with open(path, "w") as fh:
        fh.write("name,value [-]\n")
        for name, value in led.rows():
            fh.write(f"{name},{value:.17g}\n")
        fh.write(f"sigma_used,{sigma:.17g}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _stitch(chain, attr):
    parts = [getattr(seg.state, attr) for seg in chain]
    return np.concatenate([parts[0]] + [q[1:] for q in parts[1:]])


def _write_states(out, chain):
    t = _stitch(chain, "times")
    write_csv(out / "densities.csv", ["t [-]", "chi1 [-]", "chi2 [-]", "w0 [-]"],
              [t, _stitch(chain, "chi1_nodes"), _stitch(chain, "chi2_nodes"), _stitch(chain, "w0")])
    write_csv(out / "boundaries.csv", ["t [-]", "y0 [-]", "y1 [-]", "C [-]"],
              [t, _stitch(chain, "y0"), _stitch(chain, "y1"), _stitch(chain, "C_of_t")])


def _write_solution(out, sol):
    t = np.concatenate([np.full(len(x), tk) for tk, x in zip(sol.times, sol.x)])
    write_csv(out / "solution.csv", ["t [-]", "x [-]", "u [-]"], [t, np.concatenate(sol.x), np.concatenate(sol.u)])
    write_csv(out / "front.csv", ["t [-]", "s [-]"], [sol.times, sol.s])


_RES_KEYS = ("pde", "neumann", "dirichlet", "stefan", "flux_a")


def _residuals(chain, p, Ny, stride):
    per = {k: [] for k in ("t",) + _RES_KEYS}
    maxima = {k: 0.0 for k in _RES_KEYS}
    for i, seg in enumerate(chain):
        sol = invert_solution(seg.state, seg.tp, p, Ny, stride)
        rep = residual_report(sol, seg.state, p, seg.tp)
        skip = 0 if i == 0 else 1
        for k in per:
            per[k].append(np.asarray(rep.per_time[k])[skip:])
        for k in _RES_KEYS:
            maxima[k] = max(maxima[k], getattr(rep, k))
    return {k: np.concatenate(v) for k, v in per.items()}, maxima


def _write_residuals(out, per):
    write_csv(out / "residuals.csv",
              ["t [-]", "pde [-]", "neumann [-]", "dirichlet [-]", "stefan [-]", "flux [-]"],
              [per[k] for k in ("t",) + _RES_KEYS])


def _segment_summary(seg):
    st = seg.state
    return {
        "t0": seg.t0,
        "t_end": seg.t_end,
        "outer_history": list(st.outer_history),
        "inner_iterations": st.iterations,
        "inner_history": list(st.history),
        "inner_ratios": list(st.ratios),
    }


def run_pipeline(cfg: RunConfig, log=None):
    """Run the stages selected by ``cfg.mode``; returns ``(exit_code, summary)``.

    Artifacts go to ``cfg.out``.  Errors are recorded in the summary rather
    than raised.
    """
    log = log or (lambda msg: None)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"status": "ok", "mode": cfg.mode, "backend": _accel.backend(), "config": cfg.as_dict(),
               "errors": [], "warnings": []}
    code = EXIT_OK
    started = time.perf_counter()
    chain = []
    try:
        p = cfg.build_problem()
        report = validate_problem(p)
        summary["validation"] = {c.name: {"passed": bool(c.passed), "defect": c.defect} for c in report.checks}
        log(report.summary())
        if not report.passed:
            names = ", ".join(c.name for c in report.failures())
            raise InvalidInputError(f"data violate: {names}")
        if cfg.mode == "validate-only":
            return code, summary

        tp = build_transformed_problem(p, cfg.C1)
        led = compute_constants(tp, p)
        sigma = led.sigma_star if cfg.sigma == "auto" else float(cfg.sigma)
        _write_constants(out / "constants.csv", led, sigma)
        summary["constants"] = {"M": led.M, "H": led.H, "R": led.R, "sigma_star": led.sigma_star,
                                "binding": led.binding, "sigma": sigma, "C1": tp.C1, "C2": tp.C2}
        log(f"sigma_star = {led.sigma_star:.6e} (binding: {led.binding}); using sigma = {sigma:.6e}")
        if cfg.mode == "constants-only":
            return code, summary

        solve_kw = dict(tol_outer=cfg.tol_outer, relax=cfg.relax, max_outer=cfg.max_outer, tol=cfg.tol,
                        max_iter=cfg.max_iter, Ny=cfg.Ny, jump=cfg.jump)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", HorizonWarning)
            try:
                state = outer_solve(tp, p, TimeGrid(sigma, cfg.N), **solve_kw)
            except NoConvergenceError as exc:
                if exc.state is not None:
                    chain = [Segment(tp, exc.state)]
                raise
            chain = [Segment(tp, state)]
            T = cfg.T if cfg.T is not None else sigma
            if T > sigma * (1 + 1e-12):
                try:
                    chain = extend_solution(state, tp, p, T, **solve_kw)
                except PartialResultError as exc:
                    chain = list(exc.segments)
                    raise
        summary["warnings"] += [str(w.message) for w in caught]
        summary["segments"] = [_segment_summary(s) for s in chain]
        log(f"solved {len(chain)} segment(s) to t = {chain[-1].t_end:.6e}")

        _write_states(out, chain)
        sol = invert_chain(chain, p, cfg.Ny, cfg.stride)
        _write_solution(out, sol)
        per, maxima = _residuals(chain, p, cfg.Ny, cfg.stride)
        _write_residuals(out, per)
        summary["residuals"] = maxima

        if cfg.mode == "solve+oracle":
            ff = solve_frontfix(p, FrontFixGrid(cfg.Nx, float(sol.times[-1]), cfg.safety), sol.times)
            rep = compare(sol, ff)
            write_csv(out / "comparison.csv",
                      ["t [-]", "s_integral [-]", "s_oracle [-]", "s_abs_err [-]", "u_sup_err [-]"],
                      [rep.times, np.interp(rep.times, sol.times, sol.s), np.interp(rep.times, ff.times, ff.s),
                       rep.s_err, rep.u_err])
            summary["comparison"] = rep.as_dict()
            log(f"front relative sup-error vs oracle: {rep.s_rel_sup:.3e}")
    except _INVALID as exc:
        code = EXIT_INVALID
        summary["errors"].append(f"{type(exc).__name__}: {exc}")
    except _NOCONV as exc:
        code = EXIT_NOCONV
        summary["errors"].append(f"{type(exc).__name__}: {exc}")
        if isinstance(exc, NoConvergenceError):
            summary["no_convergence"] = {"history": list(exc.history), "ratios": list(exc.ratios)}
        if chain:
            summary["segments"] = [_segment_summary(s) for s in chain]
            try:
                _write_states(out, chain)
            except FreeBoundError as inner:  # pragma: no cover - best effort
                summary["errors"].append(f"partial write failed: {inner}")
    finally:
        summary["elapsed_s"] = time.perf_counter() - started
        if code != EXIT_OK:
            summary["status"] = "invalid" if code == EXIT_INVALID else "no-convergence"
        summary["exit_code"] = code
        (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return code, summary


_MODES = {"solve": "solve", "compare": "solve+oracle", "constants": "constants-only", "validate": "validate-only"}


def _sigma_arg(text):
    if text.lower() == "auto":
        return "auto"
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"sigma must be positive, got {text}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="freebound", description="Free-boundary problem solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "solve and write densities, boundaries, solution, front and residuals",
        "compare": "solve, then cross-check the front against the finite-difference oracle",
        "constants": "write the constants ledger and the certified horizon only",
        "validate": "check the data hypotheses only",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="configuration file")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--sigma", type=_sigma_arg, help="horizon, or 'auto' for sigma_star")
        sp.add_argument("--grid", type=int, help="number of time cells N")
        sp.add_argument("-q", "--quiet", action="store_true", help="no progress output")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        cfg = parse_config(args.config)
        changes = {"mode": _MODES[args.command]}
        if args.out is not None:
            changes["out"] = args.out
        if args.sigma is not None:
            changes["sigma"] = args.sigma
        if args.grid is not None:
            if args.grid < 8:
                raise ConfigError(f"--grid must be at least 8, got {args.grid}")
            changes["N"] = args.grid
        cfg = replace(cfg, **changes)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    code, summary = run_pipeline(cfg, log)
    for err in summary["errors"]:
        print(f"error: {err}", file=sys.stderr)
    log(f"status: {summary['status']} (artifacts in {cfg.out})")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
