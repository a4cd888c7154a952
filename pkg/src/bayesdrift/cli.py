"""Command-line front end: ``bayesdrift {solve,evaluate,probe}``.

Run configuration (JSON, ``schema_version`` 1)::

    {
      "schema_version": 1,
      "prior": {"kind": "gaussian", "m": 0.0, "gamma": 1.0},
      "c": 0.5,
      "mode": "finite",            # or "perpetual"
      "T": 1.0,                    # horizon, or window length when perpetual
      "solver": {"n_time": 128, "quad_order": null, "grid": "uniform", ...},
      "sim": {"n_paths": 100000, "dt": 0.001, "seed": 0, "antithetic": false,
              "horizon_cap": null},
      "probe": {"T_large": 200.0, "n_paths": 20000}    # optional
    }

Unknown keys are rejected.  Missing optional sections take the defaults of
:class:`SolverConfig` and :class:`SimConfig`.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError, DomainError, PriorError, SolverError
from .mc import SimConfig, evaluate_policy, terminal_distribution_probe
from .prior import mass_nonneg, prior_from_dict, prior_to_dict, support_gap
from .solver import BoundaryCurve, SolverConfig, asymptote, integral_residual, solve_finite, solve_perpetual, value_at

SCHEMA_VERSION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_TOP_KEYS = {"schema_version", "prior", "c", "mode", "T", "solver", "sim", "probe"}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"T"}
_SIM_KEYS = {f.name for f in fields(SimConfig)}
_PROBE_KEYS = {"T_large", "n_paths"}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _number(value, name, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"'{name}' must be a finite number (got {value!r})")
    if positive and not value > 0:
        raise ConfigError(f"'{name}' must be positive (got {value!r})")
    return float(value)


def _unknown(section: dict, allowed: set, where: str):
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) {extra} in {where}; allowed: {sorted(allowed)}")


def load_config(path, seed: int | None = None) -> dict:
    """Read, validate and normalize a run configuration.

    Returns a dict with every default filled in, so that echoing it
    reproduces the run exactly.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {str(path)!r} is not valid JSON: {exc}") from None
    return normalize_config(raw, seed)


def normalize_config(raw: dict, seed: int | None = None) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _unknown(raw, _TOP_KEYS, "config")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION} (got {version!r})")
    if "prior" not in raw:
        raise ConfigError("config needs a 'prior' object")
    prior = prior_from_dict(raw["prior"])
    c = _number(raw.get("c"), "c")
    mode = raw.get("mode", "finite")
    if mode not in ("finite", "perpetual"):
        raise ConfigError(f"'mode' must be 'finite' or 'perpetual' (got {mode!r})")
    T = _number(raw.get("T", 1.0), "T")

    solver_raw = raw.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise ConfigError("'solver' must be an object")
    _unknown(solver_raw, _SOLVER_KEYS, "'solver'")
    solver = asdict(SolverConfig(T=T, **solver_raw))
    solver.pop("T")

    sim_raw = dict(raw.get("sim", {}))
    if not isinstance(sim_raw, dict):
        raise ConfigError("'sim' must be an object")
    _unknown(sim_raw, _SIM_KEYS, "'sim'")
    if seed is not None:
        sim_raw["seed"] = seed
    sim = asdict(SimConfig(**sim_raw))

    out = {
        "schema_version": SCHEMA_VERSION,
        "prior": prior_to_dict(prior),
        "c": c,
        "mode": mode,
        "T": T,
        "solver": solver,
        "sim": sim,
    }
    if "probe" in raw:
        probe = raw["probe"]
        if not isinstance(probe, dict):
            raise ConfigError("'probe' must be an object")
        _unknown(probe, _PROBE_KEYS, "'probe'")
        T_large = _number(probe.get("T_large", 200.0), "probe.T_large")
        if T_large < 100.0:
            raise ConfigError("'probe.T_large' must be at least 100")
        n = probe.get("n_paths", 20000)
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError(f"'probe.n_paths' must be a positive integer (got {n!r})")
        out["probe"] = {"T_large": T_large, "n_paths": n}
    return out


def _solver_config(cfg: dict) -> SolverConfig:
    return SolverConfig(T=cfg["T"], **cfg["solver"])


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def write_boundaries(path: Path, curve: BoundaryCurve) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,b1,b2\n")
        for t, a, b in zip(curve.times, curve.b1, curve.b2):
            fh.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")


def read_boundaries(path: Path, horizon_kind: str = "finite") -> BoundaryCurve:
    """Parse a boundaries CSV and check the curve invariants.

    Raises
    ------
    ConfigError
        On a missing file, a bad header or a malformed row (with its line
        number), or when the curve breaks an invariant.
    """
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise ConfigError(f"boundaries file {str(path)!r} not found") from None
    rows = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "b1", "b2"]:
            raise ConfigError(f"{path}: line 1: expected header 't,b1,b2' (got {header!r})")
        for line, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ConfigError(f"{path}: line {line}: expected 3 fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise ConfigError(f"{path}: line {line}: non-numeric value in {row!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise ConfigError(f"{path}: line {line}: non-finite value in {row!r}")
            rows.append(vals)
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least two data rows")
    arr = np.array(rows)
    curve = BoundaryCurve(arr[:, 0], arr[:, 1], arr[:, 2], horizon_kind)
    problems = curve.violations()
    if problems:
        raise ConfigError(f"{path}: invalid boundary curve: " + "; ".join(problems))
    return curve


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _clean(x):
    """JSON-safe floats (non-finite values become null)."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: dict, out: Path) -> int:
    prior = prior_from_dict(cfg["prior"])
    c = cfg["c"]
    scfg = _solver_config(cfg)
    pi0 = mass_nonneg(prior)
    if cfg["mode"] == "finite":
        curve = solve_finite(prior, c, scfg)
        full = curve
        tol = {
            "root_tol": scfg.root_tol,
            "sweep_movement": curve.info["sweep_movement"],
            "max_integral_residual": float(np.max(integral_residual(prior, c, curve))),
        }
    else:
        curve = solve_perpetual(prior, c, scfg)
        full = curve.info["final_curve"]
        tol = {
            "root_tol": scfg.root_tol,
            "perpetual_change": curve.info["achieved_tol"],
            "perpetual_converged": curve.info["converged"],
            "T_effective": curve.info["T_effective"],
            "monotone_in_horizon": curve.info["monotone"],
        }
    v0 = float(value_at(prior, c, full, 0.0, pi0)[0])
    write_boundaries(out / "boundaries.csv", curve)
    summary = {
        "value_at_start": v0,
        "pi0": pi0,
        "horizon_kind": curve.horizon_kind,
        "horizon": curve.horizon,
        "achieved_tolerances": tol,
        "config": cfg,
    }
    _dump(out / "summary.json", _clean(summary))
    return 0


def cmd_evaluate(cfg: dict, out: Path, boundaries: Path | None = None) -> int:
    prior = prior_from_dict(cfg["prior"])
    bpath = boundaries if boundaries is not None else out / "boundaries.csv"
    summary_path = bpath.parent / "summary.json"
    summary = json.loads(summary_path.read_text()) if summary_path.exists() else None
    kind = summary["horizon_kind"] if summary else ("finite" if cfg["mode"] == "finite" else "perpetual_approx")
    curve = read_boundaries(bpath, kind)
    sim = SimConfig(**cfg["sim"])
    est = evaluate_policy(prior, cfg["c"], curve, sim)
    result = est.to_dict()
    result["stderr_note"] = "standard errors are null when n_paths == 1"
    if summary is not None:
        v0 = summary["value_at_start"]
        se = est.risk_stderr
        result["comparison"] = {
            "value_at_start": v0,
            "difference": est.risk_mean - v0,
            "within_3_stderr": None if se is None else abs(est.risk_mean - v0) <= 3.0 * se,
        }
    _dump(out / "risk.json", _clean(result))
    if est.censored_warning:
        print(f"warning: {est.censored_frac:.1%} of paths were censored at the horizon cap", file=sys.stderr)
    return 0


def cmd_probe(cfg: dict, out: Path) -> int:
    prior = prior_from_dict(cfg["prior"])
    l, r = support_gap(prior)
    b1_inf, b2_inf = asymptote(prior, cfg["c"])
    result = {"l": l, "r": r, "b1_inf": b1_inf, "b2_inf": b2_inf}
    if "probe" in cfg:
        p = cfg["probe"]
        sim = SimConfig(n_paths=p["n_paths"], seed=cfg["sim"]["seed"])
        result["terminal_probe"] = terminal_distribution_probe(prior, p["T_large"], sim).to_dict()
        result["mass_nonneg"] = mass_nonneg(prior)
    _dump(out / "asymptote.json", _clean(result))
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer (got {text!r})") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesdrift",
        description="Optimal sequential test of the sign of a Brownian drift.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--out", required=True, type=Path, help="output directory (created if missing)")
        p.add_argument("--seed", type=_seed, default=None, help="override sim.seed")

    common(sub.add_parser("solve", help="compute boundaries; writes boundaries.csv and summary.json"))
    ev = sub.add_parser("evaluate", help="Monte Carlo risk of a boundary CSV; writes risk.json")
    common(ev)
    ev.add_argument("--boundaries", type=Path, default=None, help="boundary CSV (default: OUT/boundaries.csv)")
    common(sub.add_parser("probe", help="long-run asymptotes; writes asymptote.json"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed)
        out = args.out
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {str(out)!r}: {exc.strerror}") from None
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, out, args.boundaries)
        return cmd_probe(cfg, out)
    except (ConfigError, PriorError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
