"""``heis-plane``: batch verification front end.

Reports are JSON objects tagged ``"schema": "heis-plane/1"``; tabular data
goes to CSV files with a header row.  Settings resolve as defaults, then
the ``--config`` file (flat ``key=value`` lines), then explicit flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _backend, identities, kernels
from .errors import BudgetExhausted, DegeneratePoint
from .quadrature import DEFAULT_SEED, QuadratureSpec, compute_constant, flux, mu_ball
from .reconstruct import reconstruct

SCHEMA = "heis-plane/1"
EXIT_OK, EXIT_TOLERANCE, EXIT_DEGENERATE, EXIT_BUDGET = 0, 2, 3, 4

DEFAULTS = {
    "constant": {"budget": 1e7, "method": "adaptive", "tol": 1e-3},
    "identities": {"points": 1e4, "tol": 1e-9, "inject_fault": False},
    "flux": {"budget": 2**20, "method": "adaptive", "eps_grid": "0.1,0.0316227766016838,0.01",
             "z": "1,0,0,0", "lam": 2.0, "tol": 0.05},
    "reconstruct": {"budget": 2**20, "method": "adaptive", "tol": 0.02},
    "ball-volume": {"budget": 2**18, "method": "adaptive", "centers": "0,0,0,0;1,0,0,0;2,1,0,0",
                    "radii": ",".join(repr(2.0**-k) for k in range(7)), "tol": 0.05},
}
COMMON = {"seed": DEFAULT_SEED, "out": None, "quad_tol": None}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[command])
    if args.config:
        cfg.update(read_config(args.config))
    for key in ("seed", "budget", "method", "points", "eps_grid", "out", "tol", "quad_tol"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "inject_fault", False):
        cfg["inject_fault"] = True
    return _typed(cfg)


def _typed(cfg: dict) -> dict:
    out = dict(cfg)
    for key in ("seed",):
        if key in out:
            out[key] = int(float(out[key])) if not str(out[key]).lower().startswith("0x") else int(str(out[key]), 16)
    for key in ("budget", "points"):
        if key in out:
            out[key] = int(float(out[key]))
    for key in ("tol", "lam", "quad_tol"):
        if out.get(key) not in (None, "", "none"):
            out[key] = float(out[key])
        elif key in out:
            out[key] = None
    if "inject_fault" in out:
        out["inject_fault"] = str(out["inject_fault"]).lower() in ("1", "true", "yes")
    return out


def _floats(text) -> list:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _points(text) -> list:
    return [np.array(_floats(p)) for p in str(text).split(";") if p.strip()]


def _spec(cfg) -> QuadratureSpec:
    return QuadratureSpec(method=cfg.get("method", "adaptive"), budget=cfg["budget"], seed=cfg["seed"])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _csv(rows: list, header: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r[h] for h in header])
    return buf.getvalue()


def emit(report: dict, cfg: dict, csv_text: str | None = None, stream=None) -> None:
    stream = stream or sys.stdout
    text = json.dumps(_jsonable(report), indent=2)
    out = cfg.get("out")
    if out:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text + "\n")
        if csv_text is not None:
            p.with_suffix(".csv").write_text(csv_text)
    else:
        stream.write(text + "\n")
        if csv_text is not None:
            stream.write(csv_text)


def _base(command, cfg) -> dict:
    return {"schema": SCHEMA, "command": command, "backend": _backend.NAME, "config": cfg}


def cmd_constant(cfg) -> tuple:
    exact = kernels.C_HR
    base = QuadratureSpec(budget=cfg["budget"], seed=cfg["seed"])
    ap = compute_constant(base, cfg["quad_tol"])
    mc = compute_constant(QuadratureSpec(method="mc", budget=cfg["budget"], seed=cfg["seed"]), cfg["quad_tol"])
    chosen = mc if cfg["method"] in ("mc", "montecarlo") else ap
    combined = math.hypot(ap.error_indicator, mc.error_indicator)
    agree = abs(ap.value - mc.value) <= 3 * combined
    rel = {"adaptive": abs(ap.value / exact - 1), "mc": abs(mc.value / exact - 1)}
    ok = agree and max(rel.values()) <= cfg["tol"]
    rep = _base("constant", cfg)
    rep.update({"value": chosen.value, "closed_form": exact,
                "adaptive": {"value": ap.value, "error_indicator": ap.error_indicator, "samples": ap.samples_used},
                "mc": {"value": mc.value, "error_indicator": mc.error_indicator, "samples": mc.samples_used},
                "relative_error": rel, "methods_agree": agree, "pass": ok})
    return rep, None, EXIT_OK if ok else EXIT_TOLERANCE


def cmd_identities(cfg) -> tuple:
    res = identities.run_suite(cfg["points"], seed=cfg["seed"], inject_fault=cfg["inject_fault"])
    gating = {k: v for k, v in res.items() if v["gating"]}
    failed = {k: v for k, v in gating.items() if not v["max_residual"] <= cfg["tol"]}
    rep = _base("identities", cfg)
    rep.update({"residuals": res, "pass": not failed})
    if failed:
        for k, v in failed.items():
            sys.stderr.write(f"identity {k} violated: residual {v['max_residual']:.3e} at {v['witness']}\n")
    return rep, None, EXIT_OK if not failed else EXIT_TOLERANCE


def cmd_flux(cfg) -> tuple:
    z = np.array(_floats(cfg["z"]))
    spec = _spec(cfg)
    rows = []
    for eps in _floats(cfg["eps_grid"]):
        e = flux(z, eps, spec, tol=cfg["quad_tol"])
        rows.append({"eps": eps, "value": e.value, "error": e.error_indicator, "abs_dev": abs(e.value + 1)})
    lam = cfg["lam"]
    e0 = rows[-1]
    el = flux(lam * z, lam * e0["eps"], spec, tol=cfg["quad_tol"])
    devs = [r["abs_dev"] for r in rows]
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    ok = decreasing and devs[-1] <= cfg["tol"]
    rep = _base("flux", cfg)
    rep.update({"rows": rows, "dilation": {"lam": lam, "value": el.value, "reference": e0["value"],
                                           "difference": abs(el.value - e0["value"])},
                "decreasing": decreasing, "pass": ok})
    return rep, _csv(rows, ["eps", "value", "error", "abs_dev"]), EXIT_OK if ok else EXIT_TOLERANCE


def acceptance_configs() -> dict:
    """The five bump placements used to check the representation formula."""
    from .plane_geom import isometry_matrix
    from .reconstruct import BumpFunction

    x = np.array([0.5, -0.5, 0.5, 0.5])
    R = isometry_matrix(x)
    u = BumpFunction([2.0, 0, 0, 0], 1.0, 1.0)
    return {
        "center": (u, np.array([2.0, 0, 0, 0])),
        "off_center": (u, np.array([2.3, 0.2, 0.3, -0.1])),
        "near_outside": (u, np.array([3.05, 0, 0, 0])),
        "zero": (u, np.zeros(4)),
        "rotated": (u.rotated(R.T), R @ np.array([2.2, 0.1, 0.2, 0.0])),
    }


def cmd_reconstruct(cfg) -> tuple:
    spec = _spec(cfg)
    rows = []
    for name, (u, z) in acceptance_configs().items():
        r = reconstruct(u, z, spec, tol=cfg["quad_tol"])
        d = r.as_dict()
        rows.append({"config": name, **{k: d[k] for k in ("target", "reconstructed", "term_gradient",
                                                          "term_zero_order", "weak_form", "error",
                                                          "error_indicator")}})
    ok = all(r["error"] <= cfg["tol"] for r in rows)
    rep = _base("reconstruct", cfg)
    rep.update({"rows": rows, "pass": ok})
    header = ["config", "target", "reconstructed", "term_gradient", "term_zero_order", "weak_form",
              "error", "error_indicator"]
    return rep, _csv(rows, header), EXIT_OK if ok else EXIT_TOLERANCE


def fit_slope(radii, volumes) -> tuple:
    lr, lv = np.log(radii), np.log(volumes)
    slope, icpt = np.polyfit(lr, lv, 1)
    return float(slope), (lv - (slope * lr + icpt)).tolist()


def cmd_ball_volume(cfg) -> tuple:
    radii = _floats(cfg["radii"])
    if len(radii) < 4:
        raise UsageError("a slope fit needs at least 4 radii")
    spec = _spec(cfg)
    rows, fits = [], []
    for c in _points(cfg["centers"]):
        vols = [mu_ball(c, r, spec, cfg["quad_tol"]).value for r in radii]
        slope, resid = fit_slope(radii, vols)
        fits.append({"center": c, "slope": slope, "residuals": resid,
                     "pass": abs(slope - 5.0) <= cfg["tol"]})
        rows += [{"center": ";".join(f"{v:g}" for v in c), "radius": r, "mu": v} for r, v in zip(radii, vols)]
    ok = all(f["pass"] for f in fits)
    rep = _base("ball-volume", cfg)
    rep.update({"fits": fits, "pass": ok})
    return rep, _csv(rows, ["center", "radius", "mu"]), EXIT_OK if ok else EXIT_TOLERANCE


COMMANDS = {"constant": cmd_constant, "identities": cmd_identities, "flux": cmd_flux,
            "reconstruct": cmd_reconstruct, "ball-volume": cmd_ball_volume}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heis-plane", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--seed", type=lambda v: int(v, 0), help="root seed for sampling")
        s.add_argument("--budget", type=float, help="integrand evaluations per integral")
        s.add_argument("--method", choices=["mc", "adaptive"], help="quadrature method")
        s.add_argument("--points", type=float, help="sample points for pointwise checks")
        s.add_argument("--eps-grid", dest="eps_grid", help="comma-separated radii")
        s.add_argument("--out", help="JSON report path; CSV goes next to it with a .csv suffix")
        s.add_argument("--config", help="key=value settings file")
        s.add_argument("--tol", type=float, help="pass/fail tolerance of the command")
        s.add_argument("--quad-tol", dest="quad_tol", type=float,
                       help="largest accepted error indicator per integral (exit 4 when exceeded)")
        if name == "identities":
            s.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        report, table, code = COMMANDS[args.command](cfg)
    except DegeneratePoint as exc:
        sys.stderr.write(f"DegeneratePoint: {exc}\n")
        return EXIT_DEGENERATE
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DEGENERATE
    except BudgetExhausted as exc:
        sys.stderr.write(f"BudgetExhausted: {exc}\n")
        return EXIT_BUDGET
    emit(report, cfg, table)
    return code


if __name__ == "__main__":
    sys.exit(main())
