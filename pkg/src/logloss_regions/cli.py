"""Command-line driver.

Exit codes: 0 success, 2 validation error, 3 runtime or convergence problem,
4 I/O error.  Failures print one JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .discrete import JointPmf
from .errors import LoglossError, NonConvergenceWarning, UnknownCommand, ValidationError
from .io import emit, json_text, load_json, load_pmf, sidecar_path
from .region_jd import (
    JdQuery,
    jd_boundary,
    jd_contains_closed,
    jd_contains_lp,
    rd_logloss,
    wz_logloss,
)
from .region_xd import XdQuery, xd_contains, xd_grid_oracle, xd_min_hxu, xd_tradeoff_curve
from .sim import (
    SimConfig,
    simulate_jd_timeshare,
    simulate_rd_point,
    simulate_smsw,
    simulate_wz,
    simulate_xd,
)

COMMANDS = ("region-jd", "region-xd", "simulate", "rdfun", "verify")
SCHEMES = ("wz", "rd", "jd", "smsw", "xd")
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4


@dataclass
class RunManifest:
    command: str
    input_path: str | None
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None


def summary_header(p: JointPmf) -> str:
    return (f"pmf {p.m}x{p.l} H(X)={p.h_x:.6f} H(Y)={p.h_y:.6f} H(X|Y)={p.h_x_given_y:.6f} "
            f"H(Y|X)={p.h_y_given_x:.6f} H(X,Y)={p.h_xy:.6f}")


def _need(params: dict, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ValidationError("missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _run_region_jd(p, prm):
    _need(prm, "d")
    if prm.get("rx") is not None or prm.get("ry") is not None:
        _need(prm, "rx", "ry")
        q = JdQuery(prm["rx"], prm["ry"], prm["d"])
        member, cert = jd_contains_lp(p, q)
        out = {"query": {"rx": q.rx, "ry": q.ry, "d": q.d}, "member": member,
               "closed_form": jd_contains_closed(p, q),
               "certificate": None if cert is None else {"delta_x": cert.delta_x, "delta_y": cert.delta_y}}
        return "json", out, f"member={member}"
    pts = jd_boundary(p, prm["d"], prm.get("samples") or 11)
    return "csv", (["rx", "ry"], pts), f"boundary points={len(pts)}"


def _run_region_xd(p, prm):
    restarts = prm.get("restarts") or 32
    seed = prm["seed"]
    if prm.get("rx") is not None or prm.get("dx") is not None:
        _need(prm, "rx", "ry", "dx")
        q = XdQuery(prm["rx"], prm["ry"], prm["dx"])
        sol = xd_min_hxu(p, q.ry, restarts=restarts, seed=seed)
        member = xd_contains(p, q, restarts=restarts, seed=seed)
        out = {"query": {"rx": q.rx, "ry": q.ry, "dx": q.dx}, "member": member,
               "min_h_x_given_u": sol.value, "i_y_u": sol.rate, "channel": sol.channel}
        return "json", out, f"member={member}"
    if prm.get("ry_budget") is not None:
        sol = xd_min_hxu(p, prm["ry_budget"], restarts=restarts, seed=seed)
        cols, row = ["ry_budget", "min_h_x_given_u", "i_y_u"], [sol.budget, sol.value, sol.rate]
        if prm.get("grid_step") is not None:
            cols.append("grid_oracle")
            row.append(xd_grid_oracle(p, prm["ry_budget"], prm["grid_step"]))
        return "csv", (cols, [row]), f"min H(X|U)={sol.value:.6f}"
    curve = xd_tradeoff_curve(p, prm.get("samples") or 11, restarts=restarts, seed=seed)
    rows = [(pt.ry_budget, pt.min_h_x_given_u) for pt in curve.points]
    return "csv", (["ry_budget", "min_h_x_given_u"], rows), f"curve points={len(rows)}"


def _run_simulate(p, prm):
    scheme = prm.get("scheme")
    if scheme not in SCHEMES:
        raise UnknownCommand(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")
    cfg = SimConfig(n=prm.get("n") or 16, eps=prm.get("eps") or 0.1,
                    trials=prm.get("trials") or 500, seed=prm["seed"])
    if scheme == "wz":
        _need(prm, "rate")
        res = simulate_wz(p, cfg, prm["rate"])
    elif scheme == "rd":
        _need(prm, "rate")
        res = simulate_rd_point(p.px, cfg, prm["rate"])
    elif scheme == "jd":
        _need(prm, "d")
        res = simulate_jd_timeshare(p, cfg, prm["d"], prm.get("mix", 0.5))
    elif scheme == "smsw":
        _need(prm, "d")
        res = simulate_smsw(p, cfg, d=prm["d"], mix=prm.get("mix", 0.5), repeats=prm.get("repeats") or 4)
    else:
        _need(prm, "dx")
        if prm.get("ry_budget") is not None:
            channel = xd_min_hxu(p, prm["ry_budget"], restarts=prm.get("restarts") or 32,
                                 seed=prm["seed"]).channel
        else:
            channel = np.eye(p.l)
        res = simulate_xd(p, channel, cfg, prm["dx"])
    row = res.row()
    cols = ["scheme"] + list(row)
    return "csv", (cols, [[scheme] + list(row.values())]), (
        f"{scheme} mean_distortion={res.mean_distortion:.6f} block_error_rate={res.block_error_rate:.4f}")


def _run_rdfun(p, prm):
    samples = prm.get("samples") or 11
    if samples < 2:
        raise ValidationError("samples must be at least 2")
    ds = np.linspace(0.0, p.h_x, samples)
    rows = [(float(d), rd_logloss(p.px, float(d)), wz_logloss(p, float(d))) for d in ds]
    return "csv", (["d", "rate_no_side_info", "rate_side_info"], rows), f"points={len(rows)}"


RUNNERS = {"region-jd": _run_region_jd, "region-xd": _run_region_xd,
           "simulate": _run_simulate, "rdfun": _run_rdfun}


def execute(man: RunManifest, fmt_override: str | None = None) -> tuple[str, int]:
    """Run ``man`` and write its outputs.  Returns (summary line, exit code)."""
    if man.command not in RUNNERS:
        raise UnknownCommand(f"unknown command {man.command!r}")
    if man.input_path is None:
        raise ValidationError("missing required flag: --pmf")
    p = load_pmf(man.input_path)
    prm = dict(man.params, seed=man.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonConvergenceWarning)
        kind, results, note = RUNNERS[man.command](p, prm)
    flagged = any(issubclass(w.category, NonConvergenceWarning) for w in caught)
    kind = fmt_override or kind
    if kind == "csv" and not isinstance(results, tuple):
        kind = "json"
    if kind == "json" and isinstance(results, tuple):
        cols, rows = results
        results = [dict(zip(cols, r)) for r in rows]
    if man.output_path is not None:
        meta = {"command": man.command, "pmf": p.to_list(), "input_path": man.input_path,
                "params": man.params, "seed": man.seed, "version": __version__, "format": kind}
        emit(results, kind, man.output_path, meta)
    elif kind == "json":
        sys.stdout.write(json_text(results))
    line = f"{summary_header(p)} | {man.command}: {note}"
    if flagged:
        line += " | not converged"
    return line, EXIT_RUNTIME if flagged else EXIT_OK


def verify(out_path: str) -> tuple[str, int]:
    """Regenerate an output from its sidecar alone and compare bytes."""
    meta = load_json(sidecar_path(out_path))
    with tempfile.TemporaryDirectory() as tmp:
        pmf_file = Path(tmp) / "pmf.json"
        pmf_file.write_text(json.dumps({"pmf": meta["pmf"]}))
        target = Path(tmp) / Path(out_path).name
        man = RunManifest(meta["command"], str(pmf_file), meta["params"], meta["seed"], str(target))
        execute(man, meta.get("format"))
        same = target.read_bytes() == Path(out_path).read_bytes()
    return f"verify {out_path}: {'identical' if same else 'DIFFERS'}", EXIT_OK if same else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logloss-regions",
                                 description="Rate-distortion regions under log-loss and achievability simulations.")
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("scheme", nargs="?", help="simulate only: " + ", ".join(SCHEMES))
    ap.add_argument("--pmf", help="JSON file {\"pmf\": [[...]]}, rows index x")
    for flag in ("--d", "--dx", "--rx", "--ry", "--ry-budget", "--rate", "--eps", "--grid-step", "--mix"):
        ap.add_argument(flag, type=float)
    for flag in ("--n", "--trials", "--samples", "--restarts", "--repeats"):
        ap.add_argument(flag, type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="output file; a .meta.json sidecar is written next to it")
    ap.add_argument("--format", choices=("csv", "json"))
    return ap


def _params(ns: argparse.Namespace) -> dict:
    keys = ("scheme", "d", "dx", "rx", "ry", "ry_budget", "rate", "eps", "grid_step", "mix",
            "n", "trials", "samples", "restarts", "repeats")
    return {k: getattr(ns, k) for k in keys if getattr(ns, k) is not None}


def _fail(exc: BaseException, code: int) -> int:
    rec = {"error": type(exc).__name__, "message": str(exc), "exit": code}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        if ns.command == "verify":
            if ns.out is None:
                raise ValidationError("verify needs --out pointing at an earlier output")
            line, code = verify(ns.out)
        else:
            man = RunManifest(ns.command, ns.pmf, _params(ns), ns.seed, ns.out)
            line, code = execute(man, ns.format)
    except ValidationError as exc:
        return _fail(exc, EXIT_VALIDATION)
    except (KeyError, TypeError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    except OSError as exc:
        return _fail(exc, EXIT_IO)
    except LoglossError as exc:
        return _fail(exc, EXIT_RUNTIME)
    print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
