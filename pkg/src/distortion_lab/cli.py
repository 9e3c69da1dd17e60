"""Command-line front end: analyze, sweep, laminate, verify."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .checks import RunConfig, run_verify
from .errors import Breakpoint, ConfigError, DistortionLabError, DomainError
from .lamination import laminate_jacobian, laminate_sequence, phase_distortions
from .linalg3 import DiagonalMap, distortion_report, linear_distortion
from .rank_one import optimal_direction, taylor_coefficients
from .sweep import c_grid, family, gehring_iwaniec_bound, sweep, worker_count
from .window import window

CSV_FIELDS = ["c", "a", "b", "t_minus", "t_plus", "h_minus", "h_plus", "h_lam", "jump_ratio", "gi_bound", "error"]

EXPLAIN = """\
Tolerances and numerical conventions

  --sym-tol   (default 1e-12)  relative asymmetry accepted by the symmetric
                               eigen-solver before it raises NotSymmetric
  --sing-tol  (default 1e-13)  sigma_min / sigma_max at or below which a
                               matrix counts as singular
  --fd-tol    (default 1e-5)   allowed gap between the analytic Q and a
                               Richardson-extrapolated second difference
                               (steps 1e-4 and 5e-5)
  --grid-n    (default 512)    angle grid per axis for the brute-force
                               minimum of Q; the grid tolerance is
                               2e-4 * max(1, (512 / grid_n)^2)

  Eigenvalue degeneracy flag: gap < 1e-9 * max|lambda|.
  Cardano leakage: |Im lambda| > 1e-7 * max|lambda| raises ComplexLeakage.
  Sawtooth kinks: phase within 1e-12 of a kink raises Breakpoint.
  Spectrum separation: a - 1 and b - a must exceed 1e-9.

  Floats are written with 17 significant digits; NaN is written as null
  (JSON) or an empty field (CSV).
"""


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """json.dumps with every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(fields)
    for row in rows:
        out = []
        for k in fields:
            v = row.get(k, "")
            if isinstance(v, float):
                v = fmt_float(v) if math.isfinite(v) else ""
            out.append(v)
        w.writerow(out)
    return buf.getvalue()


def analysis_bundle(a: float, b: float) -> dict:
    A = DiagonalMap(a, b)
    rep = distortion_report(A.matrix)
    opt = optimal_direction(A)
    p = opt.params
    tc = taylor_coefficients(A, p)
    w = window(A)
    h_lam = max(w.h_minus, w.h_plus)
    return {
        "input": {"a": A.a, "b": A.b},
        "H": rep.H,
        "distortion": {"H": rep.H, "K_O": rep.K_O, "K_I": rep.K_I, "K_frob": rep.K_frob},
        "optimal_direction": {
            "u": opt.u,
            "v": opt.v,
            "B0": opt.B0,
            "r": p.r,
            "s": p.s,
            "theta1": p.theta1,
            "theta2": p.theta2,
            "q_min": opt.q_min,
        },
        "taylor": {"h0": tc.h0, "linear": tc.linear, "quadratic": tc.quadratic},
        "window": {
            "t_minus": w.t_minus,
            "t_plus": w.t_plus,
            "h_minus": w.h_minus,
            "h_plus": w.h_plus,
            "p_coeffs": list(w.p_coeffs),
            "g1": w.g1,
            "j1": w.j1,
            "delta": w.delta,
        },
        "t_minus": w.t_minus,
        "t_plus": w.t_plus,
        "h_lam": h_lam,
        "jump_ratio": A.b / h_lam,
        "gi_bound": gehring_iwaniec_bound(h_lam, 3),
    }


def cmd_analyze(args, cfg: RunConfig) -> tuple[str, int]:
    bundle = analysis_bundle(args.a, args.b)
    if args.format == "csv":
        w = bundle["window"]
        row = dict(
            c=bundle["input"]["a"], a=bundle["input"]["a"], b=bundle["input"]["b"],
            t_minus=w["t_minus"], t_plus=w["t_plus"], h_minus=w["h_minus"], h_plus=w["h_plus"],
            h_lam=bundle["h_lam"], jump_ratio=bundle["jump_ratio"], gi_bound=bundle["gi_bound"], error="",
        )
        return to_csv([row], CSV_FIELDS), 0
    return to_json(bundle) + "\n", 0


def cmd_sweep(args, cfg: RunConfig) -> tuple[str, int]:
    fam = family(args.family).with_grid(c_grid(args.c_from, args.c_to, args.points, args.log))
    records = sweep(fam)
    rows = [r.as_dict() for r in records]
    if args.format == "json":
        return to_json({"family": args.family, "records": rows}) + "\n", 0
    return to_csv(rows, CSV_FIELDS), 0


def _ball(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.standard_normal((n, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * rng.uniform(0, 1, (n, 1)) ** (1 / 3)


def laminate_report(a: float, b: float, nu: float, samples: int, seed: int) -> dict:
    A = DiagonalMap(a, b)
    seq = laminate_sequence(A, nu)
    rng = np.random.default_rng(seed)
    x = _ball(rng, samples)
    y = seq(x)
    phase = seq.phase(x)
    dev = np.linalg.norm(y - x @ A.matrix.T, axis=1)

    def jac_h(chunk):
        out = []
        for xi in chunk:
            try:
                out.append(linear_distortion(laminate_jacobian(seq, xi)))
            except Breakpoint:
                out.append(math.nan)
        return out

    chunks = np.array_split(x, max(1, min(worker_count(), len(x))))
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        hs = [h for part in pool.map(jac_h, chunks) for h in part]
    h_minus, h_plus = phase_distortions(seq)
    return {
        "input": {"a": A.a, "b": A.b, "nu": seq.nu, "samples": samples, "seed": seed},
        "u": seq.B0.u,
        "v": seq.B0.v,
        "t_minus": seq.profile.t_minus,
        "t_plus": seq.profile.t_plus,
        "period": seq.profile.period,
        "h_minus": h_minus,
        "h_plus": h_plus,
        "H": A.b,
        "max_deviation": float(dev.max()),
        "mean_deviation": float(dev.mean()),
        "deviation_bound": seq.profile.amplitude / seq.nu,
        "samples": [
            {"x": xi, "T": yi, "phase": float(ph), "jacobian_distortion": h}
            for xi, yi, ph, h in zip(x, y, phase, hs)
        ],
    }


def cmd_laminate(args, cfg: RunConfig) -> tuple[str, int]:
    if args.samples < 1:
        raise DomainError("samples must be >= 1")
    rep = laminate_report(args.a, args.b, args.nu, args.samples, cfg.seed)
    return to_json(rep) + "\n", 0


def cmd_verify(args, cfg: RunConfig) -> tuple[str, int]:
    results = run_verify(cfg)
    ok = all(r.passed for r in results)
    if args.format == "json":
        doc = {
            "passed": ok,
            "groups": [
                {"name": r.name, "passed": r.passed, "checked": r.checked, "failed": len(r.failures), "failures": r.failures[:10]}
                for r in results
            ],
        }
        return to_json(doc) + "\n", 0 if ok else 1
    lines = []
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        lines.append(f"{tag}  {r.name}  ({r.checked - len(r.failures)}/{r.checked}, {r.seconds:.2f}s)")
        lines.extend(f"      {f}" for f in r.failures[:5])
    lines.append("all groups passed" if ok else "some groups failed")
    return "\n".join(lines) + "\n", 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="distortion-lab", description=__doc__)
    ap.add_argument("--grid-n", type=int, default=512, help="angle grid per axis for brute-force minima")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=["json", "csv"], default=None)
    ap.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    ap.add_argument("--explain", action="store_true", help="describe tolerances and exit")
    ap.add_argument("--sym-tol", type=float, default=1e-12)
    ap.add_argument("--sing-tol", type=float, default=1e-13)
    ap.add_argument("--fd-tol", type=float, default=1e-5)
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("analyze", help="full pipeline for diag(1, a, b)")
    p.add_argument("a", type=float)
    p.add_argument("b", type=float)
    p.set_defaults(func=cmd_analyze, default_format="json")

    p = sub.add_parser("sweep", help="window and jump ratio along diag(1, c, f(c))")
    p.add_argument("family", help="csq, cpow:P or cplus:D")
    p.add_argument("c_from", type=float)
    p.add_argument("c_to", type=float)
    p.add_argument("points", type=int)
    p.add_argument("--log", action="store_true", help="log-spaced c grid")
    p.set_defaults(func=cmd_sweep, default_format="csv")

    p = sub.add_parser("laminate", help="sample a sawtooth laminate")
    p.add_argument("a", type=float)
    p.add_argument("b", type=float)
    p.add_argument("nu", type=float)
    p.add_argument("samples", type=int)
    p.set_defaults(func=cmd_laminate, default_format="json")

    p = sub.add_parser("verify", help="run the invariant suite")
    p.set_defaults(func=cmd_verify, default_format="text")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.explain:
        sys.stdout.write(EXPLAIN)
        return 0
    if args.command is None:
        ap.print_usage(sys.stderr)
        return 2
    if args.format is None:
        args.format = args.default_format
    try:
        cfg = RunConfig(grid_n=args.grid_n, sym_tol=args.sym_tol, sing_tol=args.sing_tol, fd_tol=args.fd_tol, seed=args.seed)
        text, code = args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DistortionLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
