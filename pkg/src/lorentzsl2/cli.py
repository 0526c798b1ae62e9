"""Command-line front end: trace, times, attainable, synth."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .dynamics import Covector, Regime, StructureParams, integrate_batch, timelike_covector
from .geodesic import trace
from .liegroup import GroupPoint, group_distance
from .optimality import ordering_report
from .reachability import (
    SynthesisError,
    UnreachableTarget,
    a_tmax_membership,
    boundary_surface,
    forward_margin,
    oblate_membership,
    prolate_membership,
    sublorentzian_membership,
    synthesize_controls,
)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _emit(args, header: list[str], rows: list[list], extra: dict | None = None) -> None:
    if args.format == "csv":
        text = ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows)
    else:
        doc = {"columns": header, "rows": [[v if isinstance(v, str) else float(v) for v in r] for r in rows]}
        if extra:
            doc.update(extra)
        text = json.dumps(_json_safe(doc), indent=1, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _triple(s: str, name: str) -> tuple[float, float, float]:
    parts = [float(v) for v in s.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"{name} needs three comma-separated numbers")
    return tuple(parts)


def _grid(s: str) -> np.ndarray:
    lo, hi, n = _triple(s, "grid")
    if n < 1 or n != int(n):
        raise ValueError("grid count must be a positive integer")
    return np.linspace(lo, hi, int(n))


def _ext(e):
    return e.value if e.is_finite else str(e)


def _params(args) -> StructureParams:
    if args.mu is not None:
        return StructureParams.from_mu(args.mu, I1=args.I1)
    i3 = math.inf if str(args.I3).lower() == "inf" else float(args.I3)
    return StructureParams(args.I1, i3)


def cmd_trace(args, p: StructureParams) -> int:
    h = Covector(*_triple(args.h, "--h"))
    ts = np.linspace(0.0, args.t_max, args.steps)
    samples = trace(h, ts, p)
    header = ["t", "tau", "c", "re_w", "im_w", "q0", "q1", "q2", "q3"]
    rows = [s.row() for s in samples]
    extra = {"params": p.to_json(), "covector": h.to_json()}
    if args.oracle:
        _, cs, ws = integrate_batch([h.as_tuple()], ts, p, steps_per_unit=args.oracle_steps)
        header += ["oracle_c", "oracle_re_w", "oracle_im_w", "deviation"]
        worst = 0.0
        for r, c, w in zip(rows, cs[:, 0], ws[:, 0]):
            pt = GroupPoint(r[2], complex(r[3], r[4]))
            dev = max(abs(pt.c - c), abs(pt.w - w) / max(1.0, abs(w)))
            worst = max(worst, dev)
            r += [c, w.real, w.imag, dev]
        extra["max_deviation"] = worst
        print(f"max deviation {worst:.3e}", file=sys.stderr)
    _emit(args, header, rows, extra)
    return 0


def cmd_times(args, p: StructureParams) -> int:
    if args.grid:
        grid = _grid(args.grid)
    elif p.mu > 0:
        b = 1.0 / math.sqrt(p.mu)
        grid = np.linspace(-b, b, 23)[1:-1]
    else:
        grid = np.linspace(-1.0, 1.0, 21)
    report = ordering_report(p, grid)
    header = ["h3bar", "norm_h", "tau_conj", "tau_maxwell", "t_conj", "t_maxwell", "t_cut"]
    rows = []
    for r in report:
        n = timelike_covector(r.h3bar, p).norm()
        rows.append([r.h3bar, n, r.tau_conj, r.tau_maxwell] + [_ext(e) for e in (r.t_conj, r.t_maxwell, r.t_cut)])
    _emit(args, header, rows, {"params": p.to_json()})
    return 0


def _membership(g: GroupPoint, p: StructureParams, cap: bool):
    regime = p.regime()
    if cap:
        return a_tmax_membership(g, p)
    if regime is Regime.OBLATE:
        return oblate_membership(g, p)
    if regime is Regime.SUBLORENTZIAN:
        return sublorentzian_membership(g)
    if regime is Regime.PROLATE:
        return prolate_membership(g, p)
    raise ValueError("membership is not implemented for the symmetric case")


def cmd_attainable(args, p: StructureParams) -> int:
    re = _grid(args.re_range)
    im = _grid(args.im_range)
    if args.surface:
        rows = [list(r) for r in boundary_surface(p, re, im)]
        _emit(args, ["re_w", "im_w", "c_boundary"], rows, {"params": p.to_json()})
        return 0
    cs = _grid(args.c_range)
    rows = []
    for c in cs:
        for a in re:
            for b in im:
                m = _membership(GroupPoint(c, complex(a, b)), p, args.a_tmax)
                bc = math.nan if m.boundary_c is None else m.boundary_c
                rows.append([c, a, b, m.status.value, bc])
    _emit(args, ["c", "re_w", "im_w", "status", "boundary_c"], rows, {"params": p.to_json()})
    return 0


def cmd_synth(args, p: StructureParams) -> int:
    c, a, b = _triple(args.target, "--target")
    target = GroupPoint(c, complex(a, b))
    status, doc = 0, {"target": target.to_json(), "params": p.to_json(), "tol": args.tol}
    try:
        prog = synthesize_controls(target, p, args.tol)
        res = group_distance(prog.simulate(), target)
    except UnreachableTarget as e:
        print(str(e), file=sys.stderr)
        doc.update(program=[], residual=math.inf, forward_margin=e.margin, reachable=False)
        status, prog = 2, None
    except SynthesisError as e:
        print(str(e), file=sys.stderr)
        prog, res, status = e.program, e.residual, 3
    if prog is not None:
        doc.update(program=prog.to_json(), residual=res, forward_margin=forward_margin(target),
                   trajectory=[q.to_json() for q in prog.waypoints()])
        print(f"residual {res:.3e} with {len(prog.arcs)} arcs", file=sys.stderr)
    if args.format == "csv":
        rows = [] if prog is None else [[*arc.control.as_tuple(), arc.duration] for arc in prog.arcs]
        _emit(args, ["u1", "u2", "u3", "dt"], rows)
    else:
        text = json.dumps(_json_safe(doc), indent=1, sort_keys=True) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lorentzsl2", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--I1", type=float, default=1.0)
    grp = common.add_mutually_exclusive_group(required=True)
    grp.add_argument("--I3", help='positive number or "inf" for the sub-Lorentzian case')
    grp.add_argument("--mu", type=float)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trace", parents=[common], help="sample a geodesic")
    t.add_argument("--h", required=True, help='normalised covector "h1,h2,h3"')
    t.add_argument("--t-max", type=float, required=True)
    t.add_argument("--steps", type=int, default=101, help="number of samples")
    t.add_argument("--oracle", action="store_true", help="compare with the numerical integrator")
    t.add_argument("--oracle-steps", type=int, default=2000, help="integrator steps per unit time")

    s = sub.add_parser("times", parents=[common], help="conjugate, Maxwell and cut times")
    s.add_argument("--grid", help='h3bar grid "lo,hi,n"')

    a = sub.add_parser("attainable", parents=[common], help="membership grid or boundary surface")
    a.add_argument("--c-range", default="-0.5,3.5,9")
    a.add_argument("--re-range", default="-1,1,5")
    a.add_argument("--im-range", default="-1,1,5")
    a.add_argument("--surface", action="store_true", help="emit the boundary surface instead")
    a.add_argument("--a-tmax", action="store_true", help="classify against the longest-arc region")

    y = sub.add_parser("synth", parents=[common], help="steer the identity to a target")
    y.add_argument("--target", required=True, help='"c,re_w,im_w"')
    y.add_argument("--tol", type=float, default=1e-6)
    return ap


_COMMANDS = {"trace": cmd_trace, "times": cmd_times, "attainable": cmd_attainable, "synth": cmd_synth}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        p = _params(args)
        if getattr(args, "tol", 1.0) <= 0:
            raise ValueError("--tol must be positive")
        return _COMMANDS[args.command](args, p)
    except (ValueError, ArithmeticError, argparse.ArgumentTypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
