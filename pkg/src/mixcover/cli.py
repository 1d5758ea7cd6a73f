"""Command-line front end.

Exit codes: 0 solved (or check passed), 1 a --check or verify failed,
2 infeasible (certificate attached), 3 iteration cap exceeded, 64 usage
error, 65 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .bench import COLUMNS, KINDS as BENCH_KINDS, CheckFailed, run_ladder, summary, write_csv
from .checks import check_solution, verify_infeasibility, verify_lower_bound
from .covering import solve_covering
from .facility import solve_fl
from .generators import KINDS as GEN_KINDS, GeneratorSpec, generate
from .instances import CoveringInstance, FacilityInstance, InstanceError, MixedInstance, normalize
from .mpc import ALGORITHMS, solve_mpc
from .report import InfeasibilityCertificate, LowerBoundCertificate, Status

EXIT_OK, EXIT_CHECK, EXIT_INFEASIBLE, EXIT_CAP, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3, 64, 65
_STATUS_EXIT = {Status.SOLVED: EXIT_OK, Status.INFEASIBLE: EXIT_INFEASIBLE, Status.CAP_EXCEEDED: EXIT_CAP}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _eps(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid eps {text!r}") from None
    if not 0.0 < v <= 0.1:
        raise argparse.ArgumentTypeError("eps must lie in (0, 0.1]")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _list(conv):
    def parse(text: str):
        try:
            return [conv(t) for t in text.split(",") if t]
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise argparse.ArgumentTypeError(str(e)) from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mixcover", description="Approximate mixed packing/covering, covering and facility-location LPs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, what in (("solve-mpc", "mixed packing/covering"), ("solve-cover", "pure covering"),
                       ("solve-fl", "fractional facility location")):
        s = sub.add_parser(name, help=f"solve a {what} instance")
        s.add_argument("--input", required=True, help="instance JSON")
        s.add_argument("--eps", type=_eps, default=0.1, help="accuracy in (0, 0.1] (default 0.1)")
        s.add_argument("--algo", choices=ALGORITHMS, default="sequential")
        s.add_argument("--threads", type=_positive_int, default=None, help="worker threads for --algo parallel")
        s.add_argument("--out", help="solution JSON (default: stdout)")
        s.add_argument("--report", help="run report JSON with counters and timing")
        s.add_argument("--check", action="store_true", help="re-verify the solution and certificates")
    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("--kind", choices=GEN_KINDS, required=True)
    g.add_argument("--n", type=_positive_int, default=50, help="variables, or facilities for fl-random")
    g.add_argument("--m", type=_positive_int, default=50, help="rows, or clients for fl-random")
    g.add_argument("--density", type=float, default=0.1, help="fraction of rows hit per column")
    g.add_argument("--pairs", type=_positive_int, default=None, help="pair count for fl-random")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cost-low", type=float, default=1.0)
    g.add_argument("--cost-high", type=float, default=10.0)
    g.add_argument("--out", required=True, help="instance JSON; planted x* goes to OUT.xstar.json")
    b = sub.add_parser("bench", help="solve a size ladder and fit the work growth")
    b.add_argument("--kind", choices=BENCH_KINDS, default="mpc")
    b.add_argument("--algo", type=_list(str), default=["sequential"], help="comma-separated algorithms")
    b.add_argument("--eps", type=_list(_eps), default=[0.1], help="comma-separated eps values")
    b.add_argument("--sizes", type=_list(_positive_int), default=[2 ** k for k in range(12, 18)],
                   help="comma-separated nonzero counts (default 2^12..2^17)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--threads", type=_positive_int, default=None)
    b.add_argument("--out", help="CSV output (default: stdout)")
    b.add_argument("--no-check", action="store_true", help="skip verification of each run")
    v = sub.add_parser("verify", help="check a solution file against an instance")
    v.add_argument("--input", required=True, help="instance JSON")
    v.add_argument("--solution", required=True, help="solution JSON")
    v.add_argument("--eps", type=_eps, default=0.1, help="packing slack allowed is 5 eps (default 0.1)")
    return p


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _solve(args) -> int:
    raw = io.load_instance(args.input)
    kind = {"solve-mpc": MixedInstance, "solve-cover": CoveringInstance, "solve-fl": FacilityInstance}[args.command]
    if not isinstance(raw, kind):
        raise InstanceError(f"{args.command} expects a {kind.__name__} file")
    t0 = time.perf_counter()
    if isinstance(raw, MixedInstance):
        inst = normalize(raw)
        rep = solve_mpc(inst, args.eps, args.algo, threads=args.threads)
    elif isinstance(raw, CoveringInstance):
        if args.algo == "parallel":
            raise UsageError("solve-cover has no parallel algorithm; use reference or sequential")
        inst = normalize(raw)
        inst.validate()
        rep = solve_covering(inst, args.eps)
    else:
        inst = raw
        rep = solve_fl(inst, args.eps, args.algo, threads=args.threads)
    wall = (time.perf_counter() - t0) * 1000.0
    sol = io.solution_to_json(rep, inst)
    _write(args.out, io.dumps(sol))
    code = _STATUS_EXIT[rep.status]
    problems = _check(inst, rep.status, rep.x, rep.y, rep.certificate, args.eps) if args.check else []
    if args.report:
        report = {"command": args.command, "algorithm": rep.algorithm, "eps": args.eps, "U": rep.U,
                  "threads": args.threads, "status": rep.status.value, "cost": rep.cost,
                  "lower_bound": rep.lower_bound, "ratio": rep.ratio,
                  "counters": dict(sorted(rep.counters.items())),
                  "diagnostics": dict(sorted(rep.diagnostics.items())), "wall_ms": round(wall, 3)}
        if args.check:
            report["check"] = {"passed": not problems, "problems": problems}
        Path(args.report).write_text(json.dumps(report, indent=2, default=float) + "\n", encoding="utf-8")
    if problems:
        for msg in problems:
            print(f"check failed: {msg}", file=sys.stderr)
        return EXIT_CHECK
    if rep.status is Status.CAP_EXCEEDED:
        print("iteration cap exceeded", file=sys.stderr)
    return code


def _check(inst, status: Status, x, y, cert, eps: float) -> list[str]:
    """Problems found when re-verifying (empty when everything holds)."""
    problems = []
    if status is Status.INFEASIBLE:
        if not isinstance(cert, InfeasibilityCertificate) or not verify_infeasibility(inst, cert):
            problems.append("infeasibility certificate does not verify")
        return problems
    if status is not Status.SOLVED:
        return problems
    fr = check_solution(inst, x, ratio_bound=5 * eps if isinstance(inst, MixedInstance) else 0.0, y=y)
    if not fr.passed:
        detail = f"min coverage {fr.min_cover:.12g}"
        if fr.max_pack is not None:
            detail += f", max packing {fr.max_pack:.12g} (limit {1 + 5 * eps:.12g})"
        if fr.max_violation_xy:
            detail += f", max x_ij - y_j {fr.max_violation_xy:.3g}"
        problems.append(f"solution infeasible: {detail}")
    if isinstance(inst, (CoveringInstance, FacilityInstance)):
        if not isinstance(cert, LowerBoundCertificate) or not verify_lower_bound(inst, cert):
            problems.append("lower-bound certificate does not verify")
    return problems


def _verify(args) -> int:
    raw = io.load_instance(args.input)
    try:
        sol = json.loads(Path(args.solution).read_text(encoding="utf-8"))
        status = Status(sol["status"])
        cert_d = sol.get("certificate")
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
        raise InstanceError(f"{args.solution}: malformed solution file ({e})") from None
    y = None
    if isinstance(raw, FacilityInstance):
        inst = raw
        x = io.facility_x_from_json(inst, sol["x"])
        y = np.asarray(sol["y"], dtype=float)
    else:
        inst = normalize(raw)
        x = np.asarray(sol["x"], dtype=float)
        origin = inst.origin
        if isinstance(inst, MixedInstance) and origin is not None:
            if x.shape != (origin.n_original,):
                raise InstanceError(f"solution has {x.size} values, instance has {origin.n_original} variables")
            if np.any(x[list(origin.fixed_zero)] != 0):
                print("verify failed: a variable fixed to 0 by a zero packing row is nonzero", file=sys.stderr)
                return EXIT_CHECK
            x = x[origin.kept_columns]
    cert = None
    if cert_d:
        kind = cert_d.get("kind")
        cert = InfeasibilityCertificate.from_json(cert_d) if kind == "mixed-infeasibility" else \
            LowerBoundCertificate.from_json(cert_d)
    problems = _check(inst, status, x, y, cert, args.eps)
    if problems:
        for msg in problems:
            print(f"verify failed: {msg}", file=sys.stderr)
        return EXIT_CHECK
    print(f"verified: status {status.value}")
    return EXIT_OK


def _gen(args) -> int:
    spec = GeneratorSpec(args.kind, args.n, args.m, args.density, args.seed, args.pairs, args.cost_low,
                         args.cost_high)
    inst, x_star = generate(spec)
    io.save_instance(inst, args.out)
    if x_star is not None:
        if not check_solution(inst, x_star, ratio_bound=0.0).passed:
            raise RuntimeError("planted solution failed its own check")
        Path(args.out + ".xstar.json").write_text(io.dumps({"x": x_star.tolist()}), encoding="utf-8")
    return EXIT_OK


def _bench(args) -> int:
    algos = args.algo
    valid = ALGORITHMS if args.kind != "cover" else ("sequential",)
    bad = [a for a in algos if a not in valid]
    if bad:
        raise UsageError(f"unknown algorithm(s) {', '.join(bad)} for kind {args.kind}; choose from {', '.join(valid)}")
    try:
        rows = run_ladder(args.kind, args.sizes, args.eps, algos, args.seed, args.threads, not args.no_check)
    except CheckFailed as e:
        print(f"bench aborted: {e}", file=sys.stderr)
        return EXIT_CHECK
    if args.out:
        write_csv(rows, args.out)
    else:
        write_csv(rows, sys.stdout)
    print(summary(rows), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"gen": _gen, "bench": _bench, "verify": _verify}.get(args.command, _solve)
        return handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceError as e:
        print(f"malformed input: {e}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as e:
        print(f"malformed input: cannot read {e.filename}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
