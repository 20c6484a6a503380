"""Command-line front end.

Exit codes: 0 success (everything verified), 2 hypothesis failure or usage error,
3 a bound flag was raised, 4 an enumeration cap was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .core_arith import FieldElement, IntPolynomial, divides_mod, eval_poly_mod
from .decompose import check_epsilon
from .errors import CapExceeded, GapkitError, HypothesisFailure, PreconditionError
from .gap import contains_product, is_isolated, is_proper
from .instances import KINDS, Instance, InstanceSpec, generate, random_prime
from .matrix_ring import (MatGap, contains_product_mat, is_isolated_mat, is_proper_mat,
                          recover_matrix_generators)
from .oracles import MINPOLY_CAP, minpoly_bounded, mult_energy
from .recovery import RecoveryConfig, recover_generators, recover_rank2
from .rng import SplitMix64

EXIT_OK, EXIT_HYPOTHESIS, EXIT_BOUND, EXIT_CAP = 0, 2, 3, 4
CSV_VERSION = "gapkit-experiment/1"
COLUMNS = ("id", "kind", "seed", "p", "d", "n_bound", "c", "c_prime", "epsilon", "poly",
           "b_proper", "b_isolated", "contained", "outcome", "heights", "polynomials",
           "table_height_observed", "oracle_agree")

log = logging.getLogger("gapkit")


# --- argument helpers ----------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _epsilon(text: str) -> Fraction:
    try:
        return check_epsilon(_rational(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _seed_range(text: str) -> list[int]:
    """'7' or '0-99' or '1,5,9'."""
    out: list[int] = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _emit(doc: Any, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_instance(path: str) -> Instance:
    return Instance.from_json(json.loads(Path(path).read_text()))


def _config(args) -> RecoveryConfig:
    return RecoveryConfig(c=args.c, c_prime=args.c_prime, epsilon=args.epsilon, kappa=args.kappa,
                          pivot_index=args.pivot, cap=args.cap)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--c", type=_rational, default=Fraction(1, 2))
    p.add_argument("--c-prime", type=_rational, default=Fraction(1, 2))
    p.add_argument("--epsilon", type=_epsilon, default=Fraction(1, 2))
    p.add_argument("--kappa", type=_rational, default=Fraction(6))
    p.add_argument("--pivot", type=int, default=1)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--cap", type=int, default=None, help="enumeration cap (default GAPKIT_CAP or 1e8)")
    p.add_argument("--out", default=None, help="output file (default stdout)")


# --- gen -----------------------------------------------------------------------------


def cmd_gen(args) -> int:
    p = args.p
    if p is None:
        p = random_prime(SplitMix64(args.seed, 1), 10**5, 10**9)
    spec = InstanceSpec(args.kind, p, d=args.d, n_bound=args.n_bound, c=args.c,
                        c_prime=args.c_prime, epsilon=args.epsilon, poly=args.poly or (),
                        rng_seed=args.seed, n=args.dim)
    inst = generate(spec, verify=not args.no_verify)
    _emit(inst.to_json(), args.out)
    return EXIT_OK


# --- check ---------------------------------------------------------------------------


def check_instance(inst: Instance, kappa, cap=None) -> dict[str, Any]:
    """Exact hypothesis suite with witnesses for every failing predicate."""
    if inst.is_matrix:
        proper, isolated, contains = is_proper_mat, is_isolated_mat, contains_product_mat
    else:
        proper, isolated, contains = is_proper, is_isolated, contains_product
    checks = {}

    def record(name, verdict):
        w = verdict.witness
        if hasattr(w, "to_dict"):
            w = w.to_dict()
        elif w is not None:
            w = [[str(v) for v in part] for part in w]
        checks[name] = {"holds": bool(verdict), "witness": w}

    record("B_proper", proper(inst.b, cap))
    record("B_isolated", isolated(inst.b, kappa, cap))
    record("A_proper", proper(inst.a, cap))
    record("A_prime_proper", proper(inst.a_prime, cap))
    record("contained", contains(inst.a, inst.a_prime, inst.b, cap))
    if inst.is_matrix:
        record("contained_reverse", contains(inst.a_prime, inst.a, inst.b, cap))
    return {"kappa": str(Fraction(kappa)), "checks": checks,
            "all_hold": all(v["holds"] for v in checks.values())}


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    report = check_instance(inst, args.kappa, args.cap)
    _emit(report, args.out)
    return EXIT_OK if report["all_hold"] else EXIT_HYPOTHESIS


# --- recover -------------------------------------------------------------------------


def rank2_json(res, t: int, p: int) -> dict[str, Any]:
    f = res.polynomial
    return {"mode": "rank2", "p": str(p),
            "polynomial": {"coefficients": [str(c) for c in f.coefficients],
                           "height": str(f.height), "degree": f.degree},
            "a0": str(res.a0), "b0": str(res.b0), "height_bound": str(res.height_bound),
            "height_ok": res.height_ok, "guard_ok": res.guard_ok, "ambiguous": res.ambiguous,
            "verified": eval_poly_mod(f, FieldElement(t, p)).value == 0}


def cmd_recover(args) -> int:
    inst = _load_instance(args.instance)
    if inst.is_matrix:
        return cmd_matrix_recover(args)
    cfg = _config(args)
    if inst.spec.kind == "quadratic":
        try:
            res = recover_rank2(inst.b, inst.a, cfg, args.cap)
        except HypothesisFailure as exc:
            _emit({"mode": "rank2", "p": str(inst.b.modulus), "failure": exc.to_dict()}, args.out)
            return EXIT_HYPOTHESIS
        doc = rank2_json(res, inst.b.generators[1], inst.b.modulus)
        _emit(doc, args.out)
        if not doc["verified"]:
            return EXIT_HYPOTHESIS
        return EXIT_OK if (res.height_ok and res.guard_ok) else EXIT_BOUND
    return _report_exit(lambda: recover_generators(inst.b, inst.a, inst.a_prime, cfg), args.out)


def cmd_matrix_recover(args) -> int:
    inst = _load_instance(args.instance)
    if not inst.is_matrix:
        b, a, a2 = (MatGap.from_gap(g) for g in (inst.b, inst.a, inst.a_prime))
    else:
        b, a, a2 = inst.b, inst.a, inst.a_prime
    cfg = _config(args)
    i = getattr(args, "pivot_left", None)
    j = getattr(args, "pivot_right", None)
    return _report_exit(lambda: recover_matrix_generators(b, a, a2, i, j, cfg), args.out)


def _report_exit(run, out) -> int:
    try:
        report = run()
    except HypothesisFailure as exc:
        doc = exc.report.to_json() if exc.report is not None else {"failure": exc.to_dict()}
        doc["mode"] = "general"
        _emit(doc, out)
        return EXIT_HYPOTHESIS
    doc = report.to_json()
    doc["mode"] = "general"
    _emit(doc, out)
    if not report.all_verified:
        return EXIT_HYPOTHESIS
    return EXIT_BOUND if report.bound_flag else EXIT_OK


# --- oracles -------------------------------------------------------------------------


def cmd_minpoly(args) -> int:
    res = minpoly_bounded(FieldElement(args.t, args.p), args.d, args.height, args.cap)
    _emit({"p": str(args.p), "t": str(args.t % args.p), "d": args.d, "height": args.height,
           "polynomials": res.to_json()}, args.out)
    return EXIT_OK


def cmd_energy(args) -> int:
    if args.set:
        s = args.set
    elif args.range:
        s = range(1, args.range + 1)
    else:
        raise PreconditionError("give --set or --range")
    _emit({"p": str(args.p), "size": len(set(v % args.p for v in s)),
           "energy": str(mult_energy(s, args.p, args.cap))}, args.out)
    return EXIT_OK


# --- experiment ----------------------------------------------------------------------


def _oracle_agrees(g: IntPolynomial, x: int, p: int, d: int) -> str:
    h = max(g.height, 1)
    if (2 * h + 1) ** (d + 1) > MINPOLY_CAP:
        return "skipped"
    m = minpoly_bounded(FieldElement(x, p), d, h).minimal
    return "yes" if m is not None and divides_mod(m, g, p) else "no"


def experiment_row(job: tuple) -> list[str]:
    """One CSV row for (index, seed, kind, options); never raises."""
    idx, seed, kind, opts = job
    rng = SplitMix64(seed, 1)
    p = random_prime(rng, opts["p_min"], opts["p_max"])
    row = {k: "" for k in COLUMNS}
    row.update(id=str(idx), kind=kind, seed=str(seed), p=str(p))
    try:
        spec = InstanceSpec(kind, p, d=opts["d"], n_bound=opts["n_bound"], c=opts["c"],
                            c_prime=opts["c_prime"], epsilon=opts["epsilon"], rng_seed=seed,
                            n=opts["dim"])
        inst = generate(spec, verify=kind != "random")
        s = inst.spec
        row.update(d=str(s.d), n_bound=str(s.n_bound), c=str(s.c), c_prime=str(s.c_prime),
                   epsilon=str(s.epsilon), poly=" ".join(map(str, s.poly)))
        flags = inst.flags
        for col, key in (("b_proper", "B_proper"), ("b_isolated", "B_isolated"),
                         ("contained", "contained")):
            if key in flags:
                row[col] = str(int(flags[key]))
        cfg = RecoveryConfig(c=s.c, c_prime=s.c_prime, epsilon=s.epsilon, cap=opts["cap"])
        if kind == "quadratic":
            res = recover_rank2(inst.b, inst.a, cfg, opts["cap"])
            t = inst.b.generators[1]
            ok = eval_poly_mod(res.polynomial, FieldElement(t, p)).value == 0
            row.update(outcome="verified" if ok else "unverified",
                       heights=str(res.polynomial.height), polynomials=str(res.polynomial))
            if not (res.height_ok and res.guard_ok):
                row["outcome"] += "+bound_flag"
            mp = minpoly_bounded(FieldElement(t, p), 2, 32)
            row["oracle_agree"] = "yes" if res.polynomial in mp else "no"
            return [row[k] for k in COLUMNS]
        if inst.is_matrix:
            report = recover_matrix_generators(inst.b, inst.a, inst.a_prime, config=cfg)
        else:
            report = recover_generators(inst.b, inst.a, inst.a_prime, cfg)
        row.update(outcome="verified" if report.all_verified else "unverified",
                   heights=" ".join(map(str, report.heights)),
                   polynomials="; ".join(map(str, report.g)),
                   table_height_observed=str(report.table_height_observed))
        if report.bound_flag:
            row["outcome"] += "+bound_flag"
        if not inst.is_matrix and inst.spec.n == 1:
            row["oracle_agree"] = " ".join(
                _oracle_agrees(g, x, p, s.d) for g, x in zip(report.g, inst.b.generators))
    except HypothesisFailure as exc:
        row["outcome"] = exc.kind
    except CapExceeded:
        row["outcome"] = "CapExceeded"
    except GapkitError as exc:
        row["outcome"] = type(exc).__name__
    except ValueError as exc:
        row["outcome"] = "ValueError"
        log.debug("row %d: %s", idx, exc)
    return [row[k] for k in COLUMNS]


def run_experiment(kind: str, seeds: Sequence[int], opts: dict, parallel: int = 1,
                   timing: bool = False) -> str:
    """The CSV text for one batch; rows are ordered by instance id whatever ``parallel`` is."""
    jobs = [(idx, seed, kind, opts) for idx, seed in enumerate(seeds)]
    columns = COLUMNS + (("wall_time",) if timing else ())

    run = _timed_row if timing else experiment_row
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} columns={','.join(columns)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _timed_row(job):
    t0 = time.perf_counter()
    row = experiment_row(job)
    return row + [f"{time.perf_counter() - t0:.4f}"]


def cmd_experiment(args) -> int:
    opts = {"p_min": args.p_min, "p_max": args.p_max, "d": args.d, "n_bound": args.n_bound,
            "c": args.c, "c_prime": args.c_prime, "epsilon": args.epsilon, "dim": args.dim,
            "cap": args.cap}
    text = run_experiment(args.kind, args.seeds, opts, args.parallel, args.timing)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gapkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a fixture as JSON")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--p", type=int, default=None, help="prime modulus (default: drawn from seed)")
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--n-bound", type=int, default=None)
    g.add_argument("--poly", type=_int_list, default=None, help="c_0,...,c_{d-1} of the monic polynomial")
    g.add_argument("--dim", type=int, default=1, help="matrix dimension n")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-verify", action="store_true")
    _add_config_flags(g)
    _add_common(g)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="run the hypothesis suite on a fixture")
    c.add_argument("instance")
    c.add_argument("--kappa", type=_rational, default=Fraction(6))
    _add_common(c)
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("recover", help="recover polynomials for a fixture")
    r.add_argument("instance")
    _add_config_flags(r)
    _add_common(r)
    r.set_defaults(func=cmd_recover)

    m = sub.add_parser("minpoly", help="all bounded-height polynomials vanishing at t")
    m.add_argument("--p", type=int, required=True)
    m.add_argument("--t", type=int, required=True)
    m.add_argument("--d", type=int, default=2)
    m.add_argument("--height", type=int, default=10)
    _add_common(m)
    m.set_defaults(func=cmd_minpoly)

    e = sub.add_parser("energy", help="multiplicative energy of a set")
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--set", type=_int_list, default=None)
    e.add_argument("--range", type=int, default=None, help="use S = [1, N]")
    _add_common(e)
    e.set_defaults(func=cmd_energy)

    mr = sub.add_parser("matrix-recover", help="recovery for a matrix fixture")
    mr.add_argument("instance")
    _add_config_flags(mr)
    mr.add_argument("--pivot-left", type=int, default=None, help="i with Y_i invertible")
    mr.add_argument("--pivot-right", type=int, default=None, help="j with Y'_j invertible")
    _add_common(mr)
    mr.set_defaults(func=cmd_matrix_recover)

    x = sub.add_parser("experiment", help="batch run to CSV")
    x.add_argument("kind", choices=KINDS)
    x.add_argument("--seeds", type=_seed_range, default=_seed_range("0-9"))
    x.add_argument("--seed", type=int, default=None, help="shorthand for a single seed")
    x.add_argument("--p-min", type=int, default=10**5)
    x.add_argument("--p-max", type=int, default=10**9)
    x.add_argument("--d", type=int, default=2)
    x.add_argument("--n-bound", type=int, default=None)
    x.add_argument("--dim", type=int, default=1)
    x.add_argument("--parallel", type=int, default=1)
    x.add_argument("--timing", action="store_true", help="append a wall_time column")
    _add_config_flags(x)
    _add_common(x)
    x.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and args.command == "experiment":
        args.seeds = [args.seed]
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"gapkit: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (PreconditionError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"gapkit: error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except GapkitError as exc:
        print(f"gapkit: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
