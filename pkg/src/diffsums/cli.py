"""Command-line entry point: ``diffsums <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import oracles, transforms
from .config import FORMATS, load_config
from .construction import certificate as certs
from .construction.plan import construction_schedule
from .construction.step import DensityBudget, inner_level_sums, step_build, step_sample_verify
from .construction.tree import Stage1, Step, TooLargeError, stage1_build
from .inequalities import GENERATORS, PROPERTIES, outcomes_csv, run_suite
from .setcore import (
    CyclicSet,
    IntegerSet,
    difference_set,
    format_set,
    kfold_sum,
    longest_consecutive_run,
    parse_set,
)


class CommandError(Exception):
    """Reported on stderr with exit status 1."""


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 1/2, got {text!r}") from None


def _q_range(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI or a comma list, got {text!r}") from None


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        if not rows:
            return ""
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    lines = []
    for row in rows:
        lines.append("  ".join(f"{k}={v}" for k, v in row.items()))
    return "\n".join(lines) + "\n"


def _load_set(path: str):
    try:
        return parse_set(_read(path))
    except ValueError as exc:
        raise CommandError(f"{path}: {exc}") from None


# ---- oracle / table -------------------------------------------------------


def cmd_oracle(args, cfg) -> int:
    qs = args.q_range or [args.q]
    rows = []
    for q in qs:
        try:
            res = oracles.oracle(args.quantity, args.k, q, args.diameter, cfg.threads,
                                 cfg.oracle_q_limit, cfg.diameter_limit)
        except (oracles.OracleLimitError, oracles.InfeasibleError) as exc:
            raise CommandError(str(exc)) from None
        rows.append(res.as_row())
    sys.stdout.write(_render(rows, args.format or cfg.format))
    return 0


def cmd_table(args, cfg) -> int:
    try:
        rep = oracles.exponent_table(args.quantity, args.k, args.q_range, args.diameter, cfg.threads,
                                     cfg.oracle_q_limit, cfg.diameter_limit)
    except (oracles.OracleLimitError, oracles.InfeasibleError, ValueError) as exc:
        raise CommandError(str(exc)) from None
    rows = [{"quantity": rep.quantity, "k": rep.k, "q": q, "value": v, "log_ratio": f"{r:.6f}",
             "running_inf": f"{inf:.6f}", "diameter_bound": "" if rep.diameter_bound is None else rep.diameter_bound}
            for q, v, r, inf in rep.rows]
    sys.stdout.write(_render(rows, args.format or cfg.format))
    return 0


# ---- construct ------------------------------------------------------------


def cmd_construct(args, cfg) -> int:
    try:
        if args.action == "stage1":
            tree = stage1_build(args.k, args.delta)
            record = certs.stage1_certificate(tree, cfg.materialize_limit)
            _emit(certs.dumps(record), args.out)
            return 0 if record["accepted"] else 1
        if args.action == "report":
            plan = construction_schedule(args.k, args.epsilon, cfg.materialize_limit, cfg.sieve_limit)
            sys.stdout.write(_render(plan.rows(), args.format or cfg.format))
            return 0
        record = certs.loads(_read(args.input))
        tree = certs.tree_from_certificate(record, cfg.sieve_limit)
        seed = cfg.seed if args.seed is None else args.seed
        if args.action == "step":
            if not isinstance(tree, Stage1):
                raise CommandError("step needs a stage-1 certificate as input")
            density = Fraction(len(inner_level_sums(tree, cfg.materialize_limit)), tree.modulus)
            budget = DensityBudget(args.delta or density, args.delta_prime)
            tree, _ = step_build(tree, budget, cfg.sieve_limit, cfg.materialize_limit)
        elif not isinstance(tree, Step):
            raise CommandError("verify needs a step certificate as input")
        cert = step_sample_verify(tree, args.samples, seed, cfg.threads, cfg.materialize_limit)
        out = certs.step_certificate(cert, cfg.materialize_limit)
        _emit(certs.dumps(out), args.out)
        return 0 if out["accepted"] else 1
    except (TooLargeError, certs.CertificateError, ValueError, RuntimeError) as exc:
        raise CommandError(str(exc)) from None


# ---- check ------------------------------------------------------------------


def cmd_check(args, cfg) -> int:
    gens = args.generators or list(GENERATORS)
    seed = cfg.seed if args.seed is None else args.seed
    try:
        outcomes = run_suite(gens, args.trials, seed, cfg.threads)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    if args.property:
        outcomes = [o for o in outcomes if o.property in args.property]
    fmt = args.format or "csv"
    if fmt == "csv":
        sys.stdout.write(outcomes_csv(outcomes))
    else:
        rows = [{"property": o.property, "trials": o.trials, "violations": o.violations,
                 "worst_margin": f"{o.worst_margin:.9g}", "generator": o.generator, "seed": o.seed} for o in outcomes]
        sys.stdout.write(_render(rows, fmt))
    return 1 if any(o.violations for o in outcomes) else 0


# ---- transform --------------------------------------------------------------


def _set_summary(s, k: int | None = None) -> dict:
    row = {"kind": "zq" if isinstance(s, CyclicSet) else "int", "size": len(s)}
    if isinstance(s, CyclicSet):
        row["modulus"] = s.modulus
    if len(s):
        d = difference_set(s)
        row["difference_size"] = len(d)
        if isinstance(d, IntegerSet):
            run = longest_consecutive_run(d)
            row["difference_run"] = run.run_length
            row["difference_run_start"] = run.run_start
        else:
            row["difference_full"] = d.is_full()
        if k:
            row[f"{k}fold_size"] = len(kfold_sum(s, k))
    return row


def cmd_transform(args, cfg) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    fmt = args.format or cfg.format
    try:
        if args.action == "lift":
            a = _load_set(args.input)
            if not isinstance(a, CyclicSet):
                raise CommandError("lift needs a zq set")
            lifted = transforms.lift_doubling(a)
            if args.out:
                _emit(format_set(lifted), args.out)
            sys.stdout.write(_render([_set_summary(lifted, args.k)], fmt))
            return 0
        if args.action == "project":
            a = _load_set(args.input)
            p = transforms.ProjectionParam(args.numerator, args.q)
            img = CyclicSet.from_elements(transforms.project_set(p, a), args.q)
            _emit(format_set(img), args.out)
            return 0
        if args.action == "cover":
            a = _load_set(args.input)
            if not isinstance(a, CyclicSet):
                raise CommandError("cover needs a zq set")
            res = transforms.lorentz_cover(a, args.k, seed)
            rows = [{"set": i + 1, "size": len(b), "bound": res.per_set_bound, "elements": " ".join(map(str, b.elements()))}
                    for i, b in enumerate(res.sets)]
            sys.stdout.write(_render(rows, fmt))
            return 1 if res.bound_exceeded else 0
        if args.action == "pipeline":
            a = _load_set(args.input)
            if not isinstance(a, IntegerSet):
                raise CommandError("pipeline needs an int set")
            res = transforms.full_difference_pipeline(a, args.q, args.k, seed)
            if args.out:
                _emit(format_set(res.a3), args.out)
            sys.stdout.write(json.dumps(res.trace, indent=2, sort_keys=True) + "\n")
            return 0 if all(res.trace["checks"].values()) else 1
        if args.action == "witness":
            a1, a2 = _load_set(args.input), _load_set(args.input2)
            if args.kind == "product":
                w = transforms.witness_product(a1, a2)
            elif args.kind == "base-q":
                w = transforms.witness_base_q(a1, args.q1, a2)
            else:
                w = transforms.witness_spread(a1, a2, args.k or 1)
            if args.out:
                _emit(format_set(w), args.out)
            sys.stdout.write(_render([_set_summary(w, args.k)], fmt))
            return 0
    except (ValueError, TypeError, transforms.SearchFailure) as exc:
        raise CommandError(str(exc)) from None
    raise CommandError(f"unknown transform {args.action}")


# ---- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: $DIFFSUMS_CONFIG)")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--format", choices=FORMATS)

    p = argparse.ArgumentParser(prog="diffsums", description="Sums versus differences workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive extremal-function values")
    o.add_argument("quantity", choices=oracles.QUANTITIES)
    o.add_argument("--k", type=int, required=True)
    g = o.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", type=int)
    g.add_argument("--q-range", type=_q_range)
    o.add_argument("--diameter", type=int)
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("table", parents=[common], help="log-ratio table with running infimum")
    t.add_argument("quantity", choices=oracles.QUANTITIES)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--q-range", type=_q_range, required=True)
    t.add_argument("--diameter", type=int)
    t.set_defaults(func=cmd_table)

    c = sub.add_parser("construct", help="recursive construction and certificates")
    csub = c.add_subparsers(dest="action", required=True)
    s1 = csub.add_parser("stage1", parents=[common])
    s1.add_argument("--k", type=int, required=True)
    s1.add_argument("--delta", type=_rational, required=True)
    s1.add_argument("--out")
    st = csub.add_parser("step", parents=[common])
    st.add_argument("--in", dest="input", required=True)
    st.add_argument("--delta", type=_rational, help="inner budget (default: verified inner density)")
    st.add_argument("--delta-prime", type=_rational, required=True)
    st.add_argument("--samples", type=int, default=10_000)
    st.add_argument("--out")
    ve = csub.add_parser("verify", parents=[common])
    ve.add_argument("--in", dest="input", required=True)
    ve.add_argument("--samples", type=int, default=10_000)
    ve.add_argument("--out")
    rp = csub.add_parser("report", parents=[common])
    rp.add_argument("--k", type=int, required=True)
    rp.add_argument("--epsilon", type=_rational, required=True)
    for sp in (s1, st, ve, rp):
        sp.set_defaults(func=cmd_construct)

    ch = sub.add_parser("check", parents=[common], help="inequality suite on random sets")
    ch.add_argument("--all", action="store_true", help="run every property (the default)")
    ch.add_argument("--property", action="append", choices=PROPERTIES)
    ch.add_argument("--generator", dest="generators", action="append", choices=list(GENERATORS))
    ch.add_argument("--trials", type=int, default=10_000)
    ch.set_defaults(func=cmd_check)

    tr = sub.add_parser("transform", help="lift, projection, covering, pipeline, witnesses")
    tsub = tr.add_subparsers(dest="action", required=True)
    li = tsub.add_parser("lift", parents=[common])
    li.add_argument("--in", dest="input", required=True)
    li.add_argument("--k", type=int)
    li.add_argument("--out")
    pr = tsub.add_parser("project", parents=[common])
    pr.add_argument("--in", dest="input", required=True)
    pr.add_argument("--numerator", type=int, required=True, help="t = numerator / 2^64")
    pr.add_argument("--q", type=int, required=True)
    pr.add_argument("--out")
    co = tsub.add_parser("cover", parents=[common])
    co.add_argument("--in", dest="input", required=True)
    co.add_argument("--k", type=int, required=True)
    pi = tsub.add_parser("pipeline", parents=[common])
    pi.add_argument("--in", dest="input", required=True)
    pi.add_argument("--q", type=int, required=True)
    pi.add_argument("--k", type=int, required=True)
    pi.add_argument("--out")
    wi = tsub.add_parser("witness", parents=[common])
    wi.add_argument("kind", choices=("product", "base-q", "spread"))
    wi.add_argument("--in", dest="input", required=True)
    wi.add_argument("--in2", dest="input2", required=True)
    wi.add_argument("--q1", type=int)
    wi.add_argument("--k", type=int)
    wi.add_argument("--out")
    for sp in (li, pr, co, pi, wi):
        sp.set_defaults(func=cmd_transform)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None))
        if getattr(args, "threads", None):
            cfg.threads = args.threads
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "format", None):
            cfg.format = args.format
        if getattr(args, "kind", None) == "base-q" and args.q1 is None:
            parser.error("witness base-q needs --q1")
        return args.func(args, cfg)
    except CommandError as exc:
        print(f"diffsums: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"diffsums: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
