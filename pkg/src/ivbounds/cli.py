"""``ivb``: bounds, membership checks, witnesses and verification runs.

Every command prints one canonical JSON report on stdout.  Exit codes:
0 success (law feasible, check passed), 2 model-infeasible or a failed
verification, 1 usage or input error (one line on stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .bounds import ace_interval, membership_test
from .errors import IdentityViolation, InfeasibleLaw, IVBoundsError, OracleSizeExceeded
from .identities import (
    check_appendix_a,
    check_lower_difference_table,
    check_upper_difference_table,
)
from .observed import OutcomeJoint, load_law, normalize_outcome_joint, parse_number
from .oracle import K_MAX_ORACLE, OracleRegion
from .report import RunReport, digest
from .synthetic import (
    MODES,
    GeneratorConfig,
    dirichlet,
    rng_for,
    sample_full_m1,
    sample_law,
    sample_observed,
    true_ace,
)
from .witness import (
    Explicit,
    construct_witness,
    phi,
    pick_outcome_joint,
    round_trip_residual,
    witness_ace,
)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2
ROUND_TRIP_TOL = 1e-12
SHARPNESS_TOL = 1e-9
MAX_LISTED_FAILURES = 20


class UsageError(IVBoundsError):
    pass


# --------------------------------------------------------------------------
# plumbing


def worker_count() -> int:
    """CPU count, capped by ``IVB_THREADS`` when set."""
    n = os.cpu_count() or 1
    cap = os.environ.get("IVB_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"IVB_THREADS must be an integer, got {cap!r}") from None
    return n


def ordered_map(fn, items):
    """``map`` with optional process parallelism; results keep input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _read_input(args, stdin=None) -> bytes:
    path = args.input
    if path in (None, "-"):
        stream = stdin if stdin is not None else sys.stdin
        data = stream.buffer.read() if hasattr(stream, "buffer") else stream.read()
        return data.encode() if isinstance(data, str) else data
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(args, stdin=None):
    data = _read_input(args, stdin)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise UsageError("input is not UTF-8 text") from None
    if not text.strip():
        raise UsageError("input is empty")
    return load_law(text, args.format, exact=args.exact), digest(data)


def _mode(args) -> str:
    return "exact" if args.exact else "float"


def _report(args, result, input_digest=None, status="ok") -> RunReport:
    return RunReport(list(args.argv), _mode(args), result, input_digest, __version__, status)


# --------------------------------------------------------------------------
# commands


def cmd_bounds(args, stdin=None):
    law, dg = _load(args, stdin)
    report = ace_interval(law, args.tolerance)
    result = {"K": law.K, "bounds": report, "law": law}
    code = EXIT_OK if report.feasible else EXIT_INFEASIBLE
    return _report(args, result, dg, "feasible" if report.feasible else "infeasible"), code


def _joint_from_flags(args, required: bool):
    given = [v is not None for v in (args.pi0, args.pi1, args.piar)]
    if not any(given) and not required:
        return None
    if not all(given):
        raise UsageError("--pi0, --pi1 and --piar must be given together")
    return [parse_number(v, exact=args.exact) for v in (args.pi0, args.pi1, args.piar)]


def cmd_check(args, stdin=None):
    law, dg = _load(args, stdin)
    pi0, pi1, piar = _joint_from_flags(args, required=True)
    joint = normalize_outcome_joint(pi0, pi1, piar, args.tolerance)
    result = membership_test(joint, law, args.tolerance)
    out = {"joint": joint, "membership": result}
    code = EXIT_OK if result else EXIT_INFEASIBLE
    return _report(args, out, dg, "pass" if result else "fail"), code


def cmd_witness(args, stdin=None):
    law, dg = _load(args, stdin)
    explicit = _joint_from_flags(args, required=False)
    mode = Explicit(*explicit) if explicit else args.mode
    bounds = ace_interval(law, args.tolerance)
    try:
        joint = pick_outcome_joint(law, mode, args.tolerance)
    except InfeasibleLaw as exc:
        return _report(args, {"bounds": exc.report}, dg, "infeasible"), EXIT_INFEASIBLE
    full = construct_witness(law, joint, args.p000_rule, args.tolerance)
    residual = round_trip_residual(full, joint, law)
    ok = residual == 0 if full.exact else residual <= ROUND_TRIP_TOL
    out = {
        "bounds": bounds,
        "joint": joint,
        "witness": full,
        "witness_ace": witness_ace(full),
        "round_trip_residual": residual,
        "round_trip_ok": ok,
    }
    if not ok:
        return _report(args, out, dg, "verification_failed"), EXIT_INFEASIBLE
    return _report(args, out, dg), EXIT_OK


def _compare_one(task):
    K, seed, trial, exact, gen_mode, concentration = task
    cfg = GeneratorConfig(K, seed, concentration, gen_mode)
    law = sample_law(cfg, trial, exact=exact)
    closed = ace_interval(law)
    region = OracleRegion(law)
    record = {
        "trial": trial,
        "law": law,
        "closed_form": {"pi0": closed.pi0, "pi1": closed.pi1, "ace": closed.ace,
                        "feasible": closed.feasible},
        "oracle": {"feasible": region.feasible},
    }
    if not region.feasible or not closed.feasible:
        record["max_abs_diff"] = 0 if closed.feasible == region.feasible else None
        return record
    worst = Fraction(0)
    for name in ("pi0", "pi1", "ace"):
        iv = region.bounds(name)
        record["oracle"][name] = iv if exact else iv.to_float()
        mine = getattr(closed, name)
        for a, b in ((mine.lo, iv.lo), (mine.hi, iv.hi)):
            worst = max(worst, abs(Fraction(a) - b))
    record["max_abs_diff"] = worst if exact else float(worst)
    return record


def cmd_oracle_compare(args, stdin=None):
    if args.k > K_MAX_ORACLE:
        raise OracleSizeExceeded(args.k, K_MAX_ORACLE)
    if args.k < 1 or args.trials < 1:
        raise UsageError("--k and --trials must be positive")
    exact = args.mode == "exact" if args.mode else args.exact
    tol = 0 if exact else (args.tolerance if args.tolerance is not None else SHARPNESS_TOL)
    tasks = [(args.k, args.seed, t, exact, args.generator, args.concentration)
             for t in range(args.trials)]
    records = ordered_map(_compare_one, tasks)
    mismatched = [r["trial"] for r in records
                  if r["max_abs_diff"] is None or r["max_abs_diff"] > tol]
    diffs = [r["max_abs_diff"] for r in records if r["max_abs_diff"] is not None]
    result = {
        "k": args.k,
        "trials": args.trials,
        "seed": args.seed,
        "arithmetic": "exact" if exact else "float",
        "generator": args.generator,
        "tolerance": tol,
        "max_abs_diff": max(diffs) if diffs else 0,
        "infeasible_laws": sum(not r["closed_form"]["feasible"] for r in records),
        "mismatched_trials": mismatched,
        "instances": records,
    }
    code = EXIT_OK if not mismatched else EXIT_INFEASIBLE
    return _report(args, result, None, "pass" if code == 0 else "fail"), code


def _identity_trial(task):
    seed, trial = task
    failures = []
    law = sample_observed(GeneratorConfig(2, seed), trial)
    for check in (check_upper_difference_table, check_lower_difference_table):
        try:
            check(law)
        except IdentityViolation as exc:
            failures.append({"trial": trial, "row": exc.row, "lhs": exc.lhs, "rhs": exc.rhs})
    # free-cell pairings on an arbitrary (joint, level) in exact arithmetic
    rng = rng_for(seed, 2**32 + trial)
    exact_law = sample_observed(GeneratorConfig(2, seed), trial, exact=True)
    w = [Fraction(float(v)) for v in dirichlet(rng, 1.0, 4)]
    total = sum(w)
    joint = OutcomeJoint([[w[0] / total, w[1] / total], [w[2] / total, w[3] / total]])
    k = int(rng.integers(2))
    rep = check_appendix_a(joint, exact_law, k)
    for row in rep.mismatches:
        failures.append({"trial": trial, "row": row.row, "lhs": row.slack,
                         "rhs": row.equivalent_slack})
    if rep.interval_feasible != rep.membership_holds:
        failures.append({"trial": trial, "row": "interval vs membership",
                         "lhs": rep.interval_feasible, "rhs": rep.membership_holds})
    return failures


def cmd_identities(args, stdin=None):
    if args.input is not None:
        law, dg = _load(args, stdin)
        upper = check_upper_difference_table(law, args.tolerance)
        lower = check_lower_difference_table(law, args.tolerance)
        result = {"upper": upper, "lower": lower}
        if ace_interval(law).feasible:
            joint = pick_outcome_joint(law, "midpoint", args.tolerance)
            result["pairings"] = [check_appendix_a(joint, law, k, args.tolerance)
                                  for k in range(law.K)]
        return _report(args, result, dg), EXIT_OK
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    failures = [f for batch in ordered_map(_identity_trial,
                                           [(args.seed, t) for t in range(args.trials)])
                for f in batch]
    result = {
        "trials": args.trials,
        "seed": args.seed,
        "violations": len(failures),
        "failures": failures[:MAX_LISTED_FAILURES],
    }
    code = EXIT_OK if not failures else EXIT_INFEASIBLE
    return _report(args, result, None, "pass" if code == 0 else "fail"), code


def _simulate_one(task):
    K, seed, trial, gen_mode, concentration = task
    cfg = GeneratorConfig(K, seed, concentration, gen_mode)
    full = sample_full_m1(cfg, trial)
    law = phi(full)[1]
    report = ace_interval(law)
    ace = true_ace(full)
    covered = report.feasible and report.ace.lo - 1e-12 <= ace <= report.ace.hi + 1e-12
    gaps = []
    if report.feasible:
        for mode, target in (("maximize_ace", report.ace.hi), ("minimize_ace", report.ace.lo)):
            w = construct_witness(law, pick_outcome_joint(law, mode))
            gaps.append(abs(witness_ace(w) - target))
    return {"trial": trial, "true_ace": ace, "ace": report.ace, "covered": covered,
            "sharpness_gap": max(gaps) if gaps else None}


def cmd_simulate(args, stdin=None):
    if args.k < 1 or args.trials < 1:
        raise UsageError("--k and --trials must be positive")
    if args.generator == "observed_only":
        raise UsageError("simulate needs counterfactual laws; use full_m1 or boundary_biased")
    tasks = [(args.k, args.seed, t, args.generator, args.concentration)
             for t in range(args.trials)]
    records = ordered_map(_simulate_one, tasks)
    uncovered = [r["trial"] for r in records if not r["covered"]]
    gaps = [r["sharpness_gap"] for r in records if r["sharpness_gap"] is not None]
    worst = max(gaps) if gaps else 0.0
    result = {
        "k": args.k,
        "trials": args.trials,
        "seed": args.seed,
        "generator": args.generator,
        "coverage_failures": uncovered,
        "max_sharpness_gap": worst,
        "sharpness_tolerance": SHARPNESS_TOL,
    }
    ok = not uncovered and worst <= SHARPNESS_TOL
    return (_report(args, result, None, "pass" if ok else "fail"),
            EXIT_OK if ok else EXIT_INFEASIBLE)


COMMANDS = {
    "bounds": cmd_bounds,
    "check": cmd_check,
    "witness": cmd_witness,
    "oracle-compare": cmd_oracle_compare,
    "identities": cmd_identities,
    "simulate": cmd_simulate,
}


# --------------------------------------------------------------------------
# argument parsing


def _global_flags(p: argparse.ArgumentParser, top: bool) -> None:
    # on subcommands the flags must not reset values given before the command
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--input", default=d(None), help="input file ('-' or omitted: stdin)")
    p.add_argument("--format", choices=("json", "csv"), default=d(None),
                   help="input format (default: auto-detect)")
    p.add_argument("--exact", action="store_true", default=d(False),
                   help="rational arithmetic throughout")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--tolerance", type=float, default=d(None),
                   help="float-mode comparison tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ivb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ivb {__version__}")
    _global_flags(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, top=False)
        return p

    add("bounds", "sharp bounds on pi0, pi1 and the ACE")

    p = add("check", "test an outcome joint against the characterizing inequalities")
    for flag in ("--pi0", "--pi1", "--piar"):
        p.add_argument(flag, required=True)

    p = add("witness", "construct a counterfactual law attaining an outcome joint")
    p.add_argument("--mode", choices=("midpoint", "maximize_ace", "minimize_ace"),
                   default="midpoint")
    p.add_argument("--p000-rule", dest="p000_rule", choices=("midpoint", "lower", "upper"),
                   default="midpoint")
    for flag in ("--pi0", "--pi1", "--piar"):
        p.add_argument(flag, default=None, help="explicit joint (overrides --mode)")

    p = add("oracle-compare", "closed form vs LP oracle on random laws")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mode", choices=("exact", "float"), default=None)
    p.add_argument("--generator", choices=MODES, default="full_m1")
    p.add_argument("--concentration", type=float, default=1.0)

    p = add("identities", "randomized check of the two-level expression tables")
    p.add_argument("--trials", type=int, default=500)

    p = add("simulate", "coverage and sharpness on random counterfactual laws")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--generator", choices=MODES, default="full_m1")
    p.add_argument("--concentration", type=float, default=1.0)
    return parser


def main(argv=None, stdout=None, stdin=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed its message
        return EXIT_INPUT if exc.code else EXIT_OK
    args.argv = argv
    try:
        report, code = COMMANDS[args.command](args, stdin)
    except (IVBoundsError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"ivb: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    stdout.write(report.dumps())
    return code


if __name__ == "__main__":
    sys.exit(main())
