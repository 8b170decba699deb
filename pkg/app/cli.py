"""
Command-line front end: construct, verify, count, search, check and experiment
subcommands over the toolkit services.

Exit codes: 0 when the command passes, 1 when a property is violated (the
counterexample is written to a file), 2 for guard and usage errors.
"""
import argparse
import json
import logging
import math
import os
import sys
from itertools import product
from typing import Any, List, Optional

from . import config
from .errors import (
    ConstructionBug,
    DimensionError,
    DomainError,
    EmptyFamily,
    GuardExceeded,
    ParseError,
    PreconditionError,
    RetryExhausted,
    ToolkitError,
)
from .services.census import count_sep
from .services.experiments import audit_triples, load_experiment_spec, run_experiment
from .services.ground import FamilyFormat, SetFamily, build_with_reseed, emit_family, parse_family
from .services.search import PropertyKind, exact_min_family_size
from .services.separate import (
    ImplicationKind,
    build_2_separating,
    build_min_separating,
    build_n_separating_randomized,
    check_implication,
    duplicate_columns,
    find_ij_separating_violation,
    find_n_separating_violation,
    is_separating_family,
)
from .services.split import (
    build_2_splitting_randomized,
    build_interval_splitting,
    count_simultaneous_splitters,
    counting_identities_check,
    find_n_splitting_violation,
    find_unsplit_set,
    max_splitter_volume,
    splitter_count_formula,
    volume_lower_bound,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE = 0, 1, 2

_USAGE_ERRORS = (GuardExceeded, ParseError, DomainError, DimensionError, PreconditionError, EmptyFamily)


class CommandFailed(Exception):
    """A command finished but a checked property did not hold."""

    def __init__(self, message: str, payload: Any):
        self.payload = payload
        super().__init__(message)


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name}" for name in names if getattr(args, name) is None]
    if missing:
        raise DomainError(f"{args.command} {args.action} needs {', '.join(missing)}")


def _read_family(args: argparse.Namespace) -> SetFamily:
    if args.family is None:
        raise DomainError("a family file is required ('-' reads stdin)")
    if args.family == "-":
        text = sys.stdin.read()
    else:
        with open(args.family, "r", encoding="utf-8") as handle:
            text = handle.read()
    return parse_family(text, args.format)


def _write_output(args: argparse.Namespace, payload: bytes) -> None:
    if args.out:
        with open(args.out, "wb") as handle:
            handle.write(payload)
        logger.info(f"Wrote {args.out}")
    else:
        sys.stdout.write(payload.decode("utf-8"))


def _print(line: str) -> None:
    sys.stdout.write(line + "\n")


# --- construct ---

def _construct(args: argparse.Namespace) -> int:
    action = args.action
    if action == "min-sep":
        _need(args, "k")
        family = build_min_separating(args.k)
    elif action == "2-sep":
        base = _read_family(args) if args.family else None
        if base is None:
            _need(args, "k")
            base = build_min_separating(args.k)
        family = build_2_separating(base)
    elif action == "interval-split":
        _need(args, "k")
        family = build_interval_splitting(args.k)
    elif action == "rand-nsep":
        _need(args, "n", "k", "seed")
        family, report = build_with_reseed(
            build_n_separating_randomized, args.n, args.k, seed=args.seed, verify=not args.unverified
        )
        logger.info(f"bounds: lower {report.lower:.2f}, ceiling {report.ceiling}, achieved {report.achieved}")
    else:
        _need(args, "k", "seed")
        family, report = build_with_reseed(build_2_splitting_randomized, args.k, seed=args.seed, verify=not args.unverified)
        logger.info(f"bounds: lower {report.lower:.0f}, ceiling {report.ceiling}, achieved {report.achieved}")
    _write_output(args, emit_family(family, args.format))
    return EXIT_OK


# --- verify ---

def _verify(args: argparse.Namespace) -> int:
    family = _read_family(args)
    action = args.action
    counterexample: Optional[List[List[int]]] = None
    if action == "sep":
        if not is_separating_family(family):
            counterexample = [list(pair) for pair in duplicate_columns(family)[:1]]
    elif action == "nsep":
        _need(args, "n")
        violation = find_n_separating_violation(family, args.n)
        counterexample = violation.as_lists() if violation is not None else None
    elif action == "ijsep":
        _need(args, "i", "j")
        violation = find_ij_separating_violation(family, args.i, args.j)
        counterexample = [list(part.elements) for part in violation] if violation is not None else None
    elif action == "split":
        unsplit = find_unsplit_set(family)
        counterexample = [list(unsplit.elements)] if unsplit is not None else None
    else:
        _need(args, "n")
        violation = find_n_splitting_violation(family, args.n)
        counterexample = violation.as_lists() if violation is not None else None

    if counterexample is not None:
        raise CommandFailed(f"{action}: violated", {"property": action, "counterexample": counterexample})
    _print(f"{action}: holds")
    return EXIT_OK


# --- count ---

def _count(args: argparse.Namespace) -> int:
    action = args.action
    if action == "sep-census":
        _need(args, "m")
        sizes = [args.k] if args.k is not None else list(range((1 << args.m) + 1))
        for k in sizes:
            _print(f"sep({args.m},{k}) = {count_sep(args.m, k)}")
    elif action == "splitters":
        _need(args, "s", "t", "b", "k")
        report = count_simultaneous_splitters(args.s, args.t, args.b, args.k)
        formula = splitter_count_formula(args.s, args.t, args.b, args.k)
        _print(f"splitters(s={args.s}, t={args.t}, b={args.b}, k={args.k}) = {report.count} (formula {formula})")
    else:
        _need(args, "k")
        n = args.n or 1
        bound = volume_lower_bound(n, args.k)
        volume, sizes = max_splitter_volume(args.k, n)
        _print(f"n={n} k={args.k}: max volume {volume} at |A| in {sizes}, bound {float(bound):.4f} -> {math.ceil(bound)}")
    return EXIT_OK


# --- search ---

def _search(args: argparse.Namespace) -> int:
    _need(args, "k")
    result = exact_min_family_size(args.property, args.k, args.n or 1)
    _print(f"{result.objective}: {result.value} (exhausted={result.exhausted})")
    _write_output(args, emit_family(result.certificate, args.format))
    return EXIT_OK


# --- check ---

def _check(args: argparse.Namespace) -> int:
    action = args.action
    failed: List[Any] = []
    if action == "implications":
        _need(args, "k", "seed")
        params = {name: getattr(args, name) for name in ("n", "i", "j") if getattr(args, name) is not None}
        for kind in ImplicationKind:
            try:
                report = check_implication(kind, params, args.k, seed=args.seed)
            except DomainError as e:
                _print(f"{kind.value}: skipped ({e})")
                continue
            verdict = "inconclusive" if report.inconclusive else "holds" if report.holds else "FAILED"
            _print(f"{kind.value}: {verdict} ({report.checked} checks)")
            if not report.holds:
                failed.append({"kind": kind.value, "details": report.details, "family": report.counterexample})
    elif action == "identities":
        _need(args, "s", "t", "k")
        report = counting_identities_check(args.s, args.t, args.k)
        for line in report.details:
            _print(line)
        if not report.holds:
            failed.append(report.counterexample)
    else:
        _need(args, "k")
        audit = audit_triples(args.k, product(range(1 << args.k), repeat=3))
        _print(f"{audit.triples} triples, {audit.splittable} splittable, {audit.mismatches} mismatches, "
               f"{audit.builder_failures} builder failures")
        failed.extend(audit.failures)

    if failed:
        raise CommandFailed(f"check {action}: {len(failed)} failures", {"check": action, "failures": failed})
    return EXIT_OK


# --- experiment ---

def _experiment(args: argparse.Namespace) -> int:
    spec = load_experiment_spec(args.spec_file)
    if args.out:
        spec.output = args.out
    outcome = run_experiment(spec)
    for path in outcome.files:
        _print(path)
    return outcome.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name in ("k", "n", "m", "i", "j", "s", "t", "b", "seed"):
        common.add_argument(f"--{name}", type=int, default=None)
    common.add_argument("--format", type=FamilyFormat, choices=list(FamilyFormat), default=FamilyFormat.SETS)
    common.add_argument("--out", default=None, help="Output path (family, counterexample or report directory)")
    common.add_argument("--unsafe-limits", action="store_true", help="Disable every exhaustive-search guard")

    parser = argparse.ArgumentParser(prog="sepsplit", description="Separating and splitting family toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    construct = commands.add_parser("construct", parents=[common], help="Build a family")
    construct.add_argument("action", choices=["min-sep", "2-sep", "interval-split", "rand-nsep", "rand-2split"])
    construct.add_argument("family", nargs="?", default=None, help="Base family for 2-sep")
    construct.add_argument("--unverified", action="store_true", help="Stop randomized builds at the bound")

    verify = commands.add_parser("verify", parents=[common], help="Check a property of a family")
    verify.add_argument("action", choices=["sep", "nsep", "ijsep", "split", "nsplit"])
    verify.add_argument("family", help="Family file, '-' for stdin")

    count = commands.add_parser("count", parents=[common], help="Exact counts")
    count.add_argument("action", choices=["sep-census", "splitters", "volume"])

    search = commands.add_parser("search", parents=[common], help="Exact minimum-size searches")
    search.add_argument("action", choices=["min"])
    search.add_argument("--property", type=PropertyKind, choices=list(PropertyKind), default=PropertyKind.SEPARATING)

    check = commands.add_parser("check", parents=[common], help="Check identities and implications on explicit instances")
    check.add_argument("action", choices=["implications", "identities", "parity-oracle"])

    run = commands.add_parser("experiment", parents=[common], help="Run an experiment spec")
    run.add_argument("action", choices=["run"])
    run.add_argument("spec_file")
    return parser


_HANDLERS = {
    "construct": _construct,
    "verify": _verify,
    "count": _count,
    "search": _search,
    "check": _check,
    "experiment": _experiment,
}


def _counterexample_path(args: argparse.Namespace) -> str:
    if args.command == "verify" and args.out:
        return args.out
    return os.path.join(config.REPORT_DIR, "counterexample.json")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    logging.basicConfig(level=config.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")
    try:
        with config.unsafe_limits(args.unsafe_limits):
            return _HANDLERS[args.command](args)
    except CommandFailed as e:
        path = _counterexample_path(args)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(e.payload, handle, indent=2, default=str)
            handle.write("\n")
        _print(f"{e} (counterexample in {path})")
        return EXIT_VIOLATED
    except _USAGE_ERRORS as e:
        logger.error(f"{args.command} {args.action}: {e}")
        return EXIT_USAGE
    except (RetryExhausted, ConstructionBug) as e:
        logger.error(f"{args.command} {args.action} failed: {e}")
        return EXIT_VIOLATED
    except (OSError, ToolkitError) as e:
        logger.error(f"{args.command} {args.action}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
