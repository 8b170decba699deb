"""
Experiment harness: named sweeps that reproduce the bound tables, census tables
and probability calibrations, each writing a CSV, a text summary and a JSON
failure list.
"""
import contextvars
import io
import json
import logging
import math
import os
import statistics
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError, field_validator

from .. import config
from ..errors import DomainError, GuardExceeded, ParseError, RetryExhausted, ToolkitError
from .census import (
    burnside_count,
    count_sep,
    equivalence_move_failures,
    group_order,
    random_separating_family,
    symmetry_group,
)
from .ground import (
    BinaryMatrix,
    SetCollection,
    SubsetMask,
    build_with_reseed,
    family_to_matrix,
    make_rng,
    matrix_to_family,
)
from .search import PropertyKind, exact_min_family_size
from .separate import (
    ImplicationKind,
    build_2_separating,
    build_min_separating,
    build_n_separating_randomized,
    check_implication,
    column_distances,
    estimate_separation_probability,
    is_n_separating,
    is_separating_family,
    min_pairwise_column_distance,
    power_set_matrix,
)
from .split import (
    build_2_splitting_randomized,
    build_interval_splitting,
    build_triple_splitter,
    count_simultaneous_splitters,
    counting_identities_check,
    is_n_splitting,
    is_splittable,
    max_splitter_volume,
    split_volume_formula,
    splittable_triple_census,
    splitter_count_formula,
    triple_splittable_parity,
    volume_lower_bound,
)

logger = logging.getLogger(__name__)

Row = Dict[str, Any]
Failure = Dict[str, Any]


class ExperimentSpec(BaseModel):
    """
    One experiment run. Parameter values may be an int, a list of ints or an
    inclusive range string such as "4..12".
    """

    experiment: str
    parameters: Dict[str, List[int]] = {}
    seed: Optional[int] = None
    trials: Optional[int] = None
    samples: Optional[int] = None
    search_property: PropertyKind = PropertyKind.SEPARATING
    output: Optional[str] = None
    format: str = "csv"
    unsafe_limits: bool = False

    @field_validator("parameters", mode="before")
    @classmethod
    def expand_ranges(cls, value: Any) -> Dict[str, List[int]]:
        expanded = {}
        for name, raw in (value or {}).items():
            if isinstance(raw, int):
                expanded[name] = [raw]
            elif isinstance(raw, str) and ".." in raw:
                start, _, stop = raw.partition("..")
                expanded[name] = list(range(int(start), int(stop) + 1))
            else:
                expanded[name] = raw
        return expanded

    @field_validator("format")
    @classmethod
    def csv_only(cls, value: str) -> str:
        if value != "csv":
            raise ValueError(f"unsupported report format {value!r}; experiments write csv")
        return value

    def values(self, name: str, default: List[int]) -> List[int]:
        return self.parameters.get(name) or default


def load_experiment_spec(path: str) -> ExperimentSpec:
    """Read an experiment spec file (JSON)."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return ExperimentSpec.model_validate_json(handle.read())
    except ValidationError as e:
        raise ParseError(f"invalid experiment spec {path}: {e}")
    except OSError as e:
        raise ParseError(f"cannot read experiment spec {path}: {e}")


@dataclass
class ExperimentOutcome:
    experiment: str
    exit_code: int
    rows: List[Row] = field(default_factory=list)
    failures: List[Failure] = field(default_factory=list)
    files: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class _Experiment:
    name: str
    columns: Tuple[str, ...]
    randomized: bool
    run: Callable[[ExperimentSpec], Tuple[List[Row], List[Failure]]]
    volatile: Tuple[str, ...] = ()


EXPERIMENTS: Dict[str, _Experiment] = {}


def experiment(name: str, columns: List[str], randomized: bool = False, volatile: Sequence[str] = ()):
    """
    Register a sweep under `name` with its fixed CSV columns.

    Volatile row values (wall-clock timings) go to the summary only; the CSV
    of a seeded run is byte-identical across runs.
    """

    def register(func: Callable[[ExperimentSpec], Tuple[List[Row], List[Failure]]]):
        EXPERIMENTS[name] = _Experiment(name, tuple(columns), randomized, func, tuple(volatile))
        return func

    return register


def _failure(check: str, **detail: Any) -> Failure:
    return {"check": check, **detail}


def _fan_out(func: Callable, items: List[Any]) -> List[Any]:
    # each task runs in a copy of the caller's context so guard overrides reach the workers
    with ThreadPoolExecutor(max_workers=max(1, config.WORKERS)) as pool:
        futures = [pool.submit(contextvars.copy_context().run, func, item) for item in items]
        return [future.result() for future in futures]


# --- Splitter counts ---

@experiment("dhm-sweep", ["k", "s", "t", "b", "count", "formula"])
def _dhm_sweep(spec: ExperimentSpec):
    rows, failures = [], []
    for k in spec.values("k", list(range(4, 9))):
        for s in range(1, k):
            for t in range(s, k - s + 1):
                previous = None
                for b in range(0, min(s, t) + 1):
                    count = count_simultaneous_splitters(s, t, b, k).count
                    formula = splitter_count_formula(s, t, b, k)
                    rows.append({"k": k, "s": s, "t": t, "b": b, "count": count, "formula": formula})
                    if count != formula:
                        failures.append(_failure("count matches formula", k=k, s=s, t=t, b=b, count=count, formula=formula))
                    if previous is not None and count < previous:
                        failures.append(_failure("nondecreasing in b", k=k, s=s, t=t, b=b, count=count, previous=previous))
                    previous = count
    return rows, failures


@experiment("identities", ["s", "t", "k", "checked", "holds"])
def _identities(spec: ExperimentSpec):
    rows, failures = [], []
    for k in spec.values("k", [8]):
        for s, t in product(range(1, k + 1), repeat=2):
            if t % 2:
                continue
            try:
                report = counting_identities_check(s, t, k)
            except DomainError:
                continue
            rows.append({"s": s, "t": t, "k": k, "checked": report.checked, "holds": report.holds})
            if not report.holds:
                failures.append(_failure("counting identities", s=s, t=t, k=k, details=report.details))
    return rows, failures


# --- Volume bounds ---

@experiment(
    "volume-sweep",
    ["k", "max_volume", "argmax", "formula_max", "central_bound", "volume_bound", "interval_size"],
)
def _volume_sweep(spec: ExperimentSpec):
    rows, failures = [], []
    previous: Optional[Fraction] = None
    for k in spec.values("k", [2, 4, 6, 8]):
        best, argmax = max_splitter_volume(k)
        formula_max = max(split_volume_formula(size, k) for size in range(k + 1))
        central = 3 * math.comb(k, k // 2)
        bound = volume_lower_bound(1, k)
        interval = build_interval_splitting(k).m
        rows.append({
            "k": k,
            "max_volume": best,
            "argmax": " ".join(str(size) for size in argmax),
            "formula_max": formula_max,
            "central_bound": central,
            "volume_bound": float(bound),
            "interval_size": interval,
        })
        if best != formula_max:
            failures.append(_failure("volume matches formula", k=k, volume=best, formula=formula_max))
        if k % 2 == 0:
            if k // 2 not in argmax:
                failures.append(_failure("max volume at k/2", k=k, argmax=argmax))
            if best > central:
                failures.append(_failure("max volume <= 3·C(k,k/2)", k=k, volume=best, bound=central))
            if previous is not None and bound <= previous:
                failures.append(_failure("volume bound increasing over even k", k=k, bound=float(bound)))
            previous = bound
        if math.ceil(bound) > interval:
            failures.append(_failure("volume bound <= interval size", k=k, bound=float(bound), interval=interval))
    return rows, failures


@experiment("splittable-fraction", ["k", "total", "splittable", "fraction"])
def _splittable_fraction(spec: ExperimentSpec):
    rows, failures = [], []
    for k in spec.values("k", [1, 2, 3, 4]):
        census = splittable_triple_census(k)
        rows.append({"k": k, "total": census.total, "splittable": census.splittable, "fraction": census.fraction})
        if 2 * census.splittable < census.total:
            failures.append(_failure("at least half splittable", k=k, fraction=census.fraction))
    return rows, failures


@dataclass
class TripleAudit:
    k: int
    triples: int = 0
    splittable: int = 0
    mismatches: int = 0
    builder_failures: int = 0
    failures: List[Failure] = field(default_factory=list)


def audit_triples(k: int, triples: Iterable[Sequence[int]]) -> TripleAudit:
    """
    Compare the parity rule with brute-force splittability on triples of bit
    masks over [k], and check the constructive splitter on every splittable one.
    """
    audit = TripleAudit(k=k)
    for bits in triples:
        sets = [SubsetMask(k, int(b)) for b in bits]
        parity = triple_splittable_parity(*sets)
        brute = is_splittable(SetCollection(k, tuple(sets))) is not None
        audit.triples += 1
        audit.splittable += parity
        if parity != brute:
            audit.mismatches += 1
            audit.failures.append(_failure("parity agrees with brute force", k=k, sets=[list(s.elements) for s in sets]))
        if brute and build_triple_splitter(*sets) is None:
            audit.builder_failures += 1
            audit.failures.append(_failure("builder finds a splitter", k=k, sets=[list(s.elements) for s in sets]))
    logger.info(f"Audited {audit.triples} triples over [{k}]: {audit.mismatches} mismatches")
    return audit


@experiment("parity-oracle", ["k", "mode", "triples", "splittable", "mismatches", "builder_failures"], randomized=True)
def _parity_oracle(spec: ExperimentSpec):
    rows, failures = [], []
    rng = make_rng(spec.seed)
    samples = spec.samples or 1000
    runs = [(k, "exhaustive", product(range(1 << k), repeat=3)) for k in spec.values("k", [3])]
    runs += [(k, "random", rng.integers(0, 1 << k, size=(samples, 3)).tolist()) for k in spec.values("random_k", [8])]
    for k, mode, triples in runs:
        audit = audit_triples(k, triples)
        rows.append({"k": k, "mode": mode, "triples": audit.triples, "splittable": audit.splittable,
                     "mismatches": audit.mismatches, "builder_failures": audit.builder_failures})
        failures.extend(audit.failures)
    return rows, failures


# --- Separating families ---

@experiment("census", ["m", "k", "count", "burnside", "dual"])
def _census(spec: ExperimentSpec):
    rows, failures = [], []
    for m in spec.values("m", [1, 2, 3]):
        counts = _fan_out(lambda k, m=m: count_sep(m, k), list(range((1 << m) + 1)))
        for k, count in enumerate(counts):
            orbits = burnside_count(m, k)
            dual = counts[(1 << m) - k]
            rows.append({"m": m, "k": k, "count": count, "burnside": orbits, "dual": dual})
            if count != dual:
                failures.append(_failure("sep(m,k) = sep(m,2^m-k)", m=m, k=k, count=count, dual=dual))
            if count != orbits:
                failures.append(_failure("canonical count = Burnside count", m=m, k=k, count=count, burnside=orbits))
        if counts[-1] != 1:
            failures.append(_failure("sep(m,2^m) = 1", m=m, count=counts[-1]))
    return rows, failures


@experiment("census-invariance", ["m", "k", "trials", "group_order", "group_size", "broken"], randomized=True)
def _census_invariance(spec: ExperimentSpec):
    rows, failures = [], []
    rng = make_rng(spec.seed)
    trials = spec.trials or 50
    for m in spec.values("m", [2, 3, 4]):
        order, size = group_order(m), symmetry_group(m).shape[0]
        if size != order:
            failures.append(_failure("group has 2^m·m! elements", m=m, size=size, order=order))
        for k in spec.values("k", [2, 3, 5]):
            if not 2 <= k <= 1 << m:
                continue
            broken = 0
            for _ in range(trials):
                family = random_separating_family(m, k, rng)
                for check in equivalence_move_failures(family, rng):
                    broken += 1
                    failures.append(_failure(check, m=m, k=k, family=family.as_lists()))
            rows.append({"m": m, "k": k, "trials": trials, "group_order": order, "group_size": size,
                         "broken": broken})
    return rows, failures


@experiment("nsep-bounds", ["n", "k", "seed", "size", "draws", "lower", "ceiling", "certified"], randomized=True)
def _nsep_bounds(spec: ExperimentSpec):
    rows, failures = [], []
    trials = spec.trials or 20
    for n, k in product(spec.values("n", [2]), spec.values("k", [8])):

        def attempt(seed: int, n=n, k=k) -> Row:
            try:
                family, report = build_n_separating_randomized(n, k, seed)
            except RetryExhausted:
                return {"n": n, "k": k, "seed": seed, "size": -1, "draws": -1, "lower": math.nan, "ceiling": -1,
                        "certified": False}
            return {"n": n, "k": k, "seed": seed, "size": family.m, "draws": report.draws,
                    "lower": report.lower, "ceiling": report.ceiling,
                    "certified": is_n_separating(family, n) and family.m <= report.ceiling}

        results = _fan_out(attempt, [spec.seed + offset for offset in range(trials)])
        rows.extend(results)
        passed = sum(row["certified"] for row in results)
        if 100 * passed < 95 * trials:
            failures.append(_failure("certified in at least 95% of seeds", n=n, k=k, passed=passed, trials=trials))
    return rows, failures


@experiment("separation-probability", ["n", "k", "samples", "estimate", "stderr", "floor"], randomized=True)
def _separation_probability(spec: ExperimentSpec):
    rows, failures = [], []
    samples = spec.samples or 10000
    for n, k in product(spec.values("n", [1, 2, 3]), spec.values("k", [16])):
        estimate = estimate_separation_probability(n, k, samples, spec.seed)
        rows.append({"n": n, "k": k, "samples": samples, "estimate": estimate.estimate,
                     "stderr": estimate.stderr, "floor": estimate.floor})
        if estimate.estimate < estimate.floor - 3 * estimate.stderr:
            failures.append(_failure("estimate >= 2^-n - 3 stderr", n=n, k=k, estimate=estimate.estimate))
    return rows, failures


@experiment("hamming-bridge", ["source", "n", "k", "min_distance", "max_distance", "expected"], randomized=True)
def _hamming_bridge(spec: ExperimentSpec):
    rows, failures = [], []
    for n in spec.values("n", [1, 2, 3, 4]):
        distances = column_distances(power_set_matrix(n + 1))
        off_diagonal = distances[~np.eye(distances.shape[0], dtype=bool)]
        low, high = int(off_diagonal.min()), int(off_diagonal.max())
        rows.append({"source": "power-set", "n": n, "k": n + 1, "min_distance": low, "max_distance": high,
                     "expected": 1 << n})
        if low != 1 << n or high != 1 << n:
            failures.append(_failure("power-set columns exactly 2^n apart", n=n, low=low, high=high))

    table = build_2_separating(build_min_separating(8))
    sources = [("table", 8, table)]
    trials = spec.trials or 10
    for k in spec.values("k", [8, 10]):
        for offset in range(trials):
            family, _ = build_with_reseed(build_n_separating_randomized, 2, k, seed=spec.seed + offset)
            sources.append((f"seed-{spec.seed + offset}", k, family))
    for name, k, family in sources:
        low = min_pairwise_column_distance(family_to_matrix(family))
        rows.append({"source": name, "n": 2, "k": k, "min_distance": low, "max_distance": -1, "expected": 2})
        if low < 2:
            failures.append(_failure("2-separating columns at distance >= 2", source=name, k=k, distance=low))
    return rows, failures


_N_KINDS = (ImplicationKind.NN_TO_N, ImplicationKind.N_NOT_NN, ImplicationKind.N_NOT_IJ,
            ImplicationKind.BELOW_NOT_N, ImplicationKind.N_NOT_NEXT)
_IJ_KINDS = (ImplicationKind.SHRINK_IJ, ImplicationKind.N_TO_IJ,
             ImplicationKind.IJ_NOT_NEXT_I, ImplicationKind.IJ_NOT_NEXT_J)


def _implication_grid(spec: ExperimentSpec) -> List[Tuple[ImplicationKind, Dict[str, int]]]:
    ns = spec.values("n", [2, 3])
    ij = [(i, j) for i, j in product(spec.values("i", [1, 2]), spec.values("j", [2, 3])) if i <= j]
    grid: List[Tuple[ImplicationKind, Dict[str, int]]] = []
    for kind in ImplicationKind:
        if kind in _N_KINDS:
            grid.extend((kind, {"n": n}) for n in ns)
        elif kind in _IJ_KINDS:
            grid.extend((kind, {"i": i, "j": j}) for i, j in ij)
        else:
            grid.append((kind, {}))
    return grid


@experiment(
    "implications",
    ["kind", "k", "n", "i", "j", "checked", "premise_held", "holds", "inconclusive", "skipped"],
    randomized=True,
)
def _implications(spec: ExperimentSpec):
    rows, failures = [], []
    trials = spec.trials or 200
    for k, (kind, params) in product(spec.values("k", [6, 8]), _implication_grid(spec)):
        row = {"kind": kind.value, "k": k, "n": params.get("n", -1), "i": params.get("i", -1),
               "j": params.get("j", -1), "checked": 0, "premise_held": -1, "holds": True,
               "inconclusive": False, "skipped": True}
        try:
            report = check_implication(kind, params, k, seed=spec.seed, trials=trials)
        except DomainError as e:
            logger.info(f"Skipping {kind.value} {params} at k={k}: {e}")
            rows.append(row)
            continue
        row.update(checked=report.checked, premise_held=report.params.get("premise_held", -1),
                   holds=report.holds, inconclusive=report.inconclusive, skipped=False)
        rows.append(row)
        if report.inconclusive:
            failures.append(_failure("premise exercised", kind=kind.value, k=k, params=params, trials=trials))
        elif not report.holds:
            failures.append(_failure("implication lattice", kind=kind.value, k=k, params=params,
                                     details=report.details))
    return rows, failures


@experiment(
    "recognition-timing", ["m", "k", "trials", "separating"], randomized=True, volatile=["median_seconds", "ratio"]
)
def _recognition_timing(spec: ExperimentSpec):
    rows, failures = [], []
    trials = spec.trials or 20
    rng = make_rng(spec.seed)
    for m in spec.values("m", [64]):
        previous: Optional[Tuple[int, float]] = None
        for k in spec.values("k", [1024, 2048, 4096]):
            timings, separating = [], 0
            for _ in range(trials):
                family = matrix_to_family(BinaryMatrix(rng.integers(0, 2, size=(m, k), dtype=np.uint8))).family
                started = time.perf_counter()
                separating += is_separating_family(family)
                timings.append(time.perf_counter() - started)
            median = statistics.median(timings)
            ratio = median / previous[1] if previous and k == 2 * previous[0] else math.nan
            rows.append({"m": m, "k": k, "trials": trials, "separating": separating, "median_seconds": median,
                         "ratio": ratio})
            if not math.isnan(ratio) and ratio > 2.5:
                failures.append(_failure("doubling k at most 2.5x slower", m=m, k=k, ratio=ratio))
            previous = (k, median)
    return rows, failures


# --- Randomized 2-splitting and exact searches ---

@experiment("split-bounds", ["k", "seed", "size", "draws", "lower", "ceiling", "certified"], randomized=True)
def _split_bounds(spec: ExperimentSpec):
    rows, failures = [], []
    trials = spec.trials or 20
    for k in spec.values("k", [6]):

        def attempt(seed: int, k=k) -> Row:
            try:
                family, report = build_2_splitting_randomized(k, seed)
            except RetryExhausted:
                return {"k": k, "seed": seed, "size": -1, "draws": -1, "lower": -1, "ceiling": -1, "certified": False}
            certified = is_n_splitting(family, 2) and report.lower <= family.m <= report.ceiling
            return {"k": k, "seed": seed, "size": family.m, "draws": report.draws, "lower": int(report.lower),
                    "ceiling": report.ceiling, "certified": certified}

        results = _fan_out(attempt, [spec.seed + offset for offset in range(trials)])
        rows.extend(results)
        for row in results:
            if not row["certified"]:
                failures.append(_failure("verified 2-splitting within bounds", k=k, seed=row["seed"]))
    return rows, failures


@experiment("min-search", ["property", "n", "k", "value", "lower_bound", "greedy", "exhausted", "expected"])
def _min_search(spec: ExperimentSpec):
    rows, failures = [], []
    kind = spec.search_property
    for n, k in product(spec.values("n", [1]), spec.values("k", list(range(2, 9)))):
        result = exact_min_family_size(kind, k, n)
        expected = ""
        if kind == PropertyKind.SEPARATING:
            expected = str((k - 1).bit_length())
            if result.value != (k - 1).bit_length():
                failures.append(_failure("min separating = ceil(log2 k)", k=k, value=result.value))
        elif kind == PropertyKind.SPLITTING:
            low, high = math.ceil(volume_lower_bound(1, k)), (k + 1) // 2
            expected = f"{low}..{high}"
            if not low <= result.value <= high:
                failures.append(_failure("volume bound <= min splitting <= ceil(k/2)", k=k, value=result.value))
        rows.append({"property": kind.value, "n": n, "k": k, "value": result.value,
                     "lower_bound": result.lower_bound, "greedy": result.greedy,
                     "exhausted": result.exhausted, "expected": expected})
        if not result.exhausted:
            failures.append(_failure("search exhausted", k=k, n=n))
    return rows, failures


# --- Runner ---

def _write_atomic(path: str, payload: Union[str, bytes]) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    data = payload.encode("utf-8") if isinstance(payload, str) else payload
    handle, temporary = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(handle, "wb") as stream:
            stream.write(data)
        os.replace(temporary, path)
    except OSError:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


def _csv_report(definition: _Experiment, rows: List[Row]) -> str:
    frame = pd.DataFrame(rows, columns=list(definition.columns))
    buffer = io.StringIO()
    buffer.write(f"# {definition.name}: {','.join(definition.columns)}\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def _summary(definition: _Experiment, spec: ExperimentSpec, outcome: ExperimentOutcome) -> str:
    status = {0: "PASS", 1: "FAIL", 2: "ERROR"}[outcome.exit_code]
    lines = [
        f"experiment: {definition.name}",
        f"status: {status}",
        f"parameters: {json.dumps(spec.parameters, sort_keys=True)}",
        f"seed: {spec.seed}",
        f"rows: {len(outcome.rows)}",
        f"failures: {len(outcome.failures)}",
    ]
    lines.extend(f"  - {failure['check']}" for failure in outcome.failures[:20])
    if definition.volatile and outcome.rows:
        lines.append(f"volatile: {','.join(definition.volatile)}")
        for row in outcome.rows:
            key = " ".join(f"{name}={row.get(name)}" for name in definition.columns)
            values = " ".join(f"{name}={row.get(name)}" for name in definition.volatile)
            lines.append(f"  {key}: {values}")
    return "\n".join(lines) + "\n"


def run_experiment(spec: ExperimentSpec) -> ExperimentOutcome:
    """
    Execute the named sweep and write its reports.

    Files land in spec.output (default the configured report directory) as
    <experiment>.csv, <experiment>.summary.txt and <experiment>.failures.json.

    Returns:
        ExperimentOutcome whose exit_code is 0 when every embedded assertion
        passed, 1 when some failed and 2 for guard or usage errors
    """
    definition = EXPERIMENTS.get(spec.experiment)
    outcome = ExperimentOutcome(experiment=spec.experiment, exit_code=0)
    if definition is None:
        outcome.exit_code = 2
        outcome.failures.append(_failure("known experiment", error=f"unknown experiment {spec.experiment!r}",
                                         known=sorted(EXPERIMENTS)))
        logger.error(f"Unknown experiment {spec.experiment!r}")
        return outcome

    try:
        if definition.randomized and spec.seed is None:
            raise DomainError(f"experiment {definition.name} is randomized and needs a seed")
        with config.unsafe_limits(spec.unsafe_limits):
            outcome.rows, outcome.failures = definition.run(spec)
        outcome.exit_code = 1 if outcome.failures else 0
    except (GuardExceeded, DomainError) as e:
        logger.error(f"Experiment {definition.name} stopped: {e}")
        outcome.exit_code = 2
        outcome.failures.append(_failure(type(e).__name__, error=str(e)))
    except ToolkitError as e:
        logger.error(f"Experiment {definition.name} failed: {e}")
        outcome.exit_code = 1
        outcome.failures.append(_failure(type(e).__name__, error=str(e)))

    directory = spec.output or config.REPORT_DIR
    reports = {
        f"{definition.name}.csv": _csv_report(definition, outcome.rows),
        f"{definition.name}.summary.txt": _summary(definition, spec, outcome),
        f"{definition.name}.failures.json": json.dumps(outcome.failures, indent=2, sort_keys=True, default=str) + "\n",
    }
    for name, payload in reports.items():
        path = os.path.join(directory, name)
        _write_atomic(path, payload)
        outcome.files.append(path)

    logger.info(
        f"Experiment {definition.name}: {len(outcome.rows)} rows, {len(outcome.failures)} failures, "
        f"exit code {outcome.exit_code}"
    )
    return outcome
