"""
Splitting service: the splits predicate, the interval construction, splittability
oracles (brute force, pairs, the triple parity rule), simultaneous-splitter
counting, splitter volumes and the bounds derived from them, and randomized
2-splitting builds.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..errors import ConstructionBug, DimensionError, DomainError, RetryExhausted
from .ground import (
    SetCollection,
    SetFamily,
    SubsetMask,
    VerdictReport,
    compress_bits,
    expand_bits,
    make_rng,
    popcount_array,
)
from .separate import BoundReport

logger = logging.getLogger(__name__)

_CHUNK = 1 << 20


@dataclass(frozen=True)
class VennSectors3:
    """The seven regions of three sets; `a` is the part of B1 outside B2 and B3, and so on."""

    a: SubsetMask
    b: SubsetMask
    c: SubsetMask
    ab: SubsetMask
    ac: SubsetMask
    bc: SubsetMask
    abc: SubsetMask

    def sizes(self) -> Dict[str, int]:
        return {name: getattr(self, name).size for name in ("a", "b", "c", "ab", "ac", "bc", "abc")}


@dataclass
class VolumeReport:
    s: int
    t: int
    b: int
    k: int
    count: int


class TripleCensus(NamedTuple):
    k: int
    total: int
    splittable: int

    @property
    def fraction(self) -> float:
        return self.splittable / self.total


class SplitConstant(NamedTuple):
    value: float
    argmin: int
    k: int


class VolumeMode(str, Enum):
    EXACT = "exact"
    ASYMPTOTIC = "asymptotic"


# --- Predicates ---

def splits(a: SubsetMask, b: SubsetMask) -> bool:
    """True iff |A ∩ B| is ⌊|B|/2⌋ or ⌈|B|/2⌉."""
    if a.k != b.k:
        raise DimensionError(f"ground sets differ: k={a.k} vs k={b.k}")
    return abs(2 * (a.bits & b.bits).bit_count() - b.size) <= 1


def _all_masks(count_bits: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    config.enforce_word_width("subset sweep", count_bits)
    stop = 1 << count_bits if stop is None else stop
    return np.arange(start, stop, dtype=np.uint64)


def _split_vector(a_bits: int, masks: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    inside = popcount_array(masks & np.uint64(a_bits))
    return np.abs(2 * inside - sizes) <= 1


def _split_matrix(members: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Boolean matrix: entry (i, j) says members[i] splits masks[j]."""
    sizes = popcount_array(masks)
    inside = popcount_array(members[:, None] & masks[None, :])
    return np.abs(2 * inside - sizes[None, :]) <= 1


def build_interval_splitting(k: int) -> SetFamily:
    """The ⌈k/2⌉ intervals {i, ..., i+⌈k/2⌉-1}, 1 <= i <= ⌈k/2⌉."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    half = (k + 1) // 2
    members = [SubsetMask.from_elements(k, range(start, start + half)) for start in range(1, half + 1)]
    logger.info(f"Built interval splitting family over [{k}] with {half} members")
    return SetFamily(k, tuple(members))


def find_unsplit_set(family: SetFamily) -> Optional[SubsetMask]:
    """
    Least subset of [k] that no member splits.

    Raises:
        GuardExceeded: If k is above the 2^k sweep guard
    """
    k = family.k
    config.enforce_guard("is_splitting_family", k, config.SPLIT_K_GUARD)
    total = 1 << k
    for start in range(0, total, _CHUNK):
        masks = _all_masks(k, start, min(start + _CHUNK, total))
        sizes = popcount_array(masks)
        unsplit = np.ones(masks.shape, dtype=bool)
        for member in family:
            unsplit &= ~_split_vector(member.bits, masks, sizes)
            if not unsplit.any():
                break
        hits = np.flatnonzero(unsplit)
        if hits.size:
            return SubsetMask(k, int(masks[hits[0]]))
    return None


def is_splitting_family(family: SetFamily) -> bool:
    return find_unsplit_set(family) is None


def is_splittable(collection: SetCollection) -> Optional[SubsetMask]:
    """
    Least simultaneous splitter of the collection, searched among subsets of its union.

    Returns:
        The splitter, or None when the collection is not splittable

    Raises:
        GuardExceeded: If the union is above the guard
    """
    union = collection.union()
    config.enforce_guard("is_splittable", union.size, config.UNION_GUARD)
    config.enforce_word_width("is_splittable", union.size)
    packed_sets = [(np.uint64(compress_bits(member.bits, union.bits)), member.size) for member in collection]
    total = 1 << union.size
    for start in range(0, total, _CHUNK):
        candidates = _all_masks(union.size, start, min(start + _CHUNK, total))
        ok = np.ones(candidates.shape, dtype=bool)
        for packed, size in packed_sets:
            ok &= np.abs(2 * popcount_array(candidates & packed) - size) <= 1
        hits = np.flatnonzero(ok)
        if hits.size:
            return SubsetMask(collection.k, expand_bits(int(candidates[hits[0]]), union.bits))
    return None


def build_pair_splitter(b1: SubsetMask, b2: SubsetMask) -> SubsetMask:
    """Half of B1 ∩ B2 rounded up plus half of each difference rounded down, lowest elements first."""
    if b1.k != b2.k:
        raise DimensionError(f"ground sets differ: k={b1.k} vs k={b2.k}")
    both, only_first, only_second = b1 & b2, b1 - b2, b2 - b1
    return (
        both.lowest((both.size + 1) // 2)
        | only_first.lowest(only_first.size // 2)
        | only_second.lowest(only_second.size // 2)
    )


# --- Three sets ---

def venn_sectors(b1: SubsetMask, b2: SubsetMask, b3: SubsetMask) -> VennSectors3:
    if not b1.k == b2.k == b3.k:
        raise DimensionError(f"ground sets differ: k={b1.k}, {b2.k}, {b3.k}")
    x, y, z = b1.bits, b2.bits, b3.bits
    k = b1.k
    return VennSectors3(
        a=SubsetMask(k, x & ~y & ~z),
        b=SubsetMask(k, y & ~x & ~z),
        c=SubsetMask(k, z & ~x & ~y),
        ab=SubsetMask(k, x & y & ~z),
        ac=SubsetMask(k, x & z & ~y),
        bc=SubsetMask(k, y & z & ~x),
        abc=SubsetMask(k, x & y & z),
    )


def _parity_blocks(sizes: Dict[str, int]) -> bool:
    pairwise_odd = all(sizes[name] % 2 == 1 for name in ("ab", "ac", "bc"))
    rest_empty = all(sizes[name] == 0 for name in ("a", "b", "c", "abc"))
    return pairwise_odd and rest_empty


def triple_splittable_parity(b1: SubsetMask, b2: SubsetMask, b3: SubsetMask) -> bool:
    """
    Three sets are splittable unless their pairwise-only sectors are all odd and
    every other sector is empty.
    """
    return not _parity_blocks(venn_sectors(b1, b2, b3).sizes())


def _triple_splittable_array(first: np.ndarray, second: np.ndarray, third: np.ndarray) -> np.ndarray:
    x, y, z = np.broadcast_arrays(
        np.asarray(first, dtype=np.uint64), np.asarray(second, dtype=np.uint64), np.asarray(third, dtype=np.uint64)
    )
    odd_ab = popcount_array(x & y & ~z) % 2 == 1
    odd_ac = popcount_array(x & z & ~y) % 2 == 1
    odd_bc = popcount_array(y & z & ~x) % 2 == 1
    rest = (x & ~y & ~z) | (y & ~x & ~z) | (z & ~x & ~y) | (x & y & z)
    return ~(odd_ab & odd_ac & odd_bc & (rest == 0))


def _core_counts(sizes: Dict[str, int]) -> Optional[Dict[str, int]]:
    """How many elements to take from each of ab, ac, bc, abc."""
    odd = [name for name in ("ab", "ac", "bc", "abc") if sizes[name] % 2 == 1]
    counts = {name: sizes[name] // 2 for name in ("ab", "ac", "bc", "abc")}

    if odd == ["ab", "ac", "bc"]:
        if sizes["abc"] >= 2:
            for name in odd:
                counts[name] += 1
            counts["abc"] -= 1
            return counts
        outer = next((name for name in ("a", "b", "c") if sizes[name] > 0), None)
        if outer is None:
            return None
        # round up the pairwise sector that avoids the nonempty outer one
        opposite = {"a": "bc", "b": "ac", "c": "ab"}[outer]
        counts[opposite] += 1
        return counts

    if "abc" in odd:
        counts["abc"] += 1
    elif len(odd) == 2:
        counts[odd[0]] += 1
    return counts


def build_triple_splitter(b1: SubsetMask, b2: SubsetMask, b3: SubsetMask) -> Optional[SubsetMask]:
    """
    Construct a simultaneous splitter of three sets by halving Venn sectors.

    The sectors shared by two or three sets are halved first, with the odd
    ones rounded so that the three partial imbalances stay within one (or,
    when all pairwise sectors are odd and the triple sector is empty, so that
    the imbalance lands on a set with a private sector). Each private sector
    is then halved with the rounding that cancels its set's imbalance.

    Returns:
        A verified splitter, or None when the triple is not splittable

    Raises:
        DimensionError: On mismatched ground sets
        ConstructionBug: If the result fails to split one of the inputs
    """
    sectors = venn_sectors(b1, b2, b3)
    sizes = sectors.sizes()
    counts = _core_counts(sizes)
    if counts is None:
        return None

    core_of = {"a": ("ab", "ac", "abc"), "b": ("ab", "bc", "abc"), "c": ("ac", "bc", "abc")}
    for outer, shared in core_of.items():
        imbalance = sum(2 * counts[name] - sizes[name] for name in shared)
        counts[outer] = min(max((sizes[outer] - imbalance) // 2, 0), sizes[outer])

    splitter = SubsetMask.empty(b1.k)
    for name, count in counts.items():
        splitter = splitter | getattr(sectors, name).lowest(count)

    for target in (b1, b2, b3):
        if not splits(splitter, target):
            raise ConstructionBug(f"triple splitter {splitter} fails to split {target} (sectors {sizes})")
    return splitter


# --- n-splitting families ---

def find_n_splitting_violation(family: SetFamily, n: int) -> Optional[SetCollection]:
    """
    A splittable collection of n subsets of [k] that no member splits.

    Splittability is automatic for n <= 2, decided by the parity rule for
    n = 3 and by exhaustive search over all of 𝒫[k] beyond that.

    Raises:
        DomainError: If n < 1
        GuardExceeded: If k is above the guard for this n
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    k = family.k
    config.enforce_guard(f"is_n_splitting(n={n})", k, config.nsplit_k_guard(n))
    if n >= 4:
        config.enforce_guard(f"is_n_splitting(n={n})", (1 << k) ** n, config.EVAL_GUARD)
    if n == 1:
        unsplit = find_unsplit_set(family)
        return None if unsplit is None else SetCollection(k, (unsplit,))

    masks = _all_masks(k)
    members = np.array([member.bits for member in family], dtype=np.uint64)
    split = _split_matrix(members, masks).astype(np.float32)
    split_all = _split_matrix(masks, masks).astype(np.float32) if n >= 4 else None

    for prefix in combinations_with_replacement(range(masks.size), n - 2):
        weight = np.ones(members.size, dtype=np.float32)
        for index in prefix:
            weight *= split[:, index]
        covered = ((split.T * weight) @ split) > 0

        if n == 2:
            splittable = np.ones(covered.shape, dtype=bool)
        elif n == 3:
            splittable = _triple_splittable_array(masks[prefix[0]], masks[:, None], masks[None, :])
        else:
            weight_all = np.ones(masks.size, dtype=np.float32)
            for index in prefix:
                weight_all *= split_all[:, index]
            splittable = ((split_all.T * weight_all) @ split_all) > 0

        bad = np.argwhere(splittable & ~covered)
        if bad.size:
            chosen = list(prefix) + [int(bad[0][0]), int(bad[0][1])]
            return SetCollection(k, tuple(SubsetMask(k, int(masks[i])) for i in chosen))
    return None


def is_n_splitting(family: SetFamily, n: int) -> bool:
    return find_n_splitting_violation(family, n) is None


# --- Counting simultaneous splitters ---

def _check_configuration(s: int, t: int, b: int, k: int) -> None:
    if min(s, t, b) < 0 or b > min(s, t) or s + t - b > k:
        raise DomainError(f"inconsistent configuration s={s}, t={t}, b={b}, k={k}")


def _count_common_splitters(k: int, targets: Sequence[int]) -> int:
    config.enforce_guard("count_splitters", k, config.SPLIT_K_GUARD)
    sizes = [bin(target).count("1") for target in targets]
    total, count = 1 << k, 0
    for start in range(0, total, _CHUNK):
        candidates = _all_masks(k, start, min(start + _CHUNK, total))
        ok = np.ones(candidates.shape, dtype=bool)
        for target, size in zip(targets, sizes):
            ok &= np.abs(2 * popcount_array(candidates & np.uint64(target)) - size) <= 1
        count += int(np.count_nonzero(ok))
    return count


def _configuration(s: int, t: int, b: int) -> Tuple[int, int]:
    """Bit masks S = {1..s} and T = {s-b+1..s-b+t}."""
    return (1 << s) - 1, ((1 << t) - 1) << (s - b)


def count_simultaneous_splitters(s: int, t: int, b: int, k: int) -> VolumeReport:
    """
    Count the subsets of [k] that split both S and T, |S| = s, |T| = t, |S ∩ T| = b.

    Args:
        s, t, b, k: The configuration (s + t - b <= k)

    Returns:
        VolumeReport with the exhaustive count

    Raises:
        DomainError: On an inconsistent configuration
        GuardExceeded: If k is above the 2^k sweep guard
    """
    _check_configuration(s, t, b, k)
    count = _count_common_splitters(k, _configuration(s, t, b))
    return VolumeReport(s=s, t=t, b=b, k=k, count=count)


def _halves(size: int) -> Tuple[int, ...]:
    return tuple(sorted({size // 2, (size + 1) // 2}))


def splitter_count_formula(s: int, t: int, b: int, k: int) -> int:
    """Closed binomial sum equal to count_simultaneous_splitters(s, t, b, k).count."""
    _check_configuration(s, t, b, k)
    total = 0
    for shared in range(b + 1):
        for in_s in _halves(s):
            for in_t in _halves(t):
                x, y = in_s - shared, in_t - shared
                if 0 <= x <= s - b and 0 <= y <= t - b:
                    total += math.comb(b, shared) * math.comb(s - b, x) * math.comb(t - b, y)
    return total << (k - (s + t - b))


# --- Volumes and lower bounds ---

def splitter_volume(a: SubsetMask, n: int) -> int:
    """Number of ordered n-collections that A splits simultaneously: (sets A splits)^n."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    config.enforce_guard("splitter_volume", a.k, config.SPLIT_K_GUARD)
    total, volume = 1 << a.k, 0
    for start in range(0, total, _CHUNK):
        masks = _all_masks(a.k, start, min(start + _CHUNK, total))
        volume += int(np.count_nonzero(_split_vector(a.bits, masks, popcount_array(masks))))
    return volume ** n


def split_volume_formula(a: int, k: int) -> int:
    """Sets B ⊆ [k] split by a fixed a-element set: pairs (c inside, d outside) with |c - d| <= 1."""
    if not 0 <= a <= k:
        raise DomainError(f"need 0 <= a <= k, got a={a}, k={k}")
    return sum(
        math.comb(a, inside) * math.comb(k - a, outside)
        for inside in range(a + 1)
        for outside in range(k - a + 1)
        if abs(inside - outside) <= 1
    )


def max_splitter_volume(k: int, n: int = 1) -> Tuple[int, List[int]]:
    """(largest volume, the member sizes attaining it); volume depends only on |A|."""
    volumes = [splitter_volume(SubsetMask.full(k).lowest(size), n) for size in range(k + 1)]
    best = max(volumes)
    return best, [size for size, volume in enumerate(volumes) if volume == best]


def splittable_triple_census(k: int) -> TripleCensus:
    """Exact number of splittable ordered triples of subsets of [k], by the parity rule."""
    config.enforce_guard("splittable_triple_census", 1 << (3 * k), config.EVAL_GUARD)
    masks = _all_masks(k)
    splittable = 0
    for first in masks:
        splittable += int(np.count_nonzero(_triple_splittable_array(first, masks[:, None], masks[None, :])))
    return TripleCensus(k=k, total=1 << (3 * k), splittable=splittable)


def volume_lower_bound(n: int, k: int, mode: VolumeMode = VolumeMode.EXACT) -> Fraction:
    """
    N / v: tasks over the most any single set completes.

    Every n-splitting family over [k] has at least ⌈N/v⌉ members. N is (2^k)^n
    for n <= 2; for n = 3 it is the exact splittable-triple count when that is
    feasible, else the certified (2^k)^3 / 2. EXACT mode sweeps all member sizes
    for v; ASYMPTOTIC mode uses v <= (3·C(k, k/2))^n and needs even k.

    Raises:
        DomainError: n outside 1..3, or odd k in ASYMPTOTIC mode
        GuardExceeded: EXACT mode with k above the sweep guard
    """
    mode = VolumeMode(mode)
    if not 1 <= n <= 3:
        raise DomainError(f"volume bounds are available for n in 1..3, got {n}")
    tasks = (1 << k) ** n
    if n == 3:
        if (1 << (3 * k)) <= config.EVAL_GUARD and mode == VolumeMode.EXACT:
            tasks = splittable_triple_census(k).splittable
        else:
            tasks = tasks // 2
    if mode == VolumeMode.ASYMPTOTIC:
        if k % 2:
            raise DomainError(f"asymptotic volume bound needs even k, got {k}")
        return Fraction(tasks, (3 * math.comb(k, k // 2)) ** n)
    volume, _ = max_splitter_volume(k, n)
    return Fraction(tasks, volume)


# --- Randomized 2-splitting ---

def calibrate_split_constant(k: int = 20) -> SplitConstant:
    """Smallest √t · P(a uniform subset splits a fixed t-set) over 1 <= t <= k."""
    best, argmin = math.inf, 0
    for size in range(1, k + 1):
        probability = sum(math.comb(size, inside) for inside in _halves(size)) / 2 ** size
        scaled = math.sqrt(size) * probability
        if scaled < best:
            best, argmin = scaled, size
    return SplitConstant(value=best, argmin=argmin, k=k)


SPLIT_CONSTANT = calibrate_split_constant()


def two_splitting_upper_bound(k: int) -> float:
    c = SPLIT_CONSTANT.value
    return 2 * k / -math.log2(1 - c * c / k) + 1


def build_2_splitting_randomized(k: int, seed: int, verify: bool = True) -> Tuple[SetFamily, BoundReport]:
    """
    Accumulate seeded uniform subsets of [k] into a 2-splitting family.

    Verified mode keeps a draw only if it splits some still uncovered pair
    (B1, B2) and stops when every pair is covered. Unverified mode takes
    ⌈2k / -log2(1 - c²/k)⌉ + 1 draws with c = SPLIT_CONSTANT.

    Raises:
        RetryExhausted: Verified mode reached the ceiling first
        GuardExceeded: Verified mode with k above the n=2 guard
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    best_volume = max(split_volume_formula(size, k) for size in range(k + 1))
    lower = math.ceil(Fraction(4 ** k, best_volume ** 2))
    report = BoundReport(n=2, k=k, lower=float(lower), upper=two_splitting_upper_bound(k), seed=seed, verified=verify)
    ceiling = report.ceiling
    rng = make_rng(seed)

    if not verify:
        rows = rng.integers(0, 2, size=(ceiling, k), dtype=np.uint8)
        members = [SubsetMask.from_elements(k, (np.flatnonzero(row) + 1).tolist()) for row in rows]
        family = SetFamily.of(k, members)
        report.achieved, report.draws = family.m, ceiling
        return family, report

    config.enforce_guard("is_n_splitting(n=2)", k, config.nsplit_k_guard(2))
    masks = _all_masks(k)
    weights = np.uint64(1) << np.arange(k, dtype=np.uint64)
    sizes = popcount_array(masks)
    uncovered = np.ones((masks.size, masks.size), dtype=bool)
    kept: List[SubsetMask] = []
    while uncovered.any():
        if len(kept) >= ceiling or report.draws >= 64 * ceiling:
            raise RetryExhausted(
                f"2-splitting build over [{k}] with seed {seed} hit its ceiling of {ceiling} after {report.draws} draws"
            )
        row = rng.integers(0, 2, size=k, dtype=np.uint8)
        report.draws += 1
        bits = int(np.sum(weights[row.astype(bool)]))
        split = _split_vector(bits, masks, sizes)
        completed = uncovered & np.outer(split, split)
        if completed.any():
            kept.append(SubsetMask(k, bits))
            uncovered &= ~completed

    family = SetFamily(k, tuple(kept))
    report.achieved = family.m
    logger.info(f"Built verified 2-splitting family over [{k}]: {family.m} sets, {report.draws} draws")
    return family, report


# --- Counting identities ---

def counting_identities_check(s: int, t: int, k: int) -> VerdictReport:
    """
    Check the exact counting identities behind "disjoint sets are hardest to split".

    With x ∈ S∖T, y ∈ T∖S and (mixed case) a spare z outside S ∪ T:
    even s, t: 4|A| = |B| and |B|/4 <= |C|, where A splits (S, T),
    B splits (S-x, T-y) and C splits (S, T-y+x);
    odd s, even t: |A| = 2|A'|, |A'| <= |C'| and |C| = 2|C'|, where A' splits
    (S+z, T), C' splits (S+z, T+x-y) and C splits (S, T+x-y).
    Every admissible b = |S ∩ T| is checked.

    Raises:
        DomainError: Wrong parities, or no admissible b
    """
    even = s % 2 == 0 and t % 2 == 0
    mixed = s % 2 == 1 and t % 2 == 0
    if not (even or mixed):
        raise DomainError(f"need s, t both even or s odd and t even, got s={s}, t={t}")
    spare = 1 if mixed else 0
    overlaps = [b for b in range(min(s, t)) if s + t - b + spare <= k]
    if not overlaps:
        raise DomainError(f"no admissible overlap for s={s}, t={t}, k={k}")

    report = VerdictReport(kind="counting-identities", params={"s": s, "t": t, "k": k}, holds=True)
    for b in overlaps:
        first, second = _configuration(s, t, b)
        x = 1
        y = 1 << (s - b + t - 1)
        swapped = (second & ~y) | x
        if even:
            a = _count_common_splitters(k, (first, second))
            bb = _count_common_splitters(k, (first & ~x, second & ~y))
            c = _count_common_splitters(k, (first, swapped))
            checks = {"4|A| = |B|": 4 * a == bb, "|B|/4 <= |C|": bb <= 4 * c}
            counts = f"A={a} B={bb} C={c}"
        else:
            z = 1 << (s - b + t)
            a = _count_common_splitters(k, (first, second))
            a_prime = _count_common_splitters(k, (first | z, second))
            c_prime = _count_common_splitters(k, (first | z, swapped))
            c = _count_common_splitters(k, (first, swapped))
            checks = {"|A| = 2|A'|": a == 2 * a_prime, "|A'| <= |C'|": a_prime <= c_prime, "|C| = 2|C'|": c == 2 * c_prime}
            counts = f"A={a} A'={a_prime} C'={c_prime} C={c}"
        report.checked += len(checks)
        failed = [name for name, ok in checks.items() if not ok]
        report.details.append(f"b={b}: {counts}" + (f" FAILED {', '.join(failed)}" if failed else ""))
        if failed:
            report.holds = False
            report.counterexample = {"b": b, "failed": failed}
    logger.info(f"Counting identities for s={s}, t={t}, k={k}: {len(overlaps)} overlaps, holds={report.holds}")
    return report
