"""
Separation service: predicates, recognizers, constructions and randomized builds
for separating, n-separating and (i,j)-separating families, plus the checks that
tie n-separating families to Hamming codes.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..errors import DimensionError, DomainError, PreconditionError, RetryExhausted
from .ground import (
    BinaryMatrix,
    SetCollection,
    SetFamily,
    SubsetMask,
    VerdictReport,
    compress_bits,
    expand_bits,
    family_to_matrix,
    make_rng,
    power_set_family,
    random_subfamily,
    sized_family,
)

logger = logging.getLogger(__name__)

_CHUNK = 1 << 20


class WitnessKind(str, Enum):
    SEPARATOR = "separator"
    BIPARTITION = "bipartition"
    NONE = "none"


class SeparationMode(str, Enum):
    BRUTE = "brute"
    PAIRS = "pairs"


@dataclass(frozen=True)
class SeparationWitness:
    kind: WitnessKind
    separator: Optional[SubsetMask] = None
    parts: Optional[Tuple[SubsetMask, SubsetMask]] = None
    reason: str = ""

    @property
    def separable(self) -> bool:
        return self.kind != WitnessKind.NONE


@dataclass
class BoundReport:
    """Size bounds for a randomized build alongside what the build achieved."""

    n: int
    k: int
    lower: float
    upper: float
    achieved: Optional[int] = None
    draws: int = 0
    seed: Optional[int] = None
    verified: bool = False

    @property
    def ceiling(self) -> int:
        return math.ceil(self.upper)


class ProbabilityEstimate(NamedTuple):
    estimate: float
    stderr: float
    samples: int
    floor: float


# --- Predicates and recognizers ---

def separates(a: SubsetMask, b: SubsetMask) -> bool:
    """True iff A meets B and the complement of A meets B."""
    if a.k != b.k:
        raise DimensionError(f"ground sets differ: k={a.k} vs k={b.k}")
    return (a.bits & b.bits) != 0 and (~a.bits & b.bits) != 0


def _family_rows(family: SetFamily) -> np.ndarray:
    if family.m == 0:
        return np.zeros((0, family.k), dtype=np.uint8)
    return np.asarray(family_to_matrix(family).entries)


def _sorted_columns(family: SetFamily) -> Tuple[np.ndarray, np.ndarray]:
    """Columns packed to bytes and LSD radix-sorted; returns (packed, order)."""
    packed = np.packbits(_family_rows(family), axis=0)
    order = np.arange(family.k)
    for byte_row in range(packed.shape[0] - 1, -1, -1):
        order = order[np.argsort(packed[byte_row, order], kind="stable")]
    return packed, order


def is_separating_family(family: SetFamily) -> bool:
    """
    Recognize a separating family by checking that its matrix columns are distinct.

    Columns are packed eight rows to a byte and sorted with one stable pass per
    byte, so the cost stays linear in the matrix size.

    Args:
        family: Any family (the empty family separates only [1])

    Returns:
        True iff every pair of elements is separated by some member
    """
    if family.k == 1:
        return True
    packed, order = _sorted_columns(family)
    if packed.shape[0] == 0:
        return False
    ordered = packed[:, order]
    equal_neighbours = np.all(ordered[:, 1:] == ordered[:, :-1], axis=0)
    return not bool(np.any(equal_neighbours))


def duplicate_columns(family: SetFamily) -> List[Tuple[int, int]]:
    """Pairs (i, j), i < j, of elements whose matrix columns coincide."""
    if family.k == 1:
        return []
    packed, order = _sorted_columns(family)
    ordered = packed[:, order]
    pairs = []
    group = [int(order[0])]
    for position in range(1, family.k):
        if np.array_equal(ordered[:, position], ordered[:, position - 1]):
            group.append(int(order[position]))
            continue
        pairs.extend(combinations(sorted(e + 1 for e in group), 2))
        group = [int(order[position])]
    pairs.extend(combinations(sorted(e + 1 for e in group), 2))
    return sorted(pairs)


def build_min_separating(k: int) -> SetFamily:
    """
    Minimum-size separating family over [k].

    Column j of the matrix encodes k-j in ceil(log2 k) bits, most significant
    bit in row 1; for k = 8 this gives rows 11110000, 11001100, 10101010.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    m = (k - 1).bit_length()
    members = []
    for row in range(m):
        shift = m - 1 - row
        elements = [j for j in range(1, k + 1) if ((k - j) >> shift) & 1]
        members.append(SubsetMask.from_elements(k, elements))
    logger.info(f"Built minimum separating family over [{k}] with {m} members")
    return SetFamily(k, tuple(members))


def _two_colour(collection: SetCollection) -> Optional[Tuple[int, int]]:
    """BFS 2-colouring of the pair graph; each component's least element gets colour 0."""
    adjacency: Dict[int, List[int]] = {}
    for pair in collection:
        first, second = pair.elements
        adjacency.setdefault(first, []).append(second)
        adjacency.setdefault(second, []).append(first)
    colour: Dict[int, int] = {}
    for start in sorted(adjacency):
        if start in colour:
            continue
        colour[start] = 0
        queue = [start]
        while queue:
            vertex = queue.pop(0)
            for neighbour in sorted(adjacency[vertex]):
                if neighbour not in colour:
                    colour[neighbour] = 1 - colour[vertex]
                    queue.append(neighbour)
                elif colour[neighbour] == colour[vertex]:
                    return None
    part = sum(1 << (v - 1) for v, c in colour.items() if c == 0)
    other = sum(1 << (v - 1) for v, c in colour.items() if c == 1)
    return part, other


def _least_separator(collection: SetCollection) -> Optional[SubsetMask]:
    union = collection.union()
    config.enforce_guard("is_separable", union.size, config.UNION_GUARD)
    config.enforce_word_width("is_separable", union.size)
    packed_sets = [np.uint64(compress_bits(member.bits, union.bits)) for member in collection]
    total = 1 << union.size
    for start in range(0, total, _CHUNK):
        candidates = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        ok = np.ones(candidates.shape, dtype=bool)
        for packed in packed_sets:
            ok &= (candidates & packed) != 0
            ok &= (~candidates & packed) != 0
        hits = np.flatnonzero(ok)
        if hits.size:
            return SubsetMask(collection.k, expand_bits(int(candidates[hits[0]]), union.bits))
    return None


def is_separable(collection: SetCollection, mode: SeparationMode = SeparationMode.BRUTE) -> SeparationWitness:
    """
    Decide whether one set separates every member of the collection.

    Args:
        collection: The sets B1..Bn
        mode: BRUTE searches subsets of the union (least mask wins); PAIRS
            2-colours the graph whose edges are the members

    Returns:
        A SEPARATOR or BIPARTITION witness, or NONE with the reason

    Raises:
        DomainError: PAIRS mode with a member that is not a pair
        GuardExceeded: BRUTE mode with a union above the guard
    """
    mode = SeparationMode(mode)
    if mode == SeparationMode.PAIRS:
        for member in collection:
            if member.size != 2:
                raise DomainError(f"PAIRS mode needs 2-element sets, got {member}")
        colouring = _two_colour(collection)
        if colouring is None:
            return SeparationWitness(WitnessKind.NONE, reason="pair graph has an odd cycle")
        part, other = colouring
        return SeparationWitness(
            WitnessKind.BIPARTITION,
            parts=(SubsetMask(collection.k, part), SubsetMask(collection.k, other)),
        )

    for member in collection:
        if member.size < 2:
            return SeparationWitness(WitnessKind.NONE, reason=f"set {member} has fewer than 2 elements")
    separator = _least_separator(collection)
    if separator is None:
        return SeparationWitness(WitnessKind.NONE, reason="no subset of the union separates every set")
    return SeparationWitness(WitnessKind.SEPARATOR, separator=separator)


# --- n-separating families ---

def _pairs_bipartite(pairs: Sequence[Tuple[int, int]]) -> bool:
    parent: Dict[int, int] = {}
    parity: Dict[int, int] = {}

    def find(x: int) -> Tuple[int, int]:
        p = 0
        while parent.get(x, x) != x:
            p ^= parity[x]
            x = parent[x]
        return x, p

    for u, v in pairs:
        root_u, p_u = find(u)
        root_v, p_v = find(v)
        if root_u == root_v:
            if p_u == p_v:
                return False
            continue
        parent[root_u] = root_v
        parity[root_u] = p_u ^ p_v ^ 1
    return True


@lru_cache(maxsize=16)
def _separation_tasks(k: int, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    All separable collections of at most n distinct pairs over [k].

    Returns (first, second, tasks): the pair endpoints in lexicographic order and
    an index matrix with one row per collection, padded by repeating its last
    pair; rows come in lexicographic order of their pair indices.
    """
    first, second = np.triu_indices(k, 1)
    pair_list = list(zip(first.tolist(), second.tolist()))
    config.enforce_guard("is_n_separating", math.comb(len(pair_list) + n - 1, n), config.EVAL_GUARD)

    rows: List[Tuple[int, ...]] = []

    def extend(prefix: Tuple[int, ...]) -> None:
        start = prefix[-1] + 1 if prefix else 0
        for index in range(start, len(pair_list)):
            chosen = prefix + (index,)
            if not _pairs_bipartite([pair_list[i] for i in chosen]):
                continue
            rows.append(chosen + (index,) * (n - len(chosen)))
            if len(chosen) < n:
                extend(chosen)

    extend(())
    tasks = np.array(rows, dtype=np.intp).reshape(-1, n)
    for array in (first, second, tasks):
        array.setflags(write=False)
    return first, second, tasks


def _collection_from_task(k: int, first: np.ndarray, second: np.ndarray, task: np.ndarray) -> SetCollection:
    return SetCollection(k, tuple(SubsetMask.from_elements(k, (int(first[i]) + 1, int(second[i]) + 1)) for i in task))


def find_n_separating_violation(family: SetFamily, n: int) -> Optional[SetCollection]:
    """
    Least separable collection of n pairs that no single member separates.

    Args:
        family: The family under test
        n: Collection size

    Returns:
        The counterexample collection, or None if the family is n-separating

    Raises:
        DomainError: If n < 1
        GuardExceeded: If the enumeration is above the evaluation guard
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    first, second, tasks = _separation_tasks(family.k, n)
    uncovered = np.ones(tasks.shape[0], dtype=bool)
    rows = _family_rows(family)
    separated = rows[:, first] != rows[:, second]
    for row in separated:
        if not uncovered.any():
            break
        uncovered &= ~np.all(row[tasks], axis=1)
    missing = np.flatnonzero(uncovered)
    if missing.size == 0:
        return None
    return _collection_from_task(family.k, first, second, tasks[missing[0]])


def is_n_separating(family: SetFamily, n: int) -> bool:
    return find_n_separating_violation(family, n) is None


def build_2_separating(family: SetFamily) -> SetFamily:
    """
    Close a separating family under pairwise symmetric differences.

    Raises:
        PreconditionError: If the input is not separating
    """
    if not is_separating_family(family):
        raise PreconditionError("input family is not separating")
    members = list(family.members)
    for a, b in combinations(family.members, 2):
        members.append(a ^ b)
    result = SetFamily.of(family.k, members, drop_empty=True)
    logger.info(f"Built 2-separating family of {result.m} sets from {family.m}")
    return result


# --- (i,j)-separating families ---

def _ij_cost(k: int, i: int, j: int) -> int:
    return sum(math.comb(k, p) * sum(math.comb(k - p, q) for q in range(j + 1)) for p in range(i + 1))


def find_ij_separating_violation(family: SetFamily, i: int, j: int) -> Optional[Tuple[SubsetMask, SubsetMask]]:
    """
    First disjoint pair (P, Q), |P| <= i, |Q| <= j, with no member containing one and missing the other.

    Raises:
        DomainError: If i or j is negative or i + j > k
        GuardExceeded: If the number of (P, Q) pairs is above the evaluation guard
    """
    k = family.k
    if i < 0 or j < 0 or i + j > k:
        raise DomainError(f"need 0 <= i, j and i + j <= k, got i={i}, j={j}, k={k}")
    config.enforce_guard("is_ij_separating", _ij_cost(k, i, j), config.EVAL_GUARD)

    everyone = (1 << family.m) - 1
    holds = [sum(1 << index for index, member in enumerate(family) if (member.bits >> e) & 1) for e in range(k)]
    contains: Dict[Tuple[int, ...], int] = {(): everyone}
    avoids: Dict[Tuple[int, ...], int] = {(): everyone}
    for size in range(1, max(i, j) + 1):
        for subset in combinations(range(k), size):
            head, last = subset[:-1], subset[-1]
            contains[subset] = contains[head] & holds[last]
            avoids[subset] = avoids[head] & ~holds[last] & everyone

    for p_size in range(i + 1):
        for p in combinations(range(k), p_size):
            rest = [e for e in range(k) if e not in p]
            for q_size in range(j + 1):
                for q in combinations(rest, q_size):
                    if contains[p] & avoids[q] or contains[q] & avoids[p]:
                        continue
                    return (
                        SubsetMask.from_elements(k, (e + 1 for e in p)),
                        SubsetMask.from_elements(k, (e + 1 for e in q)),
                    )
    return None


def is_ij_separating(family: SetFamily, i: int, j: int) -> bool:
    return find_ij_separating_violation(family, i, j) is None


# --- Randomized construction ---

def n_separating_bounds(n: int, k: int) -> Tuple[float, float]:
    """(lower, upper) sizes: 2^(n-1)·log2 k and 2n·log2 k / (-log2(1 - 2^-n)) + 1."""
    log_k = math.log2(k)
    upper = 2 * n * log_k / -math.log2(1 - 2.0 ** -n) + 1
    return 2 ** (n - 1) * log_k, upper


def build_n_separating_randomized(n: int, k: int, seed: int, verify: bool = True) -> Tuple[SetFamily, BoundReport]:
    """
    Accumulate uniform random subsets of [k] into an n-separating family.

    In verified mode a draw is kept only when it separates some still
    unseparated collection, and the build stops as soon as every separable
    n-pair collection is covered. In unverified mode exactly ceil(upper) draws
    are taken. Random bits come from numpy's PCG64 seeded with `seed`.

    Args:
        n: Collection size
        k: Ground-set size
        seed: PRNG seed
        verify: Certify the result instead of stopping at the bound

    Returns:
        (family, BoundReport)

    Raises:
        RetryExhausted: Verified mode reached the ceiling first
        GuardExceeded: Verified mode with an enumeration above the guard
    """
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    lower, upper = n_separating_bounds(n, k)
    report = BoundReport(n=n, k=k, lower=lower, upper=upper, seed=seed, verified=verify)
    ceiling = report.ceiling
    rng = make_rng(seed)

    if not verify:
        rows = rng.integers(0, 2, size=(ceiling, k), dtype=np.uint8)
        family = _family_from_rows(k, rows)
        if family.m < ceiling:
            logger.warning(f"Dropped {ceiling - family.m} duplicate random draws")
        report.achieved, report.draws = family.m, ceiling
        return family, report

    first, second, tasks = _separation_tasks(k, n)
    outstanding = np.ones(tasks.shape[0], dtype=bool)
    kept: List[np.ndarray] = []
    while outstanding.any():
        if len(kept) >= ceiling or report.draws >= 64 * ceiling:
            raise RetryExhausted(
                f"{n}-separating build over [{k}] with seed {seed} hit its ceiling of {ceiling} "
                f"after {report.draws} draws"
            )
        row = rng.integers(0, 2, size=k, dtype=np.uint8)
        report.draws += 1
        completed = outstanding & np.all((row[first] != row[second])[tasks], axis=1)
        if completed.any():
            kept.append(row)
            outstanding &= ~completed

    family = _family_from_rows(k, np.array(kept, dtype=np.uint8).reshape(-1, k))
    report.achieved = family.m
    logger.info(f"Built verified {n}-separating family over [{k}]: {family.m} sets, {report.draws} draws")
    return family, report


def _family_from_rows(k: int, rows: np.ndarray) -> SetFamily:
    weights = [1 << e for e in range(k)]
    members = [SubsetMask(k, sum(w for w, bit in zip(weights, row.tolist()) if bit)) for row in rows]
    return SetFamily.of(k, members)


def estimate_separation_probability(n: int, k: int, samples: int, seed: int) -> ProbabilityEstimate:
    """
    Monte-Carlo probability that a uniform subset separates a random separable n-pair collection.

    Collections are n independent uniform pairs, resampled until separable.
    """
    if k < 2 or n < 1 or samples < 1:
        raise DomainError(f"need k >= 2, n >= 1, samples >= 1, got k={k}, n={n}, samples={samples}")
    rng = make_rng(seed)
    first, second = np.triu_indices(k, 1)
    hits = 0
    for _ in range(samples):
        while True:
            chosen = rng.integers(0, first.size, size=n)
            if _pairs_bipartite(list(zip(first[chosen].tolist(), second[chosen].tolist()))):
                break
        row = rng.integers(0, 2, size=k, dtype=np.uint8)
        hits += bool(np.all(row[first[chosen]] != row[second[chosen]]))
    estimate = hits / samples
    stderr = math.sqrt(estimate * (1 - estimate) / samples)
    return ProbabilityEstimate(estimate, stderr, samples, 2.0 ** -n)


# --- Hamming codes ---

def column_distances(matrix: BinaryMatrix) -> np.ndarray:
    """k×k matrix of Hamming distances between columns."""
    entries = matrix.entries.astype(np.int64)
    overlap = entries.T @ entries
    weights = entries.sum(axis=0)
    return weights[:, None] + weights[None, :] - 2 * overlap


def min_pairwise_column_distance(matrix: BinaryMatrix) -> int:
    """Minimum Hamming distance between two distinct columns."""
    if matrix.cols < 2:
        raise DomainError("need at least two columns")
    distance = column_distances(matrix)
    np.fill_diagonal(distance, np.iinfo(np.int64).max)
    return int(distance.min())


def restriction_violations(family: SetFamily, n: int) -> List[Tuple[SubsetMask, SubsetMask]]:
    """
    Pairs (S, T) with |S| = n+1, T a nonempty proper subset of S containing min S,
    such that neither T nor S minus T is the trace of a member on S.

    An n-separating family has none.
    """
    k = family.k
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if n + 1 > k:
        return []
    config.enforce_guard("restriction_violations", math.comb(k, n + 1) << n, config.EVAL_GUARD)
    violations = []
    for s_elements in combinations(range(k), n + 1):
        s_bits = sum(1 << e for e in s_elements)
        traces = {member.bits & s_bits for member in family}
        anchor, others = s_elements[0], s_elements[1:]
        for size in range(len(others)):
            for chosen in combinations(others, size):
                t_bits = (1 << anchor) | sum(1 << e for e in chosen)
                if t_bits in traces or (s_bits ^ t_bits) in traces:
                    continue
                violations.append((SubsetMask(k, s_bits), SubsetMask(k, t_bits)))
    return violations


# --- The implication lattice ---

class ImplicationKind(str, Enum):
    SHRINK_IJ = "(i,j) => (i',j')"
    NN_TO_N = "(n,n) => n"
    N_TO_IJ = "(i+j-1) => (i,j)"
    N_NOT_NN = "n not (n,n)"
    N_NOT_IJ = "n not (i,j) when i+j >= n+2"
    BELOW_NOT_N = "(n-1,j) not n"
    N_NOT_NEXT = "n not n+1"
    IJ_NOT_NEXT_I = "(i,j) not (i+1,j)"
    IJ_NOT_NEXT_J = "(i,j) not (i,j+1)"
    IJ_CROSSING = "i < i' <= j' < j"


POSITIVE_KINDS = (ImplicationKind.SHRINK_IJ, ImplicationKind.NN_TO_N, ImplicationKind.N_TO_IJ)


def _separators_of(k: int, p: SubsetMask, q: SubsetMask) -> set:
    return {
        bits for bits in range(1 << k)
        if (bits & p.bits == p.bits and bits & q.bits == 0) or (bits & q.bits == q.bits and bits & p.bits == 0)
    }


def _explicit_counterexamples(
    kind: ImplicationKind, params: Dict[str, int], k: int
) -> List[Tuple[SetFamily, List[Tuple[str, bool]]]]:
    """Counterexample families, each with the (claim, expected) pairs it must satisfy."""
    n = params.get("n", 2)
    i = params.get("i", 1)
    j = params.get("j", 2)
    every = range(1, k + 1)

    if kind == ImplicationKind.N_NOT_NN:
        if k < 2 * n:
            raise DomainError(f"needs k >= 2n, got n={n}, k={k}")
        b = SubsetMask.from_elements(k, every[:n])
        b_prime = SubsetMask.from_elements(k, every[n:2 * n])
        family = sized_family(k, range(1, n + 1), excluded=[b, b_prime])
        return [(family, [(f"nsep:{n}", True), (f"ij:{n},{n}", False)])]

    if kind == ImplicationKind.N_NOT_IJ:
        i, j = params.get("i", 1), params.get("j", n + 1)
        if i + j < n + 2 or i < 1 or i + j > k:
            raise DomainError(f"needs i >= 1, i+j >= n+2 and i+j <= k, got i={i}, j={j}, n={n}, k={k}")
        b = SubsetMask.from_elements(k, every[:i])
        b_prime = SubsetMask.from_elements(k, every[i:i + j])
        members = [SubsetMask(k, bits) for bits in range(1 << k)
                   if bits & b.bits != b.bits and bits & b_prime.bits != b_prime.bits]
        return [(SetFamily(k, tuple(members)), [(f"nsep:{n}", True), (f"ij:{i},{j}", False)])]

    if kind == ImplicationKind.BELOW_NOT_N:
        j = params.get("j", n)
        if k < max(2 * n, n - 1 + j):
            raise DomainError(f"needs k >= max(2n, n-1+j), got n={n}, j={j}, k={k}")
        return [(sized_family(k, [n - 1]), [(f"ij:{n - 1},{j}", True), (f"nsep:{n}", False)])]

    if kind == ImplicationKind.N_NOT_NEXT:
        if k < 2 * n + 2:
            raise DomainError(f"needs k >= 2n+2, got n={n}, k={k}")
        return [(sized_family(k, [n]), [(f"nsep:{n}", True), (f"nsep:{n + 1}", False)])]

    if kind in (ImplicationKind.IJ_NOT_NEXT_I, ImplicationKind.IJ_NOT_NEXT_J):
        if not 1 <= i <= j or i + j + 1 > k:
            raise DomainError(f"needs 1 <= i <= j and i+j+1 <= k, got i={i}, j={j}, k={k}")
        grown_i, grown_j = (i + 1, j) if kind == ImplicationKind.IJ_NOT_NEXT_I else (i, j + 1)
        p0 = SubsetMask.from_elements(k, every[:grown_i])
        q0 = SubsetMask.from_elements(k, every[grown_i:grown_i + grown_j])
        blocked = _separators_of(k, p0, q0)
        family = SetFamily(k, tuple(SubsetMask(k, bits) for bits in range(1 << k) if bits not in blocked))
        return [(family, [(f"ij:{i},{j}", True), (f"ij:{grown_i},{grown_j}", False)])]

    if kind == ImplicationKind.IJ_CROSSING:
        i, i2, j2, j = params.get("i", 1), params.get("i2", 2), params.get("j2", 2), params.get("j", 3)
        if not 1 <= i < i2 <= j2 < j or i + j > k:
            raise DomainError(f"needs 1 <= i < i' <= j' < j and i+j <= k, got {i}, {i2}, {j2}, {j}, k={k}")
        b = SubsetMask.from_elements(k, every[:i])
        outside = [e for e in every if e not in b]
        lower = [m for m in sized_family(k, [i2]) if not b.issubset(m)]
        upper = [SubsetMask.from_elements(k, chosen) for chosen in combinations(outside, j2)]
        crossing = SetFamily.of(k, lower + upper)
        return [
            (sized_family(k, [i]), [(f"ij:{i},{j}", True), (f"ij:{i2},{j2}", False)]),
            (crossing, [(f"ij:{i2},{j2}", True), (f"ij:{i},{j}", False)]),
        ]

    raise DomainError(f"{kind.value} is not a non-implication")


def _claim_holds(family: SetFamily, claim: str) -> bool:
    name, _, args = claim.partition(":")
    values = [int(v) for v in args.split(",")]
    if name == "nsep":
        return is_n_separating(family, values[0])
    return is_ij_separating(family, values[0], values[1])


def check_implication(
    kind: ImplicationKind,
    params: Dict[str, int],
    k: int,
    seed: int = 0,
    trials: int = 200,
) -> VerdictReport:
    """
    Check one edge of the implication lattice between (i,j)- and n-separating.

    Positive kinds stress-test the implication on seeded random subfamilies
    of the power set, each with its own density, and count violations. A run
    in which the premise never held is inconclusive. Non-implications
    materialize the counterexample family and verify it has the first property
    and lacks the second.

    Args:
        kind: Which implication or non-implication
        params: n, i, j (and i2, j2 for the crossing case)
        k: Ground-set size
        seed: Seed for the random families of positive kinds
        trials: Number of random families for positive kinds

    Returns:
        VerdictReport with holds=True when the claim checks out; positive kinds
        record premise_held in params and set inconclusive when it is 0

    Raises:
        DomainError: Parameters outside the claim's range
        GuardExceeded: k above the explicit-family guard
    """
    kind = ImplicationKind(kind)
    report = VerdictReport(kind=kind.value, params={**params, "k": k}, holds=True)
    config.enforce_guard("check_implication", k, config.EXPLICIT_K_GUARD)

    if kind in POSITIVE_KINDS:
        n, i, j = params.get("n", 2), params.get("i", 1), params.get("j", 2)
        if kind == ImplicationKind.SHRINK_IJ:
            premise, conclusions = f"ij:{i},{j}", [f"ij:{a},{b}" for a in range(i + 1) for b in range(j + 1)]
        elif kind == ImplicationKind.NN_TO_N:
            premise, conclusions = f"ij:{n},{n}", [f"nsep:{n}"]
        else:
            premise, conclusions = f"nsep:{i + j - 1}", [f"ij:{i},{j}"]
        rng = make_rng(seed)
        premise_held = 0
        for trial in range(trials):
            family = random_subfamily(k, rng.uniform(0.05, 1.0), rng)
            report.checked += 1
            if not _claim_holds(family, premise):
                continue
            premise_held += 1
            for conclusion in conclusions:
                if not _claim_holds(family, conclusion):
                    report.holds = False
                    report.counterexample = family.as_lists()
                    report.details.append(f"trial {trial}: {premise} held but {conclusion} failed")
                    report.params["premise_held"] = premise_held
                    return report
        report.params["premise_held"] = premise_held
        report.details.append(f"premise held in {premise_held} of {trials} random families")
        if premise_held == 0:
            report.holds = False
            report.inconclusive = True
            logger.warning(f"Implication {kind.value} at k={k} is inconclusive: {premise} never held")
            return report
        logger.info(f"Implication {kind.value} survived {trials} random families ({premise_held} with premise)")
        return report

    for number, (family, claims) in enumerate(_explicit_counterexamples(kind, params, k), start=1):
        report.params[f"family_{number}_size"] = family.m
        for claim, expected in claims:
            actual = _claim_holds(family, claim)
            report.checked += 1
            report.details.append(f"family {number} {claim}: expected {expected}, got {actual}")
            if actual != expected:
                report.holds = False
                report.counterexample = family.as_lists()
    logger.info(f"Non-implication {kind.value} at k={k}: {'verified' if report.holds else 'FAILED'}")
    return report


def power_set_matrix(size: int) -> BinaryMatrix:
    """Matrix of the full power set of [size]; its columns are pairwise 2^(size-1) apart."""
    return family_to_matrix(power_set_family(size))
