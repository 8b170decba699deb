"""
Census service: cube representations of separating families, the symmetry group
of the Hamming cube, canonical forms and orbit counts of point sets.

A cube point is an m-bit integer whose most significant bit is row 1 of the
family's matrix representation.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import List, Tuple

import numpy as np

from .. import config
from ..errors import ConstructionBug, DomainError, PreconditionError, RetryExhausted
from .ground import CubePointSet, SetFamily, family_to_matrix, random_family, relabel_family
from .separate import duplicate_columns, is_separating_family

logger = logging.getLogger(__name__)

_BATCH = 512


@dataclass(frozen=True)
class CubeSymmetry:
    """A cube symmetry: move coordinate i to coordinate perm[i], then flip the coordinates in mask."""

    perm: Tuple[int, ...]
    mask: int = 0

    @property
    def m(self) -> int:
        return len(self.perm)

    def __call__(self, point: int) -> int:
        image = 0
        for source, target in enumerate(self.perm):
            if (point >> source) & 1:
                image |= 1 << target
        return image ^ self.mask

    def __mul__(self, other: "CubeSymmetry") -> "CubeSymmetry":
        """self ∘ other: apply other first."""
        perm = tuple(self.perm[other.perm[i]] for i in range(self.m))
        return CubeSymmetry(perm, self(other.mask))

    def image_table(self) -> Tuple[int, ...]:
        return tuple(self(point) for point in range(1 << self.m))


def cube_generators(m: int) -> List[CubeSymmetry]:
    """Adjacent coordinate swaps plus one reflection generate the whole group."""
    identity = tuple(range(m))
    generators = []
    for i in range(m - 1):
        perm = list(identity)
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        generators.append(CubeSymmetry(tuple(perm)))
    generators.append(CubeSymmetry(identity, 1))
    return generators


@lru_cache(maxsize=8)
def symmetry_group(m: int) -> np.ndarray:
    """
    Every symmetry of the m-cube as a row of point images, closed from the generators by BFS.

    Returns:
        Read-only int array of shape (2^m · m!, 2^m)

    Raises:
        GuardExceeded: If m is above the cube guard
    """
    if m < 1:
        raise DomainError(f"cube dimension must be positive, got {m}")
    config.enforce_guard("symmetry_group", m, config.CUBE_M_GUARD)
    identity = CubeSymmetry(tuple(range(m)))
    generators = cube_generators(m)
    seen = {identity}
    queue = [identity]
    while queue:
        current = queue.pop()
        for generator in generators:
            candidate = generator * current
            if candidate not in seen:
                seen.add(candidate)
                queue.append(candidate)
    tables = np.array(sorted(symmetry.image_table() for symmetry in seen), dtype=np.int64)
    tables.setflags(write=False)
    logger.info(f"Generated symmetry group of Q_{m}: {tables.shape[0]} elements")
    return tables


@dataclass(frozen=True)
class CanonicalCubeForm:
    m: int
    points: Tuple[int, ...]

    def as_point_set(self) -> CubePointSet:
        return CubePointSet(self.m, frozenset(self.points))


def cube_representation(family: SetFamily) -> CubePointSet:
    """
    The set of matrix columns of a separating family, as points of the m-cube.

    Raises:
        PreconditionError: If two columns coincide (the family is not separating)
        EmptyFamily: For the empty family
    """
    if not is_separating_family(family):
        pairs = duplicate_columns(family)
        raise PreconditionError(f"family is not separating; equal columns {pairs[:5]}")
    matrix = family_to_matrix(family)
    return CubePointSet(matrix.rows, frozenset(matrix.column_values()))


def _lexicographic_minimum(rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] == 0:
        return rows[0]
    order = np.lexsort(rows.T[::-1])
    return rows[order[0]]


def canonical_form(points: CubePointSet) -> CanonicalCubeForm:
    """Lexicographically least sorted image of the point set over the whole symmetry group."""
    group = symmetry_group(points.m)
    chosen = np.array(points.sorted_points(), dtype=np.int64)
    images = np.sort(group[:, chosen], axis=1)
    best = _lexicographic_minimum(images)
    return CanonicalCubeForm(points.m, tuple(int(p) for p in best))


def apply_symmetry(points: CubePointSet, table: np.ndarray) -> CubePointSet:
    return CubePointSet(points.m, frozenset(int(table[p]) for p in points.points))


def families_equivalent(first: SetFamily, second: SetFamily) -> bool:
    """
    True iff one family turns into the other by complementing members and relabeling elements.

    Raises:
        PreconditionError: Non-separating input, or different m or k
    """
    if first.k != second.k or first.m != second.m:
        raise PreconditionError(
            f"families differ in shape: (m={first.m}, k={first.k}) vs (m={second.m}, k={second.k})"
        )
    return canonical_form(cube_representation(first)) == canonical_form(cube_representation(second))


def complement_member(family: SetFamily, index: int) -> SetFamily:
    """Replace member `index` (0-based) by its complement."""
    members = list(family.members)
    members[index] = members[index].complement()
    return SetFamily(family.k, tuple(members))


def member_size_profile(family: SetFamily) -> Tuple[Tuple[int, int], ...]:
    """Sorted multiset of {|A|, k-|A|}; equivalent families share it."""
    return tuple(sorted(tuple(sorted((member.size, family.k - member.size))) for member in family))


def _packed_orbit_keys(group: np.ndarray, subsets: np.ndarray, bits: int) -> np.ndarray:
    images = np.sort(group[:, subsets], axis=2)
    width = subsets.shape[1]
    shifts = np.array([bits * (width - 1 - j) for j in range(width)], dtype=np.uint64)
    keys = np.bitwise_or.reduce(images.astype(np.uint64) << shifts, axis=2)
    return keys.min(axis=0)


def count_sep(m: int, k: int) -> int:
    """
    Number of inequivalent separating families of m sets over [k], i.e. the
    number of orbits of k-point subsets of the m-cube.

    Every k-subset is canonicalized and the distinct forms counted. Up to
    m = 4 canonical forms are packed into 64-bit keys and minimized in batches.

    Raises:
        DomainError: If k < 0 or k > 2^m
        GuardExceeded: If m is above the census guard
    """
    if m < 1:
        raise DomainError(f"cube dimension must be positive, got {m}")
    if not 0 <= k <= 1 << m:
        raise DomainError(f"k={k} is outside 0..{1 << m}")
    config.enforce_guard("count_sep", m, config.CENSUS_M_GUARD)
    if k == 0:
        return 1

    group = symmetry_group(m)
    if m <= 4:
        forms = set()
        pending: List[Tuple[int, ...]] = []
        for subset in combinations(range(1 << m), k):
            pending.append(subset)
            if len(pending) == _BATCH:
                forms.update(_packed_orbit_keys(group, np.array(pending, dtype=np.int64), 4).tolist())
                pending = []
        if pending:
            forms.update(_packed_orbit_keys(group, np.array(pending, dtype=np.int64), 4).tolist())
        count = len(forms)
    else:
        count = len({canonical_form(CubePointSet(m, frozenset(subset))) for subset in combinations(range(1 << m), k)})
    logger.info(f"sep({m},{k}) = {count}")
    return count


def _cycle_lengths(table: np.ndarray) -> List[int]:
    seen = np.zeros(table.size, dtype=bool)
    lengths = []
    for start in range(table.size):
        if seen[start]:
            continue
        length, point = 0, start
        while not seen[point]:
            seen[point] = True
            point = int(table[point])
            length += 1
        lengths.append(length)
    return lengths


def _fixed_subsets(cycle_lengths: List[int], target: int) -> int:
    ways = [0] * (target + 1)
    ways[0] = 1
    for length in cycle_lengths:
        for total in range(target, length - 1, -1):
            ways[total] += ways[total - length]
    return ways[target]


def burnside_count(m: int, k: int) -> int:
    """Orbit count of k-point subsets by averaging fixed subsets over the group."""
    if not 0 <= k <= 1 << m:
        raise DomainError(f"k={k} is outside 0..{1 << m}")
    group = symmetry_group(m)
    total = sum(_fixed_subsets(_cycle_lengths(table), k) for table in group)
    orbits = Fraction(total, group.shape[0])
    if orbits.denominator != 1:
        raise ConstructionBug(f"Burnside average {orbits} is not an integer")
    return int(orbits)


def group_order(m: int) -> int:
    return (1 << m) * math.factorial(m)


def random_symmetry(m: int, rng: np.random.Generator) -> np.ndarray:
    group = symmetry_group(m)
    return group[int(rng.integers(0, group.shape[0]))]


def random_separating_family(m: int, k: int, rng: np.random.Generator, attempts: int = 1000) -> SetFamily:
    """
    Draw m distinct uniform subsets of [k] until they form a separating family.

    Raises:
        DomainError: If no separating family of m sets over [k] exists
        RetryExhausted: If every attempt failed
    """
    if m < 1 or not 1 <= k <= 1 << m:
        raise DomainError(f"no separating family of {m} sets over [{k}]")
    for _ in range(attempts):
        family = random_family(k, m, rng)
        if family.m == m and is_separating_family(family):
            return family
    raise RetryExhausted(f"no separating family of {m} sets over [{k}] in {attempts} draws")


def equivalence_move_failures(family: SetFamily, rng: np.random.Generator) -> List[str]:
    """
    Apply one random move of each kind and report the invariants that broke.

    The moves are a cube symmetry on the point set, a relabeling of [k] and
    the complement of one member (skipped when it would repeat a member). Each
    must keep the canonical form, and the two family moves must also keep the
    member size profile.
    """
    points = cube_representation(family)
    form = canonical_form(points)
    failed = []
    if canonical_form(apply_symmetry(points, random_symmetry(points.m, rng))) != form:
        failed.append("cube symmetry keeps canonical form")

    moved = [("relabel", relabel_family(family, (rng.permutation(family.k) + 1).tolist()))]
    index = int(rng.integers(0, family.m))
    if family.members[index].complement() not in family.members:
        moved.append(("complement", complement_member(family, index)))
    for name, other in moved:
        if canonical_form(cube_representation(other)) != form:
            failed.append(f"{name} keeps canonical form")
        if member_size_profile(other) != member_size_profile(family):
            failed.append(f"{name} keeps member size profile")
    return failed
