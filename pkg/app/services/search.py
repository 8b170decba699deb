"""
Exact minimum-size searches for separating and splitting families, run as set
cover: tasks are the objects a family must handle (pairs, pair collections,
subsets, subset collections) and each candidate set covers the tasks it handles.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations_with_replacement
from typing import Dict, List, Tuple

import numpy as np

from .. import config
from ..errors import ConstructionBug, DomainError
from .ground import SetFamily, SubsetMask
from .separate import _separation_tasks, is_n_separating, is_separating_family
from .split import _split_matrix, _triple_splittable_array, is_n_splitting, is_splitting_family

logger = logging.getLogger(__name__)


class PropertyKind(str, Enum):
    SEPARATING = "separating"
    N_SEPARATING = "n-separating"
    SPLITTING = "splitting"
    N_SPLITTING = "n-splitting"


_GUARD_SLOT = {
    PropertyKind.SEPARATING: 0,
    PropertyKind.N_SEPARATING: 1,
    PropertyKind.SPLITTING: 2,
    PropertyKind.N_SPLITTING: 3,
}


@dataclass
class SearchResult:
    objective: str
    value: int
    certificate: SetFamily
    exhausted: bool
    lower_bound: int = 0
    greedy: int = 0
    stats: Dict[str, int] = field(default_factory=dict)


class FamilySearch:
    """
    Iterative-deepening set cover over complement-representative candidates.

    Candidates are the subsets of [k] not containing k (A and its complement
    cover the same tasks); candidates whose task set is contained in another's
    are dropped. Each depth bound is explored by branching on the lowest
    uncovered task, pruning with the best remaining coverage.
    """

    def __init__(self, kind: PropertyKind, k: int, n: int = 1):
        self.kind = PropertyKind(kind)
        self.k = k
        self.n = n
        if k < 1:
            raise DomainError(f"k must be positive, got {k}")
        if self.kind in (PropertyKind.N_SEPARATING, PropertyKind.N_SPLITTING) and n < 1:
            raise DomainError(f"n must be positive, got {n}")
        if self.kind == PropertyKind.N_SPLITTING and n > 3:
            raise DomainError(f"n-splitting searches support n <= 3, got {n}")
        config.enforce_guard(f"search min {self.kind.value}", k, config.SEARCH_K_GUARDS[_GUARD_SLOT[self.kind]])
        config.enforce_word_width(f"search min {self.kind.value}", k)

        self.candidates: List[int] = []
        self.coverage: List[int] = []
        self.task_count = 0
        self.stats = {"nodes": 0, "memo_hits": 0, "candidates": 0, "tasks": 0}
        self._failed: Dict[Tuple[int, int], bool] = {}
        self._build()

    # --- task construction ---

    def _candidate_masks(self) -> np.ndarray:
        return np.arange(1 << (self.k - 1), dtype=np.uint64)

    def _task_matrix(self, candidates: np.ndarray) -> np.ndarray:
        """Boolean matrix: entry (c, t) says candidate c completes task t."""
        k = self.k
        if self.kind in (PropertyKind.SEPARATING, PropertyKind.N_SEPARATING):
            size = 1 if self.kind == PropertyKind.SEPARATING else self.n
            first, second, tasks = _separation_tasks(k, size)
            bits = ((candidates[:, None] >> np.arange(k, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(np.uint8)
            separated = bits[:, first] != bits[:, second]
            return np.all(separated[:, tasks], axis=2)

        masks = np.arange(1 << k, dtype=np.uint64)
        split = _split_matrix(candidates, masks)
        size = 1 if self.kind == PropertyKind.SPLITTING else self.n
        if size == 1:
            return split
        groups = np.array(list(combinations_with_replacement(range(masks.size), size)), dtype=np.intp)
        if size == 3:
            keep = _triple_splittable_array(masks[groups[:, 0]], masks[groups[:, 1]], masks[groups[:, 2]])
            groups = groups[keep]
        return np.all(split[:, groups], axis=2)

    def _build(self) -> None:
        candidates = self._candidate_masks()
        matrix = self._task_matrix(candidates)
        self.task_count = matrix.shape[1]
        packed = np.packbits(matrix, axis=1, bitorder="little")
        coverage = [int.from_bytes(row.tobytes(), "little") for row in packed]

        kept: List[Tuple[int, int]] = []
        for bits, cover in sorted(zip(candidates.tolist(), coverage), key=lambda item: -item[1].bit_count()):
            if any(cover & ~other == 0 for _, other in kept):
                continue
            kept.append((bits, cover))
        kept.sort()
        self.candidates = [bits for bits, _ in kept]
        self.coverage = [cover for _, cover in kept]
        self.stats["candidates"] = len(kept)
        self.stats["tasks"] = self.task_count

    # --- search ---

    def _greedy(self) -> List[int]:
        uncovered = (1 << self.task_count) - 1
        chosen = []
        while uncovered:
            best = max(range(len(self.candidates)), key=lambda c: (self.coverage[c] & uncovered).bit_count())
            chosen.append(best)
            uncovered &= ~self.coverage[best]
        return chosen

    def _lower_bound(self, uncovered: int) -> int:
        if not uncovered:
            return 0
        best = max((cover & uncovered).bit_count() for cover in self.coverage)
        if best == 0:
            return self.task_count + 1
        return -(-uncovered.bit_count() // best)

    def _branch(self, uncovered: int, depth: int, chosen: List[int]) -> bool:
        self.stats["nodes"] += 1
        if not uncovered:
            return True
        if depth == 0:
            return False
        if (uncovered, depth) in self._failed:
            self.stats["memo_hits"] += 1
            return False
        if self._lower_bound(uncovered) > depth:
            self._failed[(uncovered, depth)] = True
            return False

        lowest = uncovered & -uncovered
        options = [c for c in range(len(self.candidates)) if self.coverage[c] & lowest]
        options.sort(key=lambda c: -(self.coverage[c] & uncovered).bit_count())
        for option in options:
            chosen.append(option)
            if self._branch(uncovered & ~self.coverage[option], depth - 1, chosen):
                return True
            chosen.pop()
        self._failed[(uncovered, depth)] = True
        return False

    def _family(self, chosen: List[int]) -> SetFamily:
        return SetFamily.of(self.k, (SubsetMask(self.k, self.candidates[c]) for c in chosen))

    def _certify(self, family: SetFamily) -> None:
        if self.kind == PropertyKind.SEPARATING:
            ok = is_separating_family(family)
        elif self.kind == PropertyKind.N_SEPARATING:
            ok = is_n_separating(family, self.n)
        elif self.kind == PropertyKind.SPLITTING:
            ok = is_splitting_family(family)
        else:
            ok = is_n_splitting(family, self.n)
        if not ok:
            raise ConstructionBug(f"search certificate {family} fails the {self.kind.value} recognizer")

    def run(self) -> SearchResult:
        """
        Find the minimum family size and a certificate.

        Returns:
            SearchResult with exhausted=True: every smaller size was refuted
        """
        everything = (1 << self.task_count) - 1
        objective = f"min family size for {self.kind.value}" + (
            f"(n={self.n})" if self.kind in (PropertyKind.N_SEPARATING, PropertyKind.N_SPLITTING) else ""
        ) + f" at k={self.k}"

        greedy = self._greedy()
        lower = self._lower_bound(everything)
        value, chosen = len(greedy), greedy
        for depth in range(lower, len(greedy)):
            attempt: List[int] = []
            if self._branch(everything, depth, attempt):
                value, chosen = depth, attempt
                break

        family = self._family(chosen)
        self._certify(family)
        logger.info(
            f"{objective}: {value} (greedy {len(greedy)}, bound {lower}, "
            f"{self.stats['nodes']} nodes, {self.stats['candidates']} candidates)"
        )
        return SearchResult(
            objective=objective,
            value=value,
            certificate=family,
            exhausted=True,
            lower_bound=lower,
            greedy=len(greedy),
            stats=dict(self.stats),
        )


def exact_min_family_size(kind: PropertyKind, k: int, n: int = 1) -> SearchResult:
    """Minimum size of a family over [k] with the given property, with a certificate."""
    return FamilySearch(kind, k, n).run()
