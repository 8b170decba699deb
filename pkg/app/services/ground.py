"""
Ground-set subsets, families, matrix representations and the text formats shared
by every other service.

Elements are named 1..k externally; internally element j lives at bit j-1 of a
Python int, so ground sets of any size up to config.K_MAX are supported.
"""
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .. import config
from ..errors import DimensionError, DomainError, EmptyFamily, ParseError, RetryExhausted

logger = logging.getLogger(__name__)


# --- Bit helpers ---

def _build_popcount_table() -> np.ndarray:
    values = np.arange(1 << 16, dtype=np.uint32)
    table = np.zeros(1 << 16, dtype=np.uint8)
    for shift in range(16):
        table += ((values >> shift) & 1).astype(np.uint8)
    return table


_POPCOUNT16 = _build_popcount_table()


def popcount_array(values: np.ndarray) -> np.ndarray:
    """Vectorized popcount of an array of masks that fit in 64 bits."""
    words = np.asarray(values, dtype=np.uint64)
    total = np.zeros(words.shape, dtype=np.int16)
    for shift in (0, 16, 32, 48):
        total += _POPCOUNT16[(words >> np.uint64(shift)) & np.uint64(0xFFFF)]
    return total


def bit_positions(bits: int) -> List[int]:
    """0-based positions of the set bits, ascending."""
    positions = []
    while bits:
        low = bits & -bits
        positions.append(low.bit_length() - 1)
        bits ^= low
    return positions


def compress_bits(bits: int, universe: int) -> int:
    """Extract the bits of `bits` found at the set positions of `universe`, packed low."""
    packed = 0
    for index, position in enumerate(bit_positions(universe)):
        if (bits >> position) & 1:
            packed |= 1 << index
    return packed


def expand_bits(packed: int, universe: int) -> int:
    """Inverse of compress_bits: deposit packed bits onto the positions of `universe`."""
    bits = 0
    for index, position in enumerate(bit_positions(universe)):
        if (packed >> index) & 1:
            bits |= 1 << position
    return bits


# --- Domain types ---

@dataclass(frozen=True)
class SubsetMask:
    """A subset of [k]; bit j is set iff element j+1 belongs to the set."""

    k: int
    bits: int = 0

    def __post_init__(self):
        if not 0 < self.k <= config.K_MAX:
            raise DomainError(f"ground-set size must be in 1..{config.K_MAX}, got {self.k}")
        if self.bits < 0 or self.bits >> self.k:
            raise DomainError(f"bits beyond position {self.k} are set")

    @classmethod
    def from_elements(cls, k: int, elements: Iterable[int]) -> "SubsetMask":
        bits = 0
        for element in elements:
            if not 1 <= element <= k:
                raise DomainError(f"element {element} is not in [{k}]")
            bits |= 1 << (element - 1)
        return cls(k, bits)

    @classmethod
    def empty(cls, k: int) -> "SubsetMask":
        return cls(k, 0)

    @classmethod
    def full(cls, k: int) -> "SubsetMask":
        return cls(k, (1 << k) - 1)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    @property
    def elements(self) -> Tuple[int, ...]:
        return tuple(position + 1 for position in bit_positions(self.bits))

    def is_empty(self) -> bool:
        return self.bits == 0

    def complement(self) -> "SubsetMask":
        return SubsetMask(self.k, ((1 << self.k) - 1) ^ self.bits)

    def lowest(self, count: int) -> "SubsetMask":
        """The `count` smallest elements of this set."""
        if not 0 <= count <= self.size:
            raise DomainError(f"cannot take {count} elements of a {self.size}-element set")
        bits, remaining = 0, self.bits
        for _ in range(count):
            low = remaining & -remaining
            bits |= low
            remaining ^= low
        return SubsetMask(self.k, bits)

    def issubset(self, other: "SubsetMask") -> bool:
        self._check_same_k(other)
        return self.bits & ~other.bits == 0

    def _check_same_k(self, other: "SubsetMask") -> None:
        if self.k != other.k:
            raise DimensionError(f"ground sets differ: k={self.k} vs k={other.k}")

    def __and__(self, other: "SubsetMask") -> "SubsetMask":
        self._check_same_k(other)
        return SubsetMask(self.k, self.bits & other.bits)

    def __or__(self, other: "SubsetMask") -> "SubsetMask":
        self._check_same_k(other)
        return SubsetMask(self.k, self.bits | other.bits)

    def __xor__(self, other: "SubsetMask") -> "SubsetMask":
        self._check_same_k(other)
        return SubsetMask(self.k, self.bits ^ other.bits)

    def __sub__(self, other: "SubsetMask") -> "SubsetMask":
        self._check_same_k(other)
        return SubsetMask(self.k, self.bits & ~other.bits)

    def __contains__(self, element: int) -> bool:
        return 1 <= element <= self.k and (self.bits >> (element - 1)) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return self.size

    def __str__(self) -> str:
        return "{" + ",".join(str(e) for e in self.elements) + "}"


@dataclass(frozen=True)
class SetFamily:
    """A duplicate-free ordered family of subsets of a common [k]."""

    k: int
    members: Tuple[SubsetMask, ...] = ()

    def __post_init__(self):
        seen = set()
        for member in self.members:
            if member.k != self.k:
                raise DimensionError(f"member {member} lives over k={member.k}, family over k={self.k}")
            if member.bits in seen:
                raise DomainError(f"duplicate member {member}")
            seen.add(member.bits)

    @classmethod
    def of(cls, k: int, members: Iterable[SubsetMask], drop_empty: bool = False) -> "SetFamily":
        """Build a family, silently collapsing duplicates (and ∅ when asked)."""
        unique: Dict[int, SubsetMask] = {}
        for member in members:
            if drop_empty and member.is_empty():
                continue
            unique.setdefault(member.bits, member)
        return cls(k, tuple(unique.values()))

    @classmethod
    def from_lists(cls, k: int, sets: Iterable[Iterable[int]]) -> "SetFamily":
        return cls.of(k, (SubsetMask.from_elements(k, elements) for elements in sets))

    @property
    def m(self) -> int:
        return len(self.members)

    def as_lists(self) -> List[List[int]]:
        return [list(member.elements) for member in self.members]

    def same_sets(self, other: "SetFamily") -> bool:
        """Set equality, ignoring display order."""
        return self.k == other.k and {a.bits for a in self} == {b.bits for b in other}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[SubsetMask]:
        return iter(self.members)

    def __getitem__(self, index: int) -> SubsetMask:
        return self.members[index]

    def __contains__(self, member: SubsetMask) -> bool:
        return any(m.bits == member.bits and m.k == member.k for m in self.members)

    def __str__(self) -> str:
        return "{" + ",".join(str(member) for member in self.members) + "}"


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """An m×k 0/1 matrix; row i is the characteristic vector of member i."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.uint8)
        if entries.ndim != 2 or entries.shape[0] == 0 or entries.shape[1] == 0:
            raise DomainError(f"matrix must be 2-dimensional with positive sizes, got shape {entries.shape}")
        if np.any(entries > 1):
            raise DomainError("matrix entries must be 0 or 1")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def column_values(self) -> List[int]:
        """Columns read as unsigned integers, row 1 being the most significant bit."""
        weights = [1 << (self.rows - 1 - i) for i in range(self.rows)]
        return [sum(w for w, bit in zip(weights, column) if bit) for column in self.entries.T.tolist()]

    def to_lines(self) -> List[str]:
        return ["".join("1" if bit else "0" for bit in row) for row in self.entries.tolist()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())


@dataclass(frozen=True)
class SetCollection:
    """An ordered tuple (B1, ..., Bn) of subsets of [k], n >= 1."""

    k: int
    sets: Tuple[SubsetMask, ...]

    def __post_init__(self):
        if not self.sets:
            raise DomainError("a collection needs at least one set")
        for member in self.sets:
            if member.k != self.k:
                raise DimensionError(f"set {member} lives over k={member.k}, collection over k={self.k}")

    @classmethod
    def from_lists(cls, k: int, sets: Iterable[Iterable[int]]) -> "SetCollection":
        return cls(k, tuple(SubsetMask.from_elements(k, elements) for elements in sets))

    @property
    def n(self) -> int:
        return len(self.sets)

    def union(self) -> SubsetMask:
        bits = 0
        for member in self.sets:
            bits |= member.bits
        return SubsetMask(self.k, bits)

    def as_lists(self) -> List[List[int]]:
        return [list(member.elements) for member in self.sets]

    def __iter__(self) -> Iterator[SubsetMask]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __str__(self) -> str:
        return "(" + ",".join(str(member) for member in self.sets) + ")"


@dataclass(frozen=True)
class CubePointSet:
    """A set of vertices of the m-dimensional Hamming cube, as m-bit integers."""

    m: int
    points: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.m < 1:
            raise DomainError(f"cube dimension must be positive, got {self.m}")
        points = frozenset(self.points)
        for point in points:
            if not 0 <= point < (1 << self.m):
                raise DomainError(f"point {point} is not an {self.m}-bit vector")
        object.__setattr__(self, "points", points)

    def sorted_points(self) -> Tuple[int, ...]:
        return tuple(sorted(self.points))

    def complement(self) -> "CubePointSet":
        return CubePointSet(self.m, frozenset(range(1 << self.m)) - self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class VerdictReport:
    """Outcome of a property check: which claim, with which parameters, and whether it held."""

    kind: str
    params: Dict[str, Any]
    holds: bool
    checked: int = 0
    details: List[str] = field(default_factory=list)
    counterexample: Optional[Any] = None
    inconclusive: bool = False


# --- Matrix representation ---

def _row_from_bits(bits: int, k: int) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes((k + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:k]


def _bits_from_row(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def family_to_matrix(family: SetFamily) -> BinaryMatrix:
    """
    Matrix representation of a family: row i is the characteristic vector of member i.

    Args:
        family: A nonempty family

    Returns:
        The m×k BinaryMatrix

    Raises:
        EmptyFamily: If the family has no members
    """
    if family.m == 0:
        raise EmptyFamily(f"the empty family over [{family.k}] has no matrix representation")
    entries = np.vstack([_row_from_bits(member.bits, family.k) for member in family])
    return BinaryMatrix(entries)


class FamilyDecoding(NamedTuple):
    family: SetFamily
    had_duplicates: bool


def matrix_to_family(matrix: BinaryMatrix) -> FamilyDecoding:
    """Family of row-sets; equal rows collapse into one member and set the flag."""
    k = matrix.cols
    members = [SubsetMask(k, _bits_from_row(row)) for row in matrix.entries]
    family = SetFamily.of(k, members)
    had_duplicates = family.m < matrix.rows
    if had_duplicates:
        logger.warning(f"Collapsed {matrix.rows - family.m} duplicate matrix rows")
    return FamilyDecoding(family, had_duplicates)


# --- Serialization ---

class FamilyFormat(str, Enum):
    SETS = "sets"
    MATRIX = "matrix"
    JSON = "json"


class FamilyDocument(BaseModel):
    k: int
    sets: List[List[int]]


def _lines_of(text: Union[str, bytes]) -> List[str]:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    text = text.replace("\r\n", "\n")
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n") if text else []


def _parse_sets(lines: List[str]) -> SetFamily:
    if not lines or not lines[0].strip().startswith("k="):
        raise ParseError("first line must be k=<int>", line=1)
    try:
        k = int(lines[0].strip()[2:])
    except ValueError:
        raise ParseError(f"bad ground-set size {lines[0]!r}", line=1)
    if not 0 < k <= config.K_MAX:
        raise ParseError(f"k={k} outside 1..{config.K_MAX}", line=1)
    members = []
    for number, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            members.append(SubsetMask.empty(k))
            continue
        try:
            elements = [int(token) for token in line.split(",")]
        except ValueError:
            raise ParseError(f"not a comma-separated list of integers: {line!r}", line=number)
        if any(a >= b for a, b in zip(elements, elements[1:])):
            raise ParseError(f"elements must be strictly ascending: {line!r}", line=number)
        bad = [e for e in elements if not 1 <= e <= k]
        if bad:
            raise ParseError(f"element {bad[0]} is not in [{k}]", line=number)
        members.append(SubsetMask.from_elements(k, elements))
    return SetFamily.of(k, members)


def _parse_matrix(lines: List[str]) -> SetFamily:
    rows = [line.strip() for line in lines]
    if not rows or not rows[0]:
        raise ParseError("matrix text is empty", line=1)
    k = len(rows[0])
    for number, row in enumerate(rows, start=1):
        if len(row) != k:
            raise ParseError(f"row has length {len(row)}, expected {k}", line=number)
        if set(row) - {"0", "1"}:
            raise ParseError(f"row contains characters other than 0/1: {row!r}", line=number)
    entries = np.array([[1 if c == "1" else 0 for c in row] for row in rows], dtype=np.uint8)
    return matrix_to_family(BinaryMatrix(entries)).family


def _parse_json(raw: str) -> SetFamily:
    try:
        document = FamilyDocument.model_validate_json(raw)
    except ValidationError as e:
        raise ParseError(f"invalid family document: {e.errors()[0]['msg']}", line=1)
    if not 0 < document.k <= config.K_MAX:
        raise ParseError(f"k={document.k} outside 1..{config.K_MAX}", line=1)
    for index, elements in enumerate(document.sets):
        bad = [e for e in elements if not 1 <= e <= document.k]
        if bad:
            raise ParseError(f"set #{index + 1}: element {bad[0]} is not in [{document.k}]", line=1)
    return SetFamily.from_lists(document.k, document.sets)


def parse_family(text: Union[str, bytes], fmt: FamilyFormat) -> SetFamily:
    """
    Parse a family from one of the three text formats.

    Args:
        text: The serialized family (str or UTF-8 bytes)
        fmt: SETS, MATRIX or JSON

    Returns:
        The parsed family (duplicates collapsed)

    Raises:
        ParseError: On malformed input, with the offending line number
    """
    fmt = FamilyFormat(fmt)
    if fmt == FamilyFormat.JSON:
        raw = text.decode("utf-8") if isinstance(text, bytes) else text
        return _parse_json(raw)
    lines = _lines_of(text)
    if fmt == FamilyFormat.SETS:
        return _parse_sets(lines)
    return _parse_matrix(lines)


def emit_family(family: SetFamily, fmt: FamilyFormat) -> bytes:
    """Serialize a family; parse_family(emit_family(F, f), f) reproduces F."""
    fmt = FamilyFormat(fmt)
    if fmt == FamilyFormat.SETS:
        lines = [f"k={family.k}"] + [",".join(str(e) for e in member.elements) for member in family]
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == FamilyFormat.MATRIX:
        return ("\n".join(family_to_matrix(family).to_lines()) + "\n").encode("utf-8")
    document = FamilyDocument(k=family.k, sets=family.as_lists())
    return (json.dumps(document.model_dump()) + "\n").encode("utf-8")


# --- Enumeration and relabeling ---

def subsets_of_size(k: int, size: int) -> Iterator[SubsetMask]:
    for elements in combinations(range(1, k + 1), size):
        yield SubsetMask.from_elements(k, elements)


def sized_family(k: int, sizes: Iterable[int], excluded: Sequence[SubsetMask] = ()) -> SetFamily:
    """All subsets of [k] whose size is in `sizes`, minus the excluded sets."""
    skip = {member.bits for member in excluded}
    members = [mask for size in sorted(set(sizes)) for mask in subsets_of_size(k, size) if mask.bits not in skip]
    return SetFamily(k, tuple(members))


def power_set_family(k: int) -> SetFamily:
    return SetFamily(k, tuple(SubsetMask(k, bits) for bits in range(1 << k)))


def relabel_family(family: SetFamily, permutation: Sequence[int]) -> SetFamily:
    """Rename element j to permutation[j-1] in every member."""
    if sorted(permutation) != list(range(1, family.k + 1)):
        raise DomainError(f"not a permutation of [{family.k}]: {list(permutation)}")
    members = [SubsetMask.from_elements(family.k, (permutation[e - 1] for e in member.elements)) for member in family]
    return SetFamily(family.k, tuple(members))


# --- Randomness ---

def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the stream for a given seed is stable across platforms."""
    return np.random.default_rng(seed)


def random_subset(k: int, rng: np.random.Generator) -> SubsetMask:
    """Uniform random subset of [k]: one fair bit per element."""
    row = rng.integers(0, 2, size=k, dtype=np.uint8)
    return SubsetMask(k, _bits_from_row(row))


def random_family(k: int, size: int, rng: np.random.Generator) -> SetFamily:
    return SetFamily.of(k, (random_subset(k, rng) for _ in range(size)))


def random_subfamily(k: int, density: float, rng: np.random.Generator) -> SetFamily:
    """Keep each subset of [k] independently with probability `density`."""
    kept = np.flatnonzero(rng.random(1 << k) < density)
    return SetFamily(k, tuple(SubsetMask(k, int(bits)) for bits in kept))


def build_with_reseed(builder: Callable[..., Any], *args, seed: int, attempts: int = 5, **kwargs) -> Any:
    """
    Run a seeded randomized builder, reseeding after RetryExhausted.

    Attempt a (0-based) runs with seed + a, so the whole retry sequence stays
    deterministic given the starting seed.

    Args:
        builder: A callable taking a `seed` keyword
        seed: Seed of the first attempt
        attempts: Maximum number of attempts

    Returns:
        Whatever the first successful attempt returns

    Raises:
        RetryExhausted: If every attempt exhausts its ceiling
    """
    for attempt in Retrying(retry=retry_if_exception_type(RetryExhausted), stop=stop_after_attempt(attempts), reraise=True):
        with attempt:
            current = seed + attempt.retry_state.attempt_number - 1
            if current != seed:
                logger.warning(f"Reseeding {getattr(builder, '__name__', 'builder')} with seed {current}")
            return builder(*args, seed=current, **kwargs)
