"""
Tests for the ground types, matrix representation and text formats.
"""
import numpy as np
import pytest

from app.errors import DimensionError, DomainError, EmptyFamily, ParseError, RetryExhausted
from app.services.ground import (
    BinaryMatrix,
    FamilyFormat,
    SetCollection,
    SetFamily,
    SubsetMask,
    build_with_reseed,
    compress_bits,
    emit_family,
    expand_bits,
    family_to_matrix,
    matrix_to_family,
    parse_family,
    popcount_array,
    power_set_family,
    random_family,
    random_subfamily,
    make_rng,
    relabel_family,
    sized_family,
)

MIN_SEP_8 = [[1, 2, 3, 4], [1, 2, 5, 6], [1, 3, 5, 7]]


def test_subset_mask_elements_and_complement():
    a = SubsetMask.from_elements(6, [1, 3, 6])
    assert a.elements == (1, 3, 6)
    assert a.size == 3
    assert 3 in a and 2 not in a
    assert a.complement().elements == (2, 4, 5)
    assert str(a) == "{1,3,6}"


def test_subset_mask_rejects_out_of_range():
    with pytest.raises(DomainError):
        SubsetMask.from_elements(4, [5])
    with pytest.raises(DomainError):
        SubsetMask(0)
    with pytest.raises(DomainError):
        SubsetMask(3, 0b1000)


def test_set_operations_need_same_ground_set():
    a = SubsetMask.from_elements(4, [1, 2])
    b = SubsetMask.from_elements(5, [2])
    with pytest.raises(DimensionError):
        a & b
    with pytest.raises(DimensionError):
        a.issubset(b)


def test_lowest_takes_smallest_elements():
    a = SubsetMask.from_elements(9, [2, 4, 7, 9])
    assert a.lowest(2).elements == (2, 4)
    assert a.lowest(0).is_empty()
    with pytest.raises(DomainError):
        a.lowest(5)


def test_family_rejects_duplicates_but_of_collapses_them():
    a = SubsetMask.from_elements(3, [1])
    with pytest.raises(DomainError):
        SetFamily(3, (a, a))
    family = SetFamily.of(3, [a, a, SubsetMask.empty(3)], drop_empty=True)
    assert family.m == 1


def test_collection_needs_a_member():
    with pytest.raises(DomainError):
        SetCollection(3, ())
    collection = SetCollection.from_lists(4, [[1, 2], [2, 3]])
    assert collection.union().elements == (1, 2, 3)


def test_matrix_of_min_separating_family():
    family = SetFamily.from_lists(8, MIN_SEP_8)
    matrix = family_to_matrix(family)
    assert matrix.to_lines() == ["11110000", "11001100", "10101010"]
    assert matrix.column_values() == [7, 6, 5, 4, 3, 2, 1, 0]


def test_empty_family_has_no_matrix():
    with pytest.raises(EmptyFamily):
        family_to_matrix(SetFamily(3))


def test_matrix_to_family_flags_duplicate_rows():
    decoded = matrix_to_family(BinaryMatrix(np.array([[1, 0, 1], [1, 0, 1], [0, 1, 0]])))
    assert decoded.had_duplicates
    assert decoded.family.as_lists() == [[1, 3], [2]]


def test_binary_matrix_rejects_non_binary_entries():
    with pytest.raises(DomainError):
        BinaryMatrix(np.array([[0, 2]]))


@pytest.mark.parametrize("fmt", list(FamilyFormat))
def test_formats_reproduce_the_family(fmt):
    family = SetFamily.from_lists(8, MIN_SEP_8)
    assert parse_family(emit_family(family, fmt), fmt) == family


def test_sets_format_layout_and_empty_member():
    family = SetFamily(3, (SubsetMask.from_elements(3, [1, 2]), SubsetMask.empty(3)))
    text = emit_family(family, FamilyFormat.SETS)
    assert text == b"k=3\n1,2\n\n"
    assert parse_family(text, FamilyFormat.SETS) == family


@pytest.mark.parametrize(
    "text, line",
    [
        ("3\n1,2\n", 1),
        ("k=4\n1,2\n3,2\n", 3),
        ("k=4\n1,x\n", 2),
        ("k=4\n1,5\n", 2),
    ],
)
def test_sets_format_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_family(text, FamilyFormat.SETS)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_matrix_format_rejects_ragged_rows():
    with pytest.raises(ParseError) as info:
        parse_family("101\n10\n", FamilyFormat.MATRIX)
    assert info.value.line == 2


def test_json_format_rejects_bad_documents():
    with pytest.raises(ParseError):
        parse_family('{"k": 3, "sets": [[4]]}', FamilyFormat.JSON)
    with pytest.raises(ParseError):
        parse_family('{"sets": []}', FamilyFormat.JSON)


def test_popcount_and_bit_packing():
    values = np.array([0, 1, 0b1011, (1 << 40) | 3], dtype=np.uint64)
    assert popcount_array(values).tolist() == [0, 1, 3, 3]
    universe = 0b101100
    assert compress_bits(0b100100, universe) == 0b101
    assert expand_bits(0b101, universe) == 0b100100


def test_sized_and_power_set_families():
    assert sized_family(4, [2]).m == 6
    assert sized_family(4, [1, 3], excluded=[SubsetMask.from_elements(4, [1])]).m == 7
    assert power_set_family(3).m == 8


def test_relabel_family():
    family = SetFamily.from_lists(3, [[1], [1, 2]])
    relabeled = relabel_family(family, [3, 1, 2])
    assert relabeled.as_lists() == [[3], [1, 3]]
    with pytest.raises(DomainError):
        relabel_family(family, [1, 1, 2])


def test_random_family_is_reproducible():
    first = random_family(10, 5, make_rng(7))
    second = random_family(10, 5, make_rng(7))
    assert first == second


def test_random_subfamily_density():
    assert random_subfamily(4, 1.0, make_rng(1)).same_sets(power_set_family(4))
    assert random_subfamily(4, 0.0, make_rng(1)).m == 0
    first = random_subfamily(6, 0.4, make_rng(3))
    assert first == random_subfamily(6, 0.4, make_rng(3))
    assert 0 < first.m < 64


def test_build_with_reseed_moves_to_next_seed():
    seen = []

    def builder(size, seed):
        seen.append(seed)
        if seed < 12:
            raise RetryExhausted("ceiling hit")
        return size * seed

    assert build_with_reseed(builder, 2, seed=10, attempts=5) == 24
    assert seen == [10, 11, 12]


def test_build_with_reseed_gives_up():
    def builder(seed):
        raise RetryExhausted("ceiling hit")

    with pytest.raises(RetryExhausted):
        build_with_reseed(builder, seed=0, attempts=3)
