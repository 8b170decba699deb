"""
Tests for separating, n-separating and (i,j)-separating families.
"""
import math
from itertools import combinations

import numpy as np
import pytest

from app import config
from app.errors import DomainError, GuardExceeded, PreconditionError
from app.services.ground import (
    SetCollection,
    SetFamily,
    SubsetMask,
    build_with_reseed,
    family_to_matrix,
    make_rng,
    power_set_family,
    random_subfamily,
    random_subset,
    sized_family,
)
from app.services.separate import (
    POSITIVE_KINDS,
    ImplicationKind,
    SeparationMode,
    WitnessKind,
    build_2_separating,
    build_min_separating,
    build_n_separating_randomized,
    check_implication,
    column_distances,
    duplicate_columns,
    estimate_separation_probability,
    find_ij_separating_violation,
    find_n_separating_violation,
    is_ij_separating,
    is_n_separating,
    is_separable,
    is_separating_family,
    min_pairwise_column_distance,
    n_separating_bounds,
    power_set_matrix,
    restriction_violations,
    separates,
)

MIN_SEP_8 = [[1, 2, 3, 4], [1, 2, 5, 6], [1, 3, 5, 7]]
TWO_SEP_8 = MIN_SEP_8 + [[3, 4, 5, 6], [2, 4, 5, 7], [2, 3, 6, 7]]


def test_separates_needs_both_sides():
    b = SubsetMask.from_elements(5, [2, 4])
    assert separates(SubsetMask.from_elements(5, [2]), b)
    assert not separates(SubsetMask.from_elements(5, [2, 4]), b)
    assert not separates(SubsetMask.from_elements(5, [1, 3]), b)


def test_separates_is_complement_invariant_on_random_sets():
    rng = make_rng(6)
    for _ in range(300):
        a, b = random_subset(9, rng), random_subset(9, rng)
        assert separates(a, b) == separates(a.complement(), b)


def test_pair_reduction_on_random_families():
    rng = make_rng(21)
    wide = [SubsetMask(5, bits) for bits in range(1 << 5) if bin(bits).count("1") >= 2]
    for _ in range(40):
        family = random_subfamily(5, rng.uniform(0.02, 0.3), rng)
        every_set_separated = all(any(separates(member, b) for member in family) for b in wide)
        assert is_separating_family(family) == every_set_separated


def test_min_separating_layout():
    family = build_min_separating(8)
    assert family.as_lists() == MIN_SEP_8
    assert is_separating_family(family)


@pytest.mark.parametrize("k", range(2, 20))
def test_min_separating_size(k):
    family = build_min_separating(k)
    assert family.m == math.ceil(math.log2(k))
    assert is_separating_family(family)


def test_recognizer_edge_cases():
    assert is_separating_family(SetFamily(1))
    assert not is_separating_family(SetFamily(2))
    assert not is_separating_family(SetFamily.from_lists(8, MIN_SEP_8[:2]))


def test_duplicate_columns():
    family = SetFamily.from_lists(3, [[1, 2]])
    assert duplicate_columns(family) == [(1, 2)]
    assert duplicate_columns(build_min_separating(8)) == []


def test_separating_is_complement_invariant():
    family = SetFamily.from_lists(8, MIN_SEP_8)
    flipped = SetFamily(8, tuple(member.complement() for member in family))
    assert is_separating_family(flipped)


def test_pairs_mode_colours_paths_and_rejects_triangles():
    path = SetCollection.from_lists(4, [[1, 2], [2, 3]])
    witness = is_separable(path, SeparationMode.PAIRS)
    assert witness.kind == WitnessKind.BIPARTITION
    assert [part.elements for part in witness.parts] == [(1, 3), (2,)]

    triangle = SetCollection.from_lists(3, [[1, 2], [2, 3], [1, 3]])
    assert is_separable(triangle, SeparationMode.PAIRS).kind == WitnessKind.NONE
    assert not is_separable(triangle).separable


def test_pairs_mode_needs_pairs():
    with pytest.raises(DomainError):
        is_separable(SetCollection.from_lists(4, [[1, 2, 3]]), SeparationMode.PAIRS)


def test_brute_mode_returns_least_separator():
    witness = is_separable(SetCollection.from_lists(4, [[1, 2], [2, 3]]))
    assert witness.kind == WitnessKind.SEPARATOR
    assert witness.separator.elements == (2,)
    assert is_separable(SetCollection.from_lists(4, [[1], [2, 3]])).kind == WitnessKind.NONE


def test_brute_mode_guard(monkeypatch):
    monkeypatch.setattr(config, "UNION_GUARD", 3)
    monkeypatch.setattr(config, "UNSAFE_LIMITS", False)
    with pytest.raises(GuardExceeded):
        is_separable(SetCollection.from_lists(6, [[1, 2], [3, 4]]))


def test_two_separating_construction_layout():
    family = build_2_separating(build_min_separating(8))
    assert family.same_sets(SetFamily.from_lists(8, TWO_SEP_8))
    assert is_n_separating(family, 2)


def test_two_separating_needs_separating_input():
    with pytest.raises(PreconditionError):
        build_2_separating(SetFamily.from_lists(4, [[1, 2]]))


def test_min_separating_is_not_two_separating():
    violation = find_n_separating_violation(SetFamily.from_lists(8, MIN_SEP_8), 2)
    assert violation.as_lists() == [[1, 2], [1, 3]]


def test_power_set_is_n_separating():
    assert is_n_separating(power_set_family(4), 2)
    assert is_n_separating(power_set_family(4), 3)


def test_n_separating_with_n_one_is_separating():
    for k in (3, 5, 8):
        family = build_min_separating(k)
        assert is_n_separating(family, 1) == is_separating_family(family)


def _n_separating_by_pairs(family, n):
    pairs = [SubsetMask.from_elements(family.k, pair) for pair in combinations(range(1, family.k + 1), 2)]
    for size in range(1, n + 1):
        for chosen in combinations(pairs, size):
            collection = SetCollection(family.k, chosen)
            if not is_separable(collection, SeparationMode.PAIRS).separable:
                continue
            if not any(all(separates(member, pair) for pair in chosen) for member in family):
                return False
    return True


@pytest.mark.parametrize("n", [2, 3])
def test_n_separating_agrees_with_pair_collections(n):
    rng = make_rng(30 + n)
    verdicts = set()
    for _ in range(60):
        family = random_subfamily(5, rng.uniform(0.2, 1.0), rng)
        verdict = is_n_separating(family, n)
        assert verdict == _n_separating_by_pairs(family, n)
        verdicts.add(verdict)
    assert verdicts == {True, False}


def test_ij_separating_on_two_subsets():
    family = sized_family(6, [2])
    assert is_ij_separating(family, 2, 1)
    assert is_ij_separating(family, 2, 2)
    violation = find_ij_separating_violation(family, 3, 3)
    assert violation is not None
    p, q = violation
    assert p.size <= 3 and q.size <= 3 and (p & q).is_empty()


def test_ij_separating_domain():
    with pytest.raises(DomainError):
        is_ij_separating(sized_family(4, [2]), 3, 2)
    with pytest.raises(DomainError):
        is_ij_separating(sized_family(4, [2]), -1, 2)


def test_ij_zero_zero_always_holds():
    assert is_ij_separating(SetFamily.from_lists(3, [[1]]), 0, 0)


@pytest.mark.parametrize("n, k, ceiling", [(2, 8, 30), (2, 10, 34), (3, 6, 82)])
def test_randomized_bound_ceilings(n, k, ceiling):
    lower, upper = n_separating_bounds(n, k)
    assert math.ceil(upper) == ceiling
    assert lower == pytest.approx(2 ** (n - 1) * math.log2(k))


def test_randomized_build_is_verified():
    family, report = build_with_reseed(build_n_separating_randomized, 2, 8, seed=11)
    assert is_n_separating(family, 2)
    assert report.achieved == family.m <= report.ceiling == 30
    assert report.verified


def test_randomized_build_is_reproducible():
    first, _ = build_with_reseed(build_n_separating_randomized, 2, 6, seed=5)
    second, _ = build_with_reseed(build_n_separating_randomized, 2, 6, seed=5)
    assert first == second


def test_unverified_build_takes_ceiling_draws():
    family, report = build_n_separating_randomized(2, 8, seed=3, verify=False)
    assert report.draws == report.ceiling
    assert family.m <= report.ceiling
    assert not report.verified


@pytest.mark.parametrize("n", [1, 2, 3])
def test_separation_probability_floor(n):
    estimate = estimate_separation_probability(n, 16, 2000, seed=n)
    assert estimate.floor == 2.0 ** -n
    assert estimate.estimate >= estimate.floor - 4 * estimate.stderr


@pytest.mark.parametrize("size", [2, 3, 4, 5])
def test_power_set_columns_are_equidistant(size):
    distances = column_distances(power_set_matrix(size))
    off_diagonal = distances[~np.eye(size, dtype=bool)]
    assert set(off_diagonal.tolist()) == {1 << (size - 1)}
    assert min_pairwise_column_distance(power_set_matrix(size)) == 1 << (size - 1)


def test_two_separating_columns_are_two_apart():
    family = SetFamily.from_lists(8, TWO_SEP_8)
    assert min_pairwise_column_distance(family_to_matrix(family)) >= 2


@pytest.mark.parametrize("n, k", [(1, 8), (2, 8), (2, 10), (3, 7)])
def test_randomized_builds_are_hamming_codes(n, k):
    for seed in range(5):
        family, _ = build_with_reseed(build_n_separating_randomized, n, k, seed=100 * n + seed)
        assert min_pairwise_column_distance(family_to_matrix(family)) >= 1 << (n - 1)


def test_n_separating_random_families_are_hamming_codes():
    rng = make_rng(9)
    certified = 0
    for _ in range(40):
        family = random_subfamily(6, rng.uniform(0.5, 1.0), rng)
        if is_n_separating(family, 3):
            certified += 1
            assert min_pairwise_column_distance(family_to_matrix(family)) >= 4
    assert certified > 0


def test_restriction_claim():
    assert restriction_violations(SetFamily.from_lists(8, TWO_SEP_8), 2) == []
    violations = restriction_violations(SetFamily.from_lists(8, MIN_SEP_8), 2)
    assert (SubsetMask.from_elements(8, [1, 2, 3]), SubsetMask.from_elements(8, [1])) in violations


@pytest.mark.parametrize("kind", POSITIVE_KINDS)
def test_positive_implications_survive_random_families(kind):
    report = check_implication(kind, {}, 5, seed=1, trials=25)
    assert report.holds
    assert not report.inconclusive
    assert report.checked == 25
    assert 0 < report.params["premise_held"] <= 25


@pytest.mark.parametrize(
    "kind, params",
    [
        (ImplicationKind.SHRINK_IJ, {"i": 2, "j": 2}),
        (ImplicationKind.SHRINK_IJ, {"i": 2, "j": 3}),
        (ImplicationKind.NN_TO_N, {"n": 3}),
        (ImplicationKind.N_TO_IJ, {"i": 2, "j": 2}),
        (ImplicationKind.N_TO_IJ, {"i": 2, "j": 3}),
    ],
)
def test_positive_implications_exercise_their_premise(kind, params):
    report = check_implication(kind, params, 6, seed=3, trials=120)
    assert report.holds, report.details
    assert report.params["premise_held"] > 0
    assert report.details[-1].startswith(f"premise held in {report.params['premise_held']} of 120")


def test_implication_without_premise_is_inconclusive():
    report = check_implication(ImplicationKind.NN_TO_N, {"n": 2}, 5, seed=1, trials=0)
    assert report.inconclusive
    assert not report.holds
    assert report.params["premise_held"] == 0
    assert report.counterexample is None


@pytest.mark.parametrize("kind", [kind for kind in ImplicationKind if kind not in POSITIVE_KINDS])
def test_non_implication_counterexamples_verify(kind):
    report = check_implication(kind, {}, 6)
    assert report.holds, report.details
    assert report.checked >= 2


def test_non_implication_parameter_range():
    with pytest.raises(DomainError):
        check_implication(ImplicationKind.N_NOT_NEXT, {"n": 3}, 6)


def test_wide_unions_are_rejected_even_without_limits(monkeypatch):
    monkeypatch.setattr(config, "UNSAFE_LIMITS", True)
    k = 80
    collection = SetCollection.from_lists(k, [range(1, 50), range(40, 81)])
    with pytest.raises(GuardExceeded) as excinfo:
        is_separable(collection)
    assert excinfo.value.limit == 64
