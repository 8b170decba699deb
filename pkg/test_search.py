"""
Tests for the exact minimum-size searches.
"""
import math

import pytest

from app import config
from app.errors import DomainError, GuardExceeded
from app.services.ground import SetFamily
from app.services.search import FamilySearch, PropertyKind, exact_min_family_size
from app.services.separate import build_2_separating, build_min_separating, is_n_separating, is_separating_family
from app.services.split import is_n_splitting, is_splitting_family, volume_lower_bound


@pytest.mark.parametrize("k", range(2, 9))
def test_min_separating_is_log2(k):
    result = exact_min_family_size(PropertyKind.SEPARATING, k)
    assert result.value == math.ceil(math.log2(k))
    assert result.exhausted
    assert result.certificate.m == result.value
    assert is_separating_family(result.certificate)
    assert result.lower_bound <= result.value <= result.greedy


def test_single_element_needs_no_sets():
    result = exact_min_family_size(PropertyKind.SEPARATING, 1)
    assert result.value == 0
    assert result.certificate == SetFamily(1)


def test_min_splitting_at_four():
    result = exact_min_family_size(PropertyKind.SPLITTING, 4)
    assert result.value == 2
    assert is_splitting_family(result.certificate)


def test_min_splitting_within_volume_and_interval_bounds():
    result = exact_min_family_size(PropertyKind.SPLITTING, 6)
    assert math.ceil(volume_lower_bound(1, 6)) <= result.value <= 3
    assert is_splitting_family(result.certificate)


def test_min_two_separating_beats_doubling_construction():
    result = exact_min_family_size(PropertyKind.N_SEPARATING, 4, 2)
    assert is_n_separating(result.certificate, 2)
    assert result.value <= build_2_separating(build_min_separating(4)).m


def test_min_two_splitting_certificate():
    result = exact_min_family_size(PropertyKind.N_SPLITTING, 4, 2)
    assert result.value >= 2
    assert is_n_splitting(result.certificate, 2)


def test_search_records_stats():
    result = FamilySearch(PropertyKind.SEPARATING, 6).run()
    assert result.stats["tasks"] == math.comb(6, 2)
    assert result.stats["candidates"] > 0
    assert result.stats["nodes"] > 0
    assert "k=6" in result.objective


def test_search_domain_errors():
    with pytest.raises(DomainError):
        FamilySearch(PropertyKind.SEPARATING, 0)
    with pytest.raises(DomainError):
        FamilySearch(PropertyKind.N_SPLITTING, 4, 4)
    with pytest.raises(DomainError):
        FamilySearch(PropertyKind.N_SEPARATING, 4, 0)


def test_search_guard(monkeypatch):
    monkeypatch.setattr(config, "UNSAFE_LIMITS", False)
    with pytest.raises(GuardExceeded):
        FamilySearch(PropertyKind.SEPARATING, 11)
