"""
FastAPI routes exposing constructions, recognizers, counts and exact searches.
"""
from fastapi import APIRouter, HTTPException, Query
from typing import Callable, TypeVar
import logging

from . import schemas
from .errors import (
    DimensionError,
    DomainError,
    EmptyFamily,
    GuardExceeded,
    ParseError,
    PreconditionError,
    ToolkitError,
)
from .services.census import count_sep
from .services.ground import SetFamily, family_to_matrix
from .services.search import exact_min_family_size
from .services.separate import (
    build_2_separating,
    build_min_separating,
    find_n_separating_violation,
    is_separating_family,
    duplicate_columns,
)
from .services.split import (
    build_interval_splitting,
    count_simultaneous_splitters,
    find_n_splitting_violation,
    find_unsplit_set,
    splitter_count_formula,
)

logger = logging.getLogger(__name__)

router = APIRouter()

T = TypeVar("T")

_CLIENT_ERRORS = (DomainError, DimensionError, ParseError, PreconditionError, EmptyFamily)


def _guarded(route: str, work: Callable[[], T]) -> T:
    """Run toolkit work, translating its errors into HTTP status codes."""
    try:
        return work()
    except GuardExceeded as e:
        logger.error(f"{route}: {e}")
        raise HTTPException(status_code=413, detail=str(e))
    except _CLIENT_ERRORS as e:
        raise HTTPException(status_code=422, detail=str(e))
    except ToolkitError as e:
        logger.error(f"{route} failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))


def _family(payload: schemas.FamilyPayload) -> SetFamily:
    return SetFamily.from_lists(payload.k, payload.sets)


def _payload(family: SetFamily) -> schemas.FamilyPayload:
    return schemas.FamilyPayload(k=family.k, sets=family.as_lists())


def _constructed(name: str, family: SetFamily) -> schemas.ConstructResponse:
    matrix = family_to_matrix(family).to_lines() if family.m else []
    return schemas.ConstructResponse(construction=name, family=_payload(family), matrix=matrix, size=family.m)


def _require_k(request: schemas.ConstructRequest) -> int:
    if request.k is None:
        raise DomainError("this construction needs k")
    return request.k


# === Constructions ===

@router.post("/construct/min-sep", response_model=schemas.ConstructResponse, tags=["Construct"])
def construct_min_separating(request: schemas.ConstructRequest):
    """
    Minimum separating family over [k]: ceil(log2 k) sets.
    """
    return _guarded("construct/min-sep", lambda: _constructed("min-sep", build_min_separating(_require_k(request))))


@router.post("/construct/2-sep", response_model=schemas.ConstructResponse, tags=["Construct"])
def construct_2_separating(request: schemas.ConstructRequest):
    """
    Close a separating family under pairwise symmetric differences.
    Without a family, the minimum separating family over [k] is used.
    """
    def work():
        base = _family(request.family) if request.family else build_min_separating(_require_k(request))
        return _constructed("2-sep", build_2_separating(base))

    return _guarded("construct/2-sep", work)


@router.post("/construct/interval-split", response_model=schemas.ConstructResponse, tags=["Construct"])
def construct_interval_splitting(request: schemas.ConstructRequest):
    return _guarded(
        "construct/interval-split",
        lambda: _constructed("interval-split", build_interval_splitting(_require_k(request))),
    )


# === Recognizers ===

@router.post("/verify/sep", response_model=schemas.VerifyResponse, tags=["Verify"])
def verify_separating(request: schemas.VerifyRequest):
    """
    Separating check in O(mk); the counterexample is the first pair of equal columns.
    """
    def work():
        family = _family(request.family)
        if is_separating_family(family):
            return schemas.VerifyResponse(property="separating", holds=True)
        pairs = duplicate_columns(family)
        return schemas.VerifyResponse(property="separating", holds=False, counterexample=[list(pairs[0])])

    return _guarded("verify/sep", work)


@router.post("/verify/nsep", response_model=schemas.VerifyResponse, tags=["Verify"])
def verify_n_separating(request: schemas.VerifyRequest):
    def work():
        violation = find_n_separating_violation(_family(request.family), request.n)
        return schemas.VerifyResponse(
            property="n-separating",
            n=request.n,
            holds=violation is None,
            counterexample=violation.as_lists() if violation is not None else None,
        )

    return _guarded("verify/nsep", work)


@router.post("/verify/split", response_model=schemas.VerifyResponse, tags=["Verify"])
def verify_splitting(request: schemas.VerifyRequest):
    def work():
        unsplit = find_unsplit_set(_family(request.family))
        return schemas.VerifyResponse(
            property="splitting",
            holds=unsplit is None,
            counterexample=[list(unsplit.elements)] if unsplit is not None else None,
        )

    return _guarded("verify/split", work)


@router.post("/verify/nsplit", response_model=schemas.VerifyResponse, tags=["Verify"])
def verify_n_splitting(request: schemas.VerifyRequest):
    def work():
        violation = find_n_splitting_violation(_family(request.family), request.n)
        return schemas.VerifyResponse(
            property="n-splitting",
            n=request.n,
            holds=violation is None,
            counterexample=violation.as_lists() if violation is not None else None,
        )

    return _guarded("verify/nsplit", work)


# === Counts ===

@router.get("/count/sep-census", response_model=schemas.SepCensusResponse, tags=["Count"])
def sep_census(m: int = Query(..., ge=1), k: int = Query(..., ge=0)):
    """
    Number of inequivalent separating families of m sets over [k].
    Example: /api/count/sep-census?m=2&k=2
    """
    return _guarded("count/sep-census", lambda: schemas.SepCensusResponse(m=m, k=k, count=count_sep(m, k)))


@router.get("/count/splitters", response_model=schemas.SplitterCountResponse, tags=["Count"])
def splitter_count(
    s: int = Query(..., ge=0),
    t: int = Query(..., ge=0),
    b: int = Query(..., ge=0),
    k: int = Query(..., ge=1),
):
    def work():
        report = count_simultaneous_splitters(s, t, b, k)
        return schemas.SplitterCountResponse(
            s=s, t=t, b=b, k=k, count=report.count, formula=splitter_count_formula(s, t, b, k)
        )

    return _guarded("count/splitters", work)


# === Exact search ===

@router.post("/search/min", response_model=schemas.SearchResponse, tags=["Search"])
def search_min(request: schemas.SearchRequest):
    """
    Exact minimum family size for a property, with a certificate family.
    """
    def work():
        result = exact_min_family_size(request.property, request.k, request.n)
        return schemas.SearchResponse(
            objective=result.objective,
            value=result.value,
            certificate=_payload(result.certificate),
            exhausted=result.exhausted,
            lower_bound=result.lower_bound,
            greedy=result.greedy,
            stats=result.stats,
        )

    return _guarded("search/min", work)
