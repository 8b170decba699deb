# app/schemas.py

from pydantic import BaseModel, Field
from typing import Optional, Any, List, Dict

from .services.search import PropertyKind


# Families travel as {"k": ..., "sets": [[...], ...]}, elements 1-based
class FamilyPayload(BaseModel):
    k: int = Field(..., ge=1)
    sets: List[List[int]] = []


class ConstructRequest(BaseModel):
    k: Optional[int] = Field(None, ge=1)
    family: Optional[FamilyPayload] = None


class ConstructResponse(BaseModel):
    construction: str
    family: FamilyPayload
    matrix: List[str] = []
    size: int


class VerifyRequest(BaseModel):
    family: FamilyPayload
    n: int = Field(1, ge=1)


class VerifyResponse(BaseModel):
    property: str
    holds: bool
    n: Optional[int] = None
    # A violating pair, set or collection, as element lists
    counterexample: Optional[List[List[int]]] = None


class SepCensusResponse(BaseModel):
    m: int
    k: int
    count: int


class SplitterCountResponse(BaseModel):
    s: int
    t: int
    b: int
    k: int
    count: int
    formula: int


class SearchRequest(BaseModel):
    property: PropertyKind
    k: int = Field(..., ge=1)
    n: int = Field(1, ge=1)


class SearchResponse(BaseModel):
    objective: str
    value: int
    certificate: FamilyPayload
    exhausted: bool
    lower_bound: int
    greedy: int
    stats: Dict[str, Any] = {}
