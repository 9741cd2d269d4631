"""
pydantic models for every JSON document the command line reads or writes.

Rationals travel as "p/q" strings (or "p" for integers); plain JSON integers
are accepted on input. Floats are rejected.
"""

from fractions import Fraction
from typing import Annotated, Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, field_validator

from src.services.game_model import ProbabilityVector, WeightedGame, make_game, make_probability_vector
from src.services.inverse_service import InverseResult
from src.services.reduction_service import CaratheodoryCertificate, RPartitionInstance, ReductionTrace
from src.services.selftest_service import SelftestReport
from src.utils.error_utils import DimensionMismatch
from src.utils.rational_utils import format_rational, parse_rational

RationalField = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
]


class WireModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra='forbid')


class GameModel(WireModel):
    weights: List[RationalField]
    theta: RationalField = Fraction(0)

    def to_game(self) -> WeightedGame:
        return make_game(self.weights, self.theta)

    @classmethod
    def from_game(cls, game: WeightedGame) -> "GameModel":
        return cls(weights=list(game.weights), theta=game.theta)


class ProbabilityVectorModel(WireModel):
    entries: List[RationalField]
    n: Optional[int] = None

    @field_validator('entries')
    @classmethod
    def _not_empty(cls, v):
        if not v:
            raise ValueError("entries must not be empty")
        return v

    def to_pvec(self) -> ProbabilityVector:
        pvec = make_probability_vector(self.entries)
        if self.n is not None and self.n != pvec.n:
            raise DimensionMismatch(f"n = {self.n} does not match {pvec.n} entries", {"n": self.n})
        return pvec


class VectorModel(WireModel):
    vector: List[RationalField]


class TargetsModel(WireModel):
    values: List[RationalField]


class SemivalueVectorModel(WireModel):
    values: List[RationalField]


class ChowModel(WireModel):
    constant: RationalField
    degree_one: List[RationalField]


class KhintchineModel(WireModel):
    value: RationalField
    method: str


class PartitionProbabilityModel(WireModel):
    probability: RationalField


class VerifyResultModel(WireModel):
    result: bool


class RPartitionModel(WireModel):
    c: List[int]
    k: int

    def to_instance(self) -> RPartitionInstance:
        return RPartitionInstance(c=tuple(self.c), k=self.k)


class CertificateModel(WireModel):
    point: List[RationalField]
    vertices: List[List[RationalField]]
    witnesses: List[GameModel]
    lambdas: List[RationalField]

    def to_certificate(self) -> CaratheodoryCertificate:
        return CaratheodoryCertificate(
            point=tuple(self.point),
            vertices=tuple(tuple(v) for v in self.vertices),
            witnesses=tuple(w.to_game() for w in self.witnesses),
            lambdas=tuple(self.lambdas),
        )

    @classmethod
    def from_certificate(cls, cert: CaratheodoryCertificate) -> "CertificateModel":
        return cls(
            point=list(cert.point),
            vertices=[list(v) for v in cert.vertices],
            witnesses=[GameModel.from_game(w) for w in cert.witnesses],
            lambdas=list(cert.lambdas),
        )


class MembershipRequestModel(WireModel):
    """Input of membership-cert: a point and the special-form witness games"""

    point: List[RationalField]
    witnesses: List[GameModel]


class PtonRequestModel(GameModel):
    """Input of reduce pton: a special-form game with its target vector"""

    targets: List[RationalField]


class InverseResultModel(WireModel):
    status: str
    weights: Optional[List[RationalField]] = None
    theta: RationalField
    distance: Optional[RationalField] = None
    games_examined: int
    iterations: Optional[int] = None

    @classmethod
    def from_result(cls, result: InverseResult) -> "InverseResultModel":
        return cls(
            status=result.status,
            weights=None if result.weights is None else list(result.weights),
            theta=result.theta,
            distance=result.distance,
            games_examined=result.games_examined,
            iterations=result.iterations,
        )


class ReductionTraceModel(WireModel):
    step: str
    input: Dict[str, Any]
    output: Dict[str, Any]
    recovered: Optional[str] = None
    checks: Dict[str, bool] = Field(default_factory=dict)
    timing_ms: Optional[float] = None

    @classmethod
    def from_trace(cls, trace: ReductionTrace, include_timing: bool = False) -> "ReductionTraceModel":
        return cls(
            step=trace.step,
            input=trace.input,
            output=trace.output,
            recovered=trace.recovered,
            checks=trace.checks,
            timing_ms=trace.timing_ms if include_timing else None,
        )


class InvariantResultModel(WireModel):
    name: str
    passed: bool
    cases: int
    detail: Optional[str] = None
    elapsed_ms: Optional[float] = None


class SelftestReportModel(WireModel):
    passed: bool
    results: List[InvariantResultModel]

    @classmethod
    def from_report(cls, report: SelftestReport, include_timing: bool = False) -> "SelftestReportModel":
        return cls(
            passed=report.passed,
            results=[
                InvariantResultModel(
                    name=r.name,
                    passed=r.passed,
                    cases=r.cases,
                    detail=r.detail,
                    elapsed_ms=r.elapsed_ms if include_timing else None,
                )
                for r in report.results
            ],
        )


class ErrorModel(WireModel):
    error: str
    message: str
    details: Dict[str, Any] = Field(default_factory=dict)
