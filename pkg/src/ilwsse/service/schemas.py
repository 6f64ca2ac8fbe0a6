"""Request and response models of the HTTP service."""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ProfileField = Union[str, dict]


class _Request(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _EnsembleSize(_Request):
    """Either ``N`` or a target ``eps`` (then ``N = round(R0 / (pi eps))``)."""

    N: Optional[int] = Field(None, ge=1, le=512)
    eps: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _one_of(self):
        if self.N is not None and self.eps is not None:
            raise ValueError("give either N or eps, not both")
        return self


def _check_range(v):
    if v is not None and not (len(v) == 2 and v[0] < v[1]):
        raise ValueError("x_range must be [a, b] with a < b")
    return v


class SimulateRequest(_Request):
    profile: ProfileField = "sech2"
    eps: float = Field(0.05, gt=0)
    delta: float = Field(1.0, gt=0)
    L: float = Field(12.0, gt=0)
    n_x: int = Field(2000, ge=16)
    dt: float = Field(1e-4, gt=0)
    t_end: float = Field(1.5, ge=0)
    snapshots: list[float] = [0.0, 0.3, 0.65, 1.5]
    log_every: int = Field(100, ge=1)


class ScatteringRequest(_EnsembleSize):
    profile: ProfileField = "sech2"
    delta: float = Field(0.5, gt=0)
    grid: int = Field(64, ge=2, le=4096)


class EnsembleRequest(_EnsembleSize):
    profile: ProfileField = "sech2"
    delta: float = Field(0.5, gt=0)
    t: list[float] = [0.0]
    x_range: Optional[list[float]] = None
    grid: int = Field(801, ge=2, le=200_000)
    precision_bits: int = Field(256, ge=128)
    method: Literal["trace", "stencil"] = "trace"

    _range = field_validator("x_range")(_check_range)


class EquilibriumRequest(_Request):
    profile: ProfileField = "sech2"
    delta: float = Field(0.5, gt=0)
    x: list[float] = [0.0]
    t: float = Field(0.0, ge=0)
    grid: int = Field(24, ge=2, le=2048)
    nodes: int = Field(48, ge=8, le=512)
    tolerance: Optional[float] = Field(None, gt=0)


class VerifyRequest(_Request):
    criteria: Optional[list[int]] = None

    @field_validator("criteria")
    @classmethod
    def _known(cls, v):
        if v is not None and any(not 1 <= n <= 12 for n in v):
            raise ValueError("criteria are numbered 1..12")
        return v


class MtpRequest(_Request):
    nu: list[str] = ["-inf"]
    eps: float = Field(0.05, gt=0)
    h: float = Field(1.0, gt=0)
    alpha: float = Field(0.6, gt=0.5, lt=2.0 / 3.0)
    chi_range: list[float] = [-1.0, 1.0]
    grid: int = Field(21, ge=1, le=10_000)
    Y: float = Field(0.5, ge=0, le=1)
    tolerance: Optional[float] = Field(None, gt=0)


class CompareRequest(_EnsembleSize):
    profile: ProfileField = "sech2"
    delta: float = Field(0.5, gt=0)
    t: float = Field(0.3, ge=0)
    x_range: Optional[list[float]] = None
    grid: int = Field(1201, ge=2, le=200_000)
    precision_bits: int = Field(256, ge=128)
    L: float = Field(12.0, gt=0)
    n_x: int = Field(2048, ge=16)
    dt: float = Field(1e-4, gt=0)
    tolerance: Optional[float] = Field(None, gt=0)

    _range = field_validator("x_range")(_check_range)


class ErrorBody(BaseModel):
    type: str
    message: str
    exit_code: int
    details: Any = None


class ErrorResponse(BaseModel):
    error: ErrorBody


class Table(BaseModel):
    """A table of named columns; serialized by the client as CSV."""

    name: str
    columns: list[str]
    rows: list[list[Any]]


class CommandResponse(BaseModel):
    """Uniform response: a JSON report, optional tables and a pass flag."""

    command: str
    config: dict
    report: dict
    tables: list[Table] = []
    records: dict[str, str] = {}
    passed: Optional[bool] = None
