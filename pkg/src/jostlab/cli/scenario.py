"""
Scenario files: one JSON document per run, validated with pydantic.

A scenario names the command, the operator order, the potential, the grid, the
ζ plan, the weights and any tolerance overrides. Together with the seed it
determines every output of the run.
"""

import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from jostlab.analysis.bifurcation import BifurcationMember, build_bifurcation_potential
from jostlab.analysis.lap import DEFAULT_LAP_RADII
from jostlab.analysis.threshold import build_two_sided_potential
from jostlab.core.grid import Grid
from jostlab.core.potential import Potential, random_potential
from jostlab.core.spectral import SpectralParam
from jostlab.core.weights import WeightSpec
from jostlab.diagnostics.errors import ScenarioError
from jostlab.diagnostics.numerics_config import NumericsConfig

Command = Literal["jost", "resolvent", "threshold", "lapnorm", "bifurcate", "audit"]
COMMANDS: tuple[str, ...] = (
    "jost",
    "resolvent",
    "threshold",
    "lapnorm",
    "bifurcate",
    "audit",
)

_BIFURCATION = re.compile(r"^\s*bifurcation\(\s*([^)]+?)\s*\)\s*$")


class GridSpec(BaseModel):
    """Grid on [−X, X] with target step h."""

    model_config = ConfigDict(extra="forbid")

    X: float = Field(..., gt=0, description="Half-width of the domain")
    h: float = Field(..., gt=0, description="Target step between nodes")
    order: Literal[1, 3] = Field(3, description="1 = trapezoid, 3 = Simpson weights")

    def build(self, V: Potential) -> Grid:
        if self.X <= V.L:
            raise ScenarioError(
                f"grid.X={self.X} must exceed the support radius L={V.L}", ["grid.X"]
            )
        return Grid.for_potential(V, X=self.X, h=self.h, order=self.order)


class ZetaPlan(BaseModel):
    """Spectral parameters ζ = εe^{iφ} for ε in radii."""

    model_config = ConfigDict(extra="forbid")

    angle: float | None = Field(
        None, description="Ray angle φ in radians; defaults to the sector bisector"
    )
    radii: list[float] = Field(
        default_factory=lambda: list(DEFAULT_LAP_RADII), min_length=1
    )

    @model_validator(mode="after")
    def _check_radii(self) -> "ZetaPlan":
        if any(not (r > 0 and math.isfinite(r)) for r in self.radii):
            raise ValueError("radii must be positive and finite")
        return self

    def params(self, N: int) -> list[SpectralParam]:
        return [SpectralParam.on_ray(N, r, self.angle) for r in self.radii]


class WeightModel(BaseModel):
    """Weights ⟨x⟩^{−s}, ⟨x⟩^{−s′} and the optional e^{−ν|x|}."""

    model_config = ConfigDict(extra="forbid")

    s: float = 2.0
    s_prime: float = 2.0
    nu: float = Field(0.0, ge=0.0)

    def to_spec(self) -> WeightSpec:
        return WeightSpec(s=self.s, s_prime=self.s_prime, nu=self.nu)


class ToleranceOverrides(BaseModel):
    """Starting profile plus individual NumericsConfig fields."""

    model_config = ConfigDict(extra="forbid")

    profile: Literal["default", "strict", "fast"] = "default"
    ode_rtol: float | None = Field(None, gt=0)
    ode_atol: float | None = Field(None, gt=0)
    dependence_threshold: float | None = Field(None, gt=0)
    c_tolerance: float | None = Field(None, gt=0)
    power_iteration_tol: float | None = Field(None, gt=0)
    constant_slack: float | None = Field(None, ge=1.0)

    def apply(self, fallback: str = "default") -> NumericsConfig:
        """NumericsConfig for this run; "default" defers to the command fallback."""
        profile = fallback if self.profile == "default" else self.profile
        if profile == "strict":
            config = NumericsConfig.create_strict_config()
        elif profile == "fast":
            config = NumericsConfig.create_fast_config()
        else:
            config = NumericsConfig()
        overrides = {
            name.upper(): value
            for name, value in self.model_dump(exclude={"profile"}).items()
            if value is not None
        }
        return replace(config, **overrides)


@dataclass(frozen=True, eq=False)
class ResolvedPotential:
    """A concrete potential, with its bifurcation member when it has one."""

    name: str
    potential: Potential
    member: BifurcationMember | None = None


class PotentialSpec(BaseModel):
    """
    Accepts "free", "two_sided", "random", "bifurcation(κ)", a serialized
    potential {"L": ..., "pieces": [...]} or an explicit {"kind": ...} object.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["free", "pieces", "bifurcation", "two_sided", "random"]
    data: dict[str, Any] | None = None
    kappa: float | None = Field(None, ge=0)
    amplitude: float = 0.5
    width: float = Field(1.0, gt=0)
    n_pieces: int = Field(3, ge=1)
    degree: int = Field(2, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _from_shorthand(cls, value: Any) -> Any:
        if isinstance(value, str):
            text = value.strip()
            match = _BIFURCATION.match(text)
            if match:
                try:
                    return {"kind": "bifurcation", "kappa": float(match.group(1))}
                except ValueError:
                    raise ValueError(f"cannot read kappa from {value!r}")
            if text in ("free", "two_sided", "random"):
                return {"kind": text}
            raise ValueError(f"unknown potential shorthand {value!r}")
        if isinstance(value, dict) and "kind" not in value and "L" in value:
            return {"kind": "pieces", "data": value}
        return value

    @model_validator(mode="after")
    def _check_kind(self) -> "PotentialSpec":
        if self.kind == "pieces" and self.data is None:
            raise ValueError("a 'pieces' potential needs its serialized data")
        if self.kind == "bifurcation" and self.kappa is None:
            raise ValueError("a bifurcation potential needs kappa")
        return self

    def resolve(
        self, config: NumericsConfig, seed: int = 0, name: str | None = None
    ) -> ResolvedPotential:
        if self.kind == "free":
            return ResolvedPotential(name or "free", Potential.zero())
        if self.kind == "two_sided":
            try:
                V = build_two_sided_potential(self.amplitude, self.width)
            except ValueError as exc:
                raise ScenarioError(str(exc), ["potential.amplitude"])
            return ResolvedPotential(name or "two_sided", V)
        if self.kind == "random":
            rng = np.random.default_rng(seed)
            V = random_potential(rng, n_pieces=self.n_pieces, degree=self.degree)
            return ResolvedPotential(name or f"random_{seed}", V)
        if self.kind == "bifurcation":
            assert self.kappa is not None
            try:
                member = build_bifurcation_potential(self.kappa, config)
            except ValueError as exc:
                raise ScenarioError(str(exc), ["potential.kappa"])
            label = name or f"bifurcation_{self.kappa:g}"
            return ResolvedPotential(label, member.potential, member)
        assert self.data is not None
        try:
            V = Potential.from_dict(self.data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid potential: {exc}", ["potential"])
        return ResolvedPotential(name or V.label or "potential", V)


class OutputSpec(BaseModel):
    """Where artifacts go and how densely kernels are dumped."""

    model_config = ConfigDict(extra="forbid")

    directory: str | None = None
    kernel_stride: int = Field(4, ge=1, description="Keep every n-th node in dumps")


class Scenario(BaseModel):
    """One reproducible run."""

    model_config = ConfigDict(extra="forbid")

    command: Command | None = None
    N: int = Field(3, ge=2, le=3)
    potential: PotentialSpec = Field(
        default_factory=lambda: PotentialSpec(kind="free")
    )
    grid: GridSpec
    zeta_plan: ZetaPlan = Field(default_factory=ZetaPlan)
    weights: WeightModel = Field(default_factory=WeightModel)
    tolerances: ToleranceOverrides = Field(default_factory=ToleranceOverrides)
    outputs: OutputSpec = Field(default_factory=OutputSpec)
    seed: int = Field(0, ge=0, lt=2**64)
    kappas: list[float] = Field(default_factory=list)
    corpus: str | None = Field(None, description="Directory of potential JSON files")
    corpus_random: int = Field(
        0, ge=0, description="Random potentials added to the audit corpus"
    )
    audit_radius: float = Field(0.5, gt=0, description="|ζ| of the structural checks")

    def for_command(self, command: str) -> "Scenario":
        if self.command is not None and self.command != command:
            raise ScenarioError(
                f"scenario is for '{self.command}', not '{command}'", ["command"]
            )
        return self.model_copy(update={"command": command})


def _field_path(loc: tuple[int | str, ...]) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario JSON; every failure becomes a ScenarioError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            [f"line {exc.lineno}"],
        )
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", ["<root>"])
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        fields = [_field_path(err["loc"]) for err in exc.errors()]
        details = "; ".join(
            f"{_field_path(err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise ScenarioError(f"invalid scenario: {details}", fields)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}", ["--config"])
    return parse_scenario(text)
