from typing import Literal

from pydantic import BaseModel, Field


class ComplexValue(BaseModel):
    """JSON form of a complex number."""

    re: float
    im: float

    @classmethod
    def of(cls, value: complex) -> "ComplexValue":
        value = complex(value)
        return cls(re=value.real, im=value.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


class ThresholdReport(BaseModel):
    """Classification of z₀ = 0 for one potential."""

    classification: Literal["regular", "virtual_level"]
    N: int = Field(..., ge=2, description="Order of the operator (−i∂ₓ)ᴺ + V")
    a: ComplexValue
    b: ComplexValue
    c: ComplexValue = Field(
        default_factory=lambda: ComplexValue(re=0.0, im=0.0),
        description="x² coefficient of γ₁(x, 0) right of the support (0 for N = 2)",
    )
    mirrored: list[ComplexValue] = Field(
        default_factory=list,
        description="Coefficients (A, B, C) of θ(x, 0) left of the support",
    )
    delta_zero_order: int = Field(..., description="Rounded zero order of Δ at ζ = 0")
    order_fit: float = Field(..., description="Least-squares slope of log|Δ| vs log ε")
    top_is_zero: bool = Field(..., description="Leading growth coefficient vanishes")
    criteria_agree: bool
    two_sided: bool = Field(
        default=False,
        description="Virtual level for the reflected problem as well (odd N)",
    )
    leading_coefficient: ComplexValue | None = None
    expected_leading_coefficient: ComplexValue | None = None
    eps_ray: list[float] = Field(default_factory=list)
    delta_abs: list[float] = Field(default_factory=list)
    residuals: dict[str, float] = Field(default_factory=dict)
    psi_csv_path: str | None = None

    @property
    def is_virtual_level(self) -> bool:
        return self.classification == "virtual_level"


class LapReport(BaseModel):
    """Weighted norms of G(ζ) along a ray ζ → 0."""

    zetas: list[ComplexValue]
    norms: list[float]
    diffs: list[float]
    verdict: Literal["LAP", "virtual_level"]
    fit_exponent: float = Field(..., description="Slope of log‖G(ζ)‖ vs log|ζ|")
    s: float
    s_prime: float
    nu: float = 0.0
    kernel_bound: dict[str, float | bool] | None = Field(
        default=None, description="Fitted threshold bound |G| ≤ C·min(⟨x⟩,⟨y⟩)^p"
    )


class BifurcationReport(BaseModel):
    """Eigenvalue check for one member of the bifurcation family."""

    kappa: float
    coefficients: list[float]
    sup_potential: float
    min_u: float
    eigen_residual: float
    joint_mismatch: float
    decays_right: bool
    bounded_left: bool
    delta_abs: float
    delta_scale: float
    dependent: bool
