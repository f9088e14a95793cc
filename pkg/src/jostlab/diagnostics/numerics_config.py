"""
Tolerances and limits shared by the solvers and audits.
"""

from dataclasses import dataclass, field
from typing import List


@dataclass
class NumericsConfig:
    """Numerical tolerances for integration, kernel assembly and audits."""

    # ODE integration
    ODE_METHOD: str = "DOP853"
    ODE_RTOL: float = 1e-11
    ODE_ATOL: float = 1e-13
    AMPLIFICATION_LIMIT: float = 1e12

    # Free kernels
    TAYLOR_SWITCH: float = 1e-3
    SERIES_TERMS: int = 12
    MARGINAL_ROOT_TOL: float = 1e-12

    # Kernel assembly
    DEPENDENCE_THRESHOLD: float = 1e-10
    SPREAD_TOLERANCE: float = 1e-8
    SPLINE_DEGREE: int = 5

    # Threshold classification
    C_TOLERANCE: float = 1e-8
    ORDER_TOLERANCE: float = 0.3

    # Operator norms
    POWER_ITERATION_TOL: float = 1e-6
    POWER_ITERATION_MAX_ITER: int = 500
    SVD_CROSSCHECK_LIMIT: int = 2000

    # Audits
    DEFAULT_MU: float = 1.0
    CONSTANT_SLACK: float = 1.1
    KAPPA_0: float = 0.3

    @classmethod
    def create_strict_config(cls) -> "NumericsConfig":
        """Tighter integration for eigenvalue and dependence checks."""
        return cls(
            ODE_RTOL=1e-13,
            ODE_ATOL=1e-15,
            POWER_ITERATION_TOL=1e-9,
        )

    @classmethod
    def create_fast_config(cls) -> "NumericsConfig":
        """Looser settings for corpus sweeps."""
        return cls(
            ODE_RTOL=1e-9,
            ODE_ATOL=1e-11,
            POWER_ITERATION_TOL=1e-5,
            POWER_ITERATION_MAX_ITER=200,
        )


@dataclass
class AuditTally:
    """Tracks pass/fail counts across a batch of audits."""

    passed: int = 0
    failed: int = 0
    diagnostics: int = 0
    failed_checks: List[str] = field(default_factory=list)

    def record(self, name: str, passed: bool) -> None:
        if passed:
            self.passed += 1
        else:
            self.failed += 1
            self.failed_checks.append(name)

    def record_diagnostic(self, name: str) -> None:
        self.diagnostics += 1
        self.failed_checks.append(name)

    @property
    def all_passed(self) -> bool:
        return self.failed == 0

    def get_summary(self) -> str:
        return (
            f"Passed: {self.passed}, "
            f"Failed: {self.failed}, "
            f"Diagnostics: {self.diagnostics}"
        )
