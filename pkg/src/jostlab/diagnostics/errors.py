"""
Error hierarchy for jostlab.

Configuration problems and numerical diagnostics are kept apart so the CLI can
map them to distinct exit codes.
"""

from typing import Any, Dict


class JostlabError(Exception):
    """Base class for all jostlab errors."""

    pass


class ScenarioError(JostlabError):
    """Raised when a scenario file fails to parse or validate."""

    def __init__(self, message: str, fields: list[str] | None = None):
        super().__init__(message)
        self.fields = fields or []


class NumericalDiagnostic(JostlabError):
    """A numerical condition that prevents a computation from being trusted."""

    code = "numerical_diagnostic"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.code,
            "message": str(self),
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


class MarginalRootError(NumericalDiagnostic):
    code = "marginal_root"


class DependenceError(NumericalDiagnostic):
    code = "dependence"


class GridMismatchError(NumericalDiagnostic):
    code = "grid_mismatch"


class NonConstantPieceError(NumericalDiagnostic):
    code = "non_constant_piece"


class CriteriaDisagreementError(NumericalDiagnostic):
    code = "criteria_disagreement"


class SingularMatchingError(NumericalDiagnostic):
    code = "singular_matching"


class RankOneDenominatorError(NumericalDiagnostic):
    code = "rank_one_denominator"


class NotAVirtualLevelError(NumericalDiagnostic):
    code = "not_a_virtual_level"


class IllConditionedError(NumericalDiagnostic):
    code = "ill_conditioned"


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value
