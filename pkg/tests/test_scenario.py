"""
Tests for scenario parsing and validation.
"""

import json

import pytest

from jostlab.cli.scenario import (
    PotentialSpec,
    Scenario,
    ToleranceOverrides,
    parse_scenario,
)
from jostlab.core.potential import Potential
from jostlab.diagnostics.errors import ScenarioError
from jostlab.diagnostics.numerics_config import NumericsConfig


class TestParseScenario:
    """Test JSON scenario parsing."""

    def test_minimal(self):
        """Test that a grid alone is a valid scenario with defaults."""
        scenario = parse_scenario('{"grid": {"X": 3.0, "h": 0.05}}')
        assert scenario.N == 3
        assert scenario.potential.kind == "free"
        assert scenario.weights.s == 2.0
        assert scenario.audit_radius == 0.5
        assert scenario.outputs.kernel_stride == 4
        assert scenario.seed == 0

    def test_missing_grid(self):
        """Test that a missing grid names the field."""
        with pytest.raises(ScenarioError) as info:
            parse_scenario('{"N": 3}')
        assert "grid" in info.value.fields

    def test_invalid_json(self):
        """Test that malformed JSON reports its line."""
        with pytest.raises(ScenarioError, match="line 2") as info:
            parse_scenario('{"grid":\n  {"X": 3.0,,}}')
        assert info.value.fields == ["line 2"]

    def test_unknown_field(self):
        """Test that unknown keys are rejected."""
        with pytest.raises(ScenarioError) as info:
            parse_scenario('{"grid": {"X": 3.0, "h": 0.05}, "colour": "red"}')
        assert "colour" in info.value.fields

    def test_order_range(self):
        """Test that N outside 2..3 is rejected."""
        with pytest.raises(ScenarioError) as info:
            parse_scenario('{"N": 4, "grid": {"X": 3.0, "h": 0.05}}')
        assert "N" in info.value.fields

    def test_not_an_object(self):
        """Test that a JSON array is rejected."""
        with pytest.raises(ScenarioError, match="JSON object"):
            parse_scenario("[1, 2]")

    def test_command_mismatch(self):
        """Test that a scenario bound to one command refuses another."""
        scenario = parse_scenario('{"command": "jost", "grid": {"X": 3.0, "h": 0.05}}')
        assert scenario.for_command("jost").command == "jost"
        with pytest.raises(ScenarioError, match="not 'audit'"):
            scenario.for_command("audit")


class TestPotentialSpec:
    """Test potential shorthands and resolution."""

    def setup_method(self):
        """Set up a default config."""
        self.config = NumericsConfig()

    def test_bifurcation_shorthand(self):
        """Test the bifurcation(κ) shorthand."""
        spec = PotentialSpec.model_validate("bifurcation(0.1)")
        assert spec.kind == "bifurcation"
        assert spec.kappa == pytest.approx(0.1)
        resolved = spec.resolve(self.config)
        assert resolved.member is not None
        assert resolved.name == "bifurcation_0.1"

    def test_unknown_shorthand(self):
        """Test that an unknown shorthand fails validation."""
        with pytest.raises(ValueError, match="unknown potential shorthand"):
            PotentialSpec.model_validate("square_well")

    def test_serialized_pieces(self):
        """Test that a serialized potential round-trips through the spec."""
        V = Potential.steps([-1.0, 0.0, 1.0], [0.5, -0.25j])
        spec = PotentialSpec.model_validate(V.to_dict())
        assert spec.kind == "pieces"
        resolved = spec.resolve(self.config)
        assert resolved.potential.to_dict() == V.to_dict()

    def test_random_is_seeded(self):
        """Test that random potentials depend only on the seed."""
        spec = PotentialSpec(kind="random")
        first = spec.resolve(self.config, seed=7).potential.to_dict()
        second = spec.resolve(self.config, seed=7).potential.to_dict()
        assert first == second

    def test_kappa_out_of_range(self):
        """Test that κ ≥ κ₀ becomes a ScenarioError on potential.kappa."""
        spec = PotentialSpec(kind="bifurcation", kappa=self.config.KAPPA_0)
        with pytest.raises(ScenarioError) as info:
            spec.resolve(self.config)
        assert info.value.fields == ["potential.kappa"]

    def test_grid_must_cover_support(self):
        """Test that grid.X ≤ L is refused."""
        scenario = Scenario.model_validate(
            {
                "potential": {"kind": "two_sided", "width": 2.0},
                "grid": {"X": 1.5, "h": 0.1},
            }
        )
        resolved = scenario.potential.resolve(self.config)
        with pytest.raises(ScenarioError) as info:
            scenario.grid.build(resolved.potential)
        assert info.value.fields == ["grid.X"]


class TestToleranceOverrides:
    """Test tolerance profiles and overrides."""

    def test_fallback_profile(self):
        """Test that "default" defers to the command fallback."""
        strict = NumericsConfig.create_strict_config()
        assert ToleranceOverrides().apply("strict").ODE_RTOL == strict.ODE_RTOL
        assert ToleranceOverrides().apply().ODE_RTOL == NumericsConfig().ODE_RTOL

    def test_field_override(self):
        """Test that individual fields override the profile."""
        overrides = ToleranceOverrides.model_validate(
            json.loads('{"profile": "fast", "dependence_threshold": 1e-8}')
        )
        config = overrides.apply("strict")
        assert config.DEPENDENCE_THRESHOLD == 1e-8
        assert config.ODE_RTOL == NumericsConfig.create_fast_config().ODE_RTOL


if __name__ == "__main__":
    pytest.main([__file__])
