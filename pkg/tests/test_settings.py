import pytest
from pydantic import ValidationError

from spectral_metric.settings import TOL, SolverOptions, Tolerances, ToolkitConfig, VerifyOptions


def test_tolerances_are_frozen():
    with pytest.raises(ValidationError):
        TOL.isometry = 1e-3


def test_tolerance_defaults():
    assert Tolerances() == TOL
    assert TOL.kernel_cut == 1e-9
    assert "coincident_states=1e-12" in str(TOL)


class TestSolverOptions:
    def test_defaults(self):
        opts = SolverOptions()
        assert opts.tol == 1e-6
        assert opts.max_bisection == 60
        assert not opts.force_bisection

    @pytest.mark.parametrize(
        "field, value",
        [("tol", 0.0), ("tol", -1e-6), ("restarts", 0), ("seed", -1), ("max_bisection", 0)],
    )
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            SolverOptions(**{field: value})

    def test_str_representation(self):
        text = str(SolverOptions(tol=1e-8, seed=4))
        assert "tol=1e-08" in text
        assert "seed=4" in text


class TestToolkitConfig:
    def test_from_toml(self, data_dir):
        config = ToolkitConfig.from_toml(data_dir / "config.toml")
        assert config.solver.tol == 1e-7
        assert config.solver.restarts == 4
        assert config.solver.inner_iters == SolverOptions().inner_iters
        assert config.verify == VerifyOptions(trials=5, seed=1)

    def test_unknown_values_are_validated(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[solver]\ntol = -1.0\n")
        with pytest.raises(ValidationError):
            ToolkitConfig.from_toml(path)

    def test_merged_ignores_missing_overrides(self, data_dir):
        config = ToolkitConfig.from_toml(data_dir / "config.toml")
        merged = config.merged(tol=None, seed=9, force_bisection=None)
        assert merged.tol == 1e-7
        assert merged.seed == 9
        assert not merged.force_bisection

    def test_merged_validates(self):
        with pytest.raises(ValidationError):
            ToolkitConfig().merged(restarts=0)
