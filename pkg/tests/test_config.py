import pytest
from pydantic import ValidationError

from tensorlab.config import ENVIRONMENT_CONFIGS, get_environment_config, get_settings
from tensorlab.errors import ContractViolationError, InvalidArgumentError, LabError
from tensorlab.models import (
    ErrorCode,
    ExperimentConfig,
    ExperimentReport,
    SolverParams,
    Subcommand,
    TrialRecord,
    WalkKind,
)
from tensorlab.utils import PerformanceMonitor, as_rng, stream_rng, timing_decorator


class TestSettings:

    def test_defaults(self):
        settings = get_settings()
        assert settings.APP_NAME == "tensorlab"
        assert settings.SOLVER_TOL == 1e-9
        assert settings.SOLVER_MAX_ITER == 2000
        assert settings.DEGREE_CUTOFF == 40
        assert settings.OUTPUT_DIR is None

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("TENSORLAB_SOLVER_TOL", "1e-11")
        monkeypatch.setenv("TENSORLAB_JOBS", "4")
        get_settings.cache_clear()
        settings = get_settings()
        assert settings.SOLVER_TOL == 1e-11
        assert settings.JOBS == 4

    def test_invalid_override(self, monkeypatch):
        monkeypatch.setenv("TENSORLAB_SOLVER_TOL", "-1")
        get_settings.cache_clear()
        with pytest.raises(ValidationError):
            get_settings()

    def test_cached(self):
        assert get_settings() is get_settings()

    def test_environment_configs(self):
        assert get_environment_config("production") == ENVIRONMENT_CONFIGS["production"]
        assert get_environment_config("production")["LOG_JSON"] is True
        assert get_environment_config("staging") == ENVIRONMENT_CONFIGS["development"]


class TestSolverParams:

    def test_from_settings(self):
        params = SolverParams.from_settings(seed=5)
        assert params.tol == 1e-9
        assert params.restarts == 3
        assert params.seed == 5

    def test_overrides_win(self, monkeypatch):
        monkeypatch.setenv("TENSORLAB_SOLVER_MAX_ITER", "17")
        get_settings.cache_clear()
        params = SolverParams.from_settings(tol=1e-6)
        assert params.max_iter == 17
        assert params.tol == 1e-6

    def test_frozen(self):
        params = SolverParams.from_settings()
        with pytest.raises(ValidationError):
            params.tol = 1.0

    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            SolverParams(tol=0.0, max_iter=10, restarts=0)


class TestExperimentConfig:

    def test_defaults(self):
        config = ExperimentConfig(subcommand="walks")
        assert config.subcommand is Subcommand.WALKS
        assert config.kind is WalkKind.IDENTITY
        assert config.jobs == 1

    @pytest.mark.parametrize("field,value", [
        ("n", 0), ("dim", 0), ("trials", 0), ("jobs", 0), ("tol", 0.0), ("seed", -1), ("seed", 2 ** 64),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            ExperimentConfig(subcommand="norm", **{field: value})

    def test_tree_walks_need_degree(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(subcommand="walks", kind="tree")
        assert ExperimentConfig(subcommand="walks", kind="tree", degree=3).degree == 3

    def test_unknown_subcommand(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(subcommand="frobnicate")


class TestTrialRecord:

    def test_count_is_stringified(self):
        assert TrialRecord(trial=0, seed_index=0, count=2 ** 70).count == str(2 ** 70)

    def test_bool_count_rejected(self):
        with pytest.raises(ValidationError):
            TrialRecord(trial=0, seed_index=0, count=True)

    def test_report_ok(self):
        config = ExperimentConfig(subcommand="norm")
        assert ExperimentReport(config=config).ok
        bad = ExperimentReport(config=config, summary={"violations": [2]})
        assert not bad.ok


class TestErrors:

    def test_codes(self):
        err = InvalidArgumentError("bad shape", {"shape": [2, 3]})
        assert isinstance(err, ValueError)
        assert err.to_dict() == {
            "error_code": ErrorCode.INVALID_ARGUMENT.value,
            "message": "bad shape",
            "details": {"shape": [2, 3]},
        }
        assert ContractViolationError("x").code is ErrorCode.CONTRACT_VIOLATION
        assert LabError("x").details == {}


class TestSeedStreams:

    def test_streams_are_reproducible(self):
        a = stream_rng(42, 3).standard_normal(4)
        b = stream_rng(42, 3).standard_normal(4)
        assert (a == b).all()

    def test_streams_differ(self):
        assert stream_rng(42, 0).integers(2 ** 63) != stream_rng(42, 1).integers(2 ** 63)

    def test_as_rng(self):
        g = stream_rng(1, 0)
        assert as_rng(g) is g
        assert as_rng(1).integers(2 ** 63) == stream_rng(1, 0).integers(2 ** 63)


class TestTiming:

    def test_monitor_records_duration(self):
        with PerformanceMonitor("op") as monitor:
            sum(range(1000))
        assert monitor.end_time >= monitor.start_time
        assert monitor.elapsed_ms == (monitor.end_time - monitor.start_time) * 1000.0

    def test_monitor_reraises(self):
        with pytest.raises(ValueError):
            with PerformanceMonitor("op") as monitor:
                raise ValueError("boom")
        assert monitor.end_time is not None

    def test_decorator_preserves_result(self):
        @timing_decorator
        def double(x):
            return 2 * x

        assert double(4) == 8
        assert double.__name__ == "double"
