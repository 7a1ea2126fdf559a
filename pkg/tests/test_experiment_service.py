import numpy as np
import pandas as pd
import pytest

from models.estimate import EstimationMethod
from models.experiment import DEFAULT_H_LIST, CellStatus, ExperimentConfig, ExperimentKind
from modules.errors import ExperimentError
from services.experiment_service import SINGLE_SEED_FLAG, ExperimentService, cell_seed


@pytest.fixture
def service():
    return ExperimentService(ratio=1.1, n_lo=5, tail_divisor=30)


def test_cell_seed_is_reproducible_and_distinct():
    assert cell_seed(1, 0, 0, 0) == cell_seed(1, 0, 0, 0)
    seeds = {cell_seed(1, h, n, r) for h in range(3) for n in range(3) for r in range(3)}
    assert len(seeds) == 27
    assert cell_seed(1, 0, 0, 0) != cell_seed(2, 0, 0, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="accuracy", n_list=[1000])
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="accuracy", h_list=[0.4])
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="accuracy", seeds_per_cell=0)
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="step-robustness", step_delays=[0.0, 0.5])


class TestAccuracy:

    def test_cells_in_config_product_order(self, service):
        config = ExperimentConfig(experiment="accuracy", h_list=[0.6, 0.8], n_list=[1024, 2048], seeds_per_cell=3,
                                  methods=["mavar", "haar-ld"], workers=2)
        report = service.run(config)

        assert len(report.cells) == 2 * 2 * 2
        keys = [(c.h_true, c.n, c.method) for c in report.cells]
        assert keys == [(h, n, m) for h in (0.6, 0.8) for n in (1024, 2048)
                        for m in (EstimationMethod.MAVAR, EstimationMethod.HAAR_LD)]
        for cell in report.cells:
            assert cell.status == CellStatus.OK
            assert len(cell.estimates) == 3
            np.testing.assert_allclose(cell.deltas, np.array(cell.estimates) - cell.h_true)
            assert cell.mean == pytest.approx(np.mean(cell.deltas))
            assert cell.std == pytest.approx(np.std(cell.deltas, ddof=1))

    def test_bit_identical_rerun_with_any_worker_count(self, service):
        base = dict(experiment="accuracy", h_list=[0.7, 0.9], n_list=[1024], seeds_per_cell=4,
                    methods=["mavar", "periodogram"])
        serial = service.run(ExperimentConfig(workers=1, **base)).to_frame()
        parallel = service.run(ExperimentConfig(workers=4, **base)).to_frame()
        pd.testing.assert_frame_equal(serial, parallel)

    def test_single_seed_flag(self, service):
        report = service.run(ExperimentConfig(experiment="accuracy", h_list=[0.75], n_list=[1024], seeds_per_cell=1))
        cell = report.cells[0]
        assert cell.std == 0.0
        assert SINGLE_SEED_FLAG in cell.flags

    def test_failing_cell_is_recorded(self, service):
        report = service.run(ExperimentConfig(experiment="accuracy", h_list=[0.75], n_list=[16, 1024],
                                              seeds_per_cell=2))
        assert len(report.cells) == 2
        assert report.cells[0].status == CellStatus.FAILED
        assert "too short" in report.cells[0].message
        assert report.cells[0].mean is None
        assert np.isnan(report.to_frame()["mean_err"].iloc[0])
        assert report.cells[1].status == CellStatus.OK
        assert len(report.failed_cells) == 1
        assert report.failed_cells[0] is report.cells[0]

    def test_summary_columns_and_metadata(self, service):
        report = service.run(ExperimentConfig(experiment="accuracy", h_list=[0.75], n_list=[1024], seeds_per_cell=2))
        frame = report.to_frame()

        assert list(frame.columns)[:5] == ["method", "H_true", "N", "mean_err", "std_err"]
        assert len(report.to_seed_frame()) == 2
        assert report.metadata["config"]["seeds_per_cell"] == 2
        assert "numpy" in report.metadata["versions"]
        assert "N/30" in report.metadata["tail_policy"]
        assert report.metadata["wall_time_s"] >= 0.0

    def test_amplitude_mode_reaches_generator(self, service):
        base = dict(experiment="accuracy", h_list=[0.75], n_list=[1024], seeds_per_cell=2)
        fixed = service.run(ExperimentConfig(**base))
        random = service.run(ExperimentConfig(mode="rayleigh", **base))

        assert fixed.metadata["config"]["mode"] == "deterministic-sqrt-psd"
        assert random.metadata["config"]["mode"] == "rayleigh"
        assert fixed.cells[0].estimates != random.cells[0].estimates

    @pytest.mark.slow
    def test_mavar_accuracy_at_desk_scale(self, service):
        config = ExperimentConfig(experiment="accuracy", h_list=DEFAULT_H_LIST, n_list=[131072], seeds_per_cell=10,
                                  workers=4)
        report = service.run(config)

        assert len(report.cells) == 11
        for cell in report.cells:
            assert cell.status == CellStatus.OK
            assert abs(cell.mean) <= 0.02, f"H={cell.h_true}"
            assert cell.std <= 0.02, f"H={cell.h_true}"

    @pytest.mark.slow
    def test_short_series_bias_against_logscale_diagram(self, service):
        config = ExperimentConfig(experiment="accuracy", h_list=DEFAULT_H_LIST, n_list=[1024, 2048],
                                  seeds_per_cell=10, methods=["mavar", "haar-ld"], workers=4)
        report = service.run(config)

        assert len(report.cells) == 11 * 2 * 2
        assert all(cell.status == CellStatus.OK for cell in report.cells)
        mavar = [c for c in report.cells if c.method == EstimationMethod.MAVAR]
        for cell in mavar:
            assert abs(cell.mean) <= 0.06, f"H={cell.h_true} N={cell.n}"
        haar = {(c.h_true, c.n): c for c in report.cells if c.method == EstimationMethod.HAAR_LD}
        for cell in mavar:
            assert cell.std <= haar[(cell.h_true, cell.n)].std, f"H={cell.h_true} N={cell.n}"
        frame = report.to_frame()
        assert set(frame["method"]) == {"mavar", "haar-ld"}
        assert frame["std_err"].notna().all()


class TestConvergence:

    def test_prefix_truncation(self, service):
        config = ExperimentConfig(experiment="convergence", h_list=[0.75], n_list=[1024, 2048, 4096],
                                  seeds_per_cell=2, generated_n=4096)
        report = service.run(config)

        assert [c.n for c in report.cells] == [1024, 2048, 4096]
        assert all(c.h_true == 0.75 for c in report.cells)
        assert all(c.status == CellStatus.OK for c in report.cells)
        assert report.metadata["source_length"] == 4096
        assert report.metadata["length_mapping"]["requested_range"] == [1000, 50000]

    def test_truncation_beyond_generated_length(self, service):
        config = ExperimentConfig(experiment="convergence", h_list=[0.75], n_list=[1024, 4096],
                                  seeds_per_cell=2, generated_n=2048)
        report = service.run(config)

        assert report.cells[0].status == CellStatus.OK
        assert report.cells[1].status == CellStatus.FAILED
        assert "exceeds generated" in report.cells[1].message
        assert report.cells[1].mean is None
        assert report.cells[1].std is None

    def test_longest_prefix_equals_full_estimate(self, service):
        # the longest truncation is the generated series itself
        config = ExperimentConfig(experiment="convergence", h_list=[0.75], n_list=[2048], seeds_per_cell=1)
        from_convergence = service.run(config).cells[0].estimates[0]
        accuracy = ExperimentConfig(experiment="accuracy", h_list=[0.75], n_list=[2048], seeds_per_cell=1)
        assert service.run(accuracy).cells[0].estimates[0] == from_convergence


class TestStepRobustness:

    def test_sweep_shape_and_zero_amplitude(self, service):
        config = ExperimentConfig(experiment="step-robustness", h_list=[0.8], n_list=[1024], seeds_per_cell=2,
                                  step_amplitudes=[0.0, 1.0], step_delays=[0.25, 0.5])
        report = service.run(config)

        assert len(report.cells) == 4
        assert [(c.amplitude, c.delay_frac, c.delay) for c in report.cells] == [
            (0.0, 0.25, 256), (0.0, 0.5, 512), (1.0, 0.25, 256), (1.0, 0.5, 512)]
        for cell in report.cells[:2]:
            assert cell.deltas == [0.0, 0.0]
            assert cell.mean == 0.0
        assert len(report.curves) == 4
        assert {"A", "M_frac", "M", "mean_shift", "std_shift"} <= set(report.to_frame().columns)

    def test_records_every_method(self, service):
        config = ExperimentConfig(experiment="step-robustness", h_list=[0.8], n_list=[1024], seeds_per_cell=2,
                                  step_amplitudes=[2.0], step_delays=[0.5], methods=["mavar", "haar-ld"])
        report = service.run(config)
        assert [c.method for c in report.cells] == [EstimationMethod.MAVAR, EstimationMethod.HAAR_LD]
        assert all(c.status == CellStatus.OK for c in report.cells)

    @pytest.mark.slow
    def test_small_shift_at_long_length(self, service):
        config = ExperimentConfig(experiment="step-robustness", h_list=[0.8], n_list=[131072], seeds_per_cell=10,
                                  step_amplitudes=[0.5, 1.0, 2.0], step_delays=[0.05, 0.25, 0.5, 0.75, 0.95],
                                  workers=4)
        report = service.run(config)

        assert len(report.cells) == 15
        for cell in report.cells:
            assert cell.status == CellStatus.OK
            assert abs(cell.mean) < 0.05, f"A={cell.amplitude} M={cell.delay_frac}"

    @pytest.mark.slow
    def test_shift_peaks_mid_series_at_short_length(self, service):
        delays = [0.05, 0.25, 0.5, 0.75, 0.95]
        config = ExperimentConfig(experiment="step-robustness", h_list=[0.8], n_list=[1024], seeds_per_cell=20,
                                  step_amplitudes=[2.0], step_delays=delays, workers=4)
        report = service.run(config)

        shifts = [abs(c.mean) for c in report.cells]
        assert delays[int(np.argmax(shifts))] in (0.25, 0.5, 0.75)


def test_trace_is_not_an_ensemble_experiment(service):
    with pytest.raises(ExperimentError):
        service.run(ExperimentConfig(experiment=ExperimentKind.TRACE))
