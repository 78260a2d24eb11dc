"""Campaign runner: per-cell aggregation, grid determinism, scaling exponents."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpecf.bench import (
    CSV_HEADER,
    BenchGrid,
    BenchRecord,
    ScalingSummary,
    cell_estimates,
    circular_error,
    fit_scaling_exponents,
    records_to_csv,
    run_cell,
    run_grid,
    scaling_to_json,
    trial_seed,
)
from qpecf.errors import ConfigError, DomainError, FitError
from qpecf.model import RegisterSpec
from qpecf.pmf import circuit_depth_units, crlb_mse


def synthetic_record(theta: float, n: int, k: int, rmse: float) -> BenchRecord:
    # only theta_true, n, M, k, rmse enter the scaling regressions
    return BenchRecord(
        theta_true=theta,
        n=n,
        M=2**n,
        k=k,
        trials=100,
        excluded=0,
        rmse=rmse,
        mean_abs_error=rmse,
        crlb_rmse=1.0,
        ratio=rmse,
        traditional_error=0.0,
        depth_units=2**n - 1,
        valid=True,
    )


class TestCircularError:
    def test_wraps_around_the_circle(self):
        assert abs(circular_error(0.1, 0.9) - 0.2) < 1e-12
        assert abs(circular_error(0.9, 0.1) - 0.2) < 1e-12

    def test_interior_distance(self):
        assert abs(circular_error(0.375, 1 / 3) - 1 / 24) < 1e-12
        assert circular_error(0.25, 0.25) == 0.0

    def test_rejects_out_of_range_phases(self):
        for bad in (1.0, -0.1, 1.2):
            with pytest.raises(DomainError):
                circular_error(bad, 0.3)
            with pytest.raises(DomainError):
                circular_error(0.3, bad)

    @settings(max_examples=200, deadline=None)
    @given(
        a=st.floats(0.0, 1.0, exclude_max=True, allow_nan=False),
        b=st.floats(0.0, 1.0, exclude_max=True, allow_nan=False),
    )
    def test_symmetric_and_bounded_by_half(self, a, b):
        d = circular_error(a, b)
        assert d == circular_error(b, a)
        assert 0.0 <= d <= 0.5


class TestTrialSeed:
    def test_deterministic_for_equal_coordinates(self):
        first = trial_seed(12345, 1 / 3, 3, 1000, 7).generate_state(4)
        second = trial_seed(12345, 1 / 3, 3, 1000, 7).generate_state(4)
        assert np.array_equal(first, second)

    def test_every_coordinate_changes_the_stream(self):
        base = trial_seed(1, 0.2, 3, 100, 0).generate_state(4)
        variants = [
            trial_seed(2, 0.2, 3, 100, 0),
            trial_seed(1, 0.25, 3, 100, 0),
            trial_seed(1, 0.2, 4, 100, 0),
            trial_seed(1, 0.2, 3, 101, 0),
            trial_seed(1, 0.2, 3, 100, 1),
        ]
        for seed in variants:
            assert not np.array_equal(base, seed.generate_state(4))

    def test_adjacent_float_phases_hash_apart(self):
        near = float(np.nextafter(0.2, 1.0))
        a = trial_seed(1, 0.2, 3, 100, 0).generate_state(4)
        b = trial_seed(1, near, 3, 100, 0).generate_state(4)
        assert not np.array_equal(a, b)


class TestRunCell:
    def test_representable_phase_cell_is_exact(self):
        rec = run_cell(3 / 8, RegisterSpec(3), 1000, 10, base_seed=12345)
        assert rec.rmse < 1e-6
        assert rec.excluded == 0
        assert rec.valid
        assert rec.traditional_error == 0.0

    def test_record_field_identities(self):
        reg = RegisterSpec(3)
        rec = run_cell(1 / 3, reg, 1000, 20, base_seed=99)
        assert rec.theta_true == 1 / 3
        assert rec.n == 3 and rec.M == 8 and rec.k == 1000 and rec.trials == 20
        assert abs(rec.crlb_rmse - np.sqrt(crlb_mse(reg, 1000))) < 1e-15
        assert abs(rec.ratio - rec.rmse / rec.crlb_rmse) < 1e-12
        assert abs(rec.traditional_error - 1 / 24) < 1e-15
        assert rec.traditional_error <= 1 / (2 * reg.M)
        assert rec.depth_units == circuit_depth_units(reg) == 7
        assert rec.rmse >= 0 and rec.ratio >= 0

    def test_cell_estimates_length_tracks_exclusions(self):
        estimates, excluded = cell_estimates(1 / 3, RegisterSpec(3), 200, 8, 5)
        assert excluded == 0
        assert estimates.shape == (8,)

    def test_crlb_window_at_four_thousand_shots(self):
        rec = run_cell(1 / 3, RegisterSpec(3), 4000, 100, base_seed=12345)
        assert 0.8 <= rec.ratio <= 1.5
        assert rec.valid

    def test_ten_shots_beat_the_traditional_bin(self):
        rec = run_cell(1 / 3, RegisterSpec(3), 10, 100, base_seed=12345)
        assert rec.rmse <= rec.traditional_error + 1e-15
        assert rec.rmse <= rec.traditional_error + 3 * rec.crlb_rmse

    def test_failed_fits_are_excluded_and_flagged(self, monkeypatch):
        calls = {"count": 0}

        class _Stub:
            phases = [0.3]

        def flaky(observed):
            calls["count"] += 1
            if calls["count"] <= 2:
                raise FitError("synthetic failure")
            return _Stub()

        monkeypatch.setattr("qpecf.bench.fit_single", flaky)
        rec = run_cell(0.3, RegisterSpec(3), 10, 50, base_seed=1)
        assert rec.excluded == 2
        assert not rec.valid  # 2/50 exceeds the 1% budget
        assert rec.rmse == 0.0  # stub estimates hit theta exactly

    def test_all_fits_failing_yields_nan_rmse(self, monkeypatch):
        def explode(observed):
            raise FitError("synthetic failure")

        monkeypatch.setattr("qpecf.bench.fit_single", explode)
        rec = run_cell(0.3, RegisterSpec(3), 10, 5, base_seed=1)
        assert rec.excluded == 5
        assert not rec.valid
        assert np.isnan(rec.rmse) and np.isnan(rec.mean_abs_error)


class TestRunGrid:
    def test_records_follow_cross_product_order(self):
        grid = BenchGrid(
            phases=(0.2, 1 / 3),
            n_values=(2, 3),
            shot_values=(50, 100),
            trials=3,
            base_seed=11,
        )
        records = run_grid(grid)
        coords = [(r.theta_true, r.n, r.k) for r in records]
        want = [(t, n, k) for t in (0.2, 1 / 3) for n in (2, 3) for k in (50, 100)]
        assert coords == want

    def test_cell_records_do_not_depend_on_grid_shape(self):
        forward = BenchGrid((0.2, 1 / 3), (2, 3), (50, 100), 3, 11)
        backward = BenchGrid((1 / 3, 0.2), (3, 2), (100, 50), 3, 11)
        by_coord = {
            (r.theta_true, r.n, r.k): r for r in run_grid(backward)
        }
        for rec in run_grid(forward):
            assert by_coord[(rec.theta_true, rec.n, rec.k)] == rec

    def test_single_cell_grid_reduces_to_run_cell(self):
        grid = BenchGrid((0.375,), (3,), (100,), 5, 3)
        assert run_grid(grid) == [run_cell(0.375, RegisterSpec(3), 100, 5, 3)]

    def test_worker_count_never_changes_results(self):
        grid = BenchGrid((1 / 3,), (2, 3), (50, 100), 4, 21)
        serial = run_grid(grid, workers=1)
        parallel = run_grid(grid, workers=3)
        assert serial == parallel
        assert records_to_csv(serial) == records_to_csv(parallel)

    def test_sampled_cells_satisfy_error_invariants(self):
        grid = BenchGrid((1 / 3, 0.2), (2, 3), (50, 200), 10, 12345)
        for rec in run_grid(grid):
            assert rec.rmse >= 0 and rec.ratio >= 0
            assert rec.traditional_error <= 1 / (2 * rec.M)
            assert rec.rmse <= rec.traditional_error + 3 * rec.crlb_rmse


class TestScalingExponents:
    def test_recovers_exact_power_laws(self):
        records = [
            synthetic_record(0.3, n, k, 0.3 * k**-0.5 * (2**n) ** -1.0)
            for n in (2, 3, 4)
            for k in (1000, 10000, 100000)
        ]
        summary = fit_scaling_exponents(records)
        assert abs(summary.slope_vs_k - (-0.5)) < 1e-6
        assert abs(summary.slope_vs_M - (-1.0)) < 1e-6
        assert summary.cells_used == 9

    def test_crlb_curve_has_half_power_shot_scaling(self):
        records = [
            synthetic_record(0.3, n, k, float(np.sqrt(crlb_mse(RegisterSpec(n), k))))
            for n in (2, 3, 4)
            for k in (1000, 4000, 10000, 100000)
        ]
        summary = fit_scaling_exponents(records)
        assert abs(summary.slope_vs_k - (-0.5)) < 1e-6

    def test_insufficient_shot_span_is_a_domain_error(self):
        records = [
            synthetic_record(0.3, n, k, 0.01) for n in (2, 3, 4) for k in (100, 1000)
        ]
        with pytest.raises(DomainError) as err:
            fit_scaling_exponents(records)
        assert "3 distinct shot counts" in str(err.value)

    def test_insufficient_register_span_is_a_domain_error(self):
        records = [
            synthetic_record(0.3, n, k, 0.01) for n in (2, 3) for k in (100, 1000, 10000)
        ]
        with pytest.raises(DomainError) as err:
            fit_scaling_exponents(records)
        assert "3 distinct register sizes" in str(err.value)

    def test_zero_and_nan_rmse_cells_are_skipped(self):
        base = [
            synthetic_record(0.3, n, k, 0.3 * k**-0.5 * (2**n) ** -1.0)
            for n in (2, 3, 4)
            for k in (1000, 10000, 100000)
        ]
        reference = fit_scaling_exponents(base)
        padded = base + [
            synthetic_record(0.3, 3, 777, 0.0),
            synthetic_record(0.3, 3, 778, float("nan")),
        ]
        summary = fit_scaling_exponents(padded)
        assert summary == reference
        assert summary.cells_used == 9

    def test_json_rendering(self):
        summary = ScalingSummary(slope_vs_k=-0.5, slope_vs_M=-1.0, cells_used=9)
        text = scaling_to_json(summary)
        assert text.endswith("\n")
        assert json.loads(text) == {
            "slope_vs_k": -0.5,
            "slope_vs_M": -1.0,
            "cells_used": 9,
        }


class TestGridConfig:
    GOOD = {
        "phases": [0.2, 1 / 3],
        "n_values": [2, 3],
        "shot_values": [50, 100],
        "trials": 5,
        "base_seed": 7,
    }

    def test_roundtrip(self):
        grid = BenchGrid.from_json_dict(self.GOOD)
        assert BenchGrid.from_json_dict(grid.to_json_dict()) == grid

    def test_missing_field_names_the_field(self):
        for name in self.GOOD:
            data = {k: v for k, v in self.GOOD.items() if k != name}
            with pytest.raises(ConfigError) as err:
                BenchGrid.from_json_dict(data)
            assert f"'{name}' is missing" in str(err.value)

    def test_wrong_type_names_the_field(self):
        with pytest.raises(ConfigError, match="'phases' must be a list"):
            BenchGrid.from_json_dict({**self.GOOD, "phases": "0.2"})
        with pytest.raises(ConfigError, match="'trials' must be a int"):
            BenchGrid.from_json_dict({**self.GOOD, "trials": 5.0})
        with pytest.raises(ConfigError, match="'trials' must be a int"):
            BenchGrid.from_json_dict({**self.GOOD, "trials": True})

    def test_top_level_must_be_an_object(self):
        with pytest.raises(ConfigError, match="must be a JSON object"):
            BenchGrid.from_json_dict([1, 2, 3])

    def test_value_errors_are_wrapped(self):
        for patch in (
            {"phases": [1.5]},
            {"shot_values": [0]},
            {"shot_values": []},
            {"trials": 0},
            {"n_values": [0]},
        ):
            with pytest.raises(ConfigError, match="invalid grid config"):
                BenchGrid.from_json_dict({**self.GOOD, **patch})


class TestCsvRendering:
    def test_header_is_the_published_column_order(self):
        assert CSV_HEADER == (
            "theta_true,n,M,k,trials,excluded,rmse,mean_abs_error,"
            "crlb_rmse,ratio,traditional_error,depth_units"
        )

    def test_single_record_rendering_is_frozen(self):
        rec = BenchRecord(
            theta_true=0.375,
            n=3,
            M=8,
            k=1000,
            trials=10,
            excluded=0,
            rmse=0.001,
            mean_abs_error=0.0005,
            crlb_rmse=0.002,
            ratio=0.5,
            traditional_error=0.0,
            depth_units=7,
            valid=True,
        )
        want = CSV_HEADER + "\n" + "0.375,3,8,1000,10,0,0.001,0.0005,0.002,0.5,0.0,7\n"
        assert records_to_csv([rec]) == want

    def test_twelve_significant_digits(self):
        rec = run_cell(1 / 3, RegisterSpec(3), 100, 5, base_seed=2)
        row = records_to_csv([rec]).splitlines()[1]
        assert row.split(",")[0] == "0.333333333333"
