import csv
import dataclasses
import json
import math

import numpy as np
import pytest
from scipy import stats

from vsa_capacity.config import ExperimentSpec, SweepConfig
from vsa_capacity.exceptions import InvalidParameterError
from vsa_capacity.harness import (
    SweepResult,
    SweepRow,
    Table,
    compare,
    run_sweep,
    run_trials,
    run_trials_async,
    theory_for,
    trial_outcomes,
    z_score,
)


def small_spec(**changes) -> ExperimentSpec:
    base = dict(n_dim=500, n_tokens=8, length=20, lookbacks=(0, 10, 19), trials=400, seed=3)
    base.update(changes)
    return ExperimentSpec(**base)


class TestReproducibility:
    def test_identical_spec_identical_rows(self):
        spec = small_spec(trials=60)
        assert run_trials(spec).rows == run_trials(spec).rows

    def test_chunking_does_not_change_outcomes(self):
        a = trial_outcomes(small_spec(trials=50, chunk_size=7))
        b = trial_outcomes(small_spec(trials=50, chunk_size=50))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_threads_do_not_change_outcomes(self):
        spec = small_spec(trials=60, chunk_size=10)
        assert run_trials(spec, threads=3).rows == run_trials(spec).rows

    @pytest.mark.anyio
    async def test_async_runner(self):
        spec = small_spec(trials=40, chunk_size=8)
        result = await run_trials_async(spec, threads=2)
        assert result.rows == run_trials(spec).rows

    def test_trials_are_independent(self):
        spec = small_spec(n_dim=100, length=40, lookbacks=(39,), trials=800)
        correct, _ = trial_outcomes(spec)
        series = correct[:, 0].astype(float)
        series -= series.mean()
        lag1 = float(series[:-1] @ series[1:] / (series @ series))
        assert abs(lag1) < 4 / math.sqrt(spec.trials)


class TestAgreement:
    @pytest.mark.parametrize(
        "scheme, binding",
        [
            ("HDC", "Permutation"),
            ("HRR", "Circulant"),
            ("FHRR", "PhasorDiagonal"),
            ("FHRR", "Circulant"),
            ("RandomUnitary", "RandomUnitary"),
        ],
    )
    def test_schemes_match_theory(self, scheme, binding):
        spec = small_spec(scheme=scheme, binding=binding, n_dim=200, length=30, lookbacks=(0, 29))
        report = compare(run_trials(spec), tolerance_sigmas=4.0)
        assert report.passed, report.summary()

    def test_decay_filled(self):
        spec = small_spec(contraction=0.95, filled=True, lookbacks=(0, 10, 30), n_dim=300)
        result = run_trials(spec)
        assert all(row.M == "filled" for row in result.rows)
        assert compare(result, 4.0).passed

    def test_clipped_first_item(self):
        spec = small_spec(activation="ClippedLinear", kappa=3, n_dim=1000, length=40, lookbacks=(39,))
        result = run_trials(spec)
        assert np.isfinite(result.rows[0].p_theory)
        assert compare(result, 4.0).passed

    def test_readout_noise(self):
        spec = small_spec(noise="readout", noise_level=3.0)
        assert compare(run_trials(spec), 4.0).passed

    def test_catastrophic_code_sparsity(self):
        spec = small_spec(code_sparsity=1.0, lookbacks=(0,), trials=800)
        row = run_trials(spec).rows[0]
        assert row.p_theory == pytest.approx(1 / 8)
        assert abs(z_score(row.p_empirical, row.p_theory, row.items)) < 4

    def test_detection_threshold_trades_hits_for_rejections(self):
        low, high = (
            run_trials(small_spec(input_sparsity=0.2, threshold=t, lookbacks=(5,), trials=600)).rows[0]
            for t in (0.2, 0.9)
        )
        assert low.p_empirical > high.p_empirical
        assert low.cr_empirical < high.cr_empirical
        assert low.empties > 0 and math.isfinite(low.cr_theory)


class TestSaturatingAndNoisyAgreement:
    @pytest.mark.slow
    @pytest.mark.parametrize("filled", [False, True])
    def test_tanh(self, filled):
        spec = small_spec(
            activation="Tanh", gamma=8.0, n_dim=2000, n_tokens=32, length=80,
            filled=filled, lookbacks=(0, 20, 60), trials=300,
        )
        result = run_trials(spec)
        assert all(math.isfinite(row.p_theory) for row in result.rows)
        assert compare(result, 4.0).passed

    @pytest.mark.slow
    def test_clipped_filled(self):
        spec = small_spec(
            activation="ClippedLinear", kappa=3, n_dim=1000, n_tokens=27, filled=True,
            lookbacks=(0, 5, 15, 30), trials=300,
        )
        result = run_trials(spec)
        assert all(row.M == "filled" for row in result.rows)
        assert compare(result, 4.0).passed

    @pytest.mark.parametrize("noise, level", [("bit_flip", 0.1), ("per_step", 1.0)])
    def test_noise_is_flat_across_lookbacks(self, noise, level):
        spec = small_spec(noise=noise, noise_level=level, trials=300)
        result = run_trials(spec)
        predicted = [row.p_theory for row in result.rows]
        assert predicted == pytest.approx([predicted[0]] * len(predicted))
        assert compare(result, 4.0).passed

    def test_sparse_codes_lose_accuracy(self):
        dense = run_trials(small_spec(n_dim=200, length=30, lookbacks=(0, 29), trials=300))
        sparse = run_trials(
            small_spec(n_dim=200, length=30, lookbacks=(0, 29), code_sparsity=0.9, trials=300)
        )
        assert compare(sparse, 4.0).passed
        for a, b in zip(dense.rows, sparse.rows):
            assert b.p_theory < a.p_theory

    def test_accuracy_does_not_depend_on_lookback(self):
        spec = small_spec(n_dim=200, length=30, lookbacks=(0, 10, 20, 29), trials=600)
        correct, _ = trial_outcomes(spec)
        hits = correct.sum(axis=0)
        table = np.stack([hits, spec.trials - hits])
        _, pvalue, _, _ = stats.chi2_contingency(table)
        assert pvalue > 1e-3


class TestTheoryLookup:
    def test_no_prediction_is_nan(self):
        spec = small_spec(scheme="HRR", binding="Circulant", activation="Tanh", gamma=4.0)
        assert all(math.isnan(point.p_corr) for point in theory_for(spec).values())

    def test_settings_reach_predictions(self):
        tanh = dict(activation="Tanh", gamma=4.0, lookbacks=(0, 19))
        via_settings = theory_for(small_spec(**tanh, settings={"squash_bins": 30}))
        via_field = theory_for(small_spec(**tanh, squash_bins=30))
        default = theory_for(small_spec(**tanh))
        assert [p.p_corr for p in via_settings.values()] == [p.p_corr for p in via_field.values()]
        assert via_settings[19].p_corr != default[19].p_corr
        coarse = theory_for(small_spec(settings={"resolution": 4}))
        assert coarse[0].p_corr != theory_for(small_spec())[0].p_corr

    def test_bit_flip_prediction(self):
        spec = small_spec(noise="bit_flip", noise_level=0.1)
        assert all(math.isfinite(p.p_corr) for p in theory_for(spec).values())
        filled = small_spec(noise="bit_flip", noise_level=0.1, contraction=0.9, filled=True)
        assert all(math.isnan(p.p_corr) for p in theory_for(filled).values())


class TestSweep:
    def test_grid_order(self):
        sweep = SweepConfig(base=small_spec(trials=20, lookbacks=(0,)), grid={"length": [5, 10], "n_tokens": [4, 8]})
        result = run_sweep(sweep)
        assert [(row.M, row.D) for row in result.rows] == [(5, 4), (5, 8), (10, 4), (10, 8)]
        assert result.config["grid"] == {"length": [5, 10], "n_tokens": [4, 8]}

    def test_singleton_grid_equals_run_trials(self):
        spec = small_spec(trials=30)
        assert run_sweep(SweepConfig(base=spec)).rows == run_trials(spec).rows

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            SweepConfig(grid={"length": []})
        with pytest.raises(InvalidParameterError):
            SweepConfig(grid={"colour": [1]})
        with pytest.raises(InvalidParameterError):
            small_spec(trials=0)


class TestCompare:
    def test_wrong_theory_is_flagged(self):
        result = run_trials(small_spec(trials=800))
        wrong = SweepResult([dataclasses.replace(row, p_theory=row.p_theory / 2) for row in result.rows])
        report = compare(wrong, 3.0)
        assert not report.passed
        assert report.failures

    def test_simulated_binomial_draws_pass(self):
        rng = np.random.default_rng(0)
        template = run_trials(small_spec(trials=10, lookbacks=(0,))).rows[0]
        rows = []
        for p in rng.uniform(0.05, 0.95, size=400):
            hits = int(rng.binomial(1000, p))
            rows.append(dataclasses.replace(template, items=1000, hits=hits, p_empirical=hits / 1000, p_theory=p))
        report = compare(SweepResult(rows), 3.0, min_pass_rate=0.99)
        assert report.pass_rate >= 0.99 and report.passed

    def test_rows_without_prediction_are_skipped(self):
        row = run_trials(small_spec(trials=10, lookbacks=(0,))).rows[0]
        report = compare(SweepResult([dataclasses.replace(row, p_theory=math.nan)]))
        assert report.summary()["skipped"] == 1 and report.passed

    def test_z_score_floor(self):
        assert z_score(1.0, 1.0, 100) == 0.0
        assert z_score(0.9, 1.0, 100) == pytest.approx(-10.0)
        assert z_score(0.6, 0.5, 100) == pytest.approx(2.0)


class TestOutput:
    def test_csv_and_sidecar(self, tmp_path):
        result = run_trials(small_spec(trials=20, lookbacks=(0,)))
        csv_path, json_path = result.table().write(tmp_path, "run", meta={"version": "0.1.0"})
        raw = csv_path.read_bytes()
        assert raw.count(b"\r\n") == 2
        with csv_path.open(newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == SweepRow.fieldnames()
        assert rows[0]["threshold"] == ""
        sidecar = json.loads(json_path.read_text())
        assert sidecar["version"] == "0.1.0"
        assert sidecar["config"]["n_dim"] == 500

    def test_json_rows(self, tmp_path):
        table = Table(["a", "b"], [{"a": 1, "b": math.nan}], {"k": "v"})
        (path,) = table.write(tmp_path, "t", fmt="json")
        data = json.loads(path.read_text())
        assert data["rows"] == [{"a": 1, "b": None}]
        with pytest.raises(InvalidParameterError):
            table.write(tmp_path, "t", fmt="xml")
