import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from lift_spectra._rng import trial_seed
from lift_spectra.errors import BatchFileError, InputError
from lift_spectra.graphs import catalog, lambda_of, petersen
from lift_spectra.lift import random_lift
from lift_spectra.mc import (
    QUANTILE_METHOD,
    TrialBatch,
    batch_checksum,
    box_gnuplot,
    box_table,
    ecdf,
    ecdf_gnuplot,
    ks_distance,
    load,
    persist,
    quantiles,
    ramanujan_probability,
    run_trials,
    wilson_interval,
)
from lift_spectra.spectra import lambda_new

samples_st = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=40)


@pytest.fixture(scope="module")
def small_batch():
    return run_trials(petersen(), 20, 30, 5)


def test_one_lifts_reproduce_base_lambda():
    b = run_trials(petersen(), 1, 10, 0)
    np.testing.assert_allclose(b.values, 2.0, atol=1e-12)
    assert ramanujan_probability(b)[0] == 1.0


def test_batch_trials_use_derived_seeds(small_batch):
    assert small_batch.seeds == tuple(trial_seed(5, t) for t in range(30))
    h = random_lift(petersen(), 20, small_batch.seeds[7])
    assert lambda_new(h, seed=small_batch.seeds[7]).lambda_new == small_batch.values[7]


def test_batch_values_in_range(small_batch):
    lam = lambda_of(petersen())
    v = np.asarray(small_batch.values)
    assert np.all(v >= lam - 1e-7) and np.all(v <= 3 + 1e-9)
    assert small_batch.max_residual <= 1e-8 * 3


def test_parallel_runs_are_identical(small_batch):
    par = run_trials(petersen(), 20, 30, 5, jobs=2)
    assert par == small_batch
    assert par.to_csv() == small_batch.to_csv()


def test_prefix_of_a_batch_is_a_batch():
    a = run_trials(catalog("k4"), 10, 12, 3)
    b = run_trials(catalog("k4"), 10, 5, 3)
    assert a.values[:5] == b.values


def test_run_trials_rejects_bad_arguments():
    with pytest.raises(InputError):
        run_trials(petersen(), 5, 0, 1)
    with pytest.raises(InputError):
        run_trials(petersen(), 0, 5, 1)
    with pytest.raises(InputError):
        run_trials(petersen(), 5, 5, 1, jobs=0)


def test_csv_rows(small_batch):
    rows = list(csv.DictReader(io.StringIO(small_batch.to_csv())))
    assert len(rows) == 30
    assert list(rows[0]) == ["trial", "seed", "lambda_new", "ramanujan"]
    for t, row in enumerate(rows):
        assert int(row["trial"]) == t
        v = float(row["lambda_new"])
        assert v == small_batch.values[t]
        assert row["ramanujan"] == ("true" if v <= 2 * math.sqrt(2) + 3e-9 else "false")


# -- ecdf / quantiles ------------------------------------------------------

def test_ecdf_examples():
    e = ecdf([3.0, 1.0, 2.0, 2.0])
    assert e(0.5) == 0 and e(1.0) == 0.25 and e(2.0) == 0.75 and e(math.inf) == 1
    assert e.points.tolist() == [1, 2, 3]
    assert e.to_csv().splitlines() == ["lambda,ecdf", "1.0,0.25", "2.0,0.75", "3.0,1.0"]
    with pytest.raises(InputError):
        ecdf([])


@given(samples_st, st.lists(st.floats(0, 1), min_size=1, max_size=10))
def test_ecdf_and_quantile_properties(xs, qs):
    e = ecdf(xs)
    assert e(math.inf) == 1.0 and e(-math.inf) == 0.0
    assert np.all(np.diff(e.steps) > 0)
    qs = sorted(qs)
    out = quantiles(xs, qs)
    assert out["method"] == QUANTILE_METHOD
    assert np.all(np.diff(out["values"]) >= 0)
    assert min(xs) <= out["values"][0] and out["values"][-1] <= max(xs)


def test_quantiles_linear_interpolation():
    out = quantiles([1, 2, 3, 4], [0, 0.5, 0.25, 1])
    assert out["values"] == [1, 2.5, 1.75, 4]
    with pytest.raises(InputError):
        quantiles([1], [1.5])


# -- Wilson ----------------------------------------------------------------

def wilson_oracle(k, n):
    # closed form with the tabulated 95% normal quantile
    z = 1.959963984540054
    p = k / n
    c = (2 * k + z * z) / (2 * (n + z * z))
    h = z * math.sqrt(n * p * (1 - p) + z * z / 4) / (n + z * z)
    return max(0.0, c - h), min(1.0, c + h)


@given(st.integers(1, 5000), st.data())
def test_wilson_matches_closed_form(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    olo, ohi = wilson_oracle(k, n)
    assert lo == pytest.approx(olo, abs=1e-12) and hi == pytest.approx(ohi, abs=1e-12)
    assert 0 <= lo <= k / n <= hi <= 1


def test_wilson_examples():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0 and hi == pytest.approx(0.2775, abs=1e-4)
    with pytest.raises(InputError):
        wilson_interval(0, 0)


# -- KS --------------------------------------------------------------------

@given(samples_st, samples_st)
@settings(max_examples=200)
def test_ks_matches_scipy(a, b):
    assert ks_distance(a, b) == pytest.approx(stats.ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


@given(samples_st, samples_st, samples_st)
@settings(max_examples=200)
def test_ks_metric_properties(a, b, c):
    assert ks_distance(a, b) == ks_distance(b, a)
    assert ks_distance(a, a) == 0
    assert 0 <= ks_distance(a, b) <= 1
    assert ks_distance(a, c) <= ks_distance(a, b) + ks_distance(b, c) + 1e-15


def test_ks_examples():
    assert ks_distance([1, 2], [3, 4]) == 1
    assert ks_distance([1, 2, 3, 4], [1, 2, 3, 5]) == 0.25


# -- persistence -----------------------------------------------------------

def test_persist_round_trip(tmp_path, small_batch):
    p = tmp_path / "b.json"
    digest = persist(small_batch, p)
    back = load(p)
    assert back == small_batch
    assert back.wall_time == small_batch.wall_time
    assert digest == batch_checksum(back)
    assert not (tmp_path / "b.json.tmp").exists()


def test_truncated_file_raises(tmp_path, small_batch):
    p = tmp_path / "b.json"
    persist(small_batch, p)
    text = p.read_text()
    p.write_text(text[: len(text) // 2])
    with pytest.raises(BatchFileError):
        load(p)


def test_checksums_differ_across_seeds():
    a = run_trials(catalog("k4"), 5, 4, 1)
    b = run_trials(catalog("k4"), 5, 4, 2)
    assert batch_checksum(a) != batch_checksum(b)


def test_schema_and_checksum_errors(tmp_path, small_batch):
    p = tmp_path / "b.json"
    persist(small_batch, p)
    doc = json.loads(p.read_text())
    doc["schema"] = 99
    p.write_text(json.dumps(doc))
    with pytest.raises(BatchFileError):
        load(p)
    doc["schema"] = 1
    doc["batch"]["values"][0] += 1e-9
    p.write_text(json.dumps(doc))
    with pytest.raises(BatchFileError):
        load(p)
    del doc["batch"]["seeds"]
    p.write_text(json.dumps(doc))
    with pytest.raises(BatchFileError):
        load(p)
    with pytest.raises(BatchFileError):
        load(tmp_path / "missing.json")


def test_from_dict_checks_lengths(small_batch):
    d = small_batch.to_dict()
    d["seeds"] = d["seeds"][:-1]
    with pytest.raises(BatchFileError):
        TrialBatch.from_dict(d)


# -- plot emission ---------------------------------------------------------

def test_box_table_and_scripts(small_batch):
    rows = list(csv.reader(io.StringIO(box_table([small_batch]))))
    assert rows[0] == ["n", "min", "q25", "median", "q75", "max"]
    vals = [float(x) for x in rows[1][1:]]
    assert rows[1][0] == "20" and vals == sorted(vals)
    assert vals[0] == min(small_batch.values) and vals[-1] == max(small_batch.values)
    script = box_gnuplot("box.csv", 2 * math.sqrt(2), "t")
    assert "'box.csv'" in script and "2.8284271247461903" in script
    script = ecdf_gnuplot([("a.csv", "A"), ("b.csv", "B")], 2.0, "t")
    assert "'a.csv'" in script and "'b.csv'" in script and "title 'B'" in script
