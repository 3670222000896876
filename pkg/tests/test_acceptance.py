"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. The Monte Carlo
studies (criteria 3-6) each run 200 replicates of the full test with
B = 101 and take a few minutes apiece on one core; results are shared
across criteria through module-scoped fixtures.
"""

import datetime
import json
import time

import numpy as np
import pytest
from scipy.stats import kstest

from mrctest.cli import main as cli_main
from mrctest.objective import (
    ObjectiveContext,
    exact_objective,
    smoothed_objective,
)
from mrctest.rank_test import TestConfig, fit_point_estimate, p_values, run_test
from mrctest.simulate import ScenarioConfig, simulate_dataset
from mrctest.sphere import polar_to_rect
from mrctest.study import StudyConfig, power_study, rainfall_study
from mrctest.data import PanelDataset, group_city_weeks, load_rainfall_csv

STUDY_SEED = 20240501
REPS = 200


def _gate(name, ok, detail):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# Criteria 1-2: oracle instances
# ---------------------------------------------------------------------------


_ORACLE_LATTICE = np.array(
    [[x1, x2] for x1 in (0.0, 1.0) for x2 in (1.0, 2.0, 3.0)]
)


def _oracle_instances(count=50, seed=91):
    """Tiny instances: one observation per subject, 4-6 subjects, with
    distinct covariate rows off a binary-treatment/short-time-grid
    lattice (the design this test targets).

    Discrete rows collapse the pairwise index-sign boundaries onto few
    angles, so the exact objective's optimal plateau stays wide
    relative to the smoothing scale and the criterion measures
    optimizer quality rather than smoothing bias; with dense continuous
    rows the plateau can be narrower than the smoothing displacement
    and the one-pair slack is not attainable by any maximizer of the
    smoothed surface.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(4, 7))
        X = _ORACLE_LATTICE[rng.permutation(len(_ORACLE_LATTICE))[:n]]
        bstar = rng.normal(0.0, 1.0, 2)
        bstar /= np.linalg.norm(bstar)
        y = np.exp(X @ bstar + rng.normal(0.0, 0.25, n))
        if len(np.unique(y)) < n:
            continue
        out.append(ObjectiveContext(y, X, np.arange(1, n + 1, dtype=np.int32)))
    return out


@pytest.fixture(scope="module")
def oracle_instances():
    return _oracle_instances()


def test_criterion_1_oracle_equivalence(oracle_instances):
    t0 = time.time()
    grid = np.arange(-np.pi, np.pi, 0.001)
    worst = 0.0
    for k, ctx in enumerate(oracle_instances):
        beta, _ = fit_point_estimate(ctx, TestConfig(seed=1000 + k))
        ours = exact_objective(ctx, beta)
        gmax = max(exact_objective(ctx, polar_to_rect([t])) for t in grid)
        slack = 1.0 / (ctx.n * (ctx.n - 1))
        worst = max(worst, (gmax - ours) / slack)
        assert ours >= gmax - slack - 1e-12
    elapsed = time.time() - t0
    _gate(
        "1 oracle equivalence",
        worst <= 1.0 + 1e-9 and elapsed < 60.0,
        f"worst deficit {worst:.2f} pair-units over 50 instances, {elapsed:.1f}s",
    )


def test_criterion_2_smoothing_limit(oracle_instances):
    rng = np.random.default_rng(17)
    worst = 0.0
    for ctx in oracle_instances:
        for _ in range(100):
            theta = rng.uniform(-np.pi, np.pi)
            beta = polar_to_rect([theta])
            idx = ctx.X @ beta
            if len(np.unique(idx)) < ctx.N:
                continue  # exact index tie: the limit is not defined there
            gap = abs(smoothed_objective(ctx, beta, 1e-9) - exact_objective(ctx, beta))
            worst = max(worst, gap)
    _gate("2 smoothing limit", worst < 1e-9, f"max |smoothed - exact| = {worst:.2e}")


# ---------------------------------------------------------------------------
# Criteria 3-6: Monte Carlo studies (desk scale, 200 reps)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def null_study():
    cfg = StudyConfig(
        scenario=1, n=100, beta1=0.0, gamma1=0.0, reps=REPS,
        methods=("rank", "tobit", "logistic"), seed=STUDY_SEED, B=101, Q=5,
    )
    return power_study(cfg)


@pytest.fixture(scope="module")
def power_study_s1():
    cfg = StudyConfig(
        scenario=1, n=150, beta1=0.25, gamma1=0.10, reps=REPS,
        methods=("rank", "logistic"), seed=STUDY_SEED + 1, B=101, Q=5,
    )
    return power_study(cfg)


@pytest.fixture(scope="module")
def power_study_s2():
    cfg = StudyConfig(
        scenario=2, n=150, beta1=0.25, gamma1=0.10, reps=REPS,
        methods=("rank", "logistic"), seed=STUDY_SEED + 2, B=101, Q=5,
    )
    return power_study(cfg)


def test_criterion_3_type_i_error(null_study):
    rank = null_study.methods["rank"]
    ok = 0.02 <= rank.rate <= 0.09
    # uniformity screen on the null p-values, allowing for the 2/(1+B) floor
    pv = null_study.pvalues["rank"]
    pv = pv[~np.isnan(pv)]
    ks_p = kstest(pv, "uniform").pvalue
    _gate(
        "3 type I error (rank)",
        ok and ks_p > 0.01,
        f"rate {rank.rate:.3f} in [0.02, 0.09], failures {rank.failures}, KS p {ks_p:.3f}",
    )


def test_criterion_4_power_ordering(power_study_s1):
    rank = power_study_s1.methods["rank"]
    logi = power_study_s1.methods["logistic"]
    margin = rank.rate - logi.rate
    needed = 2.0 * np.hypot(rank.mc_se, logi.mc_se)
    ok = (0.44 <= rank.rate <= 0.64) and margin > needed
    _gate(
        "4 power ordering (scenario 1)",
        ok,
        f"rank {rank.rate:.3f} in [0.44, 0.64], logistic {logi.rate:.3f}, "
        f"margin {margin:.3f} > {needed:.3f}",
    )


def test_criterion_5_robustness(power_study_s2):
    rank = power_study_s2.methods["rank"]
    logi = power_study_s2.methods["logistic"]
    ok = (0.40 <= rank.rate <= 0.60) and rank.rate > logi.rate
    _gate(
        "5 robustness (scenario 2)",
        ok,
        f"rank {rank.rate:.3f} in [0.40, 0.60] vs logistic {logi.rate:.3f}",
    )


def test_criterion_6_comparator_calibration(null_study):
    tobit = null_study.methods["tobit"]
    logi = null_study.methods["logistic"]
    ok = (0.02 <= tobit.rate <= 0.11) and (0.02 <= logi.rate <= 0.09)
    _gate(
        "6 comparator calibration",
        ok,
        f"tobit null {tobit.rate:.3f} in [0.02, 0.11], "
        f"logistic null {logi.rate:.3f} in [0.02, 0.09]",
    )


# ---------------------------------------------------------------------------
# Criterion 7: generator fidelity
# ---------------------------------------------------------------------------


def test_criterion_7_generator_fidelity():
    ds = simulate_dataset(ScenarioConfig(n=2000), 314159)
    zero_frac = float((ds.y == 0).mean())
    mean_m = ds.N / ds.n
    ok = 0.25 <= zero_frac <= 0.35 and 6.8 <= mean_m <= 7.2
    _gate(
        "7 generator fidelity",
        ok,
        f"zero fraction {zero_frac:.3f} in [0.25, 0.35], mean m_i {mean_m:.2f} in [6.8, 7.2]",
    )


# ---------------------------------------------------------------------------
# Criterion 8: invariant suite
# ---------------------------------------------------------------------------


def test_criterion_8_invariants():
    # (a) monotone-outcome-transform invariance, bitwise under a fixed seed
    ds = simulate_dataset(ScenarioConfig(n=30, beta1=0.3, gamma1=0.1), 7)
    cfg = TestConfig(B=25, Q=3, seed=99)
    r1 = run_test(ds, cfg)
    transformed = PanelDataset.from_arrays(
        list(ds.subject_ids), np.exp(ds.y), ds.X,
        time=ds.time, covariate_names=ds.covariate_names,
    )
    r2 = run_test(transformed, cfg)
    bitwise = r1.to_json() == r2.to_json() and np.array_equal(
        r1.beta_resamples, r2.beta_resamples
    )

    # (b) unit norm of the point estimate and resamples
    norms_ok = abs(np.linalg.norm(r1.beta_hat) - 1) < 1e-8 and np.allclose(
        np.linalg.norm(r1.beta_resamples, axis=1), 1.0, atol=1e-8
    )

    # (c) analytic gradient vs central finite differences, 20 instances
    from mrctest import _kernels
    from mrctest.objective import SmoothedObjective

    rng = np.random.default_rng(2718)
    grad_ok = True
    for _ in range(20):
        n = int(rng.integers(5, 9))
        X = rng.normal(size=(n, 2))
        y = np.abs(rng.normal(1.0, 1.0, n))
        ctx = ObjectiveContext(y, X, np.arange(1, n + 1, dtype=np.int32))
        ev = SmoothedObjective(ctx)
        beta = rng.normal(size=2)
        beta /= np.linalg.norm(beta)
        h = float(rng.uniform(0.2, 0.8))
        _, g = ev.value_and_gradient(beta, h)
        for k in range(2):
            e = np.zeros(2)
            e[k] = 1e-6
            fp = _raw(ev, beta + e, h)
            fm = _raw(ev, beta - e, h)
            num = (fp - fm) / 2e-6
            if abs(g[k] - num) > 1e-5 * max(1.0, abs(num)):
                grad_ok = False

    # (d) p-value formulas reproduce the hand-computed examples exactly
    one, two, _ = p_values(np.full((3, 1), 0.5))
    hand_ok = one[0] == 1.0 and two[0] == 0.5
    one, two, _ = p_values(np.ones((101, 1)))
    hand_ok = hand_ok and two[0] == 2.0 / 102.0

    _gate(
        "8 invariant suite",
        bitwise and norms_ok and grad_ok and hand_ok,
        f"bitwise={bitwise} norms={norms_ok} gradient={grad_ok} pvalues={hand_ok}",
    )


def _raw(ev, beta_unnorm, h):
    from mrctest import _kernels

    ctx = ev.ctx
    if ctx.grouped:
        v = ctx._Xg @ beta_unnorm
        raw = _kernels.kernel("grouped_smoothed")(ev._W, v, h)
    else:
        raw = _kernels.kernel("pair_smoothed")(ctx._dX @ beta_unnorm, ev._wz, h)
    return raw / (ctx.n * (ctx.n - 1))


# ---------------------------------------------------------------------------
# Criterion 9: determinism across runs and thread counts
# ---------------------------------------------------------------------------


def test_criterion_9_determinism(tmp_path, capsys):
    sim = tmp_path / "d.csv"
    code = cli_main(["simulate", "--n", "30", "--beta1", "0.3", "--seed", "5",
                     "--out", str(sim)])
    assert code == 0
    capsys.readouterr()

    outs = []
    for threads in ("1", "2", "1"):
        code = cli_main([
            "test", "--input", str(sim), "--outcome", "y", "--id", "id",
            "--covariates", "x1", "x2", "--b", "19", "--q", "2", "--seed", "11",
            "--threads", threads,
        ])
        assert code == 0
        outs.append(capsys.readouterr().out)
    test_ok = outs[0] == outs[1] == outs[2]

    pow_outs = []
    for threads in ("1", "3"):
        code = cli_main([
            "power-study", "--n", "20", "--beta1", "0.4", "--gamma1", "0.2",
            "--reps", "4", "--methods", "rank", "--b", "9", "--q", "1",
            "--seed", "21", "--threads", threads, "--format", "json",
        ])
        assert code == 0
        pow_outs.append(capsys.readouterr().out)
    pow_ok = pow_outs[0] == pow_outs[1]

    sim_outs = []
    for _ in range(2):
        code = cli_main(["simulate", "--n", "12", "--seed", "9"])
        assert code == 0
        sim_outs.append(capsys.readouterr().out)
    sim_ok = sim_outs[0] == sim_outs[1]

    _gate(
        "9 determinism",
        test_ok and pow_ok and sim_ok,
        f"test bytes={test_ok}, power-study bytes={pow_ok}, simulate bytes={sim_ok}",
    )


# ---------------------------------------------------------------------------
# Informal: rainfall experiment end to end (synthetic stand-in data)
# ---------------------------------------------------------------------------


def _synthetic_rainfall_csv(path, years=2, seed=424242):
    """Two-city daily rainfall shaped like the public record: ~55% dry
    days, right-skewed wet-day amounts, one city wetter, wetter winters."""
    rng = np.random.default_rng(seed)
    start = datetime.date(2013, 1, 1)
    lines = ["city,date,rain"]
    for city, bump in (("vancouver", 0.0), ("north_vancouver", 0.35)):
        for k in range(int(365.25 * years)):
            date = start + datetime.timedelta(days=k)
            rainy_season = date.month in (10, 11, 12, 1, 2, 3)
            p_wet = 0.55 if rainy_season else 0.35
            if rng.random() < p_wet + 0.05 * (bump > 0):
                amount = float(np.round(np.exp(rng.normal(1.0 + bump + 0.3 * rainy_season, 0.9)), 1))
            else:
                amount = 0.0
            lines.append(f"{city},{date.isoformat()},{amount}")
    path.write_text("\n".join(lines) + "\n")


def test_rain_pipeline_informal(tmp_path):
    # The public four-year record is not bundled; a synthetic stand-in
    # with a comparable shape exercises the full pipeline. Counts are
    # reported informally, not asserted against the published table.
    csv_path = tmp_path / "rain.csv"
    _synthetic_rainfall_csv(csv_path)
    daily = load_rainfall_csv(csv_path, "city", "date", "rain", city_one="north_vancouver")
    weekly = group_city_weeks(daily, week_len=7)
    cfg = StudyConfig(methods=("rank", "tobit"), seed=77, B=201, Q=5)
    draws = 25
    res = rainfall_study(weekly, weeks_per_draw=100, draws=draws, cfg=cfg)
    rank_c = res.methods["rank"].rejections
    tobit_c = res.methods["tobit"].rejections
    ok = 0 <= rank_c <= draws and 0 <= tobit_c <= draws
    _gate(
        "rain pipeline (informal)",
        ok,
        f"rank {rank_c}/{draws}, tobit {tobit_c}/{draws} rejections on synthetic stand-in",
    )
