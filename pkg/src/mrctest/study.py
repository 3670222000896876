"""Monte Carlo study harness: power/type-I-error tables on simulated
data and the week-resampling experiment on real panel data.

Every replicate gets its own seeds derived from (study seed, replicate
index), so studies parallelize over replicates and partial re-runs
reproduce exactly. A method counts as rejecting only when it both
converges and has p < alpha, and rates are reported with the binomial
Monte Carlo standard error sqrt(r(1-r)/reps).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import json
import math

import numpy as np

from ._rng import DOMAIN_RAIN, DOMAIN_STUDY, derive_seed, substream
from .comparators import fit_logistic, fit_tobit
from .errors import DomainError, MrcError
from .rank_test import TestConfig, run_test
from .simulate import ScenarioConfig, simulate_dataset

_METHODS = ("rank", "tobit", "logistic")


@dataclass(frozen=True)
class StudyConfig:
    """Design of one study cell (scenario/n/effects ignored by rain runs)."""

    scenario: int = 1
    n: int = 100
    beta1: float = 0.0
    gamma1: float = 0.0
    reps: int = 200
    methods: tuple = _METHODS
    alpha: float = 0.05
    seed: int = 0
    B: int = 101
    Q: int = 5

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError("reps must be >= 1")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        bad = [m for m in self.methods if m not in _METHODS]
        if bad:
            raise DomainError(f"unknown method(s) {bad}; choose from {_METHODS}")


@dataclass
class MethodSummary:
    method: str
    rejections: int
    failures: int
    reps: int

    @property
    def rate(self):
        return self.rejections / self.reps

    @property
    def failure_rate(self):
        return self.failures / self.reps

    @property
    def mc_se(self):
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.reps)


@dataclass
class StudyResult:
    meta: dict
    reps: int
    methods: dict
    pvalues: dict = field(repr=False, default_factory=dict)

    def to_json_dict(self):
        return {
            "schema": 1,
            **self.meta,
            "reps": self.reps,
            "methods": {
                name: {
                    "rejections": s.rejections,
                    "failures": s.failures,
                    "rate": s.rate,
                    "failure_rate": s.failure_rate,
                    "mc_se": s.mc_se,
                }
                for name, s in self.methods.items()
            },
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)

    def to_tsv(self):
        cols = list(self.meta) + ["reps"]
        vals = [str(v) for v in self.meta.values()] + [str(self.reps)]
        for name, s in self.methods.items():
            cols += [f"{name}_rejections", f"{name}_rate", f"{name}_mc_se", f"{name}_fail_pct"]
            vals += [
                str(s.rejections),
                f"{s.rate:.4f}",
                f"{s.mc_se:.4f}",
                f"{100.0 * s.failure_rate:.2f}",
            ]
        return "\t".join(cols) + "\n" + "\t".join(vals) + "\n"


def _run_methods(dataset, methods, B, Q, test_seed):
    """(converged, p) per method on one dataset; X1 is the coefficient
    of interest: rank index 0, comparators index 1 (after intercept)."""
    out = {}
    for m in methods:
        try:
            if m == "rank":
                res = run_test(dataset, TestConfig(B=B, Q=Q, seed=test_seed))
                out[m] = (True, float(res.p_two_sided[0]))
            elif m == "tobit":
                fit = fit_tobit(dataset)
                out[m] = (bool(fit.converged), float(fit.wald_p))
            else:
                fit = fit_logistic(dataset)
                out[m] = (bool(fit.converged), float(fit.wald_p))
        except MrcError:
            out[m] = (False, float("nan"))
    return out


def power_rep(cfg, r):
    """Outcomes of replicate r: dict method -> (converged, p-value)."""
    sim_seed = derive_seed(cfg.seed, DOMAIN_STUDY, r, 0)
    test_seed = derive_seed(cfg.seed, DOMAIN_STUDY, r, 1)
    scen = ScenarioConfig(
        n=cfg.n, scenario=cfg.scenario, beta1=cfg.beta1, gamma1=cfg.gamma1
    )
    dataset = simulate_dataset(scen, sim_seed)
    return _run_methods(dataset, cfg.methods, cfg.B, cfg.Q, test_seed)


_POOL_CFG = {}


def _power_pool_init(cfg):
    _POOL_CFG["cfg"] = cfg


def _power_pool_job(r):
    return power_rep(_POOL_CFG["cfg"], r)


def _aggregate(meta, reps, methods, outcomes, alpha):
    summaries = {}
    pvalues = {}
    for m in methods:
        conv = np.array([outcomes[r][m][0] for r in range(reps)])
        pv = np.array([outcomes[r][m][1] for r in range(reps)])
        rejected = conv & np.where(np.isnan(pv), False, pv < alpha)
        summaries[m] = MethodSummary(
            method=m,
            rejections=int(rejected.sum()),
            failures=int((~conv).sum()),
            reps=reps,
        )
        pvalues[m] = pv
    return StudyResult(meta=meta, reps=reps, methods=summaries, pvalues=pvalues)


def power_study(cfg, threads=1):
    """Simulate cfg.reps datasets and tally per-method rejection rates."""
    if cfg.n < 1:
        raise DomainError("n must be >= 1")
    if threads > 1:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_power_pool_init, initargs=(cfg,)
        ) as pool:
            outcomes = list(pool.map(_power_pool_job, range(cfg.reps), chunksize=1))
    else:
        outcomes = [power_rep(cfg, r) for r in range(cfg.reps)]
    meta = {
        "study": "power",
        "scenario": cfg.scenario,
        "n": cfg.n,
        "beta1": cfg.beta1,
        "gamma1": cfg.gamma1,
        "alpha": cfg.alpha,
        "B": cfg.B,
        "Q": cfg.Q,
        "seed": cfg.seed,
    }
    return _aggregate(meta, cfg.reps, cfg.methods, outcomes, cfg.alpha)


def rain_draw(dataset, weeks_per_draw, cfg, d):
    """Outcomes of draw d: sample subjects without replacement, run methods."""
    subjects = list(dataset.subject_index)
    rng = substream(cfg.seed, DOMAIN_RAIN, d, 0)
    pick = rng.choice(len(subjects), size=weeks_per_draw, replace=False)
    sub = dataset.subset([subjects[i] for i in sorted(pick)])
    test_seed = derive_seed(cfg.seed, DOMAIN_RAIN, d, 1)
    return _run_methods(sub, cfg.methods, cfg.B, cfg.Q, test_seed)


_RAIN_POOL = {}


def _rain_pool_init(dataset, weeks_per_draw, cfg):
    _RAIN_POOL["args"] = (dataset, weeks_per_draw, cfg)


def _rain_pool_job(d):
    dataset, weeks_per_draw, cfg = _RAIN_POOL["args"]
    return rain_draw(dataset, weeks_per_draw, cfg, d)


def rainfall_study(dataset, weeks_per_draw, draws, cfg, threads=1):
    """Repeatedly subsample week-unit subjects and tally rejections.

    The dataset must already be grouped into week units (one subject per
    unit-week) with the covariate design to test.
    """
    if weeks_per_draw < 1:
        raise DomainError("weeks_per_draw must be >= 1")
    if draws < 1:
        raise DomainError("draws must be >= 1")
    if weeks_per_draw > dataset.n:
        raise DomainError(
            f"weeks_per_draw={weeks_per_draw} exceeds available subjects ({dataset.n})"
        )
    if threads > 1:
        with ProcessPoolExecutor(
            max_workers=threads,
            initializer=_rain_pool_init,
            initargs=(dataset, weeks_per_draw, cfg),
        ) as pool:
            outcomes = list(pool.map(_rain_pool_job, range(draws), chunksize=1))
    else:
        outcomes = [rain_draw(dataset, weeks_per_draw, cfg, d) for d in range(draws)]
    meta = {
        "study": "rain",
        "weeks": weeks_per_draw,
        "draws": draws,
        "alpha": cfg.alpha,
        "B": cfg.B,
        "Q": cfg.Q,
        "seed": cfg.seed,
    }
    return _aggregate(meta, draws, cfg.methods, outcomes, cfg.alpha)
