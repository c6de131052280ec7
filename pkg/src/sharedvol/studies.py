"""
Monte-Carlo studies of the shared-volatility estimator.

A scenario describes how to simulate a panel: K AR(1) series of length T,
all driven by one GARCH(1, 1) innovation path, with lag-1 coefficients
fixed, drawn from a range, or split between a near-zero and a
near-one regime. ``run_study`` replicates the scenario, runs the pipeline
on each panel and aggregates the estimation errors.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .ar import ARSpec, simulate_ar
from .core import Panel
from .diagnostics import QQData
from .garch import BURN_IN, GARCHSpec, simulate_garch_from_shocks
from .pipeline import UNWEIGHTED, WEIGHTED, PipelineConfig, PipelineReport, run_pipeline

__all__ = [
    "PRESETS",
    "GroundTruth",
    "ReplicationResult",
    "StudyScenario",
    "StudySummary",
    "generate_panel",
    "get_preset",
    "run_replication",
    "run_study",
]

FIXED = "fixed"
UNIFORM = "uniform"
MIXED = "mixed"


@dataclass(frozen=True)
class StudyScenario:
    name: str = "custom"
    n_series: int = 20
    n_obs: int = 300
    phi_rule: str = FIXED
    phi_value: float = 0.05
    phi_range: tuple = (0.7, 0.9)
    low_range: tuple = (0.01, 0.05)
    omega: float = 0.1
    alpha: float = 0.2
    beta: float = 0.5
    intercept: float = 0.0
    weighting: str = UNWEIGHTED
    compare_weighting: bool = False
    replications: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.phi_rule not in (FIXED, UNIFORM, MIXED):
            raise ValueError(f"unknown phi_rule {self.phi_rule!r}")
        if self.n_series < 1 or self.n_obs < 50:
            raise ValueError("scenario needs n_series >= 1 and n_obs >= 50")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        for lo, hi in (self.phi_range, self.low_range):
            if not -1.0 < lo <= hi < 1.0:
                raise ValueError(f"phi range ({lo}, {hi}) leaves the stationary region")
        if self.phi_rule == FIXED and not abs(self.phi_value) < 1.0:
            raise ValueError("fixed phi must satisfy |phi| < 1")
        self.garch_spec  # validates omega/alpha/beta

    @property
    def garch_spec(self) -> GARCHSpec:
        return GARCHSpec(self.omega, (self.alpha,), (self.beta,))

    def pipeline_config(self, weighting: str | None = None, seed: int = 0) -> PipelineConfig:
        # the simulated truth always carries GARCH, so the stage is never skipped
        return PipelineConfig(weighting=weighting or self.weighting, seed=seed, legacy=False, always_fit_garch=True)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phi_range"] = list(self.phi_range)
        d["low_range"] = list(self.low_range)
        return d


PRESETS = {
    "study1-k20": StudyScenario("study1-k20", n_series=20),
    "study1-k100": StudyScenario("study1-k100", n_series=100),
    "study1-k400": StudyScenario("study1-k400", n_series=400),
    "study2": StudyScenario("study2", n_series=400, phi_rule=UNIFORM),
    "study3": StudyScenario("study3", n_series=400, phi_rule=MIXED, weighting=WEIGHTED, compare_weighting=True),
}


def get_preset(name: str, **overrides) -> StudyScenario:
    try:
        scenario = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(scenario, **overrides) if overrides else scenario


@dataclass(frozen=True)
class GroundTruth:
    phi: np.ndarray
    regime: tuple
    eta: np.ndarray
    sigma: np.ndarray
    eps: np.ndarray


def _replication_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def _draw_phi(scenario: StudyScenario, rng: np.random.Generator) -> tuple[np.ndarray, tuple]:
    K = scenario.n_series
    if scenario.phi_rule == FIXED:
        return np.full(K, scenario.phi_value), ("fixed",) * K
    if scenario.phi_rule == UNIFORM:
        return rng.uniform(*scenario.phi_range, size=K), ("high",) * K
    n_low = K // 2
    low = rng.uniform(*scenario.low_range, size=n_low)
    high = rng.uniform(*scenario.phi_range, size=K - n_low)
    return np.r_[low, high], ("low",) * n_low + ("high",) * (K - n_low)


def generate_panel(scenario: StudyScenario, replication_index: int = 0) -> tuple[Panel, GroundTruth]:
    """
    Simulate one panel: a single GARCH path filtered by each series' AR(1).

    Both the GARCH recursion and the AR filters get a 200-point burn-in.
    """
    rng = _replication_rng(scenario.master_seed, replication_index)
    phi, regime = _draw_phi(scenario, rng)
    T = scenario.n_obs
    shocks = rng.standard_normal(T + 2 * BURN_IN)
    eta_all, sigma_all = simulate_garch_from_shocks(scenario.garch_spec, shocks)
    eta_ar = eta_all[BURN_IN:]
    cols = [simulate_ar(ARSpec((ph,), scenario.intercept), eta_ar)[BURN_IN:] for ph in phi]
    labels = [f"y{i + 1:03d}" for i in range(scenario.n_series)]
    truth = GroundTruth(
        phi=phi,
        regime=regime,
        eta=eta_all[2 * BURN_IN :],
        sigma=sigma_all[2 * BURN_IN :],
        eps=shocks[2 * BURN_IN :],
    )
    return Panel(np.column_stack(cols), tuple(labels)), truth


@dataclass
class ReplicationResult:
    index: int
    phi: np.ndarray
    regime: tuple
    phi_first: np.ndarray
    phi_second: np.ndarray
    phi_final: np.ndarray
    garch_order: tuple | None
    aic: dict
    sigma_true: np.ndarray
    sigma_hat: np.ndarray | None
    qq_coverage: float
    li_mak_reject: bool | None
    mcleod_li_reject: bool
    phi_final_unweighted: np.ndarray | None = None
    qq: QQData | None = None
    warnings: list = field(default_factory=list)

    def mse(self, which: str = "final", regime: str | None = None) -> float:
        est = {
            "first": self.phi_first,
            "second": self.phi_second,
            "final": self.phi_final,
            "unweighted": self.phi_final_unweighted,
        }[which]
        mask = np.ones(self.phi.shape[0], dtype=bool) if regime is None else np.array(self.regime) == regime
        return float(np.mean((est[mask] - self.phi[mask]) ** 2))

    @property
    def sigma_corr(self) -> float:
        if self.sigma_hat is None:
            return float("nan")
        return float(np.corrcoef(self.sigma_true, self.sigma_hat)[0, 1])

    @property
    def sigma_rmse(self) -> float:
        if self.sigma_hat is None:
            return float("nan")
        return float(np.sqrt(np.mean((self.sigma_true - self.sigma_hat) ** 2)))


def _summarise_report(index: int, truth: GroundTruth, report: PipelineReport) -> ReplicationResult:
    fit = report.shared_garch
    sigma_true = truth.sigma[report.aligned_start :]
    return ReplicationResult(
        index=index,
        phi=truth.phi,
        regime=truth.regime,
        phi_first=report.lag1("first"),
        phi_second=report.lag1("second"),
        phi_final=report.lag1("final"),
        garch_order=None if fit is None else report.garch_selection.order,
        aic={} if fit is None else dict(report.garch_selection.aic),
        sigma_true=sigma_true,
        sigma_hat=None if fit is None else fit.conditional_sd,
        qq_coverage=float("nan") if report.qq is None else report.qq.coverage,
        li_mak_reject=next((d.reject_null for d in report.diagnostics if d.test_name == "li_mak"), None),
        mcleod_li_reject=report.mcleod_li.reject_null,
        qq=report.qq,
        warnings=list(report.warnings),
    )


def run_replication(scenario: StudyScenario, index: int, return_report: bool = False):
    panel, truth = generate_panel(scenario, index)
    report = run_pipeline(panel, scenario.pipeline_config())
    result = _summarise_report(index, truth, report)
    if scenario.compare_weighting and scenario.weighting == WEIGHTED:
        alt = run_pipeline(panel, scenario.pipeline_config(UNWEIGHTED))
        result.phi_final_unweighted = alt.lag1("final")
    if return_report:
        return result, report, panel, truth
    return result


@dataclass
class StudySummary:
    scenario: StudyScenario
    replications: list

    @property
    def n_replications(self) -> int:
        return len(self.replications)

    def _mean(self, values) -> float:
        arr = np.asarray(list(values), dtype=float)
        arr = arr[np.isfinite(arr)]
        return float(arr.mean()) if arr.size else float("nan")

    @property
    def regimes(self) -> list[str]:
        return sorted(set(self.replications[0].regime))

    def phi_mse_for(self, which: str = "final", regime: str | None = None) -> float:
        return self._mean(r.mse(which, regime) for r in self.replications)

    @property
    def phi_mse(self) -> float:
        return self.phi_mse_for("final")

    @property
    def phi_bias(self) -> float:
        return self._mean(np.mean(r.phi_final - r.phi) for r in self.replications)

    @property
    def sigma_rmse(self) -> float:
        return self._mean(r.sigma_rmse for r in self.replications)

    @property
    def sigma_corr(self) -> float:
        return self._mean(r.sigma_corr for r in self.replications)

    @property
    def garch_orders_selected(self) -> dict:
        counts = Counter("none" if r.garch_order is None else f"{r.garch_order[0]},{r.garch_order[1]}" for r in self.replications)
        return dict(sorted(counts.items()))

    @property
    def aic_comparison(self) -> dict:
        keys = sorted({k for r in self.replications for k in r.aic})
        return {f"{p},{q}": self._mean(r.aic.get((p, q), np.nan) for r in self.replications) for p, q in keys}

    @property
    def qq_envelope_coverage(self) -> float:
        return self._mean(r.qq_coverage for r in self.replications)

    @property
    def weighted_beats_unweighted(self) -> float | None:
        pairs = [r for r in self.replications if r.phi_final_unweighted is not None]
        if not pairs:
            return None
        return float(np.mean([r.mse("final") < r.mse("unweighted") for r in pairs]))

    def to_dict(self) -> dict:
        regimes = self.regimes
        out = {
            "scenario": self.scenario.to_dict(),
            "replications": self.n_replications,
            "phi_mse": self.phi_mse,
            "phi_bias": self.phi_bias,
            "phi_mse_by_regime": {g: self.phi_mse_for("final", g) for g in regimes},
            "phi_mse_first_pass": {g: self.phi_mse_for("first", g) for g in regimes},
            "phi_mse_second_pass": {g: self.phi_mse_for("second", g) for g in regimes},
            "sigma_rmse": self.sigma_rmse,
            "sigma_corr": self.sigma_corr,
            "garch_orders_selected": self.garch_orders_selected,
            "aic_comparison": self.aic_comparison,
            "qq_envelope_coverage": self.qq_envelope_coverage,
            "mcleod_li_rejection_rate": self._mean(r.mcleod_li_reject for r in self.replications),
            "li_mak_rejection_rate": self._mean(
                np.nan if r.li_mak_reject is None else r.li_mak_reject for r in self.replications
            ),
        }
        if self.weighted_beats_unweighted is not None:
            out["phi_mse_unweighted_by_regime"] = {g: self.phi_mse_for("unweighted", g) for g in regimes}
            out["weighted_beats_unweighted_rate"] = self.weighted_beats_unweighted
        return out


def run_study(scenario: StudyScenario, n_jobs: int = 1) -> StudySummary:
    """
    Run every replication of ``scenario``.

    Replication ``i`` is seeded from ``(master_seed, i)`` only, so results do
    not depend on ``n_jobs``.
    """
    indices = range(scenario.replications)
    if n_jobs == 1:
        results = [run_replication(scenario, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run_replication, [scenario] * scenario.replications, indices))
    return StudySummary(scenario, results)
