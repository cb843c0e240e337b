"""Two-way fixed-effects estimation for staggered-adoption panels and its
partialled-out (residualized-treatment) weight representation."""

from __future__ import annotations

from dataclasses import dataclass
from math import nan

import numpy as np

from .errors import (
    CollinearTreatment,
    DegenerateTreatment,
    DimensionMismatch,
    UnbalancedPanel,
    ZeroVariance,
)
from .lsq import (
    DesignMatrix,
    classical_covariance,
    cluster_robust_covariance,
    solve_least_squares,
    t_test,
)
from .panel import PanelDataset

COLLINEARITY_TOL = 1e-12
NEGATIVE_WEIGHT_TOL = -1e-12  # weights below this count as negative


@dataclass(frozen=True)
class TwfeFit:
    beta: float
    se: float
    p_value: float  # nan when the fit is exact (zero standard error)
    dof: int
    n_obs: int
    n_treated: int
    residualized_treatment: np.ndarray
    residualized_outcome: np.ndarray
    weights: np.ndarray
    treatment: np.ndarray  # 0/1 over the estimation sample
    unit_effects: dict[str, float]
    period_effects: dict[int, float]
    sample_index: tuple[tuple[str, int], ...]
    inference: str  # "cluster_by_unit" | "classical"


def _estimation_arrays(dataset: PanelDataset):
    """Arrays over the estimation sample (non-missing outcomes), in dataset order."""
    sample = dataset.estimation_sample
    units = []
    seen = set()
    for o in sample:
        if o.unit not in seen:
            seen.add(o.unit)
            units.append(o.unit)
    periods = sorted({o.period for o in sample})
    unit_idx = {u: i for i, u in enumerate(units)}
    period_idx = {p: i for i, p in enumerate(periods)}
    u = np.array([unit_idx[o.unit] for o in sample])
    p = np.array([period_idx[o.period] for o in sample])
    y = np.array([o.outcome for o in sample], dtype=float)
    d = np.array([o.treated for o in sample], dtype=float)
    index = tuple((o.unit, o.period) for o in sample)
    return units, periods, u, p, y, d, index


def _check_sample(units, periods, d, require_both_groups: bool = True):
    if len(units) < 2 or len(periods) < 2:
        raise DegenerateTreatment(
            f"estimation sample needs >= 2 units and >= 2 periods, "
            f"got {len(units)} and {len(periods)}"
        )
    if require_both_groups and d.sum() in (0, len(d)):
        raise DegenerateTreatment("estimation sample is all-treated or all-untreated")


def _fe_design(units, periods, u, p) -> DesignMatrix:
    """Intercept plus unit and period dummies (first category of each dropped)."""
    n = len(u)
    cols = [np.ones(n)]
    labels = ["intercept"]
    for i, unit in enumerate(units[1:], start=1):
        cols.append((u == i).astype(float))
        labels.append(f"unit:{unit}")
    for j, period in enumerate(periods[1:], start=1):
        cols.append((p == j).astype(float))
        labels.append(f"period:{period}")
    return DesignMatrix(np.column_stack(cols), tuple(labels))


def _residualize(design: DesignMatrix, v: np.ndarray) -> np.ndarray:
    return solve_least_squares(design, v).residuals


def fit_twfe(dataset: PanelDataset, inference: str = "cluster_by_unit") -> TwfeFit:
    """OLS of outcome on treatment plus full unit and period dummy sets.

    Also runs the two auxiliary regressions (treatment on the fixed effects,
    outcome on the fixed effects) to populate the residualized vectors and
    the per-observation weights behind the coefficient.
    """
    if inference not in ("cluster_by_unit", "classical"):
        raise ValueError(f"unknown inference kind {inference!r}")
    units, periods, u, p, y, d, index = _estimation_arrays(dataset)
    _check_sample(units, periods, d)

    fe = _fe_design(units, periods, u, p)
    d_resid = _residualize(fe, d)
    ssd = float(d_resid @ d_resid)
    if ssd < COLLINEARITY_TOL * len(d):
        raise CollinearTreatment("treatment is collinear with the fixed effects")
    y_resid = _residualize(fe, y)

    X = DesignMatrix(
        np.column_stack([fe.values, d]), fe.labels + ("treatment",)
    )
    fit = solve_least_squares(X, y)
    t_col = X.k - 1
    if t_col in fit.dropped:  # pragma: no cover - guarded by the ssd check
        raise CollinearTreatment("treatment column dropped as dependent")
    beta = float(fit.coefficients[t_col])

    if fit.dof_residual == 0:
        # saturated design: an exact fit with no residual degrees of freedom
        se = 0.0
        dof = len(np.unique(u)) - 1 if inference == "cluster_by_unit" else 0
    elif inference == "cluster_by_unit":
        cov = cluster_robust_covariance(fit, X, u)
        dof = cov.clusters - 1
        se = float(cov.standard_errors()[t_col])
    else:
        cov = classical_covariance(fit, X)
        dof = fit.dof_residual
        se = float(cov.standard_errors()[t_col])
    p_value = t_test(beta, se, dof)[1] if se > 0 else nan

    coefs = fit.coefficients
    intercept = float(coefs[0])
    unit_effects = {units[0]: intercept}
    period_effects = {periods[0]: 0.0}
    for k, label in enumerate(X.labels):
        if label.startswith("unit:"):
            unit_effects[label[5:]] = intercept + float(coefs[k])
        elif label.startswith("period:"):
            period_effects[int(label[7:])] = float(coefs[k])

    weights = d_resid / ssd
    return TwfeFit(
        beta=beta,
        se=se,
        p_value=p_value,
        dof=dof,
        n_obs=len(y),
        n_treated=int(d.sum()),
        residualized_treatment=d_resid,
        residualized_outcome=y_resid,
        weights=weights,
        treatment=d.astype(int),
        unit_effects=unit_effects,
        period_effects=period_effects,
        sample_index=index,
        inference=inference,
    )


def residualize_treatment(dataset: PanelDataset) -> np.ndarray:
    """Residuals of the treatment dummy on unit and period fixed effects."""
    units, periods, u, p, _, d, _ = _estimation_arrays(dataset)
    _check_sample(units, periods, d, require_both_groups=False)
    d_resid = _residualize(_fe_design(units, periods, u, p), d)
    if float(d_resid @ d_resid) < COLLINEARITY_TOL * len(d):
        raise CollinearTreatment("treatment is collinear with the fixed effects")
    return d_resid


def residualize_outcome(dataset: PanelDataset) -> np.ndarray:
    """Residuals of the outcome on unit and period fixed effects."""
    units, periods, u, p, y, d, _ = _estimation_arrays(dataset)
    _check_sample(units, periods, d, require_both_groups=False)
    return _residualize(_fe_design(units, periods, u, p), y)


def balanced_weights_closed_form(dataset: PanelDataset) -> np.ndarray:
    """Residualized treatment on a balanced panel by double demeaning:
    D - unit mean - period mean + grand mean, evaluated termwise."""
    if not dataset.is_balanced():
        raise UnbalancedPanel("closed form requires a balanced panel")
    units, periods, u, p, _, d, _ = _estimation_arrays(dataset)
    n_units, n_periods = len(units), len(periods)
    unit_mean = np.bincount(u, weights=d, minlength=n_units) / n_periods
    period_mean = np.bincount(p, weights=d, minlength=n_periods) / n_units
    grand_mean = d.mean()
    return d - unit_mean[u] - period_mean[p] + grand_mean


def fwl_weights(d_resid: np.ndarray) -> np.ndarray:
    """Per-observation weights: residualized treatment scaled by its sum of squares."""
    d_resid = np.asarray(d_resid, dtype=float)
    ssd = float(d_resid @ d_resid)
    if ssd <= 0:
        raise ZeroVariance("residualized treatment has zero sum of squares")
    return d_resid / ssd


def beta_from_weights(w: np.ndarray, y: np.ndarray) -> float:
    """Treatment coefficient as the weighted sum of outcomes."""
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    if w.shape != y.shape:
        raise DimensionMismatch(f"shape mismatch: {w.shape} vs {y.shape}")
    return float(w @ y)
