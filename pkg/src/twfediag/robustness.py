"""Sample-restriction robustness sweeps: truncating later years, capping
post-treatment horizons, and leave-one-unit-out re-estimation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoFeasiblePoint, TwfeDiagError
from .diagnostics import weight_report
from .lsq import t_critical
from .panel import AdoptionSchedule, PanelDataset
from .twfe import TwfeFit, fit_twfe

DEFAULT_LEVEL = 0.95


@dataclass(frozen=True)
class SweepPoint:
    label: str
    beta: float
    ci_low: float
    ci_high: float
    share_negative_treated: float
    n_obs: int
    n_treated: int


@dataclass(frozen=True)
class RobustnessSweep:
    kind: str  # "end_year" | "post_horizon" | "leave_one_out"
    points: tuple[SweepPoint, ...]
    baseline: SweepPoint
    skipped: tuple[tuple[str, str], ...]  # (label, reason) for infeasible points


def _point(label: str, fit: TwfeFit, level: float) -> SweepPoint:
    report = weight_report(fit)
    half = t_critical(level, fit.dof) * fit.se
    return SweepPoint(
        label=label,
        beta=fit.beta,
        ci_low=fit.beta - half,
        ci_high=fit.beta + half,
        share_negative_treated=report.share_treated_negative,
        n_obs=fit.n_obs,
        n_treated=report.n_treated,
    )


def _run_sweep(kind, dataset, inference, level, subsamples) -> RobustnessSweep:
    baseline = _point("full_sample", fit_twfe(dataset, inference), level)
    points = []
    skipped = []
    for label, subsample in subsamples:
        try:
            fit = fit_twfe(subsample, inference)
        except TwfeDiagError as exc:
            skipped.append((label, f"{type(exc).__name__}: {exc}"))
            continue
        points.append(_point(label, fit, level))
    if not points:
        raise NoFeasiblePoint(f"no feasible {kind} sweep point")
    return RobustnessSweep(
        kind=kind, points=tuple(points), baseline=baseline, skipped=tuple(skipped)
    )


def sweep_end_year(
    dataset: PanelDataset,
    first_end: int,
    last_end: int,
    inference: str = "cluster_by_unit",
    level: float = DEFAULT_LEVEL,
) -> RobustnessSweep:
    """Refit on samples truncated at each end period in [first_end, last_end]."""
    if first_end > last_end:
        raise ValueError("first_end must not exceed last_end")
    subsamples = (
        (str(end), dataset.restrict(lambda o, end=end: o.period <= end))
        for end in range(first_end, last_end + 1)
    )
    return _run_sweep("end_year", dataset, inference, level, subsamples)


def sweep_post_horizon(
    dataset: PanelDataset,
    schedule: AdoptionSchedule,
    horizons: list[int],
    inference: str = "cluster_by_unit",
    level: float = DEFAULT_LEVEL,
) -> RobustnessSweep:
    """Refit keeping at most h post-adoption periods per ever-treated unit.

    All pre-treatment periods are retained; never-treated units keep every
    period.
    """
    if not horizons:
        raise ValueError("horizons must be non-empty")
    if any(h < 0 for h in horizons):
        raise ValueError("horizons must be non-negative")
    for unit in dataset.units:
        schedule.adoption(unit)  # raises UnknownUnit

    def subsample(h: int) -> PanelDataset:
        def keep(o):
            adoption = schedule.entries[o.unit]
            return adoption is None or o.period <= adoption + h

        return dataset.restrict(keep)

    subsamples = ((str(h), subsample(h)) for h in horizons)
    return _run_sweep("post_horizon", dataset, inference, level, subsamples)


def leave_one_unit_out(
    dataset: PanelDataset,
    inference: str = "cluster_by_unit",
    level: float = DEFAULT_LEVEL,
) -> RobustnessSweep:
    """Refit dropping one unit at a time; points ordered by the dropped
    unit's adoption period (never-treated last), then unit name."""
    if len(dataset.units) < 3:
        raise ValueError("leave-one-out needs at least 3 units")
    first_treated = dataset.first_treated_periods()
    order = sorted(
        dataset.units,
        key=lambda u: (
            first_treated[u] is None,
            first_treated[u] if first_treated[u] is not None else 0,
            u,
        ),
    )
    subsamples = (
        (unit, dataset.restrict(lambda o, unit=unit: o.unit != unit)) for unit in order
    )
    return _run_sweep("leave_one_out", dataset, inference, level, subsamples)
