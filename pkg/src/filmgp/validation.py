"""Leave-one-out cross-validation of the localisation models.

Each fold refits the polar GP on the remaining entries (hyperparameters
re-optimized from scratch), scores the held-out label at the held-out true
location, and measures the distance between the likelihood-map argmax and
that true location. Per-fold optimizer seeds are keyed to the held-out
operating point rather than its list position, so shuffling the dataset
cannot change any aggregate.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .bearing import ShaftLocation
from .errors import FilmgpError, InsufficientDataError
from .locator import (
    GridSpec,
    LocalisationDataset,
    SwarmConfig,
    fit_location_gp,
    likelihood_map,
    point_log_likelihood,
    stable_seed,
)

REPORT_SCHEMA_VERSION = 1

FOLDS_CSV_HEADER = (
    "fold",
    "speed_rpm",
    "load_N",
    "true_rho_m",
    "true_theta_rad",
    "predicted_rho_m",
    "predicted_theta_rad",
    "log_likelihood",
    "rmse",
)


def rmse(predicted: ShaftLocation, truth: ShaftLocation) -> float:
    """Distance between shaft centres in clearance-normalized coordinates.

    Both locations are mapped to (eps*cos(theta), eps*sin(theta)); the
    result is dimensionless and a metric on that plane.
    """
    dx = predicted.eccentricity_ratio * math.cos(predicted.theta) - truth.eccentricity_ratio * math.cos(truth.theta)
    dy = predicted.eccentricity_ratio * math.sin(predicted.theta) - truth.eccentricity_ratio * math.sin(truth.theta)
    return math.hypot(dx, dy)


@dataclass(frozen=True)
class FoldResult:
    """One LOOCV fold: held-out point, its score and the localisation error."""

    fold: int
    speed_rpm: float
    load_n: float
    true_location: ShaftLocation
    predicted_location: ShaftLocation
    log_likelihood: float
    rmse: float


@dataclass(frozen=True)
class CVReport:
    """Per-fold results and their arithmetic-mean aggregates."""

    model_variant: str
    folds: tuple[FoldResult, ...]
    failures: tuple[str, ...]
    averaged_marginal_likelihood: float
    averaged_rmse: float

    @property
    def fold_count(self) -> int:
        return len(self.folds)


def loocv(
    data: LocalisationDataset,
    model_variant: str,
    opt: SwarmConfig = SwarmConfig(),
    grid: "GridSpec | None" = None,
    include_noise: bool = True,
) -> CVReport:
    """Leave-one-out validation of one localisation model variant.

    The held-out label is scored with the map's scalar log-likelihood at
    the held-out true location; the map argmax (not the score point) gives
    the predicted location for the RMSE. Failed folds are skipped and
    recorded.
    """
    if data.size < 3:
        raise InsufficientDataError(f"LOOCV needs at least 3 entries, got {data.size}")
    if grid is None:
        grid = GridSpec.quadrant(data.clearance)
    folds: list[FoldResult] = []
    failures: list[str] = []
    for index, held_out in enumerate(data.entries):
        rest = tuple(e for k, e in enumerate(data.entries) if k != index)
        subset = LocalisationDataset(rest, data.clearance)
        op = held_out.operating_point
        fold_opt = replace(opt, seed=stable_seed(opt.seed, "fold", op.speed, op.load))
        try:
            model = fit_location_gp(subset, model_variant, fold_opt)
        except FilmgpError as exc:
            failures.append(f"fold {index} ({op.speed:.6g} rad/s, {op.load:.6g} N): {exc}")
            continue
        true_loc = held_out.location
        score = point_log_likelihood(model, held_out.label, true_loc.rho, true_loc.theta, include_noise)
        lmap = likelihood_map(model, held_out.label, grid, include_noise)
        rho_star, theta_star = lmap.argmax_node
        predicted = ShaftLocation.from_polar(
            min(rho_star, data.clearance * (1.0 - 1e-12)), theta_star, data.clearance
        )
        folds.append(
            FoldResult(
                fold=index,
                speed_rpm=op.speed * 60.0 / (2.0 * math.pi),
                load_n=op.load,
                true_location=true_loc,
                predicted_location=predicted,
                log_likelihood=score,
                rmse=rmse(predicted, true_loc),
            )
        )
    if not folds:
        raise InsufficientDataError("every LOOCV fold failed: " + "; ".join(failures))
    avg_ll = sum(f.log_likelihood for f in folds) / len(folds)
    avg_rmse = sum(f.rmse for f in folds) / len(folds)
    return CVReport(model_variant, tuple(folds), tuple(failures), avg_ll, avg_rmse)


def report_to_dict(report: CVReport, clearance: "float | None" = None) -> dict:
    """JSON-ready report; with a clearance the RMSE is also given in metres."""
    payload = {
        "model_variant": report.model_variant,
        "fold_count": report.fold_count,
        "averaged_marginal_likelihood": report.averaged_marginal_likelihood,
        "averaged_rmse": report.averaged_rmse,
        "failures": list(report.failures),
        "folds": [
            {
                "fold": f.fold,
                "speed_rpm": f.speed_rpm,
                "load_N": f.load_n,
                "true": {"rho_m": f.true_location.rho, "theta_rad": f.true_location.theta},
                "predicted": {
                    "rho_m": f.predicted_location.rho,
                    "theta_rad": f.predicted_location.theta,
                },
                "log_likelihood": f.log_likelihood,
                "rmse": f.rmse,
            }
            for f in report.folds
        ],
    }
    if clearance is not None:
        payload["averaged_rmse_m"] = report.averaged_rmse * clearance
    return payload


def save_reports(path: "str | Path", reports: "list[CVReport]", clearance: "float | None" = None) -> None:
    """Write one combined JSON document for several model variants."""
    document = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "models": {r.model_variant: report_to_dict(r, clearance) for r in reports},
    }
    with open(path, "w") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_folds_csv(path: "str | Path", reports: "list[CVReport]") -> None:
    """Flat per-fold CSV across model variants."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("model",) + FOLDS_CSV_HEADER)
        for report in reports:
            for f in report.folds:
                writer.writerow(
                    [
                        report.model_variant,
                        f.fold,
                        repr(f.speed_rpm),
                        repr(f.load_n),
                        repr(f.true_location.rho),
                        repr(f.true_location.theta),
                        repr(f.predicted_location.rho),
                        repr(f.predicted_location.theta),
                        repr(f.log_likelihood),
                        repr(f.rmse),
                    ]
                )
