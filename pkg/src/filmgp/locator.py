"""Two-stage shaft-centre inference.

Stage one works per operating condition: trim the circumferential film
observations to a window around the estimated minimum, fit a GP over
angle -> thickness with swarm-optimized hyperparameters, and extract the
posterior-mean minimum as an (eccentricity, attitude) shaft location.

Stage two pools the per-condition locations, labelled by their normalized
speed-load ratio, into a 2-D polar GP (Model A: polynomial-exponential
radial decay; Model B: Matérn 3/2 radial; both share the Wendland angular
factor). Querying a new speed-load ratio scores every node of a polar grid
with the scalar Gaussian log-likelihood of that ratio under the node's
predictive distribution, and the map argmax is the inferred location.
"""

from __future__ import annotations

import csv
import hashlib
import math
import statistics
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bearing import (
    BearingGeometry,
    OperatingPoint,
    ShaftLocation,
    eccentricity_from_hmin,
    wrap_angle,
)
from .errors import (
    FilmgpError,
    ImplausibleFilmError,
    InsufficientDataError,
    InvalidMeasurementError,
)
from .gp import GPModel, TrainingSet, fit, log_marginal_likelihood, predict
from .kernels import (
    ANOVA2D_MATERN,
    ANOVA2D_POL,
    FREE_PARAMS,
    MATERN32,
    PERIODIC,
    SQUARED_EXPONENTIAL,
    KernelSpec,
)
from .qpso import OptimizationResult, SearchSpace, SwarmConfig, optimize
from .ultrasound import METHOD_PHASE, METHOD_RESONANT_DIP, FilmObservation

MODEL_A = "A"
MODEL_B = "B"
MODEL_VARIANTS = {MODEL_A: ANOVA2D_POL, MODEL_B: ANOVA2D_MATERN}

DEFAULT_TRIM_HALF_WIDTH = math.radians(18.0)
DEFAULT_MEDIAN_HALF_WIDTH = math.radians(18.0)
DEFAULT_DATASET_METHODS = (METHOD_PHASE, METHOD_RESONANT_DIP)

DATASET_CSV_HEADER = ("rho_m", "theta_rad", "y_ratio", "speed_rpm", "load_N")
MAP_CSV_HEADER = ("rho_m", "theta_rad", "loglik")

LOG_2PI = math.log(2.0 * math.pi)


def stable_seed(master: int, *parts) -> int:
    """Deterministic 63-bit seed derived from a master seed and a key.

    Floats in the key are formatted to 12 significant digits so the seed
    depends on the identity of the keyed object, not its list position.
    """
    rendered = [str(int(master))]
    for part in parts:
        if isinstance(part, float):
            rendered.append(f"{part:.12e}")
        else:
            rendered.append(str(part))
    digest = hashlib.blake2b("|".join(rendered).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def angular_distance(a: float, b: float) -> float:
    """Geodesic distance between two angles, in [0, pi]."""
    delta = abs(a - b) % (2.0 * math.pi)
    return min(delta, 2.0 * math.pi - delta)


@dataclass(frozen=True)
class TrimWindow:
    """Closed angular window around the estimated film minimum."""

    half_width: float = DEFAULT_TRIM_HALF_WIDTH
    reference_angle: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.half_width <= math.pi):
            raise ValueError(f"half_width must be in (0, pi], got {self.half_width!r}")


def trim_observations(
    observations: "list[FilmObservation]", window: TrimWindow
) -> list[FilmObservation]:
    """Keep observations within the window (boundary included), per method.

    Every method is trimmed around the same reference angle, so the merged
    result equals a single pass; order is preserved.
    """
    kept = [
        obs
        for obs in observations
        if angular_distance(obs.shaft_angle, window.reference_angle) <= window.half_width
    ]
    if not kept:
        raise InsufficientDataError(
            f"no observations within {math.degrees(window.half_width):.1f} deg of "
            f"{math.degrees(window.reference_angle):.1f} deg"
        )
    return kept


def estimate_min_reference(
    observations: "list[FilmObservation]",
    median_half_width: float = DEFAULT_MEDIAN_HALF_WIDTH,
) -> float:
    """Angle of the film minimum from a coarse robust fit.

    A moving median over a fixed angular window smooths the thickness
    profile; the angle of the first smoothed minimum is returned. With
    uniform profiles (concentric shaft) this degenerates gracefully to the
    first observation angle.
    """
    if not observations:
        raise InsufficientDataError("cannot estimate a minimum reference without observations")
    ordered = sorted(observations, key=lambda o: (o.shaft_angle, o.method, o.thickness))
    angles = np.array([o.shaft_angle for o in ordered])
    thickness = np.array([o.thickness for o in ordered])
    # replicate one period on both sides so windows can wrap the seam
    extended_angles = np.concatenate([angles - 2.0 * math.pi, angles, angles + 2.0 * math.pi])
    extended_thickness = np.tile(thickness, 3)
    lo = np.searchsorted(extended_angles, angles - median_half_width, side="left")
    hi = np.searchsorted(extended_angles, angles + median_half_width, side="right")
    smoothed = np.array(
        [np.median(extended_thickness[lo[i] : hi[i]]) for i in range(len(ordered))]
    )
    return float(angles[int(np.argmin(smoothed))])


# ---------------------------------------------------------------------------
# stage one: film GP per operating condition
# ---------------------------------------------------------------------------

_VARIANCE_FLOOR = 1e-30


def film_search_space(
    variant: str,
    targets: np.ndarray,
    pin_noise: bool = False,
    geom: "BearingGeometry | None" = None,
    noise_hint: "float | None" = None,
) -> SearchSpace:
    """Log-space hyperparameter bounds for an angle -> thickness GP.

    Without geometry the bounds are generic, scaled by the target variance.
    With geometry the film profile is known to be a one-revolution cosine of
    amplitude roughly clearance minus the observed minimum, so the signal
    variance is confined around that amplitude, length scales below the
    profile's curvature scale are excluded, and the noise variance is
    bracketed around the observations' own noise metadata (``noise_hint``,
    a variance). Trimmed-window fits are weakly identified otherwise: the
    evidence happily picks a wiggly interpolant or an all-noise flat fit,
    both of which wreck the minimum extraction.
    """
    v = max(float(np.var(targets)), _VARIANCE_FLOOR)
    if geom is None:
        bounds = {
            "signal_variance": (math.log(1e-4 * v), math.log(1e4 * v)),
            "length_scale": (math.log(0.02), math.log(4.0 * math.pi)),
            "period": (math.log(1.9 * math.pi), math.log(2.1 * math.pi)),
        }
        noise_bounds = (math.log(1e-9 * v), math.log(4.0 * v))
    else:
        amplitude = film_amplitude_hint(targets, geom.clearance)
        v_signal = 0.5 * amplitude**2
        if noise_hint is None or noise_hint <= 0.0:
            noise_hint = 1e-10 * amplitude**2
        # keep the kernel's one-per-revolution harmonic near the physical
        # amplitude: its prior variance scales like signal_variance / l^2,
        # so both windows must stay narrow or near-flat fits sneak back in
        # (sigma_f at its floor with l at its cap) and wreck the minimum
        # extraction; the input coordinate is the shaft angle, so the
        # period is one revolution up to encoder calibration
        bounds = {
            "signal_variance": (math.log(1.0 * v_signal), math.log(2.0 * v_signal)),
            "length_scale": (math.log(1.6), math.log(2.0)),
            "period": (math.log(0.999 * 2.0 * math.pi), math.log(1.001 * 2.0 * math.pi)),
        }
        noise_bounds = (math.log(0.25 * noise_hint), math.log(4.0 * noise_hint))
    names = [n for n in FREE_PARAMS[variant]]
    if not pin_noise:
        names.append("noise_variance")
        bounds["noise_variance"] = noise_bounds
    lower = np.array([bounds[n][0] for n in names])
    upper = np.array([bounds[n][1] for n in names])
    return SearchSpace(tuple(names), lower, upper)


def film_amplitude_hint(targets: np.ndarray, clearance: float) -> float:
    """Robust estimate of the profile's cosine amplitude, clearance - h_min."""
    amplitude = clearance - float(np.percentile(targets, 5.0))
    return max(amplitude, 1e-6 * clearance)


def _nlml_objective(
    variant: str,
    fixed_params: dict,
    space: SearchSpace,
    inputs: np.ndarray,
    targets: np.ndarray,
    pinned_noise: "float | None",
    center_targets: bool,
):
    def objective(theta: np.ndarray) -> float:
        values = space.values(theta)
        noise = values.pop("noise_variance", pinned_noise)
        spec = KernelSpec(variant, {**fixed_params, **values})
        try:
            model = fit(spec, TrainingSet(inputs, targets, noise), center_targets)
        except FilmgpError:
            return math.inf
        return -log_marginal_likelihood(model)

    return objective


def _optimized_model(
    variant: str,
    fixed_params: dict,
    space: SearchSpace,
    inputs: np.ndarray,
    targets: np.ndarray,
    opt: SwarmConfig,
    pinned_noise: "float | None",
    center_targets: bool,
) -> tuple[GPModel, OptimizationResult]:
    objective = _nlml_objective(
        variant, fixed_params, space, inputs, targets, pinned_noise, center_targets
    )
    result = optimize(objective, space, opt)
    values = space.values(result.theta)
    noise = values.pop("noise_variance", pinned_noise)
    spec = KernelSpec(variant, {**fixed_params, **values})
    model = fit(spec, TrainingSet(inputs, targets, noise), center_targets)
    return model, result


def fit_film_gp_detailed(
    observations: "list[FilmObservation]",
    kernel: "str | KernelSpec" = PERIODIC,
    opt: SwarmConfig = SwarmConfig(),
    pin_noise_variance: "float | None" = None,
    max_design_points: "int | None" = None,
    geom: "BearingGeometry | None" = None,
) -> tuple[GPModel, OptimizationResult]:
    """Fit an angle -> thickness GP with swarm-optimized hyperparameters.

    Targets are centred on their mean before fitting (the offset is folded
    back into predictions), matching a zero-mean prior. ``kernel`` may be a
    variant name or a KernelSpec template whose structural parameters are
    kept fixed. Passing the bearing geometry switches the hyperparameter
    bounds to the physically informed ones (see film_search_space), which
    is what stage-two pipelines should do. With ``max_design_points``,
    hyperparameters are optimized on an even angular subsample of at most
    that many observations (the cubic likelihood cost dominates otherwise)
    while the returned model still conditions on every observation. Returns
    the fitted model together with the optimization result (best negative
    log marginal likelihood and its trace).
    """
    if len(observations) < 3:
        raise InsufficientDataError(
            f"film fit needs at least 3 observations, got {len(observations)}"
        )
    variant = kernel if isinstance(kernel, str) else kernel.variant
    if variant not in (SQUARED_EXPONENTIAL, MATERN32, PERIODIC):
        raise ValueError(f"film kernel must be a scalar-input variant, got {variant!r}")
    order = sorted(range(len(observations)), key=lambda i: (observations[i].shaft_angle, observations[i].method))
    angles = np.array([wrap_angle(observations[i].shaft_angle) for i in order])
    thickness = np.array([observations[i].thickness for i in order])
    noise_hint = float(np.mean([observations[i].noise_std ** 2 for i in order]))
    space = film_search_space(
        variant,
        thickness,
        pin_noise=pin_noise_variance is not None,
        geom=geom,
        noise_hint=noise_hint,
    )
    if max_design_points is not None and len(angles) > max_design_points:
        stride = -(-len(angles) // max_design_points)
        design_angles = angles[::stride]
        design_thickness = thickness[::stride]
        model, result = _optimized_model(
            variant, {}, space, design_angles, design_thickness, opt, pin_noise_variance,
            center_targets=True,
        )
        full = fit(model.kernel, TrainingSet(angles, thickness, model.training.noise_variance),
                   center_targets=True)
        return full, result
    return _optimized_model(
        variant, {}, space, angles, thickness, opt, pin_noise_variance, center_targets=True
    )


def fit_film_gp(
    observations: "list[FilmObservation]",
    kernel: "str | KernelSpec" = PERIODIC,
    opt: SwarmConfig = SwarmConfig(),
    pin_noise_variance: "float | None" = None,
    max_design_points: "int | None" = None,
    geom: "BearingGeometry | None" = None,
) -> GPModel:
    return fit_film_gp_detailed(
        observations, kernel, opt, pin_noise_variance, max_design_points, geom
    )[0]


def _golden_minimize(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def extract_shaft_location(
    model: GPModel,
    geom: BearingGeometry,
    load_angle: float = 0.0,
    grid_size: int = 3600,
) -> ShaftLocation:
    """Shaft location from the posterior-mean film minimum.

    The minimum is bracketed on a dense angular grid and refined by
    golden-section search; its thickness maps to the eccentricity ratio and
    its angle (relative to the load line) to the attitude angle.
    """
    thetas = np.linspace(0.0, 2.0 * math.pi, grid_size, endpoint=False)
    mean, _ = predict(model, thetas)
    i = int(np.argmin(mean))
    step = 2.0 * math.pi / grid_size

    def posterior_mean(theta: float) -> float:
        return float(predict(model, [theta])[0][0])

    theta_star = _golden_minimize(posterior_mean, thetas[i] - step, thetas[i] + step)
    h_min = posterior_mean(theta_star)
    if h_min <= 0.0 or h_min > geom.clearance:
        raise ImplausibleFilmError(
            f"posterior film minimum {h_min!r} m outside (0, clearance={geom.clearance!r}]"
        )
    eps = eccentricity_from_hmin(geom, h_min)
    return ShaftLocation.from_eccentricity(eps, wrap_angle(theta_star), geom.clearance, load_angle)


# ---------------------------------------------------------------------------
# stage two: localisation dataset and polar GP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalisationEntry:
    """One shaft location labelled by its normalized speed-load ratio."""

    location: ShaftLocation
    label: float
    operating_point: OperatingPoint

    def __post_init__(self) -> None:
        if not (math.isfinite(self.label) and self.label > 0.0):
            raise ValueError(f"label must be positive, got {self.label!r}")


@dataclass(frozen=True)
class LocalisationDataset:
    """Labelled shaft locations plus the clearance they were measured in."""

    entries: tuple[LocalisationEntry, ...]
    clearance: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValueError("dataset needs at least one entry")
        if self.clearance <= 0.0:
            raise ValueError("clearance must be positive")

    @property
    def size(self) -> int:
        return len(self.entries)

    def inputs(self) -> np.ndarray:
        return np.array([(e.location.rho, e.location.theta) for e in self.entries])

    def labels(self) -> np.ndarray:
        return np.array([e.label for e in self.entries])

    def normalization_ratio(self) -> float:
        """Raw speed-load ratio corresponding to label 1.0.

        Recovered from the stored rows, so re-reading an exported CSV keeps
        the original normalization even for subsets.
        """
        ratios = [
            (e.operating_point.speed / e.operating_point.load) / e.label for e in self.entries
        ]
        return statistics.median(ratios)

    def query_label(self, op: OperatingPoint) -> float:
        """Label a new operating point on the dataset's normalization scale."""
        return (op.speed / op.load) / self.normalization_ratio()


def build_dataset(
    runs: "list[tuple[OperatingPoint, list[FilmObservation]]]",
    geom: BearingGeometry,
    kernel: "str | KernelSpec" = PERIODIC,
    opt: SwarmConfig = SwarmConfig(),
    trim_half_width: float = DEFAULT_TRIM_HALF_WIDTH,
    methods: tuple[str, ...] = DEFAULT_DATASET_METHODS,
    load_angle: float = 0.0,
    median_half_width: float = DEFAULT_MEDIAN_HALF_WIDTH,
) -> tuple[LocalisationDataset, list[str]]:
    """Trim, fit and extract every run, then label with normalized ratios.

    Labels are raw speed/load ratios divided by the dataset maximum, so the
    largest label is exactly 1. Per-run optimizer seeds derive from the run's
    operating point, not its list position. Failed runs are skipped and
    reported in the returned list of messages; at least one run must
    succeed.
    """
    if not runs:
        raise InsufficientDataError("build_dataset needs at least one run")
    located: list[tuple[ShaftLocation, float, OperatingPoint]] = []
    failures: list[str] = []
    for op, observations in runs:
        try:
            selected = [o for o in observations if o.method in methods]
            if not selected:
                raise InsufficientDataError(f"no observations from methods {methods}")
            reference = estimate_min_reference(selected, median_half_width)
            trimmed = trim_observations(selected, TrimWindow(trim_half_width, reference))
            run_opt = replace(opt, seed=stable_seed(opt.seed, "film-run", op.speed, op.load))
            model = fit_film_gp(trimmed, kernel, run_opt, geom=geom)
            location = extract_shaft_location(model, geom, load_angle)
            located.append((location, op.speed / op.load, op))
        except FilmgpError as exc:
            failures.append(
                f"run at {op.speed:.6g} rad/s, {op.load:.6g} N failed: {exc}"
            )
    if not located:
        raise InsufficientDataError(
            "every run failed: " + "; ".join(failures) if failures else "every run failed"
        )
    max_ratio = max(ratio for _, ratio, _ in located)
    entries = tuple(
        LocalisationEntry(loc, ratio / max_ratio, op) for loc, ratio, op in located
    )
    return LocalisationDataset(entries, geom.clearance), failures


def location_search_space(
    variant: str, labels: np.ndarray, clearance: float, pin_noise: bool = False
) -> SearchSpace:
    """Log-space bounds for the 2-D polar localisation GP."""
    v = max(float(np.var(labels)), 1e-12)
    bounds = {
        "outer_variance": (math.log(1e-3 * v), math.log(1e3 * v)),
        "radial_weight": (math.log(1e-2), math.log(1e2)),
        "angular_weight": (math.log(1e-2), math.log(1e2)),
        "radial_length": (math.log(0.1 * clearance), math.log(5.0 * clearance)),
        # the shaft can sit anywhere in [0, clearance], so the radial decay
        # support must be order-clearance; smaller scales degenerate the
        # polynomial-decay kernel to a thin ring with zero prior variance
        # over most of the bore
        "decay_scale": (math.log(0.5 * clearance), math.log(2.0 * clearance)),
    }
    names = [n for n in FREE_PARAMS[variant]]
    if not pin_noise:
        names.append("noise_variance")
        # labels are exact speed-load ratios, but they sit at locations
        # recovered from noisy film fits; that input scatter acts as label
        # noise wherever the ratio surface has a gradient, so the noise
        # floor stays well above zero
        bounds["noise_variance"] = (math.log(1e-4 * v), math.log(0.25 * v))
    lower = np.array([bounds[n][0] for n in names])
    upper = np.array([bounds[n][1] for n in names])
    return SearchSpace(tuple(names), lower, upper)


def fit_location_gp_detailed(
    data: LocalisationDataset,
    model_variant: str = MODEL_A,
    opt: SwarmConfig = SwarmConfig(),
    pin_noise_variance: "float | None" = None,
) -> tuple[GPModel, OptimizationResult]:
    """Fit the polar GP over (rho, theta) -> label for Model A or B."""
    if model_variant not in MODEL_VARIANTS:
        raise ValueError(f"model_variant must be one of {sorted(MODEL_VARIANTS)}, got {model_variant!r}")
    if data.size < 2:
        raise InsufficientDataError("localisation fit needs at least 2 entries")
    variant = MODEL_VARIANTS[model_variant]
    fixed = {"steepness": 4}
    if variant == ANOVA2D_POL:
        fixed["degree"] = 1
    space = location_search_space(
        variant, data.labels(), data.clearance, pin_noise=pin_noise_variance is not None
    )
    return _optimized_model(
        variant,
        fixed,
        space,
        data.inputs(),
        data.labels(),
        opt,
        pin_noise_variance,
        center_targets=False,
    )


def fit_location_gp(
    data: LocalisationDataset,
    model_variant: str = MODEL_A,
    opt: SwarmConfig = SwarmConfig(),
    pin_noise_variance: "float | None" = None,
) -> GPModel:
    return fit_location_gp_detailed(data, model_variant, opt, pin_noise_variance)[0]


# ---------------------------------------------------------------------------
# likelihood maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Polar evaluation lattice: rho in [0, rho_max], theta span inclusive."""

    rho_max: float
    n_rho: int = 60
    n_theta: int = 90
    theta_min: float = 0.0
    theta_max: float = 0.5 * math.pi

    def __post_init__(self) -> None:
        if self.rho_max <= 0.0:
            raise ValueError("rho_max must be positive")
        if self.n_rho < 2 or self.n_theta < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (self.theta_max > self.theta_min):
            raise ValueError("theta_max must exceed theta_min")
        if self.theta_max - self.theta_min > 2.0 * math.pi:
            raise ValueError("theta span cannot exceed a full circle")

    @classmethod
    def quadrant(cls, rho_max: float, n_rho: int = 60, n_theta: int = 90) -> "GridSpec":
        return cls(rho_max, n_rho, n_theta, 0.0, 0.5 * math.pi)

    @classmethod
    def full_circle(cls, rho_max: float, n_rho: int = 60, n_theta: int = 90) -> "GridSpec":
        # stop one step short of 2*pi so the seam node is not duplicated
        return cls(rho_max, n_rho, n_theta, 0.0, 2.0 * math.pi * (n_theta - 1) / n_theta)

    def rho_values(self) -> np.ndarray:
        return np.linspace(0.0, self.rho_max, self.n_rho)

    def theta_values(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.n_theta)

    def nodes(self) -> np.ndarray:
        """(n_rho * n_theta, 2) array of (rho, theta) pairs, rho outer."""
        rho, theta = self.rho_values(), self.theta_values()
        return np.column_stack([np.repeat(rho, self.n_theta), np.tile(theta, self.n_rho)])


@dataclass(frozen=True)
class LikelihoodMap:
    """Log-likelihood of one queried ratio over a polar grid."""

    grid: GridSpec
    values: np.ndarray
    query: float
    argmax_index: tuple[int, int]

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    @property
    def argmax_node(self) -> tuple[float, float]:
        i, j = self.argmax_index
        return float(self.grid.rho_values()[i]), float(self.grid.theta_values()[j])

    @property
    def max_value(self) -> float:
        return float(self.values[self.argmax_index])


def point_log_likelihood(
    model: GPModel, y_new: float, rho: float, theta: float, include_noise: bool = True
) -> float:
    """Scalar Gaussian log-likelihood of y_new at one polar coordinate."""
    mean, var = predict(model, [(rho, theta)])
    variance = float(var[0]) + (model.training.noise_variance if include_noise else 0.0)
    variance = max(variance, 1e-300)
    return -0.5 * math.log(variance) - (y_new - float(mean[0])) ** 2 / (2.0 * variance) - 0.5 * LOG_2PI


def likelihood_map(
    model: GPModel, y_new: float, grid: GridSpec, include_noise: bool = True
) -> LikelihoodMap:
    """Log-likelihood of a new speed-load ratio at every grid node.

    The predictive variance includes the fitted observation noise by
    default (a new ratio is a noisy observation); ``include_noise=False``
    scores against the latent-function variance only.
    """
    if not (math.isfinite(y_new) and y_new > 0.0):
        raise ValueError(f"queried ratio must be positive, got {y_new!r}")
    mean, var = predict(model, grid.nodes())
    variance = var + (model.training.noise_variance if include_noise else 0.0)
    variance = np.maximum(variance, 1e-300)
    values = -0.5 * np.log(variance) - (y_new - mean) ** 2 / (2.0 * variance) - 0.5 * LOG_2PI
    values = values.reshape(grid.n_rho, grid.n_theta)
    flat_argmax = int(np.argmax(values))
    index = (flat_argmax // grid.n_theta, flat_argmax % grid.n_theta)
    return LikelihoodMap(grid, values, float(y_new), index)


@dataclass(frozen=True)
class LocateSummary:
    """Map argmax plus a 2-nat credible-region area summary."""

    map: LikelihoodMap
    credible_area_fraction: float


def locate(
    model: GPModel,
    y_new: float,
    grid: GridSpec,
    clearance: float,
    load_angle: float = 0.0,
    include_noise: bool = True,
) -> tuple[ShaftLocation, LocateSummary]:
    """Most likely shaft location for a new ratio, with a confidence summary.

    The credible-area fraction is the polar-area-weighted share of grid
    nodes whose log-likelihood lies within 2 nats of the maximum.
    """
    lmap = likelihood_map(model, y_new, grid, include_noise)
    rho_star, theta_star = lmap.argmax_node
    # the outermost grid ring sits exactly at the clearance; nudge inside
    # so the eccentricity ratio stays below 1
    location = ShaftLocation.from_polar(
        min(rho_star, clearance * (1.0 - 1e-12)), theta_star, clearance, load_angle
    )
    weights = np.repeat(grid.rho_values(), grid.n_theta).reshape(grid.n_rho, grid.n_theta)
    total = float(weights.sum())
    credible = float(weights[lmap.values >= lmap.max_value - 2.0].sum())
    fraction = credible / total if total > 0.0 else 0.0
    return location, LocateSummary(lmap, fraction)


# ---------------------------------------------------------------------------
# file interfaces
# ---------------------------------------------------------------------------


def write_dataset_csv(path: "str | Path", dataset: LocalisationDataset) -> None:
    """rho_m,theta_rad,y_ratio,speed_rpm,load_N rows, one per entry."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_CSV_HEADER)
        for e in dataset.entries:
            rpm = e.operating_point.speed * 60.0 / (2.0 * math.pi)
            writer.writerow(
                [repr(e.location.rho), repr(e.location.theta), repr(e.label), repr(rpm), repr(e.operating_point.load)]
            )


def read_dataset_csv(
    path: "str | Path", clearance: float, viscosity: float, load_angle: float = 0.0
) -> LocalisationDataset:
    """Read a dataset CSV back; viscosity is not stored and must be supplied."""
    entries: list[LocalisationEntry] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidMeasurementError(f"{path}: empty dataset file") from None
        if tuple(header) != DATASET_CSV_HEADER:
            raise InvalidMeasurementError(
                f"{path}: bad header {header!r}, expected {','.join(DATASET_CSV_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise InvalidMeasurementError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            try:
                rho, theta, label, rpm, load = (float(v) for v in row)
                op = OperatingPoint(rpm * 2.0 * math.pi / 60.0, load, viscosity)
                entries.append(
                    LocalisationEntry(
                        ShaftLocation.from_polar(rho, theta, clearance, load_angle), label, op
                    )
                )
            except (ValueError, TypeError) as exc:
                raise InvalidMeasurementError(f"{path}:{lineno}: {exc}") from None
    if not entries:
        raise InsufficientDataError(f"{path}: dataset has no rows")
    return LocalisationDataset(tuple(entries), clearance)


def write_map_csv(path: "str | Path", lmap: LikelihoodMap) -> None:
    """rho_m,theta_rad,loglik rows in row-major order, rho outer."""
    rho, theta = lmap.grid.rho_values(), lmap.grid.theta_values()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MAP_CSV_HEADER)
        for i in range(lmap.grid.n_rho):
            for j in range(lmap.grid.n_theta):
                writer.writerow([repr(float(rho[i])), repr(float(theta[j])), repr(float(lmap.values[i, j]))])
