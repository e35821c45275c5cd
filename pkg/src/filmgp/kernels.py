"""Covariance kernels, including polar-aware variants for circular geometry.

Plain kernels (squared exponential, Matérn 3/2, periodic) act on scalar or
Euclidean inputs. The compactly-supported Wendland kernel acts on angles
through the geodesic circle distance min(|dt|, 2*pi - |dt|) and is the
angular factor of the two-dimensional polar kernels, which combine a radial
kernel k_r and the angular kernel k_a multiplicatively:

    k((rho, th), (rho', th')) = s2 * (1 + w_r * k_r(rho, rho')) * (1 + w_a * k_a(th, th'))

Two radial choices are provided: a unit-variance Matérn 3/2, and a
polynomial-exponential decay (rho*rho'/beta^2)^d * exp(-(rho^2+rho'^2)/(2*beta^2))
that vanishes at the bore centre and decays outward, encoding that a shaft
runs concentric at high speed-load ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

SQUARED_EXPONENTIAL = "squared_exponential"
MATERN32 = "matern32"
PERIODIC = "periodic"
WENDLAND_POLAR = "wendland_polar"
ANOVA2D_POL = "anova2d_pol"
ANOVA2D_MATERN = "anova2d_matern"

VARIANTS = (
    SQUARED_EXPONENTIAL,
    MATERN32,
    PERIODIC,
    WENDLAND_POLAR,
    ANOVA2D_POL,
    ANOVA2D_MATERN,
)

# Hyperparameter schema per variant. "steepness" (integer >= 4) and "degree"
# (integer >= 1) are structural and excluded from continuous optimization.
PARAM_NAMES: dict[str, tuple[str, ...]] = {
    SQUARED_EXPONENTIAL: ("signal_variance", "length_scale"),
    MATERN32: ("signal_variance", "length_scale"),
    PERIODIC: ("signal_variance", "length_scale", "period"),
    WENDLAND_POLAR: ("steepness",),
    ANOVA2D_MATERN: ("outer_variance", "radial_weight", "angular_weight", "radial_length", "steepness"),
    ANOVA2D_POL: (
        "outer_variance",
        "radial_weight",
        "angular_weight",
        "decay_scale",
        "degree",
        "steepness",
    ),
}
INTEGER_PARAMS = ("steepness", "degree")
# Continuous (optimizable) hyperparameters per variant.
FREE_PARAMS: dict[str, tuple[str, ...]] = {
    variant: tuple(n for n in names if n not in INTEGER_PARAMS)
    for variant, names in PARAM_NAMES.items()
}

_INPUT_COLUMNS = {variant: 2 if variant.startswith("anova2d") else 1 for variant in VARIANTS}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel variant plus its hyperparameter values."""

    variant: str
    params: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown kernel variant {self.variant!r}; known: {VARIANTS}")
        expected = PARAM_NAMES[self.variant]
        got = tuple(sorted(self.params))
        if got != tuple(sorted(expected)):
            raise ValueError(
                f"{self.variant} expects hyperparameters {sorted(expected)}, got {sorted(got)}"
            )
        for name, value in self.params.items():
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"hyperparameter {name} must be positive and finite, got {value!r}")
        steepness = self.params.get("steepness")
        if steepness is not None and (steepness < 4 or steepness != int(steepness)):
            raise ValueError(f"steepness must be an integer >= 4, got {steepness!r}")
        degree = self.params.get("degree")
        if degree is not None and (degree < 1 or degree != int(degree)):
            raise ValueError(f"degree must be an integer >= 1, got {degree!r}")

    @property
    def input_columns(self) -> int:
        return _INPUT_COLUMNS[self.variant]

    def replace(self, **updates: float) -> "KernelSpec":
        merged = dict(self.params)
        merged.update(updates)
        return KernelSpec(self.variant, merged)


def as_input_matrix(spec: KernelSpec, x) -> np.ndarray:
    """Coerce inputs to an (n, columns) float matrix for the given kernel."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if spec.input_columns == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != spec.input_columns:
        raise ValueError(
            f"{spec.variant} expects inputs with {spec.input_columns} column(s), got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("kernel inputs must be finite")
    return arr


def circle_distance(theta_a: np.ndarray, theta_b: np.ndarray) -> np.ndarray:
    """Pairwise geodesic distance on the circle, in [0, pi]."""
    delta = np.abs(theta_a[:, None] - theta_b[None, :]) % (2.0 * math.pi)
    return np.minimum(delta, 2.0 * math.pi - delta)


def _wendland(t: np.ndarray, steepness: float) -> np.ndarray:
    """Compactly supported Wendland covariance on geodesic angle t in [0, pi].

    Equals 1 at t = 0 and 0 at t = pi; requires integer steepness >= 4 for
    positive semi-definiteness on the circle.
    """
    tau = float(steepness)
    base = np.clip(1.0 - t / math.pi, 0.0, None)
    return (1.0 + tau * t / math.pi) * base**tau


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sum(diff**2, axis=-1)


def _matern32_of_r(r: np.ndarray, signal_variance: float, length_scale: float) -> np.ndarray:
    scaled = math.sqrt(3.0) * r / length_scale
    return signal_variance * (1.0 + scaled) * np.exp(-scaled)


def _radial_poly_decay(rho_a: np.ndarray, rho_b: np.ndarray, decay_scale: float, degree: float) -> np.ndarray:
    outer = rho_a[:, None] * rho_b[None, :] / decay_scale**2
    envelope = np.exp(-(rho_a[:, None] ** 2 + rho_b[None, :] ** 2) / (2.0 * decay_scale**2))
    return outer ** int(degree) * envelope


def gram(spec: KernelSpec, x_a, x_b=None) -> np.ndarray:
    """Cross-covariance matrix with entry (i, j) = k(x_a[i], x_b[j])."""
    a = as_input_matrix(spec, x_a)
    b = a if x_b is None else as_input_matrix(spec, x_b)
    p = spec.params
    if spec.variant == SQUARED_EXPONENTIAL:
        sq = _sq_dists(a, b)
        return p["signal_variance"] * np.exp(-0.5 * sq / p["length_scale"] ** 2)
    if spec.variant == MATERN32:
        r = np.sqrt(_sq_dists(a, b))
        return _matern32_of_r(r, p["signal_variance"], p["length_scale"])
    if spec.variant == PERIODIC:
        delta = np.abs(a[:, 0][:, None] - b[:, 0][None, :])
        sine = np.sin(math.pi * delta / p["period"])
        return p["signal_variance"] * np.exp(-2.0 * sine**2 / p["length_scale"] ** 2)
    if spec.variant == WENDLAND_POLAR:
        return _wendland(circle_distance(a[:, 0], b[:, 0]), p["steepness"])
    if spec.variant == ANOVA2D_MATERN:
        radial = _matern32_of_r(np.abs(a[:, 0][:, None] - b[:, 0][None, :]), 1.0, p["radial_length"])
    elif spec.variant == ANOVA2D_POL:
        radial = _radial_poly_decay(a[:, 0], b[:, 0], p["decay_scale"], p["degree"])
    else:  # pragma: no cover - VARIANTS is exhaustive
        raise ValueError(f"unknown kernel variant {spec.variant!r}")
    angular = _wendland(circle_distance(a[:, 1], b[:, 1]), p["steepness"])
    return (
        p["outer_variance"]
        * (1.0 + p["radial_weight"] * radial)
        * (1.0 + p["angular_weight"] * angular)
    )


def prior_variance(spec: KernelSpec, x) -> np.ndarray:
    """Vector of k(x_i, x_i) without forming the full Gram matrix."""
    a = as_input_matrix(spec, x)
    p = spec.params
    n = a.shape[0]
    if spec.variant in (SQUARED_EXPONENTIAL, MATERN32, PERIODIC):
        return np.full(n, p["signal_variance"])
    if spec.variant == WENDLAND_POLAR:
        return np.ones(n)
    if spec.variant == ANOVA2D_MATERN:
        radial = np.ones(n)
    else:
        rho = a[:, 0]
        radial = (rho**2 / p["decay_scale"] ** 2) ** int(p["degree"]) * np.exp(
            -(rho**2) / p["decay_scale"] ** 2
        )
    return p["outer_variance"] * (1.0 + p["radial_weight"] * radial) * (1.0 + p["angular_weight"])


def kernel_eval(spec: KernelSpec, x, x_prime) -> float:
    """Scalar covariance between two points."""
    a = as_input_matrix(spec, x)
    b = as_input_matrix(spec, x_prime)
    if a.shape[0] != 1 or b.shape[0] != 1:
        raise ValueError("kernel_eval expects single points; use gram for batches")
    return float(gram(spec, a, b)[0, 0])
