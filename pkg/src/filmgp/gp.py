"""Exact Gaussian-process regression with cached Cholesky factorization.

The prior mean is zero everywhere; callers that want a data-driven offset
(e.g. film fits centred on the mean observed thickness) ask ``fit`` to
centre the targets, and the offset is restored at prediction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import IllConditionedKernelError
from .kernels import KernelSpec, as_input_matrix, gram, prior_variance

MODEL_SCHEMA_VERSION = 1

# Jitter escalation, as fractions of the mean diagonal: start tiny, grow
# tenfold per retry, give up past the cap.
JITTER_START_FRACTION = 1e-10
JITTER_MAX_FRACTION = 1e-4


@dataclass(frozen=True)
class TrainingSet:
    """Training inputs, targets and homoscedastic noise variance."""

    inputs: np.ndarray
    targets: np.ndarray
    noise_variance: float

    def __post_init__(self) -> None:
        inputs = np.array(self.inputs, dtype=float)
        targets = np.array(self.targets, dtype=float).reshape(-1)
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        if targets.size < 1:
            raise ValueError("training set needs at least one observation")
        n_rows = inputs.shape[0] if inputs.ndim > 1 else inputs.size
        if n_rows != targets.size:
            raise ValueError(f"{n_rows} inputs vs {targets.size} targets")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise ValueError("training inputs and targets must be finite")
        if not (math.isfinite(self.noise_variance) and self.noise_variance > 0.0):
            raise ValueError(f"noise_variance must be positive, got {self.noise_variance!r}")

    @property
    def size(self) -> int:
        return self.targets.size


@dataclass(frozen=True)
class GPModel:
    """Fitted GP: kernel, data, and the cached factorization of K + sigma_n^2*I."""

    kernel: KernelSpec
    training: TrainingSet
    chol_lower: np.ndarray
    alpha: np.ndarray
    mean_offset: float = 0.0
    jitter: float = 0.0

    def __post_init__(self) -> None:
        self.chol_lower.setflags(write=False)
        self.alpha.setflags(write=False)

    @property
    def centred_targets(self) -> np.ndarray:
        return self.training.targets - self.mean_offset


def _chol_with_jitter(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor with escalating diagonal jitter."""
    mean_diag = float(np.mean(np.diag(matrix)))
    if mean_diag <= 0.0:
        raise IllConditionedKernelError("covariance diagonal is not positive")
    jitter = 0.0
    fraction = JITTER_START_FRACTION
    while True:
        try:
            shifted = matrix if jitter == 0.0 else matrix + jitter * np.eye(matrix.shape[0])
            return cholesky(shifted, lower=True), jitter
        except np.linalg.LinAlgError:
            pass
        if fraction > JITTER_MAX_FRACTION:
            raise IllConditionedKernelError(
                f"factorization failed even with jitter {jitter:.3e} "
                f"({JITTER_MAX_FRACTION:g} of mean diagonal {mean_diag:.3e})"
            )
        jitter = fraction * mean_diag
        fraction *= 10.0


def fit(spec: KernelSpec, training: TrainingSet, center_targets: bool = False) -> GPModel:
    """Factorize K(X, X) + sigma_n^2*I and cache the target solve.

    The fitted model is immutable. The solve is verified by multiplying
    back: a relative residual above 1e-8 is treated as a factorization
    failure.
    """
    x = as_input_matrix(spec, training.inputs)
    k = gram(spec, x, x)
    k[np.diag_indices_from(k)] += training.noise_variance
    lower, jitter = _chol_with_jitter(k)
    offset = float(np.mean(training.targets)) if center_targets else 0.0
    y0 = training.targets - offset
    alpha = cho_solve((lower, True), y0)
    if jitter:
        k[np.diag_indices_from(k)] += jitter
    residual = np.linalg.norm(k @ alpha - y0)
    scale = max(np.linalg.norm(y0), 1e-30)
    if residual / scale > 1e-8:
        raise IllConditionedKernelError(
            f"solve residual {residual / scale:.3e} exceeds 1e-8 of target norm"
        )
    return GPModel(spec, training, lower, alpha, mean_offset=offset, jitter=jitter)


def predict(model: GPModel, x_star, include_covariance: bool = False):
    """Posterior mean and variance (optionally the full covariance) at x_star.

    Variances are clamped to be non-negative; round-off can push exact
    zeros a hair below zero.
    """
    x = as_input_matrix(model.kernel, model.training.inputs)
    xs = as_input_matrix(model.kernel, x_star)
    k_cross = gram(model.kernel, x, xs)
    mean = model.mean_offset + k_cross.T @ model.alpha
    v = solve_triangular(model.chol_lower, k_cross, lower=True)
    if include_covariance:
        k_star = gram(model.kernel, xs, xs)
        cov = k_star - v.T @ v
        cov = 0.5 * (cov + cov.T)
        variance = np.maximum(np.diag(cov).copy(), 0.0)
        return mean, variance, cov
    variance = np.maximum(prior_variance(model.kernel, xs) - np.sum(v**2, axis=0), 0.0)
    return mean, variance


def log_marginal_likelihood(model: GPModel) -> float:
    """log p(y | X, kernel) via the cached factorization."""
    y0 = model.centred_targets
    n = y0.size
    return float(
        -0.5 * y0 @ model.alpha
        - np.sum(np.log(np.diag(model.chol_lower)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


def log_predictive_density(model: GPModel, x_test, y_test, include_noise: bool = True) -> float:
    """Joint log density of held-out targets under the posterior predictive.

    With ``include_noise`` the observation noise variance is added to the
    predictive covariance, scoring noisy measurements rather than the
    latent function.
    """
    y_test = np.asarray(y_test, dtype=float).reshape(-1)
    mean, _, cov = predict(model, x_test, include_covariance=True)
    if include_noise:
        cov = cov + model.training.noise_variance * np.eye(y_test.size)
    lower, _ = _chol_with_jitter(cov)
    resid = solve_triangular(lower, y_test - mean, lower=True)
    return float(
        -0.5 * resid @ resid
        - np.sum(np.log(np.diag(lower)))
        - 0.5 * y_test.size * math.log(2.0 * math.pi)
    )


def sample_prior(spec: KernelSpec, x, n_samples: int, seed: int) -> np.ndarray:
    """Draw zero-mean prior samples at x; shape (n_samples, len(x))."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    xm = as_input_matrix(spec, x)
    k = gram(spec, xm, xm)
    lower, _ = _chol_with_jitter(k)
    draws = np.random.default_rng(seed).standard_normal((xm.shape[0], n_samples))
    return (lower @ draws).T


def model_to_dict(model: GPModel) -> dict:
    """JSON-serializable description of a fitted model."""
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kernel": {"variant": model.kernel.variant, "hyperparameters": dict(model.kernel.params)},
        "training": {
            "inputs": np.asarray(model.training.inputs).tolist(),
            "targets": model.training.targets.tolist(),
            "noise_variance": model.training.noise_variance,
        },
        "mean_offset": model.mean_offset,
    }


def model_from_dict(payload: dict) -> GPModel:
    """Rebuild (and re-factorize) a model from its JSON description."""
    if payload.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema_version {payload.get('schema_version')!r}")
    spec = KernelSpec(payload["kernel"]["variant"], dict(payload["kernel"]["hyperparameters"]))
    training = TrainingSet(
        np.asarray(payload["training"]["inputs"], dtype=float),
        np.asarray(payload["training"]["targets"], dtype=float),
        float(payload["training"]["noise_variance"]),
    )
    model = fit(spec, training)
    offset = float(payload.get("mean_offset", 0.0))
    if offset:
        # re-fit against the stored offset rather than recomputing the mean
        y0 = training.targets - offset
        alpha = cho_solve((model.chol_lower, True), y0)
        model = GPModel(spec, training, model.chol_lower.copy(), alpha, mean_offset=offset, jitter=model.jitter)
    return model


def save_model(path: "str | Path", model: GPModel) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: "str | Path") -> GPModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
