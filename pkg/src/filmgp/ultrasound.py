"""Spring-model ultrasonics: forward reflection and film-thickness inversion.

A thin lubricant layer between two solids behaves acoustically as a spring
of stiffness rho*c^2/h, which makes the complex reflection coefficient

    R(h) = (z2 - z1 + i*Omega*h*z1*z2/(rho*c^2)) / (z2 + z1 + i*Omega*h*z1*z2/(rho*c^2))

The three measurement methods invert different observables of R(h):
the magnitude (amplitude method), the phase (phase method), and the
half-wavelength resonance frequencies f_m = m*c/(2h) (resonant-dip method).
Each method is usable only on part of the thickness axis; the module
exposes those validity bands and a synthetic scan generator that drops
observations outside them, reproducing the per-method dead zones seen on
instrumented bearings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bearing import BearingGeometry, ShaftLocation, film_thickness_at_angle, wrap_angle
from .errors import (
    DataError,
    InconsistentDipsError,
    InvalidMeasurementError,
    MeasurementOutOfRangeError,
    NoMeasurementError,
)

METHOD_AMPLITUDE = "amplitude"
METHOD_PHASE = "phase"
METHOD_RESONANT_DIP = "resonant_dip"
METHODS = (METHOD_AMPLITUDE, METHOD_PHASE, METHOD_RESONANT_DIP)

# Conditioning thresholds for the spring-model inversions: magnitudes above
# 1 - AMPLITUDE_REJECT_MARGIN and phases below PHASE_FLOOR_RAD are rejected.
AMPLITUDE_REJECT_MARGIN = 0.02
PHASE_FLOOR_RAD = 0.01
# Declared band edges used by the scan generator: amplitude floor in metres,
# phase ceiling as a fraction of the phase-response peak, and the widest
# union gap the defaults are allowed to leave between methods.
AMPLITUDE_FLOOR_M = 1e-8
PHASE_PEAK_MARGIN = 0.95
DECLARED_MAX_DEAD_ZONE_M = 5e-6

OBSERVATION_CSV_HEADER = ("angle_rad", "thickness_m", "method", "noise_std_m")


@dataclass(frozen=True)
class AcousticSetup:
    """Acoustic constants of the lubricant layer and its bounding solids.

    ``impedance_1`` is the incidence-side impedance, ``impedance_2`` the far
    side; they must differ, otherwise the amplitude and phase inversions
    degenerate (zero phase, magnitude floor at zero).
    """

    lubricant_density: float
    sound_speed: float
    wave_angular_frequency: float
    impedance_1: float
    impedance_2: float

    def __post_init__(self) -> None:
        for name in (
            "lubricant_density",
            "sound_speed",
            "wave_angular_frequency",
            "impedance_1",
            "impedance_2",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.impedance_1 == self.impedance_2:
            raise ValueError("impedance_1 and impedance_2 must differ")

    @property
    def stiffness_per_thickness(self) -> float:
        """rho*c^2: layer stiffness is this divided by thickness."""
        return self.lubricant_density * self.sound_speed**2

    @property
    def _b_per_h(self) -> float:
        """Imaginary-part coefficient Omega*z1*z2/(rho*c^2) per metre of film."""
        return (
            self.wave_angular_frequency
            * self.impedance_1
            * self.impedance_2
            / self.stiffness_per_thickness
        )


@dataclass(frozen=True)
class ReflectionMeasurement:
    """Observables extracted from a reflected pulse."""

    reflection_magnitude: float
    reflection_phase: float
    resonant_dip_frequencies: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if not (0.0 < self.reflection_magnitude < 1.0):
            raise ValueError(
                f"reflection magnitude must lie in (0, 1), got {self.reflection_magnitude!r}"
            )
        orders = [m for m, _ in self.resonant_dip_frequencies]
        if any(m2 <= m1 for m1, m2 in zip(orders, orders[1:])):
            raise ValueError("resonant dip mode orders must be strictly increasing")
        if any(m < 1 or f <= 0.0 for m, f in self.resonant_dip_frequencies):
            raise ValueError("resonant dips must have positive order and frequency")


@dataclass(frozen=True)
class FilmObservation:
    """One film-thickness estimate at one shaft angle."""

    shaft_angle: float
    thickness: float
    method: str
    noise_std: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.shaft_angle < 2.0 * math.pi):
            raise ValueError(f"shaft_angle must be in [0, 2*pi), got {self.shaft_angle!r}")
        if not (math.isfinite(self.thickness) and self.thickness > 0.0):
            raise ValueError(f"thickness must be positive, got {self.thickness!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.noise_std < 0.0:
            raise ValueError(f"noise_std must be non-negative, got {self.noise_std!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Per-method measurement noise (thickness-equivalent std, metres) and
    the dead-zone rule parameters for the resonant-dip detector."""

    amplitude_std: float = 0.0
    phase_std: float = 0.0
    dip_std: float = 0.0
    dip_band: tuple[float, float] = (2e6, 30e6)
    dip_max_order: int = 5

    def __post_init__(self) -> None:
        for name in ("amplitude_std", "phase_std", "dip_std"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        lo, hi = self.dip_band
        if not (0.0 < lo < hi):
            raise ValueError(f"dip_band must satisfy 0 < lo < hi, got {self.dip_band!r}")
        if self.dip_max_order < 1:
            raise ValueError("dip_max_order must be at least 1")

    @classmethod
    def uniform(cls, std: float, **kwargs) -> "NoiseSpec":
        return cls(amplitude_std=std, phase_std=std, dip_std=std, **kwargs)


def forward_reflection(setup: AcousticSetup, h: float) -> ReflectionMeasurement:
    """Complex spring-model reflection coefficient for a film of thickness h.

    |R| grows monotonically from |z2-z1|/(z2+z1) at h -> 0 towards 1.
    """
    if not (math.isfinite(h) and h > 0.0):
        raise ValueError(f"film thickness must be positive, got {h!r}")
    b = setup._b_per_h * h
    r = complex(setup.impedance_2 - setup.impedance_1, b) / complex(
        setup.impedance_2 + setup.impedance_1, b
    )
    return ReflectionMeasurement(abs(r), math.atan2(r.imag, r.real))


def invert_amplitude(setup: AcousticSetup, r_mag: float) -> float:
    """Film thickness from a reflection-magnitude measurement.

    Valid while the layer response is stiffness dominated; magnitudes at or
    above 1 - AMPLITUDE_REJECT_MARGIN are rejected as out of range, and
    magnitudes below the zero-thickness floor |z2-z1|/(z2+z1) have no
    admissible thickness.
    """
    if not (math.isfinite(r_mag) and 0.0 < r_mag < 1.0):
        raise InvalidMeasurementError(f"reflection magnitude {r_mag!r} outside (0, 1)")
    if r_mag >= 1.0 - AMPLITUDE_REJECT_MARGIN:
        raise MeasurementOutOfRangeError(
            f"reflection magnitude {r_mag:.6f} too close to 1: film no longer stiffness dominated"
        )
    z1, z2 = setup.impedance_1, setup.impedance_2
    radicand = r_mag**2 * (z2 + z1) ** 2 - (z2 - z1) ** 2
    if radicand < 0.0:
        raise InvalidMeasurementError(
            f"reflection magnitude {r_mag:.6f} below the zero-thickness floor "
            f"{abs(z2 - z1) / (z2 + z1):.6f}"
        )
    b = math.sqrt(radicand / (1.0 - r_mag**2))
    return b / setup._b_per_h


def invert_phase(setup: AcousticSetup, phi_r: float) -> float:
    """Film thickness from a reflection-phase measurement.

    Solves tan(phi) = 2*z1*b / ((z2^2 - z1^2) + b^2) for the imaginary-part
    coefficient b and picks the smaller root, the stiffness-dominated branch
    that round-trips :func:`forward_reflection` for thin films. Phases below
    PHASE_FLOOR_RAD are rejected (the phase response vanishes both for very
    thin and very thick films); phases beyond the response peak have a
    negative discriminant and no admissible thickness on this branch.
    """
    if not math.isfinite(phi_r) or abs(phi_r) < PHASE_FLOOR_RAD:
        raise MeasurementOutOfRangeError(
            f"reflection phase {phi_r!r} below the {PHASE_FLOOR_RAD} rad floor"
        )
    if abs(phi_r) >= 0.5 * math.pi:
        raise InvalidMeasurementError(f"reflection phase {phi_r!r} outside the spring-model branch")
    z1, z2 = setup.impedance_1, setup.impedance_2
    t = math.tan(phi_r)
    disc = z1**2 - t**2 * (z2**2 - z1**2)
    if disc < 0.0:
        raise InvalidMeasurementError(
            f"reflection phase {phi_r:.6f} rad beyond the invertible phase peak"
        )
    b = (z1 - math.sqrt(disc)) / t
    if b <= 0.0:
        raise InvalidMeasurementError(f"reflection phase {phi_r:.6f} rad has no positive-thickness root")
    return b / setup._b_per_h


def resonant_dips(
    setup: AcousticSetup,
    h: float,
    band: tuple[float, float] = NoiseSpec().dip_band,
    max_order: int = NoiseSpec().dip_max_order,
) -> tuple[tuple[int, float], ...]:
    """Half-wavelength resonance frequencies f_m = m*c/(2h) visible in a band.

    Orders above ``max_order`` are considered buried in noise and omitted.
    """
    if not (math.isfinite(h) and h > 0.0):
        raise ValueError(f"film thickness must be positive, got {h!r}")
    lo, hi = band
    f1 = setup.sound_speed / (2.0 * h)
    dips = []
    for m in range(1, max_order + 1):
        f_m = m * f1
        if lo <= f_m <= hi:
            dips.append((m, f_m))
    return tuple(dips)


def invert_resonant_dip(
    setup: AcousticSetup,
    dips: "tuple[tuple[int, float], ...] | list[tuple[int, float]]",
    freq_rel_std: float = 1e-4,
) -> float:
    """Film thickness from resonant dips, as a noise-weighted mean.

    Each dip gives h_m = m*c/(2*f_m) with uncertainty h_m*freq_rel_std
    (relative frequency uncertainty maps one-to-one onto thickness). Dips
    deviating from the weighted mean by more than 3 of their own sigma are
    mutually inconsistent.
    """
    if not dips:
        raise NoMeasurementError("no resonant dips to invert")
    if freq_rel_std <= 0.0:
        raise ValueError("freq_rel_std must be positive")
    estimates = []
    sigmas = []
    for m, f_m in dips:
        if m < 1 or f_m <= 0.0:
            raise InvalidMeasurementError(f"dip ({m!r}, {f_m!r}) must have positive order and frequency")
        h_m = m * setup.sound_speed / (2.0 * f_m)
        estimates.append(h_m)
        sigmas.append(h_m * freq_rel_std)
    weights = [1.0 / s**2 for s in sigmas]
    h_hat = sum(w * h for w, h in zip(weights, estimates)) / sum(weights)
    for h_m, s_m in zip(estimates, sigmas):
        if abs(h_m - h_hat) > 3.0 * s_m:
            raise InconsistentDipsError(
                f"dip estimates spread {min(estimates):.3e}..{max(estimates):.3e} m "
                f"beyond 3 sigma at relative noise {freq_rel_std:g}"
            )
    return h_hat


def _phase_peak_thickness(setup: AcousticSetup) -> float:
    """Thickness at which the reflection phase peaks: b = sqrt((z2-z1)(z2+z1))."""
    z1, z2 = setup.impedance_1, setup.impedance_2
    return math.sqrt(abs((z2 - z1) * (z2 + z1))) / setup._b_per_h


def valid_band(
    setup: AcousticSetup,
    method: str,
    dip_band: tuple[float, float] = NoiseSpec().dip_band,
    dip_max_order: int = NoiseSpec().dip_max_order,
) -> tuple[float, float]:
    """Thickness band [h_lo, h_hi] on which a method yields valid estimates.

    The amplitude band ends where |R| reaches the rejection ceiling; the
    phase band runs from the PHASE_FLOOR_RAD crossing up to a safety margin
    below the phase peak; the dip band is set by the detector's frequency
    window and maximum usable order.
    """
    if method == METHOD_AMPLITUDE:
        r_max = 1.0 - AMPLITUDE_REJECT_MARGIN
        return AMPLITUDE_FLOOR_M, invert_amplitude(setup, r_max * (1.0 - 1e-12))
    if method == METHOD_PHASE:
        h_lo = invert_phase(setup, PHASE_FLOOR_RAD * (1.0 + 1e-12))
        return h_lo, PHASE_PEAK_MARGIN * _phase_peak_thickness(setup)
    if method == METHOD_RESONANT_DIP:
        lo, hi = dip_band
        return setup.sound_speed / (2.0 * hi), dip_max_order * setup.sound_speed / (2.0 * lo)
    raise ValueError(f"unknown method {method!r}")


def synthesize_scan(
    geom: BearingGeometry,
    loc: ShaftLocation,
    setup: AcousticSetup,
    noise: NoiseSpec,
    seed: int,
    n_angles: int = 720,
) -> list[FilmObservation]:
    """Simulate a full-revolution ultrasonic scan of the film profile.

    For every angle on a uniform grid the true film thickness is perturbed
    by each method's Gaussian noise, pushed through the forward model and
    inverted back; observations whose perturbed film falls outside the
    method's validity band are dropped, leaving the method-specific dead
    zones. Deterministic for a given seed.
    """
    if n_angles < 1:
        raise ValueError("n_angles must be at least 1")
    rng = np.random.default_rng(seed)
    bands = {
        METHOD_AMPLITUDE: valid_band(setup, METHOD_AMPLITUDE),
        METHOD_PHASE: valid_band(setup, METHOD_PHASE),
        METHOD_RESONANT_DIP: valid_band(
            setup, METHOD_RESONANT_DIP, noise.dip_band, noise.dip_max_order
        ),
    }
    stds = {
        METHOD_AMPLITUDE: noise.amplitude_std,
        METHOD_PHASE: noise.phase_std,
        METHOD_RESONANT_DIP: noise.dip_std,
    }
    observations: list[FilmObservation] = []
    for k in range(n_angles):
        angle = wrap_angle(2.0 * math.pi * k / n_angles)
        h_true = film_thickness_at_angle(geom, loc, angle)
        for method in METHODS:
            h_meas = h_true + stds[method] * rng.standard_normal()
            lo, hi = bands[method]
            if not (lo <= h_meas <= hi):
                continue
            try:
                if method == METHOD_AMPLITUDE:
                    reflection = forward_reflection(setup, h_meas)
                    h_hat = invert_amplitude(setup, reflection.reflection_magnitude)
                elif method == METHOD_PHASE:
                    reflection = forward_reflection(setup, h_meas)
                    h_hat = invert_phase(setup, reflection.reflection_phase)
                else:
                    dips = resonant_dips(setup, h_meas, noise.dip_band, noise.dip_max_order)
                    if not dips:
                        continue
                    h_hat = invert_resonant_dip(setup, dips)
            except DataError:
                continue
            observations.append(FilmObservation(angle, h_hat, method, stds[method]))
    return observations


def write_observations(path: "str | Path", observations: "list[FilmObservation]") -> None:
    """Write observations as CSV with header angle_rad,thickness_m,method,noise_std_m."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBSERVATION_CSV_HEADER)
        for obs in observations:
            writer.writerow([repr(obs.shaft_angle), repr(obs.thickness), obs.method, repr(obs.noise_std)])


def read_observations(path: "str | Path") -> list[FilmObservation]:
    """Read an observation CSV, validating schema and rows.

    Raises InvalidMeasurementError naming the offending line for malformed
    rows, so batch callers can surface actionable diagnostics.
    """
    observations: list[FilmObservation] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidMeasurementError(f"{path}: empty observation file") from None
        if tuple(header) != OBSERVATION_CSV_HEADER:
            raise InvalidMeasurementError(
                f"{path}: bad header {header!r}, expected {','.join(OBSERVATION_CSV_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InvalidMeasurementError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                obs = FilmObservation(float(row[0]), float(row[1]), row[2], float(row[3]))
            except (ValueError, TypeError) as exc:
                raise InvalidMeasurementError(f"{path}:{lineno}: {exc}") from None
            observations.append(obs)
    return observations
