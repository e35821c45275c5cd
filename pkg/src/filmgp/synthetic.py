"""Synthetic stand-in for an instrumented bearing rig.

Ground truth comes from a declared equilibrium law: the eccentricity ratio
is a smooth decreasing function of the Sommerfeld number,

    eps = 1 / (1 + (S_o / S_REF)^GAMMA)

so heavy slow running pushes the shaft towards the wall and fast light
running pulls it concentric, and the attitude angle follows the classic
short-bearing relation Phi = atan2(pi*sqrt(1 - eps^2), 4*eps). With the
load line at TDC this places the default 15-run grid in the first quadrant
at eccentricities between roughly 0.20 and 0.85.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bearing import (
    BearingGeometry,
    OperatingPoint,
    ShaftLocation,
    rpm_to_rad_per_s,
    sommerfeld,
    wrap_angle,
)
from .locator import stable_seed
from .ultrasound import AcousticSetup, FilmObservation, NoiseSpec, synthesize_scan

S_REF = 0.06
GAMMA = 0.7

DEFAULT_SPEEDS_RPM = (100.0, 200.0, 400.0, 600.0, 800.0)
DEFAULT_LOADS_N = (2e3, 1e4, 2e4)
DEFAULT_VISCOSITY = 0.02


def default_geometry() -> BearingGeometry:
    """Mid-size journal bearing: bore 50 mm, clearance 100 um, length 80 mm."""
    return BearingGeometry.from_clearance(bore_radius=0.05, clearance=100e-6, length=0.08)


def default_setup() -> AcousticSetup:
    """5 MHz transducer, mineral oil, polymer-lined bore against steel."""
    return AcousticSetup(
        lubricant_density=870.0,
        sound_speed=1500.0,
        wave_angular_frequency=2.0 * math.pi * 5e6,
        impedance_1=1.5e6,
        impedance_2=4.6e7,
    )


def equilibrium_location(
    geom: BearingGeometry,
    op: OperatingPoint,
    load_angle: float = 0.0,
    s_ref: float = S_REF,
    gamma: float = GAMMA,
) -> ShaftLocation:
    """True shaft location for an operating point under the declared law."""
    s_o = sommerfeld(geom, op)
    eps = 1.0 / (1.0 + (s_o / s_ref) ** gamma)
    attitude = math.atan2(math.pi * math.sqrt(1.0 - eps**2), 4.0 * eps)
    return ShaftLocation.from_eccentricity(
        eps, wrap_angle(load_angle + attitude), geom.clearance, load_angle
    )


def default_operating_grid(
    speeds_rpm: tuple[float, ...] = DEFAULT_SPEEDS_RPM,
    loads_n: tuple[float, ...] = DEFAULT_LOADS_N,
    viscosity: float = DEFAULT_VISCOSITY,
) -> list[OperatingPoint]:
    """Cartesian speed x load grid (15 points with the defaults)."""
    return [
        OperatingPoint(rpm_to_rad_per_s(rpm), load, viscosity)
        for rpm in speeds_rpm
        for load in loads_n
    ]


@dataclass(frozen=True)
class SyntheticRun:
    """One simulated operating condition with its ground truth."""

    operating_point: OperatingPoint
    observations: tuple[FilmObservation, ...]
    truth: ShaftLocation


def synthesize_runs(
    geom: BearingGeometry,
    setup: AcousticSetup,
    operating_points: "list[OperatingPoint]",
    noise: NoiseSpec,
    seed: int,
    n_angles: int = 720,
    load_angle: float = 0.0,
) -> list[SyntheticRun]:
    """Scan every operating point; per-run seeds derive from the run identity."""
    runs = []
    for op in operating_points:
        truth = equilibrium_location(geom, op, load_angle)
        run_seed = stable_seed(seed, "scan", op.speed, op.load)
        observations = synthesize_scan(geom, truth, setup, noise, run_seed, n_angles)
        runs.append(SyntheticRun(op, tuple(observations), truth))
    return runs
