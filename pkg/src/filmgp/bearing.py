"""Journal-bearing geometry, film-thickness model and duty bookkeeping.

Conventions used throughout the package:

* bearing-frame angles are measured from Top Dead Centre (TDC), positive
  counter-clockwise, normalized to [0, 2*pi);
* the shaft-centre polar angle ``theta`` points in the direction the shaft
  is displaced, i.e. towards the film minimum;
* the attitude angle is measured counter-clockwise from the load line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContactError, InvalidMeasurementError

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod can return TWO_PI-epsilon rounding up to TWO_PI for tiny negatives
    if wrapped >= TWO_PI:
        wrapped -= TWO_PI
    return wrapped


def wrap_angle_signed(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = wrap_angle(theta)
    if wrapped > math.pi:
        wrapped -= TWO_PI
    return wrapped


def rpm_to_rad_per_s(rpm: float) -> float:
    return rpm * TWO_PI / 60.0


@dataclass(frozen=True)
class BearingGeometry:
    """Plain cylindrical journal bearing dimensions, all in metres.

    ``clearance`` is stored explicitly but must equal bore minus shaft
    radius; prefer :meth:`from_clearance` to build consistent instances.
    """

    shaft_radius: float
    bore_radius: float
    clearance: float
    length: float

    def __post_init__(self) -> None:
        for name in ("shaft_radius", "bore_radius", "clearance", "length"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        gap = self.bore_radius - self.shaft_radius
        if not math.isclose(self.clearance, gap, rel_tol=1e-9, abs_tol=0.0):
            raise ValueError(
                f"clearance ({self.clearance!r}) must equal bore_radius - shaft_radius ({gap!r})"
            )

    @classmethod
    def from_clearance(cls, bore_radius: float, clearance: float, length: float) -> "BearingGeometry":
        return cls(bore_radius - clearance, bore_radius, clearance, length)


@dataclass(frozen=True)
class OperatingPoint:
    """Steady operating condition: speed (rad/s), load (N), viscosity (Pa*s)."""

    speed: float
    load: float
    viscosity: float

    def __post_init__(self) -> None:
        for name in ("speed", "load", "viscosity"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ShaftLocation:
    """Shaft-centre position relative to the bore centre.

    Two equivalent views are stored: (eccentricity ratio, attitude angle)
    and the polar pair (rho, theta) with theta measured from TDC. ``rho``
    is the physical offset in metres and always equals
    eccentricity_ratio * clearance of the geometry used to build it.
    """

    eccentricity_ratio: float
    attitude_angle: float
    rho: float
    theta: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.eccentricity_ratio < 1.0):
            raise ValueError(
                f"eccentricity ratio must be in [0, 1), got {self.eccentricity_ratio!r}"
            )
        if not (0.0 <= self.theta < TWO_PI):
            raise ValueError(f"theta must be normalized to [0, 2*pi), got {self.theta!r}")
        if self.rho < 0.0 or not math.isfinite(self.rho):
            raise ValueError(f"rho must be non-negative and finite, got {self.rho!r}")

    @classmethod
    def from_eccentricity(
        cls,
        eccentricity_ratio: float,
        theta: float,
        clearance: float,
        load_angle: float = 0.0,
    ) -> "ShaftLocation":
        """Build from the eccentricity ratio and the bearing-frame angle."""
        theta = wrap_angle(theta)
        return cls(
            eccentricity_ratio=eccentricity_ratio,
            attitude_angle=wrap_angle_signed(theta - load_angle),
            rho=eccentricity_ratio * clearance,
            theta=theta,
        )

    @classmethod
    def from_polar(
        cls,
        rho: float,
        theta: float,
        clearance: float,
        load_angle: float = 0.0,
    ) -> "ShaftLocation":
        """Build from the polar offset (rho in metres, theta from TDC)."""
        return cls.from_eccentricity(rho / clearance, theta, clearance, load_angle)


def film_thickness(geom: BearingGeometry, loc: ShaftLocation, theta_big: float) -> float:
    """Film thickness h = c*(1 + eps*cos(Theta)).

    ``theta_big`` is the polar coordinate about the shaft centre with zero
    at the direction of maximum film thickness; h spans [c(1-eps), c(1+eps)].
    """
    return geom.clearance * (1.0 + loc.eccentricity_ratio * math.cos(theta_big))


def film_thickness_at_angle(geom: BearingGeometry, loc: ShaftLocation, theta_from_tdc: float) -> float:
    """Film thickness at a bearing-frame angle measured from TDC.

    The gap is smallest in the displacement direction ``loc.theta``, so the
    shaft-centre coordinate is offset by pi relative to that direction.
    """
    return film_thickness(geom, loc, theta_from_tdc - loc.theta - math.pi)


def eccentricity_from_hmin(geom: BearingGeometry, h_min: float) -> float:
    """Eccentricity ratio implied by a minimum film thickness.

    Round-trips :func:`film_thickness` at Theta = pi.
    """
    if not math.isfinite(h_min) or h_min <= 0.0:
        raise ContactError(f"minimum film thickness {h_min!r} implies shaft/bore contact")
    if h_min > geom.clearance:
        raise InvalidMeasurementError(
            f"minimum film thickness {h_min!r} exceeds the radial clearance {geom.clearance!r}"
        )
    return (geom.clearance - h_min) / geom.clearance


def sommerfeld(geom: BearingGeometry, op: OperatingPoint) -> float:
    """Sommerfeld number S_o = (R/c)^2 * mu*omega*L*R / (2W).

    R is the internal (bore) radius of the bearing.
    """
    radius_ratio = geom.bore_radius / geom.clearance
    return radius_ratio**2 * op.viscosity * op.speed * geom.length * geom.bore_radius / (2.0 * op.load)


def speed_load_ratio(op: OperatingPoint, reference: "OperatingPoint | float | None" = None) -> float:
    """Speed-load ratio omega/W, optionally normalized by a reference ratio.

    With ``reference`` an OperatingPoint, the result is the ratio of ratios
    (so the label of the reference point itself is 1.0); with a float, the
    raw ratio is divided by it; with None the raw SI ratio is returned.
    Equal speed-load ratios always map to equal labels.
    """
    ratio = op.speed / op.load
    if reference is None:
        return ratio
    if isinstance(reference, OperatingPoint):
        return ratio / (reference.speed / reference.load)
    reference = float(reference)
    if not (math.isfinite(reference) and reference > 0.0):
        raise ValueError(f"reference ratio must be positive and finite, got {reference!r}")
    return ratio / reference
