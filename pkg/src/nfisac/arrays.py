"""Spherical-wavefront uniform linear array geometry and steering vectors.

All geometry lives in a 2-D polar frame attached to the array: a uniform
linear array (ULA) of ``n_elements`` isotropic elements sits on the x-axis,
centred on the origin, and a point at distance ``d`` and angle ``theta``
(measured from the positive array axis, so broadside is ``pi/2``) is reached
from element ``n`` over the exact Euclidean distance -- no far-field plane
wave approximation.  Amplitudes follow an aperture-gain law that is constant
across elements, so every steering-vector entry has the same magnitude
``sqrt(path_loss)`` while the phases carry the spherical curvature that
enables range-dependent (beamfocusing) behaviour inside the Fraunhofer
distance.

Angles are radians and lengths are metres throughout the package; degrees
appear only at the configuration-file boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
"""Speed of light in m/s."""

#: Which propagation role a steering vector plays.  The collocated
#: monostatic geometry makes the receive and transmit vectors numerically
#: identical; the tag records intent for bookkeeping and error messages.
SteeringKind = Literal["transmit", "receive", "user-channel"]

DerivativeAxis = Literal["angle", "range"]


@dataclass(frozen=True)
class ArrayConfig:
    """Geometry and carrier description of the ULA.

    ``spacing_m`` defaults to half a wavelength.  When both ``wavelength_m``
    and ``carrier_frequency_hz`` are supplied they must describe the same
    carrier (``wavelength * frequency == c`` to 1e-6 relative).
    """

    n_elements: int
    wavelength_m: float
    spacing_m: float | None = None
    carrier_frequency_hz: float | None = None

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if not self.wavelength_m > 0.0:
            raise ValueError(f"wavelength_m must be positive, got {self.wavelength_m}")
        if self.spacing_m is None:
            object.__setattr__(self, "spacing_m", 0.5 * self.wavelength_m)
        if not self.spacing_m > 0.0:
            raise ValueError(f"spacing_m must be positive, got {self.spacing_m}")
        if self.carrier_frequency_hz is not None:
            product = self.wavelength_m * self.carrier_frequency_hz
            if abs(product - SPEED_OF_LIGHT) > 1e-6 * SPEED_OF_LIGHT:
                raise ValueError(
                    "wavelength_m and carrier_frequency_hz are inconsistent: "
                    f"lambda*f = {product:.6e} m/s but c = {SPEED_OF_LIGHT:.6e} m/s"
                )

    @property
    def aperture_m(self) -> float:
        """End-to-end aperture ``(n_elements - 1) * spacing``."""
        return (self.n_elements - 1) * self.spacing_m


@dataclass(frozen=True)
class PolarPoint:
    """A location in the array's polar frame: distance (m) and angle (rad).

    The angle is measured from the array axis, so valid locations lie
    strictly between the two end-fire directions: ``0 < angle_rad < pi``.
    """

    range_m: float
    angle_rad: float

    def __post_init__(self) -> None:
        if not self.range_m > 0.0:
            raise ValueError(f"range_m must be positive, got {self.range_m}")
        if not 0.0 < self.angle_rad < np.pi:
            raise ValueError(
                f"angle_rad must lie strictly inside (0, pi), got {self.angle_rad}"
            )


@dataclass(frozen=True)
class Target:
    """A radar scatterer: a polar location plus a complex reflectivity."""

    location: PolarPoint
    reflectivity: complex = field(default=1.0 + 0.0j)

    def __post_init__(self) -> None:
        if abs(complex(self.reflectivity)) == 0.0:
            raise ValueError("reflectivity must be nonzero")


@dataclass(frozen=True)
class SteeringVector:
    """Array response at a polar point; all entries share one magnitude."""

    entries: np.ndarray
    kind: SteeringKind
    point: PolarPoint

    def __len__(self) -> int:
        return self.entries.shape[0]


def element_offsets(cfg: ArrayConfig) -> np.ndarray:
    """Signed element positions along the array axis, centred on the origin.

    Element ``n`` (1-based) sits at ``(n - (N + 1) / 2) * spacing``, giving a
    symmetric layout; for even ``N`` no element sits exactly at the origin.
    """
    n = np.arange(1, cfg.n_elements + 1, dtype=float)
    return (n - 0.5 * (cfg.n_elements + 1)) * cfg.spacing_m


def distance_profile(point: PolarPoint, cfg: ArrayConfig) -> np.ndarray:
    """Exact element-to-point distances ``r_n`` (law of cosines, no expansion).

    Raises ``ValueError`` when the point coincides with an array element
    (the spherical model's amplitudes and phases blow up there).
    """
    offsets = element_offsets(cfg)
    d = point.range_m
    squared = d * d + offsets * offsets - 2.0 * d * offsets * np.cos(point.angle_rad)
    # Guard against tiny negative values from roundoff before the sqrt.
    squared = np.maximum(squared, 0.0)
    r = np.sqrt(squared)
    if np.any(r < 1e-9):
        raise ValueError(
            "point coincides with an array element; the steering model is "
            f"singular there (range={d}, angle={point.angle_rad})"
        )
    return r


def path_loss(point: PolarPoint, cfg: ArrayConfig) -> float:
    """Aperture gain ``beta = lambda^2 sin(theta) / (16 pi d^2)``.

    One common amplitude for all elements: the model keeps the effective
    aperture's angle dependence (``sin(theta)``) and inverse-square range
    spreading but drops per-element amplitude variation, which is accurate
    when the point is beyond roughly twice the aperture.
    """
    lam = cfg.wavelength_m
    return lam * lam * np.sin(point.angle_rad) / (16.0 * np.pi * point.range_m**2)


def steering_vector(
    point: PolarPoint, cfg: ArrayConfig, kind: SteeringKind = "transmit"
) -> SteeringVector:
    """Spherical-wavefront steering vector ``sqrt(beta) * exp(-j 2 pi r_n / lambda)``."""
    r = distance_profile(point, cfg)
    amplitude = np.sqrt(path_loss(point, cfg))
    entries = amplitude * np.exp(-2j * np.pi * r / cfg.wavelength_m)
    return SteeringVector(entries=entries, kind=kind, point=point)


def _distance_derivative(point: PolarPoint, cfg: ArrayConfig, wrt: DerivativeAxis) -> np.ndarray:
    """Analytic ``d r_n / d theta`` or ``d r_n / d d``."""
    offsets = element_offsets(cfg)
    r = distance_profile(point, cfg)
    d = point.range_m
    if wrt == "angle":
        return d * offsets * np.sin(point.angle_rad) / r
    if wrt == "range":
        return (d - offsets * np.cos(point.angle_rad)) / r
    raise ValueError(f"wrt must be 'angle' or 'range', got {wrt!r}")


def _amplitude_log_derivative(point: PolarPoint, wrt: DerivativeAxis) -> float:
    """Analytic ``(d sqrt(beta) / d w) / sqrt(beta)`` for ``w in {theta, d}``."""
    if wrt == "angle":
        return 0.5 / np.tan(point.angle_rad)
    if wrt == "range":
        return -1.0 / point.range_m
    raise ValueError(f"wrt must be 'angle' or 'range', got {wrt!r}")


def steering_derivative(
    point: PolarPoint,
    cfg: ArrayConfig,
    wrt: DerivativeAxis,
    kind: SteeringKind = "transmit",
) -> np.ndarray:
    """Entrywise derivative of ``steering_vector`` w.r.t. angle or range.

    Both the phase term (through ``r_n``) and the common amplitude
    ``sqrt(beta)`` are differentiated, so the result is the full analytic
    Jacobian column used by the Fisher-information machinery:

        dv_n/dw = v_n * (dlog(sqrt(beta))/dw - j (2 pi / lambda) dr_n/dw).
    """
    v = steering_vector(point, cfg, kind=kind).entries
    phase_rate = -2j * np.pi / cfg.wavelength_m * _distance_derivative(point, cfg, wrt)
    return v * (_amplitude_log_derivative(point, wrt) + phase_rate)


def fraunhofer_distances(cfg: ArrayConfig) -> tuple[float, float]:
    """Both conventional near/far-field boundaries, as ``(classic, array)``.

    * classic: ``2 D^2 / lambda`` with ``D = (N - 1) * spacing`` the physical
      aperture -- the textbook Fraunhofer distance;
    * array:  ``(N * spacing)^2 / lambda`` -- the array-form variant that
      includes the half-spacing overhang on each end.

    The two differ by design; callers choose which convention to report.
    Beamfocusing (range discrimination) is only effective well inside these
    boundaries, roughly within a tenth of the array-form distance.
    """
    classic = 2.0 * cfg.aperture_m**2 / cfg.wavelength_m
    array_form = (cfg.n_elements * cfg.spacing_m) ** 2 / cfg.wavelength_m
    return classic, array_form
