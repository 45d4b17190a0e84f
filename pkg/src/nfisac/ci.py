"""Constructive-interference geometry for phase-shift-keyed symbols.

For an M-ary PSK symbol transmitted to one user, the decision region is a
sector of half-angle ``psi = pi / M`` around the symbol ray.  A designed
transmit vector is *constructive* when the noiseless received point,
de-rotated by the symbol phase, lies inside that sector with a safety
margin proportional to the required signal amplitude ``gamma_prime``
times the channel noise amplitude ``sigma_c``: the point must keep a
perpendicular distance of at least ``gamma_prime * sigma_c`` from both
sector edges.

The module exposes the scalar margin (negative means satisfied), an
exact point-in-sector test, and the pair of linear inequality rows over
stacked real/imaginary parts that conic solvers consume.  All symbols
have unit amplitude (constant-modulus constellation), so the average
constellation energy is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "PskConstellation",
    "CiConstraint",
    "rotate_channel",
    "ci_margin",
    "ci_region_contains",
    "linearized_ci_rows",
]


@dataclass(frozen=True)
class PskConstellation:
    """Unit-amplitude M-ary PSK alphabet with its decision half-angle."""

    order: int
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.order < 2 or (self.order & (self.order - 1)) != 0:
            raise ValueError(f"order must be a power of two >= 2, got {self.order}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def half_angle(self) -> float:
        """Decision-sector half-angle ``pi / order`` in radians."""
        return math.pi / self.order

    @property
    def phases(self) -> NDArray[np.float64]:
        """Symbol phases ``2 pi q / order`` for q = 0..order-1."""
        return 2.0 * np.pi * np.arange(self.order) / self.order

    @property
    def symbols(self) -> NDArray[np.complex128]:
        """The alphabet points ``amplitude * exp(j phase)``."""
        return self.amplitude * np.exp(1j * self.phases)


@dataclass(frozen=True)
class CiConstraint:
    """One user/symbol constructive-interference constraint.

    ``rotated_channel`` is the user's channel de-rotated by the intended
    symbol phase; ``gamma_prime`` is the required signal *amplitude*
    relative to the noise amplitude ``noise_amplitude`` (the delivered
    SINR is ``gamma_prime ** 2``); ``half_angle`` is the PSK sector
    half-angle.
    """

    rotated_channel: NDArray[np.complex128]
    gamma_prime: float
    noise_amplitude: float
    half_angle: float

    def __post_init__(self) -> None:
        channel = np.asarray(self.rotated_channel, dtype=complex)
        if channel.ndim != 1:
            raise ValueError("rotated_channel must be a 1-D vector")
        if self.gamma_prime < 0:
            raise ValueError("gamma_prime must be nonnegative")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be nonnegative")
        if not 0.0 < self.half_angle <= math.pi / 2:
            raise ValueError("half_angle must lie in (0, pi/2]")
        object.__setattr__(self, "rotated_channel", channel)

    @property
    def tan_psi(self) -> float:
        """Tangent of the sector half-angle (infinite for binary PSK)."""
        if self.half_angle == math.pi / 2:
            return math.inf
        return math.tan(self.half_angle)

    @property
    def threshold(self) -> float:
        """Sector-apex offset ``gamma_prime * noise_amplitude / cos(half_angle)``."""
        cos_psi = math.cos(self.half_angle)
        level = self.gamma_prime * self.noise_amplitude
        if cos_psi <= 1e-15:
            return math.inf if level > 0 else 0.0
        return level / cos_psi


def rotate_channel(h: object, symbol_phase: float) -> NDArray[np.complex128]:
    """De-rotate a channel vector by a symbol phase: ``h * exp(-j phase)``.

    Accepts either a plain complex vector or a steering-vector object
    exposing ``entries``.  Norm is preserved exactly.
    """
    entries = np.asarray(getattr(h, "entries", h), dtype=complex)
    return entries * np.exp(-1j * symbol_phase)


def _received_point(constraint: CiConstraint, x: NDArray[np.complex128]) -> complex:
    x = np.asarray(x, dtype=complex)
    if x.shape != constraint.rotated_channel.shape:
        raise ValueError(
            f"x has shape {x.shape}, expected {constraint.rotated_channel.shape}"
        )
    return complex(constraint.rotated_channel @ x)


def ci_margin(constraint: CiConstraint, x: NDArray[np.complex128]) -> float:
    """Constraint slack: nonpositive iff the constraint is satisfied.

    For sector half-angles below pi/2 this is
    ``|Im z| - Re z * tan(psi) + gamma_prime * sigma_c / cos(psi)`` with
    ``z`` the de-rotated noiseless received point.  For binary PSK
    (half-angle exactly pi/2) the same inequality is evaluated in the
    cosine-scaled form ``|Im z| cos(psi) - Re z sin(psi) + gamma_prime *
    sigma_c``, which stays finite in the limit.
    """
    z = _received_point(constraint, x)
    psi = constraint.half_angle
    level = constraint.gamma_prime * constraint.noise_amplitude
    if psi == math.pi / 2:
        return abs(z.imag) * math.cos(psi) - z.real * math.sin(psi) + level
    return abs(z.imag) - z.real * math.tan(psi) + level / math.cos(psi)


def ci_region_contains(
    received: complex, symbol_phase: float, psk: PskConstellation
) -> bool:
    """Whether a received point decodes constructively for the given symbol.

    The point is de-rotated by the symbol phase and tested against the
    sector ``{Re >= 0, |Im| <= Re tan(psi)}`` (evaluated in the scaled
    form that stays finite for binary PSK).  The sector vertex (received
    exactly zero) counts as contained.
    """
    z = complex(received) * np.exp(-1j * symbol_phase)
    psi = psk.half_angle
    scale = max(1.0, abs(z))
    return abs(z.imag) * math.cos(psi) - z.real * math.sin(psi) <= 1e-12 * scale


def linearized_ci_rows(
    constraint: CiConstraint,
) -> tuple[NDArray[np.float64], float]:
    """The two linear inequality rows equivalent to the sector constraint.

    Returns ``(rows, offset)`` with ``rows`` of shape (2, 2N) acting on
    the stacked real vector ``[Re(x); Im(x)]``; the constraint holds iff
    ``rows @ [Re(x); Im(x)] + offset <= 0`` for both rows.  Rows use the
    cosine-scaled form (``offset = gamma_prime * sigma_c``), which is
    finite for every PSK order including binary.
    """
    psi = constraint.half_angle
    cos_psi = math.cos(psi)
    sin_psi = math.sin(psi)
    h_re = constraint.rotated_channel.real
    h_im = constraint.rotated_channel.imag
    # Im z = h_re . x_im + h_im . x_re ; Re z = h_re . x_re - h_im . x_im
    row_plus = np.concatenate(
        [cos_psi * h_im - sin_psi * h_re, cos_psi * h_re + sin_psi * h_im]
    )
    row_minus = np.concatenate(
        [-cos_psi * h_im - sin_psi * h_re, -cos_psi * h_re + sin_psi * h_im]
    )
    offset = constraint.gamma_prime * constraint.noise_amplitude
    return np.stack([row_plus, row_minus]), float(offset)
