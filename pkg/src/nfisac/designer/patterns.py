"""Transmit beampatterns of covariance or symbol-matrix sources.

The pattern value at a field point ``p`` is the average power its
spherical-wave observation ``v(p)^T x`` would collect under the design:
``P(p) = v(p)^T R conj(v(p))`` with ``R`` the transmit covariance.  For a
covariance focused on a point (``R`` proportional to
``conj(v(p0)) conj(v(p0))^H``) the value at ``p0`` is the coherent
maximum ``|v(p0)|^4``; cells much closer to the array can still collect
more raw power through the amplitude decay alone, which is what
:func:`focusing_gain` divides out.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from nfisac.arrays import ArrayConfig, PolarPoint, path_loss, steering_vector

__all__ = ["beampattern", "beampattern_db", "focusing_gain", "polar_grid"]

PatternKind = str  # "auto" | "covariance" | "symbols"


def polar_grid(
    angles_rad: NDArray[np.float64], ranges_m: NDArray[np.float64]
) -> list[PolarPoint]:
    """Angle-major list of grid points (ranges vary fastest)."""
    return [
        PolarPoint(range_m=float(d), angle_rad=float(theta))
        for theta in np.asarray(angles_rad, dtype=float)
        for d in np.asarray(ranges_m, dtype=float)
    ]


def _as_covariance(source: NDArray[np.complex128], kind: PatternKind):
    source = np.asarray(source, dtype=complex)
    if source.ndim != 2:
        raise ValueError("source must be a covariance or an N×S symbol matrix")
    if kind == "auto":
        square = source.shape[0] == source.shape[1]
        scale = max(1.0, float(np.abs(source).max(initial=0.0)))
        hermitian = square and (
            np.abs(source - source.conj().T).max(initial=0.0) <= 1e-8 * scale
        )
        kind = "covariance" if hermitian else "symbols"
    if kind == "covariance":
        if source.shape[0] != source.shape[1]:
            raise ValueError("covariance source must be square")
        return source
    if kind == "symbols":
        return (source @ source.conj().T) / source.shape[1]
    raise ValueError(f"kind must be 'auto', 'covariance' or 'symbols', got {kind!r}")


def beampattern(
    source: NDArray[np.complex128],
    cfg: ArrayConfig,
    grid: list[PolarPoint],
    kind: PatternKind = "auto",
) -> NDArray[np.float64]:
    """Average received power at each grid point, in source power units.

    ``source`` is either an N×N transmit covariance or an N×S symbol
    matrix (its sample covariance is used); ``kind='auto'`` picks by
    shape and Hermitian symmetry — pass an explicit kind for square
    non-covariance sources.
    """
    covariance = _as_covariance(source, kind)
    if covariance.shape[0] != cfg.n_elements:
        raise ValueError(
            f"source rows ({covariance.shape[0]}) must match the array size "
            f"({cfg.n_elements})"
        )
    if not grid:
        raise ValueError("grid must contain at least one point")
    steering = np.empty((cfg.n_elements, len(grid)), dtype=complex)
    for col, point in enumerate(grid):
        steering[:, col] = steering_vector(point, cfg).entries
    projected = covariance @ steering.conj()
    values = np.einsum("np,np->p", steering, projected).real
    return np.maximum(values, 0.0)


def focusing_gain(
    source: NDArray[np.complex128],
    cfg: ArrayConfig,
    grid: list[PolarPoint],
    kind: PatternKind = "auto",
) -> NDArray[np.float64]:
    """Pattern power relative to an isotropic transmitter of the same budget.

    Raw pattern values carry the free-space amplitude decay, so on maps
    that span a wide range interval the near cells dominate regardless of
    the design.  Dividing each cell by the identity-covariance level
    ``N * beta(p)`` leaves pure array directivity: the map is flat at one
    for an isotropic design and peaks where the design coherently focuses.
    """
    values = beampattern(source, cfg, grid, kind)
    isotropic = cfg.n_elements * np.array([path_loss(p, cfg) for p in grid])
    return values / isotropic


def beampattern_db(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Peak-normalized decibel map (maximum maps to 0 dB)."""
    values = np.asarray(values, dtype=float)
    peak = values.max(initial=0.0)
    if peak <= 0:
        raise ValueError("pattern has no positive power to normalize by")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(values / peak)
