"""Echo synthesis, sample covariance, and two-dimensional MUSIC estimation.

The receive chain mirrors the transmit model: each target contributes a
rank-one echo ``b_l a_l v_l^T X`` on the monostatic array, noise is
circularly-symmetric complex Gaussian, and location estimates come from
the classical noise-subspace spectrum evaluated on a polar grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .arrays import (
    ArrayConfig,
    PolarPoint,
    element_offsets,
    fraunhofer_distances,
    steering_vector,
)
from .designer.scene import Scene

__all__ = [
    "SPECTRUM_CAP",
    "EchoBlock",
    "NoiseSubspace",
    "MusicGrid",
    "PeakSet",
    "EstimationError",
    "generate_echo",
    "sample_covariance",
    "noise_subspace",
    "music_spectrum",
    "default_music_grid",
    "find_peaks",
    "estimation_error",
]

SPECTRUM_CAP = 1e12
"""Default ceiling for spectrum values where the denominator underflows."""

_DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class EchoBlock:
    """Received radar samples for one transmitted symbol block."""

    samples: NDArray[np.complex128]
    noise_variance: float
    seed: int


@dataclass(frozen=True)
class NoiseSubspace:
    """Orthonormal basis of the covariance's smallest-eigenvalue subspace.

    ``eigenvalues`` holds the full spectrum in descending order.
    ``degenerate`` flags an (near-)equal eigenvalue pair straddling the
    signal/noise boundary: the subspace split is then arbitrary and any
    estimate built on it is unreliable, but the basis is still returned.
    """

    basis: NDArray[np.complex128]
    eigenvalues: NDArray[np.float64]
    degenerate: bool


@dataclass(frozen=True)
class MusicGrid:
    """Spectrum values over an ascending polar grid."""

    angles: NDArray[np.float64]
    ranges: NDArray[np.float64]
    spectrum: NDArray[np.float64]

    def __post_init__(self) -> None:
        angles = np.asarray(self.angles, dtype=float)
        ranges = np.asarray(self.ranges, dtype=float)
        if np.any(np.diff(angles) <= 0) or np.any(np.diff(ranges) <= 0):
            raise ValueError("grid axes must be strictly ascending")
        if self.spectrum.shape != (angles.size, ranges.size):
            raise ValueError(
                "spectrum shape "
                f"{self.spectrum.shape} does not match the "
                f"{angles.size}x{ranges.size} grid"
            )


@dataclass(frozen=True)
class PeakSet:
    """Ranked spectrum peaks; ``shortfall`` marks fewer maxima than asked."""

    points: tuple[PolarPoint, ...]
    indices: tuple[tuple[int, int], ...]
    shortfall: bool


@dataclass(frozen=True)
class EstimationError:
    """Signed per-target errors under the best estimate-to-truth matching."""

    angle_errors: NDArray[np.float64]
    range_errors: NDArray[np.float64]
    rmse_angle_rad: float
    rmse_range_m: float


def generate_echo(scene: Scene, x: object, seed: int) -> EchoBlock:
    """Superpose every target's rank-one echo and add seeded receiver noise.

    Noise entries are built from two independent real Gaussians of variance
    ``noise_variance / 2`` each, so the draw depends only on the seed and the
    block shape: echoes of different symbol blocks under one seed share it.
    """
    symbols = np.asarray(x, dtype=complex)
    if symbols.ndim != 2 or symbols.shape[0] != scene.array.n_elements:
        raise ValueError(
            "symbol block must be an N x S matrix for the scene's "
            f"{scene.array.n_elements}-element array, got {symbols.shape}"
        )
    signal = np.zeros_like(symbols)
    for target in scene.targets:
        v = steering_vector(target.location, scene.array).entries
        a = steering_vector(target.location, scene.array, kind="receive").entries
        signal += target.reflectivity * np.outer(a, v @ symbols)
    draws = np.random.default_rng(seed).standard_normal((*symbols.shape, 2))
    noise = np.sqrt(scene.radar_noise_power / 2.0) * (
        draws[..., 0] + 1j * draws[..., 1]
    )
    return EchoBlock(
        samples=signal + noise,
        noise_variance=scene.radar_noise_power,
        seed=seed,
    )


def sample_covariance(echo: EchoBlock | NDArray[np.complex128]):
    """Average outer product ``(1/S) sum_s y_s y_s^H`` of the echo columns."""
    samples = np.asarray(getattr(echo, "samples", echo), dtype=complex)
    if samples.ndim != 2 or samples.shape[1] < 1:
        raise ValueError("echo samples must form an N x S matrix with S >= 1")
    covariance = samples @ samples.conj().T / samples.shape[1]
    return 0.5 * (covariance + covariance.conj().T)


def noise_subspace(
    covariance: NDArray[np.complex128], n_targets: int
) -> NoiseSubspace:
    """Eigenvectors of the ``N - n_targets`` smallest covariance eigenvalues."""
    covariance = np.asarray(covariance, dtype=complex)
    n = covariance.shape[0]
    if covariance.shape != (n, n):
        raise ValueError("covariance must be square")
    if not 0 <= n_targets < n:
        raise ValueError(
            f"need 0 <= n_targets < N, got n_targets={n_targets} with N={n}"
        )
    hermitian_gap = np.abs(covariance - covariance.conj().T).max()
    if hermitian_gap > 1e-8 * max(1.0, np.abs(covariance).max()):
        raise ValueError("covariance is not Hermitian")
    eigenvalues, eigenvectors = np.linalg.eigh(
        0.5 * (covariance + covariance.conj().T)
    )
    boundary = n - n_targets
    scale = max(float(eigenvalues[-1]), np.finfo(float).tiny)
    degenerate = n_targets > 0 and (
        (eigenvalues[boundary] - eigenvalues[boundary - 1]) / scale
        <= _DEGENERACY_RTOL
    )
    return NoiseSubspace(
        basis=eigenvectors[:, :boundary],
        eigenvalues=eigenvalues[::-1].copy(),
        degenerate=bool(degenerate),
    )


def _steering_grid(
    cfg: ArrayConfig,
    angles_rad: NDArray[np.float64],
    ranges_m: NDArray[np.float64],
) -> NDArray[np.complex128]:
    """Receive steering vectors for a full polar grid, shape N x A x R."""
    offsets = element_offsets(cfg)[:, None, None]
    d = np.asarray(ranges_m, dtype=float)[None, None, :]
    theta = np.asarray(angles_rad, dtype=float)[None, :, None]
    squared = d * d + offsets * offsets - 2.0 * d * offsets * np.cos(theta)
    r = np.sqrt(np.maximum(squared, 0.0))
    amplitude = np.sqrt(
        cfg.wavelength_m**2 * np.sin(theta) / (16.0 * np.pi * d * d)
    )
    return amplitude * np.exp(-2j * np.pi * r / cfg.wavelength_m)


def music_spectrum(
    subspace: NoiseSubspace | NDArray[np.complex128],
    cfg: ArrayConfig,
    angles_rad: NDArray[np.float64],
    ranges_m: NDArray[np.float64],
    cap: float = SPECTRUM_CAP,
) -> MusicGrid:
    """Reciprocal noise-subspace energy of the steering vector per grid cell.

    Values are clamped at ``cap`` so exact subspace zeros (noiseless data)
    yield large finite numbers instead of infinities.
    """
    basis = np.asarray(getattr(subspace, "basis", subspace), dtype=complex)
    angles = np.asarray(angles_rad, dtype=float)
    ranges = np.asarray(ranges_m, dtype=float)
    if angles.size == 0 or ranges.size == 0:
        raise ValueError("grid must contain at least one angle and one range")
    if cap <= 0:
        raise ValueError("cap must be positive")
    steering = _steering_grid(cfg, angles, ranges).reshape(basis.shape[0], -1)
    projected = basis.conj().T @ steering
    denominator = np.einsum("kg,kg->g", projected, projected.conj()).real
    spectrum = 1.0 / np.maximum(denominator, 1.0 / cap)
    return MusicGrid(
        angles=angles,
        ranges=ranges,
        spectrum=spectrum.reshape(angles.size, ranges.size),
    )


def default_music_grid(
    scene: Scene, n_angles: int = 200, n_ranges: int = 200
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Evaluation grid spanning the targets: +/-30 degrees, effective field.

    Angles cover the true target angles plus thirty degrees each side,
    clipped inside the array's valid (0, pi) sector; ranges run from one
    meter to 1.2x the effective focusing region (a tenth of the array-form
    far-field boundary).
    """
    truths = [t.location.angle_rad for t in scene.targets]
    margin = np.deg2rad(30.0)
    lo = max(min(truths) - margin, 1e-6)
    hi = min(max(truths) + margin, np.pi - 1e-6)
    angles = np.linspace(lo, hi, n_angles)
    effective = fraunhofer_distances(scene.array)[1] / 10.0
    ranges = np.linspace(1.0, 1.2 * effective, n_ranges)
    return angles, ranges


def find_peaks(grid: MusicGrid, count: int) -> PeakSet:
    """Strongest ``count`` strict local maxima of the spectrum.

    A cell is a local maximum when it strictly exceeds all existing
    neighbours in the eight surrounding cells; equal ranks break toward
    the lower angle index, then the lower range index.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if grid.spectrum.size <= count:
        raise ValueError(
            f"grid has {grid.spectrum.size} cells; need more than {count}"
        )
    values = grid.spectrum
    padded = np.full((values.shape[0] + 2, values.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = values
    is_peak = np.ones(values.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            shifted = padded[1 + di : 1 + di + values.shape[0],
                             1 + dj : 1 + dj + values.shape[1]]
            is_peak &= values > shifted
    rows, cols = np.nonzero(is_peak)
    order = sorted(
        range(rows.size), key=lambda k: (-values[rows[k], cols[k]], rows[k], cols[k])
    )[:count]
    indices = tuple((int(rows[k]), int(cols[k])) for k in order)
    points = tuple(
        PolarPoint(range_m=float(grid.ranges[j]), angle_rad=float(grid.angles[i]))
        for i, j in indices
    )
    return PeakSet(points=points, indices=indices, shortfall=len(points) < count)


def estimation_error(
    estimates: Sequence[PolarPoint], truths: Sequence[PolarPoint]
) -> EstimationError:
    """Errors under the assignment minimizing total normalized distance.

    The matching cost per pair is ``(d_theta)^2 + (d_range / true_range)^2``
    (radians against relative range), minimized over all assignments by
    brute force; reported errors are ordered by truth index.
    """
    if len(estimates) != len(truths):
        raise ValueError(
            f"got {len(estimates)} estimates for {len(truths)} truths"
        )
    if len(truths) == 0:
        raise ValueError("need at least one target")
    est_angle = np.array([p.angle_rad for p in estimates], dtype=float)
    est_range = np.array([p.range_m for p in estimates], dtype=float)
    true_angle = np.array([p.angle_rad for p in truths], dtype=float)
    true_range = np.array([p.range_m for p in truths], dtype=float)
    best_cost, best_order = np.inf, None
    for order in permutations(range(len(truths))):
        picked = np.array(order)
        cost = float(
            np.sum(
                (est_angle[picked] - true_angle) ** 2
                + ((est_range[picked] - true_range) / true_range) ** 2
            )
        )
        if cost < best_cost:
            best_cost, best_order = cost, picked
    angle_errors = est_angle[best_order] - true_angle
    range_errors = est_range[best_order] - true_range
    return EstimationError(
        angle_errors=angle_errors,
        range_errors=range_errors,
        rmse_angle_rad=float(np.sqrt(np.mean(angle_errors**2))),
        rmse_range_m=float(np.sqrt(np.mean(range_errors**2))),
    )
