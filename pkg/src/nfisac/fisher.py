"""Fisher information and Cramér–Rao bounds for multi-target estimation.

The unknown parameter vector stacks, for L targets, the angles, ranges,
and real/imaginary reflectivity parts in the fixed order
``[angle_1..angle_L, range_1..range_L, re_1..re_L, im_1..im_L]``.

Two routes compute the same 4L×4L information matrix:

- :func:`fim_direct` differentiates the noiseless received block
  ``mu = sum_l b_l a_l v_l^T X`` with respect to each parameter and
  forms ``F_ij = (2/sigma^2) Re tr(D_i^H D_j)``.
- :func:`fim_from_covariance` only sees the transmit covariance
  ``R_x = (1/S) X X^H`` and assembles the same matrix from Hadamard
  products of L×L Gram matrices; it is affine in ``R_x``, which is what
  the semidefinite designer exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from nfisac.arrays import ArrayConfig, PolarPoint, Target, steering_derivative, steering_vector

__all__ = [
    "ParameterVector",
    "FimMatrix",
    "MeanDerivatives",
    "mean_and_derivatives",
    "fim_direct",
    "fim_from_covariance",
    "fim_coefficient_blocks",
    "crb_diagonal",
]

_HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class ParameterVector:
    """Stacked real parameters of an L-target scene, in fixed block order."""

    angles: NDArray[np.float64]
    ranges: NDArray[np.float64]
    reflect_real: NDArray[np.float64]
    reflect_imag: NDArray[np.float64]

    def __post_init__(self) -> None:
        lengths = {
            len(self.angles),
            len(self.ranges),
            len(self.reflect_real),
            len(self.reflect_imag),
        }
        if len(lengths) != 1:
            raise ValueError("all four parameter blocks must have length L")

    @classmethod
    def from_targets(cls, targets: Sequence[Target]) -> "ParameterVector":
        return cls(
            angles=np.array([t.location.angle_rad for t in targets], dtype=float),
            ranges=np.array([t.location.range_m for t in targets], dtype=float),
            reflect_real=np.array([t.reflectivity.real for t in targets], dtype=float),
            reflect_imag=np.array([t.reflectivity.imag for t in targets], dtype=float),
        )

    def to_targets(self) -> list[Target]:
        return [
            Target(
                location=PolarPoint(range_m=float(d), angle_rad=float(th)),
                reflectivity=complex(br, bi),
            )
            for th, d, br, bi in zip(
                self.angles, self.ranges, self.reflect_real, self.reflect_imag
            )
        ]

    @property
    def n_targets(self) -> int:
        return len(self.angles)

    def as_array(self) -> NDArray[np.float64]:
        """Flat 4L vector in the canonical block order."""
        return np.concatenate(
            [self.angles, self.ranges, self.reflect_real, self.reflect_imag]
        ).astype(float)

    @classmethod
    def from_array(cls, values: NDArray[np.float64]) -> "ParameterVector":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size % 4 != 0:
            raise ValueError("parameter vector length must be a multiple of 4")
        n = values.size // 4
        return cls(
            angles=values[:n].copy(),
            ranges=values[n : 2 * n].copy(),
            reflect_real=values[2 * n : 3 * n].copy(),
            reflect_imag=values[3 * n :].copy(),
        )


@dataclass(frozen=True)
class FimMatrix:
    """Real symmetric PSD information matrix with its noise/symbol context."""

    entries: NDArray[np.float64]
    noise_variance: float
    symbol_count: int

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("information matrix must be square")
        if entries.shape[0] % 4 != 0:
            raise ValueError("information matrix order must be 4L")
        scale = max(1.0, float(np.abs(entries).max(initial=0.0)))
        if np.abs(entries - entries.T).max(initial=0.0) > 1e-8 * scale:
            raise ValueError("information matrix must be symmetric")
        if self.noise_variance <= 0:
            raise ValueError("noise variance must be positive")
        if self.symbol_count < 1:
            raise ValueError("symbol count must be at least 1")
        object.__setattr__(self, "entries", entries)

    @property
    def n_targets(self) -> int:
        return self.entries.shape[0] // 4

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class MeanDerivatives:
    """Noiseless received block and its per-parameter derivative matrices.

    Each derivative stack has shape (L, N, S); ``stacked`` flattens them
    into the canonical 4L ordering.
    """

    mean: NDArray[np.complex128]
    wrt_angle: NDArray[np.complex128]
    wrt_range: NDArray[np.complex128]
    wrt_reflect_real: NDArray[np.complex128]
    wrt_reflect_imag: NDArray[np.complex128] = field(init=False)

    def __post_init__(self) -> None:
        # The imaginary-part derivative is exactly j times the real-part one.
        object.__setattr__(self, "wrt_reflect_imag", 1j * self.wrt_reflect_real)

    def stacked(self) -> NDArray[np.complex128]:
        """(4L, N, S) array in canonical parameter order."""
        return np.concatenate(
            [self.wrt_angle, self.wrt_range, self.wrt_reflect_real, self.wrt_reflect_imag],
            axis=0,
        )


def _as_symbol_matrix(x: object, cfg: ArrayConfig) -> NDArray[np.complex128]:
    symbols = getattr(x, "symbols", x)
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.ndim != 2:
        raise ValueError("symbol block must be a 2-D N×S matrix")
    if symbols.shape[0] != cfg.n_elements:
        raise ValueError(
            f"symbol block has {symbols.shape[0]} rows, expected {cfg.n_elements}"
        )
    return symbols


def _steering_stacks(
    targets: Sequence[Target], cfg: ArrayConfig
) -> tuple[NDArray[np.complex128], NDArray[np.complex128], NDArray[np.complex128], NDArray[np.complex128]]:
    """Columns: steering vectors and their angle/range derivatives; plus b."""
    if len(targets) < 1:
        raise ValueError("at least one target is required")
    cols = [steering_vector(t.location, cfg).entries for t in targets]
    d_angle = [steering_derivative(t.location, cfg, "angle") for t in targets]
    d_range = [steering_derivative(t.location, cfg, "range") for t in targets]
    b = np.array([t.reflectivity for t in targets], dtype=complex)
    return (
        np.stack(cols, axis=1),
        np.stack(d_angle, axis=1),
        np.stack(d_range, axis=1),
        b,
    )


def mean_and_derivatives(
    targets: Sequence[Target], x: object, cfg: ArrayConfig
) -> MeanDerivatives:
    """Noiseless echo block and its derivatives for every scene parameter.

    The echo of target ``l`` is ``b_l a_l v_l^T X`` with identical transmit
    and receive steering vectors on the monostatic array.
    """
    symbols = _as_symbol_matrix(x, cfg)
    a, a_dot_angle, a_dot_range, b = _steering_stacks(targets, cfg)
    n_targets = a.shape[1]

    vtx = a.T @ symbols  # rows: v_l^T X
    vdot_angle_tx = a_dot_angle.T @ symbols
    vdot_range_tx = a_dot_range.T @ symbols

    mean = np.einsum("l,nl,ls->ns", b, a, vtx)
    wrt_angle = np.empty((n_targets,) + symbols.shape, dtype=complex)
    wrt_range = np.empty_like(wrt_angle)
    wrt_re = np.empty_like(wrt_angle)
    for l in range(n_targets):
        wrt_angle[l] = b[l] * (
            np.outer(a_dot_angle[:, l], vtx[l]) + np.outer(a[:, l], vdot_angle_tx[l])
        )
        wrt_range[l] = b[l] * (
            np.outer(a_dot_range[:, l], vtx[l]) + np.outer(a[:, l], vdot_range_tx[l])
        )
        wrt_re[l] = np.outer(a[:, l], vtx[l])
    return MeanDerivatives(
        mean=mean, wrt_angle=wrt_angle, wrt_range=wrt_range, wrt_reflect_real=wrt_re
    )


def fim_direct(
    targets: Sequence[Target], x: object, noise_variance: float, cfg: ArrayConfig
) -> FimMatrix:
    """Information matrix from explicit derivatives of the mean block."""
    if noise_variance <= 0:
        raise ValueError("noise variance must be positive")
    derivs = mean_and_derivatives(targets, x, cfg).stacked()
    n_params = derivs.shape[0]
    flat = derivs.reshape(n_params, -1)
    gram = flat.conj() @ flat.T
    entries = (2.0 / noise_variance) * gram.real
    entries = 0.5 * (entries + entries.T)
    return FimMatrix(
        entries=entries,
        noise_variance=float(noise_variance),
        symbol_count=int(np.asarray(getattr(x, "symbols", x)).shape[1]),
    )


def _derivative_term_families(
    targets: Sequence[Target], cfg: ArrayConfig
) -> list[list[tuple[NDArray[np.complex128], NDArray[np.complex128], NDArray[np.complex128]]]]:
    """Rank-1 expansion of each parameter family's mean derivative.

    Family entry ``(c, P, Q)`` encodes per-target derivative terms
    ``c_l p_l q_l^T X`` with ``p_l``/``q_l`` the columns of P/Q; families
    are listed in the canonical [angle, range, re, im] order.
    """
    a, a_dot_angle, a_dot_range, b = _steering_stacks(targets, cfg)
    ones = np.ones_like(b)
    return [
        [(b, a_dot_angle, a), (b, a, a_dot_angle)],
        [(b, a_dot_range, a), (b, a, a_dot_range)],
        [(ones, a, a)],
        [(1j * ones, a, a)],
    ]


def _check_covariance(r_x: NDArray[np.complex128], cfg: ArrayConfig) -> NDArray[np.complex128]:
    r_x = np.asarray(r_x, dtype=complex)
    if r_x.shape != (cfg.n_elements, cfg.n_elements):
        raise ValueError(
            f"covariance must be {cfg.n_elements}×{cfg.n_elements}, got {r_x.shape}"
        )
    scale = max(1.0, float(np.abs(r_x).max(initial=0.0)))
    if np.abs(r_x - r_x.conj().T).max(initial=0.0) > _HERMITIAN_TOL * scale:
        raise ValueError("covariance must be Hermitian")
    return r_x


def fim_from_covariance(
    targets: Sequence[Target],
    r_x: NDArray[np.complex128],
    n_symbols: int,
    noise_variance: float,
    cfg: ArrayConfig,
) -> FimMatrix:
    """Information matrix as an affine function of the transmit covariance.

    Each L×L block is a sum of Hadamard products between steering-vector
    Gram matrices and covariance quadratic forms, scaled by the symbol
    count and the inverse noise variance.  For ``r_x = (1/S) X X^H`` the
    result matches :func:`fim_direct` on ``X``.
    """
    if noise_variance <= 0:
        raise ValueError("noise variance must be positive")
    if n_symbols < 1:
        raise ValueError("symbol count must be at least 1")
    r_x = _check_covariance(r_x, cfg)
    families = _derivative_term_families(targets, cfg)
    n_targets = len(targets)
    scale = 2.0 * n_symbols / noise_variance

    entries = np.zeros((4 * n_targets, 4 * n_targets))
    r_conj = r_x.conj()
    for i, fam_i in enumerate(families):
        for j, fam_j in enumerate(families):
            block = np.zeros((n_targets, n_targets), dtype=complex)
            for c_i, p_i, q_i in fam_i:
                for c_j, p_j, q_j in fam_j:
                    gram = p_i.conj().T @ p_j
                    quad = q_i.conj().T @ r_conj @ q_j
                    block += np.outer(c_i.conj(), c_j) * gram * quad
            rows = slice(i * n_targets, (i + 1) * n_targets)
            cols = slice(j * n_targets, (j + 1) * n_targets)
            entries[rows, cols] = scale * block.real
    entries = 0.5 * (entries + entries.T)
    return FimMatrix(
        entries=entries,
        noise_variance=float(noise_variance),
        symbol_count=int(n_symbols),
    )


def fim_coefficient_blocks(
    targets: Sequence[Target],
    n_symbols: int,
    noise_variance: float,
    cfg: ArrayConfig,
) -> NDArray[np.complex128]:
    """Hermitian N×N coefficients H with ``F_ij = Re tr(r_x @ H[i, j])``.

    This is :func:`fim_from_covariance` unrolled into one matrix per
    information entry, which lets an optimizer express the whole
    information matrix as an affine map of a covariance variable.
    """
    if noise_variance <= 0:
        raise ValueError("noise variance must be positive")
    if n_symbols < 1:
        raise ValueError("symbol count must be at least 1")
    families = _derivative_term_families(targets, cfg)
    n_targets = len(targets)
    n = cfg.n_elements
    scale = 2.0 * n_symbols / noise_variance

    blocks = np.zeros((4 * n_targets, 4 * n_targets, n, n), dtype=complex)
    for fi, fam_i in enumerate(families):
        for fj, fam_j in enumerate(families):
            for li in range(n_targets):
                for lj in range(n_targets):
                    acc = np.zeros((n, n), dtype=complex)
                    for c_i, p_i, q_i in fam_i:
                        for c_j, p_j, q_j in fam_j:
                            coeff = (
                                np.conj(c_i[li])
                                * c_j[lj]
                                * np.vdot(p_i[:, li], p_j[:, lj])
                            )
                            acc += coeff * np.outer(q_i[:, li].conj(), q_j[:, lj])
                    acc *= scale
                    blocks[fi * n_targets + li, fj * n_targets + lj] = 0.5 * (
                        acc + acc.conj().T
                    )
    return blocks


def crb_diagonal(fim: FimMatrix, ridge: float | None = None) -> NDArray[np.float64]:
    """Diagonal of the inverse information matrix, optionally ridge-stabilized.

    ``ridge=None`` applies the default ``1e-10 * trace(F) / order``;
    pass ``ridge=0`` for an exact inverse.  Square roots of the returned
    entries are the root-CRB values per parameter.
    """
    entries = fim.entries
    order = entries.shape[0]
    if ridge is None:
        ridge = 1e-10 * float(np.trace(entries)) / order
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    regularized = entries + ridge * np.eye(order)
    try:
        factor = scipy.linalg.cho_factor(regularized)
        inverse = scipy.linalg.cho_solve(factor, np.eye(order))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ValueError(
            "information matrix is singular even after ridge "
            f"(condition number {np.linalg.cond(regularized):.3e})"
        ) from exc
    return np.diag(inverse).copy()
