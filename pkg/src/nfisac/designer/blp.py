"""Block-level precoding baseline via semidefinite relaxation.

One beamformer covariance ``W_k`` per user carries that user's data
stream; streams are orthogonal across the block, so the transmit
covariance is ``sum_k W_k`` and the per-user SINR constraint at level
``gamma`` is the linear row::

    tr(Q_k W_k) - gamma * sum_{j != k} tr(Q_k W_j) >= gamma * sigma_c^2

with ``Q_k`` the rank-one channel outer product.  The joint problem is
non-convex in ``(gamma, W)``; the SINR level is searched on the outside
(bisection for the ceiling, a shared level grid for weighted trade-offs)
with a convex bound-minimizing program inside at each fixed level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from nfisac import conic
from nfisac.conic import ConeBlock, ConicProgram, ProgramBuilder
from nfisac.designer.scene import Scene, user_channels
from nfisac.designer.slp import (
    DEFAULT_CELL_CAP,
    _information_scaling,
    _InformationScaling,
    _safe_crb,
    _solve_or_raise,
)
from nfisac.errors import ConfigError, InfeasibleError, SolverFailureError
from nfisac.fisher import fim_coefficient_blocks, fim_from_covariance

__all__ = [
    "BlpDesign",
    "ExtractionGapWarning",
    "assemble_p2_feasibility",
    "design_blp",
    "design_blp_at_level",
    "orthogonal_data_matrix",
]

#: Relative SINR-bracket width at which the ceiling bisection stops.
BISECTION_RELATIVE_TOL = 1e-4

#: Number of SINR levels probed when optimizing a weighted trade-off.
SINR_LEVELS = 25

#: Extracted beamformers must reach this fraction of the relaxed SINR.
EXTRACTION_FRACTION = 0.99

_RANDOMIZATION_ROUNDS = 50


class ExtractionGapWarning(UserWarning):
    """Rank-one extraction fell short of the relaxed SINR level."""


@dataclass(frozen=True)
class BlpDesign:
    """Solved block-level baseline design."""

    beamformer_covariances: NDArray[np.complex128]
    beamformers: NDArray[np.complex128]
    data_matrix: NDArray[np.complex128]
    gamma: float
    crb_bounds: NDArray[np.float64]
    objective: float
    weight: float
    nf_sensing: float
    nf_comm: float
    extraction_sinr: float
    solver_status: str

    @property
    def symbols(self) -> NDArray[np.complex128]:
        """Transmit symbol matrix: beamformers applied to the data streams."""
        return self.beamformers @ self.data_matrix

    @property
    def covariance_bound(self) -> NDArray[np.complex128]:
        """Relaxation-level transmit covariance (sum of the ``W_k``)."""
        return self.beamformer_covariances.sum(axis=0)

    @property
    def sinr(self) -> float:
        return self.gamma


class _P2Handles(NamedTuple):
    beamformer: list[ConeBlock]
    schur: list[ConeBlock]
    sinr_slack: ConeBlock
    power_slack: ConeBlock
    budget_slack: ConeBlock | None
    scaling: _InformationScaling | None


def orthogonal_data_matrix(n_users: int, n_symbols: int) -> NDArray[np.complex128]:
    """K×S unit-power streams with ``(1/S) D D^H = I`` exactly."""
    if n_symbols < n_users:
        raise ValueError(
            f"need at least as many symbols ({n_symbols}) as users ({n_users}) "
            "for orthogonal streams"
        )
    return scipy.linalg.dft(n_symbols)[:n_users, :]


def _channel_outer_products(scene: Scene) -> list[NDArray[np.complex128]]:
    """Hermitian ``Q_k = conj(h_k) h_k^T`` so ``tr(Q_k w w^H) = |h_k^T w|^2``."""
    return [
        np.outer(channel.entries.conj(), channel.entries)
        for channel in user_channels(scene)
    ]


def _assemble_p2(
    scene: Scene,
    gamma: float,
    sensing_budget: float | None,
    include_crb: bool,
    cell_cap: int,
) -> tuple[ConicProgram, _P2Handles]:
    if gamma < 0:
        raise ValueError(f"SINR level must be nonnegative, got {gamma}")
    n = scene.n_elements
    k_count = scene.n_users
    if n * scene.symbol_count > cell_cap:
        raise ConfigError(
            f"design assembly refused: n_elements*symbol_count = "
            f"{n * scene.symbol_count} exceeds the cap of {cell_cap}; "
            "shrink the scene or raise cell_cap"
        )
    order = 4 * scene.n_targets
    q_mats = _channel_outer_products(scene)

    builder = ProgramBuilder()
    w_blocks = [
        builder.add_block("psd_hermitian", n, name=f"beamformer_{k}")
        for k in range(k_count)
    ]
    schur_blocks = (
        [builder.add_block("psd", order + 1, name=f"schur_{i}") for i in range(order)]
        if include_crb
        else []
    )
    sinr_slack = builder.add_block("nonnegative", k_count, name="sinr_slack")
    power_slack = builder.add_block("nonnegative", 1, name="power_slack")
    budget_slack = (
        builder.add_block("nonnegative", 1, name="budget_slack")
        if sensing_budget is not None
        else None
    )

    # Per-user SINR rows at the fixed level.
    for k in range(k_count):
        indices: list[int] = []
        coeffs: list[float] = []
        for j, block in enumerate(w_blocks):
            weight = q_mats[k] if j == k else -gamma * q_mats[k]
            if j != k and gamma == 0.0:
                continue
            idx_arr, coeff_arr = ProgramBuilder.trace_entries(block, weight)
            keep = coeff_arr != 0.0
            indices.extend(idx_arr[keep].tolist())
            coeffs.extend(coeff_arr[keep].tolist())
        indices.append(sinr_slack.offset + k)
        coeffs.append(-1.0)
        builder.add_equality(indices, coeffs, gamma * scene.comm_noise_power)

    # Total transmit power in budget units: sum_k tr(W_k)/P_t + slack = 1.
    indices = []
    coeffs = []
    for block in w_blocks:
        for i in range(n):
            (idx, coeff), = ProgramBuilder.entry(block, i, i)
            indices.append(idx)
            coeffs.append(coeff / scene.power_budget)
    indices.append(power_slack.offset)
    coeffs.append(1.0)
    builder.add_equality(indices, coeffs, 1.0)

    scaling = _information_scaling(scene) if include_crb else None
    if include_crb:
        weights = fim_coefficient_blocks(
            scene.targets,
            scene.symbol_count,
            scene.radar_noise_power,
            scene.array,
        )
        for j in range(order):
            for k in range(j, order):
                indices = []
                coeffs = []
                (idx, coeff), = ProgramBuilder.entry(schur_blocks[0], j, k)
                indices.append(idx)
                coeffs.append(coeff)
                for block in w_blocks:
                    idx_arr, coeff_arr = ProgramBuilder.trace_entries(
                        block, -scaling.tie[j, k] * weights[j, k]
                    )
                    keep = coeff_arr != 0.0
                    indices.extend(idx_arr[keep].tolist())
                    coeffs.extend(coeff_arr[keep].tolist())
                builder.add_equality(indices, coeffs, 0.0)
        for i in range(1, order):
            for j in range(order):
                for k in range(j, order):
                    (idx0, coeff0), = ProgramBuilder.entry(schur_blocks[0], j, k)
                    (idxi, coeffi), = ProgramBuilder.entry(schur_blocks[i], j, k)
                    builder.add_equality([idx0, idxi], [coeff0, -coeffi], 0.0)
        # Border pin and corner unit follow the same congruence as the
        # symbol-level program: corners live in reference-bound units.
        for i in range(order):
            for j in range(order):
                (idx, coeff), = ProgramBuilder.entry(schur_blocks[i], j, order)
                builder.add_equality(
                    [idx], [coeff], scaling.border[i] if i == j else 0.0
                )
        for i, block in enumerate(schur_blocks):
            (idx, coeff), = ProgramBuilder.entry(block, order, order)
            builder.add_objective([idx], [scaling.corner_unit[i] * coeff])
        if sensing_budget is not None:
            indices = []
            coeffs = []
            for i, block in enumerate(schur_blocks):
                (idx, coeff), = ProgramBuilder.entry(block, order, order)
                indices.append(idx)
                coeffs.append(scaling.corner_unit[i] * coeff)
            indices.append(budget_slack.offset)
            coeffs.append(1.0)
            builder.add_equality(indices, coeffs, float(sensing_budget))
    else:
        # Pure-feasibility probes maximize delivered signal power so the
        # returned covariances are informative, not just feasible.
        for k, block in enumerate(w_blocks):
            idx_arr, coeff_arr = ProgramBuilder.trace_entries(block, -q_mats[k])
            keep = coeff_arr != 0.0
            builder.add_objective(idx_arr[keep].tolist(), coeff_arr[keep].tolist())

    handles = _P2Handles(
        w_blocks, schur_blocks, sinr_slack, power_slack, budget_slack, scaling
    )
    return builder.build(), handles


def assemble_p2_feasibility(
    scene: Scene,
    gamma_fixed: float,
    sensing_budget: float | None = None,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> ConicProgram:
    """Convex program at a fixed SINR level, bound-minimizing objective.

    With ``sensing_budget`` set, an extra row caps the bound sum so the
    program becomes a pure feasibility probe of (level, budget) pairs.
    """
    program, _ = _assemble_p2(
        scene, gamma_fixed, sensing_budget, include_crb=True, cell_cap=cell_cap
    )
    return program


def _extract_w(
    program: ConicProgram,
    handles: _P2Handles,
    solution: conic.ConicSolution,
) -> NDArray[np.complex128]:
    return np.stack(
        [program.value(block, solution.primal) for block in handles.beamformer]
    )


def _direct_sinrs(
    channels: NDArray[np.complex128],
    beamformers: NDArray[np.complex128],
    noise_power: float,
) -> NDArray[np.float64]:
    """Per-user SINR of concrete beamformers, straight from the definition."""
    received = channels @ beamformers  # (K users) x (K streams)
    power = np.abs(received) ** 2
    signal = np.diag(power)
    interference = power.sum(axis=1) - signal
    return signal / (interference + noise_power)


def _psd_root(matrix: NDArray[np.complex128]) -> NDArray[np.complex128]:
    eigenvalues, vectors = np.linalg.eigh(matrix)
    return (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.conj().T


def _extract_beamformers(
    scene: Scene,
    w_mats: NDArray[np.complex128],
    gamma_target: float,
    seed: int,
) -> tuple[NDArray[np.complex128], float]:
    """Rank-one beamformers from the relaxed covariances.

    Leading eigenvectors first; if they miss the relaxed SINR level by
    more than the accepted fraction, seeded Gaussian randomization rounds
    look for a better rank-one candidate of the same per-user power.
    """
    channels = np.stack([c.entries for c in user_channels(scene)])
    k_count, n = channels.shape
    traces = np.array([float(np.trace(w).real) for w in w_mats])

    def candidate_from(directions: NDArray[np.complex128]) -> NDArray[np.complex128]:
        columns = []
        for k in range(k_count):
            direction = directions[:, k]
            norm = np.linalg.norm(direction)
            if norm < np.finfo(float).tiny:
                columns.append(np.zeros(n, dtype=complex))
            else:
                columns.append(direction / norm * np.sqrt(traces[k]))
        return np.stack(columns, axis=1)

    leading = np.stack(
        [np.linalg.eigh(w)[1][:, -1] for w in w_mats], axis=1
    )
    best = candidate_from(leading)
    best_sinr = float(_direct_sinrs(channels, best, scene.comm_noise_power).min())
    target = EXTRACTION_FRACTION * gamma_target
    if best_sinr >= target:
        return best, best_sinr

    rng = np.random.default_rng(seed)
    roots = [_psd_root(w) for w in w_mats]
    for _ in range(_RANDOMIZATION_ROUNDS):
        draws = rng.standard_normal((n, k_count, 2))
        gaussians = (draws[..., 0] + 1j * draws[..., 1]) / np.sqrt(2.0)
        directions = np.stack(
            [roots[k] @ gaussians[:, k] for k in range(k_count)], axis=1
        )
        candidate = candidate_from(directions)
        sinr = float(_direct_sinrs(channels, candidate, scene.comm_noise_power).min())
        if sinr > best_sinr:
            best, best_sinr = candidate, sinr
        if best_sinr >= target:
            return best, best_sinr
    warnings.warn(
        f"rank-one extraction reached SINR {best_sinr:.6e}, short of "
        f"{EXTRACTION_FRACTION:.0%} of the relaxed level {gamma_target:.6e}",
        ExtractionGapWarning,
        stacklevel=2,
    )
    return best, best_sinr


def _max_sinr_level(
    scene: Scene,
    tol: float,
    max_iter: int,
    cell_cap: int,
) -> tuple[float, NDArray[np.complex128]]:
    """Communication ceiling: the largest supportable SINR level.

    Single-user scenes admit an exact one-shot program (the level enters
    linearly); otherwise the level is bisected with feasibility probes.
    """
    channels = [c.entries for c in user_channels(scene)]
    ceiling = min(
        scene.power_budget * float(np.linalg.norm(h)) ** 2 / scene.comm_noise_power
        for h in channels
    )
    if scene.n_users == 1:
        builder = ProgramBuilder()
        w_block = builder.add_block("psd_hermitian", scene.n_elements, name="beamformer_0")
        level = builder.add_block("free", 1, name="sinr_level")
        slack = builder.add_block("nonnegative", 2, name="slacks")
        q = _channel_outer_products(scene)[0]
        idx_arr, coeff_arr = ProgramBuilder.trace_entries(w_block, q)
        indices = idx_arr.tolist() + [level.offset, slack.offset]
        coeffs = coeff_arr.tolist() + [-scene.comm_noise_power, -1.0]
        builder.add_equality(indices, coeffs, 0.0)
        indices = []
        coeffs = []
        for i in range(scene.n_elements):
            (idx, coeff), = ProgramBuilder.entry(w_block, i, i)
            indices.append(idx)
            coeffs.append(coeff / scene.power_budget)
        indices.append(slack.offset + 1)
        coeffs.append(1.0)
        builder.add_equality(indices, coeffs, 1.0)
        builder.add_objective([level.offset], [-1.0])
        program = builder.build()
        solution = _solve_or_raise(
            program, "communication ceiling (single user)", tol, max_iter
        )
        w_mats = np.stack([program.value(w_block, solution.primal)])
        return float(solution.primal[level.offset]), w_mats

    low = 0.0
    program, handles = _assemble_p2(
        scene, 0.0, None, include_crb=False, cell_cap=cell_cap
    )
    solution = _solve_or_raise(program, "SINR probe (level 0)", tol, max_iter)
    best_w = _extract_w(program, handles, solution)
    high = ceiling
    probes: list[str] = []
    while high - low > BISECTION_RELATIVE_TOL * max(high, np.finfo(float).tiny):
        mid = 0.5 * (low + high)
        program, handles = _assemble_p2(
            scene, mid, None, include_crb=False, cell_cap=cell_cap
        )
        solution = conic.solve(program, tol=tol, max_iter=max_iter)
        probes.append(f"level {mid:.6e}: {solution.status}")
        if solution.status == "optimal":
            low = mid
            best_w = _extract_w(program, handles, solution)
        elif solution.status in ("infeasible", "max_iterations"):
            high = mid
        else:
            raise SolverFailureError(
                "SINR bisection failed; probe history: " + "; ".join(probes)
            )
    return low, best_w


def design_blp(
    scene: Scene,
    rho: float,
    normalizers: tuple[float, float] | None = None,
    seed: int = 0,
    tol: float = conic.DEFAULT_TOL,
    max_iter: int = conic.DEFAULT_MAX_ITER,
    cell_cap: int = DEFAULT_CELL_CAP,
    sinr_levels: int = SINR_LEVELS,
    inner_cache: dict | None = None,
) -> BlpDesign:
    """Best block-level design at weight ``rho``.

    The weighted objective ``-rho*sum(t)/NF_R + (1-rho)*gamma/NF_C`` is
    maximized over a shared grid of SINR levels up to the communication
    ceiling, each level scored by its convex bound-minimizing program;
    ``normalizers`` defaults to this baseline's own extremes (the bound
    sum with no SINR constraint, and the ceiling).  ``inner_cache`` lets
    sweeps share scored levels across weights.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {rho}")
    if inner_cache is None:
        inner_cache = {}

    def score_level(gamma: float):
        key = float(gamma)
        if key not in inner_cache:
            program, handles = _assemble_p2(
                scene, key, None, include_crb=True, cell_cap=cell_cap
            )
            solution = conic.solve(program, tol=tol, max_iter=max_iter)
            if solution.status != "optimal":
                inner_cache[key] = None
            else:
                order = 4 * scene.n_targets
                bounds = np.array(
                    [
                        float(program.value(b, solution.primal)[order, order])
                        for b in handles.schur
                    ]
                ) * handles.scaling.corner_unit
                inner_cache[key] = (bounds, _extract_w(program, handles, solution))
        return inner_cache[key]

    need_ceiling = rho < 1.0
    if need_ceiling:
        gamma_star, comm_w = _max_sinr_level(scene, tol, max_iter, cell_cap)
        if normalizers is None:
            zero_scored = score_level(0.0)
            if zero_scored is None:
                raise SolverFailureError(
                    "sensing extreme (SINR level 0) did not certify as optimal"
                )
            normalizers = (float(zero_scored[0].sum()), max(gamma_star, np.finfo(float).tiny))
    else:
        zero_scored = score_level(0.0)
        if zero_scored is None:
            raise SolverFailureError(
                "sensing extreme (SINR level 0) did not certify as optimal"
            )
        if normalizers is None:
            normalizers = (float(zero_scored[0].sum()), 1.0)
    nf_sensing, nf_comm = normalizers
    if nf_sensing <= 0 or nf_comm <= 0:
        raise ValueError("normalizers must be positive")

    if rho == 1.0:
        bounds, w_mats = zero_scored
        gamma = 0.0
        objective = -float(bounds.sum()) / nf_sensing
    elif rho == 0.0:
        # Lexicographic endpoint: push the level to the ceiling first,
        # then take the best bound sum among designs delivering it, so
        # the endpoint lies on the same frontier as the interior weights
        # instead of reporting whatever covariances the ceiling search
        # happened to end on.
        w_mats = None
        gamma = gamma_star
        for level in (gamma_star, gamma_star * (1.0 - 1e-6)):
            scored = score_level(float(level))
            if scored is not None:
                gamma = float(level)
                bounds, w_mats = scored
                break
        if w_mats is None:
            w_mats = comm_w
            bounds = _safe_crb(
                fim_from_covariance(
                    scene.targets,
                    w_mats.sum(axis=0),
                    scene.symbol_count,
                    scene.radar_noise_power,
                    scene.array,
                )
            )
        objective = gamma / nf_comm
    else:
        best = None
        for gamma_level in np.linspace(0.0, gamma_star, sinr_levels):
            scored = score_level(float(gamma_level))
            if scored is None:
                continue
            bounds_level, w_level = scored
            value = (
                -rho * float(bounds_level.sum()) / nf_sensing
                + (1.0 - rho) * float(gamma_level) / nf_comm
            )
            if best is None or value > best[0]:
                best = (value, float(gamma_level), bounds_level, w_level)
        if best is None:
            raise SolverFailureError(
                "no SINR level produced a certified bound-minimizing solve"
            )
        objective, gamma, bounds, w_mats = best

    beamformers, extraction_sinr = _extract_beamformers(scene, w_mats, gamma, seed)
    total_power = float(sum(np.trace(w).real for w in w_mats))
    extracted_power = float(np.sum(np.abs(beamformers) ** 2))
    budget = scene.power_budget * (1.0 + 1e-6)
    if total_power > budget or extracted_power > budget:
        raise SolverFailureError(
            f"power recheck failed: covariances {total_power:.6e}, beamformers "
            f"{extracted_power:.6e} vs budget {scene.power_budget:.6e}"
        )
    data = orthogonal_data_matrix(scene.n_users, scene.symbol_count)
    return BlpDesign(
        beamformer_covariances=w_mats,
        beamformers=beamformers,
        data_matrix=data,
        gamma=float(gamma),
        crb_bounds=bounds,
        objective=float(objective),
        weight=float(rho),
        nf_sensing=float(nf_sensing),
        nf_comm=float(nf_comm),
        extraction_sinr=float(extraction_sinr),
        solver_status="optimal",
    )
