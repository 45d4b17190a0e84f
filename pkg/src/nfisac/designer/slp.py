"""Symbol-level transmit design via a covariance-relaxed conic program.

The design problem couples two metrics over a block of ``S`` transmit
symbols ``x_s``:

- sensing: the diagonal Cramér–Rao bounds of the target parameters, each
  bounded by an epigraph variable ``t_i`` through a Schur-complement block
  ``[[F, e_i], [e_i', t_i]] >= 0``, with the information matrix ``F`` an
  affine function of the average transmit covariance;
- communication: a common constructive-interference margin ``gamma'``
  that every user's every symbol must clear.

Each symbol carries a Hermitian block ``[[R_s, x_s], [x_s^H, 1]] >= 0``
relaxing ``R_s >= x_s x_s^H``; the power and information constraints act
on the ``R_s`` while the interference rows act on the ``x_s``.  The
weighted objective maximizes ``-rho * sum(t)/NF_R + (1-rho) * gamma'/NF_C``
with the normalizers taken from the two single-metric extremes.

The relaxation is not guaranteed tight: when any ``R_s`` strictly
dominates ``x_s x_s^H`` (flagged by :class:`RelaxationGapWarning`), the
covariance the optimizer was scored on is not realized by transmitting
``X`` alone.  Both readings are reported: ``achieved_crb`` recomputed
from ``X`` and ``covariance_crb`` recomputed from the relaxed average
covariance (realizable with :func:`covariance_waveform`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from nfisac import conic
from nfisac.ci import CiConstraint, ci_margin, linearized_ci_rows, rotate_channel
from nfisac.conic import ConeBlock, ConicProgram, ProgramBuilder
from nfisac.designer.scene import Scene, user_channels
from nfisac.errors import ConfigError, InfeasibleError, SolverFailureError
from nfisac.fisher import (
    FimMatrix,
    crb_diagonal,
    fim_coefficient_blocks,
    fim_direct,
    fim_from_covariance,
)

__all__ = [
    "DEFAULT_CELL_CAP",
    "RelaxationGapWarning",
    "SlpDesign",
    "SymbolBlock",
    "assemble_p1",
    "covariance_waveform",
    "design_slp",
    "normalization_factors",
]

#: Largest ``n_elements * symbol_count`` the assembler accepts by default.
DEFAULT_CELL_CAP = 2048

#: Rank-one deviation above which the covariance relaxation is flagged loose.
RELAXATION_GAP_THRESHOLD = 1e-3

_CI_RECHECK_TOL = 1e-6
_POWER_RECHECK_TOL = 1e-6


class RelaxationGapWarning(UserWarning):
    """The per-symbol covariances strictly dominate their rank-one parts."""


@dataclass(frozen=True)
class SymbolBlock:
    """A transmit symbol matrix together with its per-symbol covariances."""

    symbols: NDArray[np.complex128]
    covariances: NDArray[np.complex128]

    def __post_init__(self) -> None:
        symbols = np.asarray(self.symbols, dtype=complex)
        covariances = np.asarray(self.covariances, dtype=complex)
        if symbols.ndim != 2:
            raise ValueError("symbols must be an N×S matrix")
        n, s = symbols.shape
        if covariances.shape != (s, n, n):
            raise ValueError(
                f"covariances must have shape {(s, n, n)}, got {covariances.shape}"
            )
        symbols.setflags(write=False)
        covariances.setflags(write=False)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "covariances", covariances)

    @property
    def n_elements(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[1]

    @property
    def average_covariance(self) -> NDArray[np.complex128]:
        """Mean of the per-symbol covariances (what the sensing metric sees)."""
        return self.covariances.mean(axis=0)

    @property
    def waveform_covariance(self) -> NDArray[np.complex128]:
        """Sample covariance ``(1/S) X X^H`` of the symbol matrix itself."""
        x = self.symbols
        return (x @ x.conj().T) / self.n_symbols


@dataclass(frozen=True)
class SlpDesign:
    """Solved symbol-level design with both metric readings attached."""

    symbols: SymbolBlock
    gamma_prime: float
    crb_bounds: NDArray[np.float64]
    objective: float
    weight: float
    nf_sensing: float
    nf_comm: float
    rank_one_gap: float
    achieved_crb: NDArray[np.float64]
    covariance_crb: NDArray[np.float64]
    solver_status: str
    solver_iterations: int

    @property
    def covariances(self) -> NDArray[np.complex128]:
        return self.symbols.covariances

    @property
    def sinr(self) -> float:
        """Reported communication SINR: the squared margin ``gamma'^2``."""
        return self.gamma_prime**2


class _InformationScaling(NamedTuple):
    """Unit changes that keep the epigraph blocks numerically balanced.

    The raw parameters mix radians, meters, and reflectivity units, so both
    the information matrix and the bound variables span many orders of
    magnitude and the solves cannot be certified against the unscaled data.
    Each epigraph block is therefore assembled after a diagonal congruence:
    the information matrix in units where the reference (isotropic-power)
    information matrix has unit diagonal, the border pinned at ``border[i]``
    instead of one, and the corner carrying the bound in units of the
    reference bound.  The congruence is exact — multiplying a corner by
    ``corner_unit[i]`` recovers the true-unit bound.
    """

    tie: NDArray[np.float64]
    border: NDArray[np.float64]
    corner_unit: NDArray[np.float64]


class _P1Handles(NamedTuple):
    symbol: list[ConeBlock]
    schur: list[ConeBlock]
    gamma: ConeBlock
    ci_slack: ConeBlock
    power_slack: ConeBlock
    scaling: _InformationScaling | None


def _information_scaling(scene: Scene) -> _InformationScaling:
    """Reference-unit congruence data from the isotropic-power information."""
    n = scene.n_elements
    reference = (scene.power_budget / n) * np.eye(n)
    fim = fim_from_covariance(
        scene.targets,
        reference,
        scene.symbol_count,
        scene.radar_noise_power,
        scene.array,
    )
    entries = fim.entries.real
    diag = np.diagonal(entries).copy()
    positive = diag[diag > 0]
    floor = 1e-12 * (float(positive.mean()) if positive.size else 1.0)
    diag = np.maximum(diag, max(floor, np.finfo(float).tiny))
    inv_root = 1.0 / np.sqrt(diag)
    correlation = entries * np.outer(inv_root, inv_root)
    ridge = 1e-12 * np.eye(correlation.shape[0])
    reference_bounds = np.diagonal(np.linalg.inv(correlation + ridge)).copy()
    # For a positive-definite matrix with unit diagonal the inverse diagonal
    # is at least one; anything below that is numerical noise.
    reference_bounds = np.maximum(reference_bounds, 1.0)
    return _InformationScaling(
        tie=np.outer(inv_root, inv_root),
        border=1.0 / np.sqrt(reference_bounds),
        corner_unit=reference_bounds / diag,
    )


def _rotated_constraints(scene: Scene) -> list[list[CiConstraint]]:
    """Per-user, per-symbol unit-margin interference constraints."""
    psi = scene.constellation.half_angle
    sigma_c = scene.comm_noise_amplitude
    constraints: list[list[CiConstraint]] = []
    for k, channel in enumerate(user_channels(scene)):
        per_symbol = []
        for s in range(scene.symbol_count):
            rotated = rotate_channel(channel, scene.symbol_phases[k, s])
            per_symbol.append(
                CiConstraint(
                    rotated_channel=rotated,
                    gamma_prime=1.0,
                    noise_amplitude=sigma_c,
                    half_angle=psi,
                )
            )
        constraints.append(per_symbol)
    return constraints


def _assemble_p1(
    scene: Scene,
    rho: float,
    normalizers: tuple[float, float],
    include_crb: bool,
    cell_cap: int,
) -> tuple[ConicProgram, _P1Handles]:
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {rho}")
    nf_sensing, nf_comm = normalizers
    if nf_sensing <= 0 or nf_comm <= 0:
        raise ValueError("normalizers must be positive")
    n = scene.n_elements
    s_count = scene.symbol_count
    if n * s_count > cell_cap:
        raise ConfigError(
            f"design assembly refused: n_elements*symbol_count = {n * s_count} "
            f"exceeds the cap of {cell_cap}; shrink the scene or raise cell_cap"
        )
    order = 4 * scene.n_targets

    builder = ProgramBuilder()
    symbol_blocks = [
        builder.add_block("psd_hermitian", n + 1, name=f"symbol_{s}")
        for s in range(s_count)
    ]
    schur_blocks = (
        [builder.add_block("psd", order + 1, name=f"schur_{i}") for i in range(order)]
        if include_crb
        else []
    )
    gamma = builder.add_block("nonnegative", 1, name="gamma_prime")
    ci_slack = builder.add_block(
        "nonnegative", 2 * scene.n_users * s_count, name="ci_slack"
    )
    power_slack = builder.add_block("nonnegative", 1, name="power_slack")

    # Corner of every symbol block is pinned to one.
    for block in symbol_blocks:
        (idx, coeff), = ProgramBuilder.entry(block, n, n)
        builder.add_equality([idx], [coeff], 1.0)

    # Average transmit power in budget units: (1/(S*P_t)) sum_s tr(R_s)
    # plus the unused fraction equals one.
    indices: list[int] = []
    coeffs: list[float] = []
    for block in symbol_blocks:
        for i in range(n):
            (idx, coeff), = ProgramBuilder.entry(block, i, i)
            indices.append(idx)
            coeffs.append(coeff / (s_count * scene.power_budget))
    indices.append(power_slack.offset)
    coeffs.append(1.0)
    builder.add_equality(indices, coeffs, 1.0)

    # Two interference rows per (user, symbol): rows.[Re x; Im x] slide the
    # received point at least gamma' * sigma_c inside the decision sector.
    slack_pos = 0
    for per_symbol in _rotated_constraints(scene):
        for s, constraint in enumerate(per_symbol):
            rows, offset_unit = linearized_ci_rows(constraint)
            block = symbol_blocks[s]
            for row in rows:
                indices = []
                coeffs = []
                for i in range(n):
                    if row[i] != 0.0:
                        for idx, coeff in ProgramBuilder.entry(block, i, n):
                            indices.append(idx)
                            coeffs.append(row[i] * coeff)
                    if row[n + i] != 0.0:
                        for idx, coeff in ProgramBuilder.entry_imag(block, i, n):
                            indices.append(idx)
                            coeffs.append(row[n + i] * coeff)
                indices.append(gamma.offset)
                coeffs.append(offset_unit)
                indices.append(ci_slack.offset + slack_pos)
                coeffs.append(1.0)
                builder.add_equality(indices, coeffs, 0.0)
                slack_pos += 1

    scaling = _information_scaling(scene) if include_crb else None
    if include_crb:
        weights = fim_coefficient_blocks(
            scene.targets, s_count, scene.radar_noise_power, scene.array
        )
        embedded = np.zeros((n + 1, n + 1), dtype=complex)
        # Upper triangle of the first Schur block equals the affine
        # information map of the average covariance, taken in units that
        # give the reference information matrix a unit diagonal.
        for j in range(order):
            for k in range(j, order):
                indices = []
                coeffs = []
                (idx, coeff), = ProgramBuilder.entry(schur_blocks[0], j, k)
                indices.append(idx)
                coeffs.append(coeff)
                embedded[:n, :n] = -scaling.tie[j, k] * weights[j, k] / s_count
                for block in symbol_blocks:
                    idx_arr, coeff_arr = ProgramBuilder.trace_entries(block, embedded)
                    keep = coeff_arr != 0.0
                    indices.extend(idx_arr[keep].tolist())
                    coeffs.extend(coeff_arr[keep].tolist())
                builder.add_equality(indices, coeffs, 0.0)
        # Remaining Schur blocks share the same information matrix.
        for i in range(1, order):
            for j in range(order):
                for k in range(j, order):
                    (idx0, coeff0), = ProgramBuilder.entry(schur_blocks[0], j, k)
                    (idxi, coeffi), = ProgramBuilder.entry(schur_blocks[i], j, k)
                    builder.add_equality([idx0, idxi], [coeff0, -coeffi], 0.0)
        # Border of block i is the i-th basis vector times the border scale,
        # which puts the corner in units of the reference bound.
        for i in range(order):
            for j in range(order):
                (idx, coeff), = ProgramBuilder.entry(schur_blocks[i], j, order)
                builder.add_equality(
                    [idx], [coeff], scaling.border[i] if i == j else 0.0
                )
        if rho > 0:
            for i, block in enumerate(schur_blocks):
                (idx, coeff), = ProgramBuilder.entry(block, order, order)
                builder.add_objective(
                    [idx], [rho * scaling.corner_unit[i] / nf_sensing * coeff]
                )

    if rho < 1:
        builder.add_objective([gamma.offset], [-(1.0 - rho) / nf_comm])
    else:
        # Pure sensing pins the margin so no power is spent on shaping.
        builder.add_equality([gamma.offset], [1.0], 0.0)

    handles = _P1Handles(
        symbol_blocks, schur_blocks, gamma, ci_slack, power_slack, scaling
    )
    return builder.build(), handles


def assemble_p1(
    scene: Scene,
    rho: float,
    normalizers: tuple[float, float],
    cell_cap: int = DEFAULT_CELL_CAP,
) -> ConicProgram:
    """Build the full weighted design program (epigraph blocks included).

    Census of the scalarized program for ``N`` elements, ``S`` symbols,
    ``K`` users, ``L`` targets, with ``T = 4L``:

    - variables: ``S*(N+1)^2`` (symbol blocks) ``+ T*(T+1)*(T+2)/2``
      (Schur blocks) ``+ 1`` (margin) ``+ 2*K*S`` (interference slacks)
      ``+ 1`` (power slack);
    - equalities: ``S`` (corner pins) ``+ 1`` (power) ``+ 2*K*S``
      (interference rows) ``+ T*T*(T+1)/2`` (information ties)
      ``+ T^2`` (border pins), plus one margin pin when ``rho == 1``.
    """
    program, _ = _assemble_p1(
        scene, rho, normalizers, include_crb=True, cell_cap=cell_cap
    )
    return program


def _solve_or_raise(
    program: ConicProgram,
    what: str,
    tol: float,
    max_iter: int,
) -> conic.ConicSolution:
    solution = conic.solve(program, tol=tol, max_iter=max_iter)
    if solution.status == "infeasible":
        raise InfeasibleError(f"{what} is infeasible: {solution.message}")
    if solution.status == "unbounded":
        raise SolverFailureError(f"{what} is unbounded: {solution.message}")
    if solution.status != "optimal":
        r = solution.residuals
        raise SolverFailureError(
            f"{what} did not certify as optimal (status {solution.status}; "
            f"primal {r.primal:.2e}, dual {r.dual:.2e}, gap {r.gap:.2e})"
        )
    return solution


def normalization_factors(
    scene: Scene,
    tol: float = conic.DEFAULT_TOL,
    max_iter: int = conic.DEFAULT_MAX_ITER,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> tuple[float, float]:
    """Single-metric extremes: (sum of bounds at rho=1, margin at rho=0).

    The sensing extreme ignores the interference rows (the pinned margin
    deactivates them), so the first factor does not depend on the users.
    """
    program, _ = _assemble_p1(
        scene, 1.0, (1.0, 1.0), include_crb=True, cell_cap=cell_cap
    )
    sensing = _solve_or_raise(program, "sensing extreme (rho=1)", tol, max_iter)
    nf_sensing = float(sensing.objective_value)

    program, handles = _assemble_p1(
        scene, 0.0, (1.0, 1.0), include_crb=False, cell_cap=cell_cap
    )
    comm = _solve_or_raise(program, "communication extreme (rho=0)", tol, max_iter)
    nf_comm = float(comm.primal[handles.gamma.offset])

    if nf_sensing <= 0:
        raise InfeasibleError(
            "sensing extreme (rho=1) produced a non-positive bound sum"
        )
    if nf_comm <= 0:
        raise InfeasibleError(
            "communication extreme (rho=0) achieved no positive margin"
        )
    return nf_sensing, nf_comm


def _safe_crb(fim: FimMatrix) -> NDArray[np.float64]:
    """Exact CRB diagonal, with singular information mapped to infinities.

    Reporting uses the unridged inverse on purpose: a design that leaves
    some parameter direction uninformed must surface an infinite (or
    honestly enormous) bound instead of the ridge-capped value a
    stabilized inverse would return.
    """
    try:
        return crb_diagonal(fim, ridge=0.0)
    except ValueError:
        return np.full(fim.order, np.inf)


def _recheck_design(
    scene: Scene,
    block: SymbolBlock,
    gamma_prime: float,
) -> None:
    """Re-derive feasibility from the raw extraction, not solver bookkeeping."""
    budget = scene.power_budget * (1.0 + _POWER_RECHECK_TOL)
    mean_cov_power = float(np.trace(block.average_covariance).real)
    mean_wave_power = float(np.trace(block.waveform_covariance).real)
    if mean_cov_power > budget or mean_wave_power > budget:
        raise SolverFailureError(
            f"power recheck failed: covariance {mean_cov_power:.6e}, waveform "
            f"{mean_wave_power:.6e} vs budget {scene.power_budget:.6e}"
        )
    worst = -math.inf
    for per_symbol in _rotated_constraints(scene):
        for s, unit_constraint in enumerate(per_symbol):
            constraint = CiConstraint(
                rotated_channel=unit_constraint.rotated_channel,
                gamma_prime=gamma_prime,
                noise_amplitude=unit_constraint.noise_amplitude,
                half_angle=unit_constraint.half_angle,
            )
            worst = max(worst, ci_margin(constraint, block.symbols[:, s]))
    if worst > _CI_RECHECK_TOL:
        raise SolverFailureError(
            f"interference recheck failed: worst margin {worst:.3e} exceeds "
            f"{_CI_RECHECK_TOL:.0e}"
        )


def design_slp(
    scene: Scene,
    rho: float,
    normalizers: tuple[float, float] | None = None,
    tol: float = conic.DEFAULT_TOL,
    max_iter: int = conic.DEFAULT_MAX_ITER,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> SlpDesign:
    """Solve the weighted symbol-level design at weight ``rho``.

    At ``rho == 0`` the epigraph blocks are dropped (their weight is zero
    and the epigraph face would be unbounded); the sensing bounds are then
    recomputed after the fact from the optimal average covariance.
    """
    if normalizers is None:
        normalizers = normalization_factors(scene, tol, max_iter, cell_cap)
    nf_sensing, nf_comm = normalizers
    include_crb = rho > 0
    program, handles = _assemble_p1(
        scene, rho, normalizers, include_crb=include_crb, cell_cap=cell_cap
    )
    solution = _solve_or_raise(
        program, f"symbol-level design (rho={rho:g})", tol, max_iter
    )

    n = scene.n_elements
    s_count = scene.symbol_count
    order = 4 * scene.n_targets
    symbols = np.empty((n, s_count), dtype=complex)
    covariances = np.empty((s_count, n, n), dtype=complex)
    for s, cone_block in enumerate(handles.symbol):
        full = program.value(cone_block, solution.primal)
        symbols[:, s] = full[:n, n]
        covariances[s] = full[:n, :n]
    block = SymbolBlock(symbols=symbols, covariances=covariances)
    gamma_prime = max(0.0, float(solution.primal[handles.gamma.offset]))

    deviations = [
        np.linalg.norm(covariances[s] - np.outer(symbols[:, s], symbols[:, s].conj()))
        / max(float(np.trace(covariances[s]).real), np.finfo(float).tiny)
        for s in range(s_count)
    ]
    rank_one_gap = float(max(deviations))
    if rank_one_gap > RELAXATION_GAP_THRESHOLD:
        warnings.warn(
            f"covariance relaxation is loose (rank-one deviation "
            f"{rank_one_gap:.3e}); the sensing metric applies to the relaxed "
            "covariances, not to transmitting the symbols alone",
            RelaxationGapWarning,
            stacklevel=2,
        )

    _recheck_design(scene, block, gamma_prime)

    average = block.average_covariance
    averaged_fim = fim_from_covariance(
        scene.targets, average, s_count, scene.radar_noise_power, scene.array
    )
    covariance_crb = _safe_crb(averaged_fim)
    achieved_crb = _safe_crb(
        fim_direct(scene.targets, symbols, scene.radar_noise_power, scene.array)
    )
    if include_crb:
        crb_bounds = np.array(
            [
                float(program.value(b, solution.primal)[order, order])
                for b in handles.schur
            ]
        ) * handles.scaling.corner_unit
    else:
        crb_bounds = covariance_crb

    return SlpDesign(
        symbols=block,
        gamma_prime=gamma_prime,
        crb_bounds=crb_bounds,
        objective=-float(solution.objective_value),
        weight=float(rho),
        nf_sensing=nf_sensing,
        nf_comm=nf_comm,
        rank_one_gap=rank_one_gap,
        achieved_crb=achieved_crb,
        covariance_crb=covariance_crb,
        solver_status=solution.status,
        solver_iterations=solution.iterations,
    )


def covariance_waveform(
    covariance: NDArray[np.complex128], n_symbols: int
) -> NDArray[np.complex128]:
    """Symbol matrix whose sample covariance equals ``covariance`` exactly.

    Columns are the matrix square root applied to ``n_symbols`` orthogonal
    phase rows, so ``(1/S) X X^H`` reproduces the covariance; requires at
    least as many symbols as elements.
    """
    covariance = np.asarray(covariance, dtype=complex)
    n = covariance.shape[0]
    if covariance.shape != (n, n):
        raise ValueError("covariance must be square")
    if n_symbols < n:
        raise ValueError(
            f"need at least n_elements={n} symbols to realize a full-rank "
            f"covariance, got {n_symbols}"
        )
    eigenvalues, vectors = np.linalg.eigh(covariance)
    root = (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.conj().T
    basis = scipy.linalg.dft(n_symbols)[:n, :]
    return root @ basis
