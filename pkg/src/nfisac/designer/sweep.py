"""Sensing/communication trade-off curves over a grid of weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from nfisac import conic
from nfisac.designer.blp import design_blp
from nfisac.designer.scene import Scene
from nfisac.designer.slp import DEFAULT_CELL_CAP, design_slp, normalization_factors
from nfisac.errors import InfeasibleError, SolverFailureError

__all__ = ["TradeoffPoint", "tradeoff_sweep"]


@dataclass(frozen=True)
class TradeoffPoint:
    """One (weight, precoder) sample of the trade-off curve.

    ``sinr`` is the linear power-domain SINR (squared margin for the
    symbol-level design, the relaxed level for the block-level baseline);
    the root bounds are square roots of the summed per-parameter variance
    bounds of each parameter family.  Metric fields are ``None`` when the
    point failed.
    """

    rho: float
    precoder: str
    feasible: bool
    solver_status: str
    sinr: float | None
    rcrb_angle: float | None
    rcrb_range: float | None
    crb_sum: float | None


def _root_bounds(
    crb_bounds: NDArray[np.float64], n_targets: int
) -> tuple[float, float]:
    angle = float(np.sqrt(np.sum(crb_bounds[:n_targets])))
    range_ = float(np.sqrt(np.sum(crb_bounds[n_targets : 2 * n_targets])))
    return angle, range_


def tradeoff_sweep(
    scene: Scene,
    rho_grid,
    seed: int = 0,
    tol: float = conic.DEFAULT_TOL,
    max_iter: int = conic.DEFAULT_MAX_ITER,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> list[TradeoffPoint]:
    """One symbol-level and one block-level point per weight.

    Point-level failures are recorded as infeasible rows and the sweep
    continues; only a failure of the shared normalization extremes aborts
    the whole curve.  Block-level points share one cache of scored SINR
    levels so the curve is consistent across weights.
    """
    rhos = [float(r) for r in rho_grid]
    if not rhos:
        raise ValueError("rho grid must not be empty")
    for rho in rhos:
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"every weight must lie in [0, 1], got {rho}")

    normalizers = normalization_factors(scene, tol, max_iter, cell_cap)
    n_targets = scene.n_targets
    points: list[TradeoffPoint] = []

    blp_cache: dict = {}
    blp_normalizers: tuple[float, float] | None = None
    try:
        blp_zero = design_blp(
            scene,
            0.0,
            seed=seed,
            tol=tol,
            max_iter=max_iter,
            cell_cap=cell_cap,
            inner_cache=blp_cache,
        )
        blp_normalizers = (normalizers[0], blp_zero.nf_comm)
    except (InfeasibleError, SolverFailureError):
        blp_zero = None

    for rho in rhos:
        try:
            slp = design_slp(
                scene,
                rho,
                normalizers=normalizers,
                tol=tol,
                max_iter=max_iter,
                cell_cap=cell_cap,
            )
            angle, range_ = _root_bounds(slp.crb_bounds, n_targets)
            points.append(
                TradeoffPoint(
                    rho=rho,
                    precoder="slp",
                    feasible=True,
                    solver_status=slp.solver_status,
                    sinr=slp.sinr,
                    rcrb_angle=angle,
                    rcrb_range=range_,
                    crb_sum=float(np.sum(slp.crb_bounds)),
                )
            )
        except InfeasibleError:
            points.append(
                TradeoffPoint(rho, "slp", False, "infeasible", None, None, None, None)
            )
        except SolverFailureError:
            points.append(
                TradeoffPoint(
                    rho, "slp", False, "solver_failure", None, None, None, None
                )
            )

        try:
            if rho == 0.0 and blp_zero is not None:
                blp = blp_zero
            else:
                blp = design_blp(
                    scene,
                    rho,
                    normalizers=blp_normalizers,
                    seed=seed,
                    tol=tol,
                    max_iter=max_iter,
                    cell_cap=cell_cap,
                    inner_cache=blp_cache,
                )
            angle, range_ = _root_bounds(blp.crb_bounds, n_targets)
            points.append(
                TradeoffPoint(
                    rho=rho,
                    precoder="blp",
                    feasible=True,
                    solver_status=blp.solver_status,
                    sinr=blp.sinr,
                    rcrb_angle=angle,
                    rcrb_range=range_,
                    crb_sum=float(np.sum(blp.crb_bounds)),
                )
            )
        except InfeasibleError:
            points.append(
                TradeoffPoint(rho, "blp", False, "infeasible", None, None, None, None)
            )
        except SolverFailureError:
            points.append(
                TradeoffPoint(
                    rho, "blp", False, "solver_failure", None, None, None, None
                )
            )
    return points
