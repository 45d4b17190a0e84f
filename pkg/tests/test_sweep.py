"""Trade-off sweep checks.

The scalarized objective guarantees both monotonicities along the weight
grid: the bound sum can only improve as its weight grows, and the margin
can only improve as the communication weight grows.  The sweep is also
expected to contain point-level failures instead of propagating them.
"""

import numpy as np
import pytest

from nfisac.designer.sweep import TradeoffPoint, tradeoff_sweep
from nfisac.errors import InfeasibleError, SolverFailureError

pytestmark = pytest.mark.filterwarnings(
    "ignore::nfisac.designer.slp.RelaxationGapWarning"
)

GRID = [0.0, 0.3, 0.7, 1.0]


def rows(points, precoder):
    picked = [p for p in points if p.precoder == precoder]
    return sorted(picked, key=lambda p: p.rho)


def nonincreasing(values, rel=1e-6):
    return all(b <= a * (1 + rel) for a, b in zip(values, values[1:]))


@pytest.fixture(scope="module")
def swept(shared_small_scene):
    return tradeoff_sweep(shared_small_scene, GRID, seed=0)


class TestSweepStructure:
    def test_one_point_per_weight_and_precoder(self, swept):
        assert len(swept) == 2 * len(GRID)
        for precoder in ("slp", "blp"):
            assert [p.rho for p in rows(swept, precoder)] == GRID

    def test_all_points_certify(self, swept):
        for point in swept:
            assert point.feasible, point
            assert point.solver_status == "optimal"

    def test_root_bounds_come_from_family_sums(self, swept):
        for point in swept:
            assert point.rcrb_angle > 0
            assert point.rcrb_range > 0
            assert point.crb_sum >= point.rcrb_angle**2 + point.rcrb_range**2


class TestTradeoffShape:
    @pytest.mark.parametrize("precoder", ["slp", "blp"])
    def test_bound_sum_improves_with_sensing_weight(self, swept, precoder):
        assert nonincreasing([p.crb_sum for p in rows(swept, precoder)])

    @pytest.mark.parametrize("precoder", ["slp", "blp"])
    def test_sinr_improves_with_communication_weight(self, swept, precoder):
        assert nonincreasing([p.sinr for p in rows(swept, precoder)])

    def test_pure_sensing_spends_nothing_on_margin(self, swept):
        for precoder in ("slp", "blp"):
            last = rows(swept, precoder)[-1]
            assert last.rho == 1.0
            assert last.sinr <= 1e-12


class TestFailureContainment:
    def test_point_failures_become_rows(self, shared_small_scene, monkeypatch):
        import nfisac.designer.sweep as sweep_module

        real_design = sweep_module.design_slp

        def flaky_design(scene, rho, **kwargs):
            if rho == 0.3:
                raise InfeasibleError("no margin at this weight")
            return real_design(scene, rho, **kwargs)

        def broken_design(scene, rho, **kwargs):
            raise SolverFailureError("baseline always fails")

        monkeypatch.setattr(sweep_module, "design_slp", flaky_design)
        monkeypatch.setattr(sweep_module, "design_blp", broken_design)
        points = tradeoff_sweep(shared_small_scene, [0.3, 1.0], seed=0)

        failed = {(p.rho, p.precoder): p for p in points if not p.feasible}
        assert (0.3, "slp") in failed
        assert failed[(0.3, "slp")].solver_status == "infeasible"
        assert failed[(0.3, "slp")].sinr is None
        assert all(not p.feasible for p in points if p.precoder == "blp")
        assert all(
            p.solver_status == "solver_failure"
            for p in points
            if p.precoder == "blp"
        )
        good = [p for p in points if p.feasible]
        assert [(p.rho, p.precoder) for p in good] == [(1.0, "slp")]

    def test_grid_validation(self, shared_small_scene):
        with pytest.raises(ValueError, match="empty"):
            tradeoff_sweep(shared_small_scene, [])
        with pytest.raises(ValueError, match="lie in"):
            tradeoff_sweep(shared_small_scene, [0.5, 1.5])
