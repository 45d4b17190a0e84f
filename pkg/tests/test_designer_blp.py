"""Block-level baseline checks.

Oracles:
- the matched-filter closed form for a single user's best SINR,
- direct SINR recomputation from the definition (received powers of the
  extracted beamformers through the user channels),
- feasibility probes bracketing the reported SINR ceiling,
- the inverse-information diagonal of the relaxed covariance.
"""

import numpy as np
import pytest

from nfisac.designer.blp import (
    BISECTION_RELATIVE_TOL,
    EXTRACTION_FRACTION,
    assemble_p2_feasibility,
    design_blp,
    orthogonal_data_matrix,
)
from nfisac.designer.scene import user_channels
from nfisac.fisher import crb_diagonal, fim_from_covariance
from nfisac import conic

from conftest import small_scene


def two_user_scene():
    return small_scene(user_points=[(6.0, 130.0), (5.0, 55.0)])


@pytest.fixture(scope="module")
def ceiling_design():
    return design_blp(two_user_scene(), 0.0)


def sinr_by_definition(scene, beamformers):
    """Per-user SINR computed from first principles."""
    sigma2 = scene.comm_noise_power
    channels = [c.entries for c in user_channels(scene)]
    out = []
    for k, h in enumerate(channels):
        amplitudes = np.array([h @ beamformers[:, j] for j in range(len(channels))])
        powers = np.abs(amplitudes) ** 2
        interference = powers.sum() - powers[k]
        out.append(powers[k] / (interference + sigma2))
    return np.array(out)


class TestSingleUserCeiling:
    def test_matches_matched_filter_closed_form(self, shared_small_scene):
        scene = shared_small_scene
        design = design_blp(scene, 0.0)
        h = user_channels(scene)[0].entries
        expected = (
            scene.power_budget * np.linalg.norm(h) ** 2 / scene.comm_noise_power
        )
        assert design.gamma == pytest.approx(expected, rel=1e-5)

    def test_beamformer_aligns_with_conjugate_channel(self, shared_small_scene):
        scene = shared_small_scene
        design = design_blp(scene, 0.0)
        h = user_channels(scene)[0].entries
        w = design.beamformers[:, 0]
        alignment = abs(h @ w) / (np.linalg.norm(h) * np.linalg.norm(w))
        assert alignment == pytest.approx(1.0, abs=1e-5)


class TestTwoUserCeiling:
    def test_level_sits_on_the_feasibility_boundary(self, ceiling_design):
        # Strict feasibility vanishes at the ceiling itself, so the probes
        # bracket it with margins well beyond the bisection resolution.
        scene = two_user_scene()
        assert BISECTION_RELATIVE_TOL <= 1e-3
        below = conic.solve(
            assemble_p2_feasibility(scene, ceiling_design.gamma * 0.9)
        )
        above = conic.solve(
            assemble_p2_feasibility(scene, ceiling_design.gamma * 1.02)
        )
        assert below.status == "optimal"
        assert above.status == "infeasible"

    def test_extraction_reaches_accepted_fraction(self, ceiling_design):
        assert ceiling_design.extraction_sinr >= (
            EXTRACTION_FRACTION * ceiling_design.gamma * (1 - 1e-9)
        )

    def test_reported_extraction_sinr_matches_definition(self, ceiling_design):
        sinrs = sinr_by_definition(two_user_scene(), ceiling_design.beamformers)
        assert float(sinrs.min()) == pytest.approx(
            ceiling_design.extraction_sinr, rel=1e-9
        )


class TestDesignInvariants:
    def test_pure_sensing_disables_communication(self):
        scene = two_user_scene()
        design = design_blp(scene, 1.0)
        assert design.gamma == 0.0
        assert design.solver_status == "optimal"
        bounds_from_covariance = crb_diagonal(
            fim_from_covariance(
                scene.targets,
                design.covariance_bound,
                scene.symbol_count,
                scene.radar_noise_power,
                scene.array,
            )
        )
        ratio = design.crb_bounds / bounds_from_covariance
        assert ratio.min() >= 1 - 5e-5
        assert design.crb_bounds.sum() == pytest.approx(
            bounds_from_covariance.sum(), rel=1e-3
        )

    def test_symbol_power_stays_within_budget(self):
        scene = two_user_scene()
        design = design_blp(scene, 0.3)
        symbols = design.symbols
        sample = (symbols @ symbols.conj().T) / scene.symbol_count
        assert np.trace(sample).real <= scene.power_budget * (1 + 1e-6)
        stacked = np.einsum(
            "nk,mk->nm", design.beamformers, design.beamformers.conj()
        )
        np.testing.assert_allclose(sample, stacked, rtol=1e-10, atol=1e-10)

    def test_rejects_bad_inputs(self):
        scene = two_user_scene()
        with pytest.raises(ValueError, match="weight"):
            design_blp(scene, 1.2)
        with pytest.raises(ValueError, match="nonnegative"):
            assemble_p2_feasibility(scene, -1.0)


class TestBudgetProbe:
    def test_budget_row_separates_reachable_from_unreachable(self):
        scene = two_user_scene()
        relaxed = design_blp(scene, 1.0)
        total = float(relaxed.crb_bounds.sum())
        loose = conic.solve(
            assemble_p2_feasibility(scene, 0.0, sensing_budget=2 * total)
        )
        tight = conic.solve(
            assemble_p2_feasibility(scene, 0.0, sensing_budget=0.5 * total)
        )
        assert loose.status == "optimal"
        assert tight.status == "infeasible"


class TestDataMatrix:
    def test_streams_are_exactly_orthonormal(self):
        d = orthogonal_data_matrix(3, 8)
        np.testing.assert_allclose(
            (d @ d.conj().T) / 8, np.eye(3), rtol=0, atol=1e-12
        )
        assert np.allclose(np.abs(d), 1.0)

    def test_needs_at_least_as_many_symbols_as_users(self):
        with pytest.raises(ValueError, match="symbols"):
            orthogonal_data_matrix(4, 3)
