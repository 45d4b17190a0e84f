"""Shared scene builders for the designer, sensing, and acceptance tests."""

import numpy as np
import pytest

from nfisac.arrays import ArrayConfig, PolarPoint, Target, path_loss
from nfisac.ci import PskConstellation
from nfisac.designer.scene import Scene, phase_schedule


def build_scene(
    *,
    n_elements,
    wavelength_m,
    spacing_m,
    target_points,
    user_points,
    symbol_count,
    order=4,
    power_budget=10.0,
    comm_noise_power=1.0,
    radar_noise_power=16.0,
    unit_gain_reflectivity=False,
    phase_seed=3,
):
    """Assemble a scene from polar coordinates given as (range_m, angle_deg).

    With ``unit_gain_reflectivity`` each target's reflectivity is set to the
    reciprocal of its one-way amplitude so the round-trip echo has unit
    strength regardless of distance.
    """
    cfg = ArrayConfig(
        n_elements=n_elements, wavelength_m=wavelength_m, spacing_m=spacing_m
    )
    targets = []
    for range_m, angle_deg in target_points:
        point = PolarPoint(range_m=range_m, angle_rad=np.deg2rad(angle_deg))
        reflectivity = 1.0 / path_loss(point, cfg) if unit_gain_reflectivity else 1.0
        targets.append(Target(location=point, reflectivity=reflectivity))
    users = tuple(
        PolarPoint(range_m=r, angle_rad=np.deg2rad(a)) for r, a in user_points
    )
    constellation = PskConstellation(order=order)
    return Scene(
        array=cfg,
        users=users,
        targets=tuple(targets),
        radar_noise_power=radar_noise_power,
        comm_noise_power=comm_noise_power,
        power_budget=power_budget,
        symbol_count=symbol_count,
        constellation=constellation,
        symbol_phases=phase_schedule(
            constellation, len(users), symbol_count, seed=phase_seed
        ),
    )


def small_scene(symbol_count=6, order=4, **overrides):
    """Four-element scene with well-separated targets; solves in seconds."""
    kwargs = dict(
        n_elements=4,
        wavelength_m=2.0,
        spacing_m=1.0,
        target_points=[(3.0, 70.0), (5.0, 110.0)],
        user_points=[(6.0, 130.0)],
        symbol_count=symbol_count,
        order=order,
        power_budget=10.0,
        comm_noise_power=1.0,
        radar_noise_power=16.0,
    )
    kwargs.update(overrides)
    return build_scene(**kwargs)


def desk_scene(symbol_count=24, order=4, **overrides):
    """Default 16-element evaluation scene (two boresight targets, two users).

    The wavelength/spacing pair puts the Fraunhofer distance at 426.7 m so
    every scene point sits inside one tenth of it, keeps the sparse array's
    grating lobes outside the +/-30 degree evaluation windows, and leaves the
    default estimation grid fine enough for percent-level range accuracy.
    """
    kwargs = dict(
        n_elements=16,
        wavelength_m=0.6,
        spacing_m=1.0,
        target_points=[(5.0, 90.0), (10.0, 90.0)],
        user_points=[(10.0, 112.5), (15.0, 112.5)],
        symbol_count=symbol_count,
        order=order,
        power_budget=1000.0,
        comm_noise_power=1.0,
        radar_noise_power=25600.0,
        unit_gain_reflectivity=True,
        phase_seed=7,
    )
    kwargs.update(overrides)
    return build_scene(**kwargs)


@pytest.fixture(scope="session")
def shared_small_scene():
    return small_scene()


@pytest.fixture(scope="session")
def shared_desk_scene():
    return desk_scene()
