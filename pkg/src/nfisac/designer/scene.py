"""Scene description shared by the symbol-level and block-level designers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from nfisac.arrays import (
    ArrayConfig,
    PolarPoint,
    SteeringVector,
    Target,
    steering_vector,
)
from nfisac.ci import PskConstellation

__all__ = ["Scene", "phase_schedule", "user_channels"]


@dataclass(frozen=True)
class Scene:
    """Everything a transmit design needs: geometry, traffic, noise, budget.

    ``symbol_phases`` is the (K, S) schedule of PSK phases intended for the
    users; every entry must belong to the constellation's alphabet (use
    :func:`phase_schedule` to draw one reproducibly).
    """

    array: ArrayConfig
    users: tuple[PolarPoint, ...]
    targets: tuple[Target, ...]
    radar_noise_power: float
    comm_noise_power: float
    power_budget: float
    symbol_count: int
    constellation: PskConstellation
    symbol_phases: NDArray[np.float64]

    def __post_init__(self) -> None:
        users = tuple(self.users)
        targets = tuple(self.targets)
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "targets", targets)
        if not users:
            raise ValueError("scene needs at least one user")
        if not targets:
            raise ValueError("scene needs at least one target")
        if self.symbol_count < 1:
            raise ValueError("symbol count must be at least 1")
        # Zero radar noise is a legitimate measurement model (noiseless
        # echoes for exactness checks); the estimation-bound layer enforces
        # its own strict positivity where a finite bound is required.
        if self.radar_noise_power < 0:
            raise ValueError(
                f"radar noise power must be nonnegative, got {self.radar_noise_power}"
            )
        for label, value in (
            ("communication noise power", self.comm_noise_power),
            ("power budget", self.power_budget),
        ):
            if value <= 0:
                raise ValueError(f"{label} must be positive, got {value}")
        phases = np.atleast_2d(np.asarray(self.symbol_phases, dtype=float))
        expected = (len(users), self.symbol_count)
        if phases.shape != expected:
            raise ValueError(
                f"symbol phases must have shape {expected}, got {phases.shape}"
            )
        alphabet = self.constellation.phases
        delta = np.abs(
            np.mod(phases[..., None] - alphabet[None, None, :] + np.pi, 2 * np.pi)
            - np.pi
        )
        if delta.min(axis=-1).max() > 1e-9:
            raise ValueError("symbol phases must come from the PSK alphabet")
        phases.setflags(write=False)
        object.__setattr__(self, "symbol_phases", phases)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def n_elements(self) -> int:
        return self.array.n_elements

    @property
    def comm_noise_amplitude(self) -> float:
        return float(np.sqrt(self.comm_noise_power))


def phase_schedule(
    constellation: PskConstellation,
    n_users: int,
    n_symbols: int,
    seed: int | np.random.Generator = 0,
) -> NDArray[np.float64]:
    """Draw a (K, S) phase schedule uniformly from the PSK alphabet."""
    if n_users < 1 or n_symbols < 1:
        raise ValueError("need at least one user and one symbol")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    picks = rng.integers(0, constellation.order, size=(n_users, n_symbols))
    return constellation.phases[picks]


def user_channels(scene: Scene) -> list[SteeringVector]:
    """Downlink channel vector of each user (spherical-wave model)."""
    return [
        steering_vector(user, scene.array, kind="user-channel")
        for user in scene.users
    ]
