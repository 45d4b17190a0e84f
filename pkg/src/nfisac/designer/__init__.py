"""Transmit designs trading sensing accuracy against communication quality.

Two designers share one scene description:

- :mod:`nfisac.designer.slp` — symbol-level precoding: a covariance-relaxed
  conic program whose constructive-interference rows act on each
  individual transmit symbol.
- :mod:`nfisac.designer.blp` — block-level precoding baseline: semidefinite
  relaxation over per-user beamformer covariances with orthogonal data
  streams.

Shared helpers live in :mod:`nfisac.designer.patterns` (transmit
beampatterns) and :mod:`nfisac.designer.sweep` (trade-off curves).
"""

from nfisac.designer.blp import (
    BlpDesign,
    assemble_p2_feasibility,
    design_blp,
    orthogonal_data_matrix,
)
from nfisac.designer.patterns import beampattern, beampattern_db, polar_grid
from nfisac.designer.scene import Scene, phase_schedule, user_channels
from nfisac.designer.slp import (
    RelaxationGapWarning,
    SlpDesign,
    SymbolBlock,
    assemble_p1,
    covariance_waveform,
    design_slp,
    normalization_factors,
)
from nfisac.designer.sweep import TradeoffPoint, tradeoff_sweep

__all__ = [
    "BlpDesign",
    "RelaxationGapWarning",
    "Scene",
    "SlpDesign",
    "SymbolBlock",
    "TradeoffPoint",
    "assemble_p1",
    "assemble_p2_feasibility",
    "beampattern",
    "beampattern_db",
    "covariance_waveform",
    "design_blp",
    "design_slp",
    "normalization_factors",
    "orthogonal_data_matrix",
    "phase_schedule",
    "polar_grid",
    "tradeoff_sweep",
    "user_channels",
]
