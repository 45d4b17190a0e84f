"""Near-field integrated sensing and communication waveform design.

Core layers:

- :mod:`nfisac.arrays` — uniform linear array geometry, spherical-wave
  steering vectors, and their parameter derivatives.
- :mod:`nfisac.fisher` — Fisher information and Cramér–Rao bounds for
  joint angle/range/reflectivity estimation.
- :mod:`nfisac.ci` — constructive-interference margins and linearized
  symbol-level constraints for PSK signalling.
- :mod:`nfisac.conic` — a small conic-program intermediate representation
  with a primal-dual interior-point backend and solution certification.
- :mod:`nfisac.designer` — symbol-level and block-level transmit designs
  trading off sensing accuracy against communication quality.
- :mod:`nfisac.sensing` — echo simulation and subspace-based
  angle/range estimation on the designed waveforms.
- :mod:`nfisac.harness` — experiment configs, runners, and artifact I/O.
"""

from nfisac import arrays, ci, conic, designer, fisher, sensing
from nfisac.errors import (
    ConfigError,
    InfeasibleError,
    NfisacError,
    SolverFailureError,
)

__version__ = "0.1.0"

__all__ = [
    "arrays",
    "ci",
    "conic",
    "designer",
    "fisher",
    "sensing",
    "ConfigError",
    "InfeasibleError",
    "NfisacError",
    "SolverFailureError",
    "__version__",
]
