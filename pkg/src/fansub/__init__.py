"""Fan subsolutions for the two-dimensional isentropic Euler Riemann problem.

Submodules:

- ``exactnum``: rationals, intervals and forward-mode duals
- ``fan_model``: Riemann data, fan regions and thermodynamic knots
- ``system``: residuals and inequality margins of a fan configuration
- ``solver``: numerical search for subsolutions, parameter sweeps
- ``correction``: exact rational correction of a float configuration
- ``certify``: inverse-function-theorem existence certificate
- ``convexify``: convex internal energy and pressure law through the knots
- ``cli``: the ``fansub`` command
"""

from .fan_model import FanConfiguration, RiemannDatum, ThermoTable, WaveState
from .witness import builtin_witness, witness_datum

__version__ = "0.1.0"

__all__ = [
    "FanConfiguration",
    "RiemannDatum",
    "ThermoTable",
    "WaveState",
    "builtin_witness",
    "witness_datum",
]
