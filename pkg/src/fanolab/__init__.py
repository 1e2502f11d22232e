"""Single level side-coupled to a semi-infinite tight-binding chain.

The level couples to site ``n0`` with rate ``kappaa``; the chain has hopping
``kappa0``.  The momentum-dependent coupling ``v(k) ~ sin(n0 k)`` has zeros
inside the band, which is what allows bound states in the continuum (BIC).

Modules
-------
model
    Parameters, dispersion, coupling, resonance frequencies.
quadrature
    Adaptive Gauss-Kronrod integration and principal values.
spectral
    Closed-form self-energy, level shift and spectral density, with
    quadrature oracles and the bound-state root finder.
lattice
    Time-domain simulation (compiled kernel when built, numpy otherwise)
    and explicit BIC eigenstates.
decay
    Exact survival amplitude: pole term plus branch-cut integral.
cli
    ``fanolab`` command-line tool.
"""

from .errors import ConfigError, DomainError, FanoDomainError, FanoError, NumericalFailure
from .model import ModelParams, bic_frequencies
from .output import tool_version

__version__ = tool_version()

__all__ = [
    "ConfigError",
    "DomainError",
    "FanoDomainError",
    "FanoError",
    "ModelParams",
    "NumericalFailure",
    "bic_frequencies",
    "__version__",
]
