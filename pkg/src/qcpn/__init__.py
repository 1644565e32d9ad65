"""Computer-algebra and numerical workbench for quantum projective spaces.

Exact PBW rewriting for the odd-sphere coordinate algebras, the line-bundle
projections and their equivariance data, truncated Hilbert-space
representations with Fredholm/index pairings, SU_q(2) spectral triples, and
the closed-form q-identity suite, behind a verification CLI (``qcpn``).
"""

from .qcoeff import QScalar, qint, qfactorial, qmultinomial, qpow
from .ncpoly import NCPoly, Presentation, UqGenerator, mul, normalize, star, uq_act

__all__ = [
    "QScalar",
    "qint",
    "qfactorial",
    "qmultinomial",
    "qpow",
    "NCPoly",
    "Presentation",
    "UqGenerator",
    "mul",
    "normalize",
    "star",
    "uq_act",
]

__version__ = "0.1.0"
