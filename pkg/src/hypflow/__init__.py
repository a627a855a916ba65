"""Harmonic steady Euler flows and non-unique Leray-Hopf solutions on the hyperbolic plane."""

from .euler import SteadySolution, build_steady, coset_triviality_check, euler_residual
from .harmonic import BallPotential3D, BoundaryData, HarmonicPotential, ball_extend_3d, harmonic_extend, spectral_dirichlet_energy
from .navier_stokes import ExponentialProfile, NSSolution, SampledProfile, leray_hopf_admissible, nonuniqueness_demo, ns_residual_terms

__version__ = "0.1.0"
