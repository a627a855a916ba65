"""Steady Euler flows on the hyperbolic disk from harmonic potentials.

The velocity is ``v = sharp(dPhi)`` and the pressure is the Bernoulli
pressure ``p = -1/2 |dPhi|_h^2``.  Because ``dPhi`` is closed and coclosed,
``nabla_v v^flat = 1/2 d|v|^2`` and the stationary equation holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .harmonic import BoundaryData, HarmonicPotential, harmonic_extend
from .quadrature import disk_rule_for

__all__ = ["SteadySolution", "build_steady", "euler_residual", "coset_triviality_check"]

BERNOULLI = 0.5


@dataclass(frozen=True)
class SteadySolution:
    """Harmonic steady state.

    ``pressure_factor`` is the Bernoulli coefficient; anything but 1/2 is a
    deliberately wrong pressure used as a negative control.
    """

    potential: HarmonicPotential
    pressure_factor: float = BERNOULLI

    @property
    def one_form(self) -> geo.OneFormField:
        return self.potential.one_form()

    def velocity(self, p):
        return geo.sharp(self.potential.gradient(p), p)

    def pressure(self, p):
        _, norm_h = geo.pointwise_norms(self.potential.gradient(p), p)
        return -self.pressure_factor * norm_h**2

    def pressure_gradient(self, p):
        return -self.pressure_factor * geo.lie_derivative_closed_1form(self.one_form, p)

    def divergence(self, p):
        """Hyperbolic divergence of ``v`` (``-delta v^flat``)."""
        return -geo.codifferential_1form(self.one_form, p)

    def with_pressure_factor(self, factor: float) -> "SteadySolution":
        return SteadySolution(self.potential, factor)


def build_steady(data: BoundaryData) -> SteadySolution:
    return SteadySolution(harmonic_extend(data))


def euler_residual(sol: SteadySolution, p):
    """``nabla_v v^flat + dp`` at ``p``; zero for a steady solution."""
    p = geo.as_points(p, dim=2)
    alpha = sol.one_form
    adv = geo.covariant_derivative_1form(alpha, sol.velocity(p), p)
    return adv + sol.pressure_gradient(p)


def coset_triviality_check(sol: SteadySolution, rule=None) -> float:
    """Relative gap between ``int (alpha(v_alpha))^2 dmu_h`` and ``||alpha||_L4(h)^4``.

    The left side goes through the contraction of ``alpha`` with its raised
    vector, the right side through the hyperbolic pointwise norm.
    """
    pot = sol.potential
    rule = rule or disk_rule_for(pot.order, 2)
    pts, w = rule.nodes()
    alpha = pot.gradient(pts)
    lam = geo.conformal_factor(pts)
    contraction = np.sum(alpha * geo.sharp(alpha, pts), axis=-1)
    lhs = math.fsum((w * contraction**2 * lam**2).tolist())
    _, norm_h = geo.pointwise_norms(alpha, pts)
    rhs = math.fsum((w * norm_h**4 * lam**2).tolist())
    if rhs == 0.0:
        return 0.0
    return abs(lhs - rhs) / rhs
