"""Time-rescaled harmonic flows ``v = f(t) sharp(dPhi)`` as Navier-Stokes solutions.

With pressure ``p = (2f - f') Phi - f^2 |dPhi|_h^2 / 2`` the field solves

    d_t v^flat + nabla_v v^flat - Lap v^flat + 2 Ric(v^flat) = -dp,   delta v^flat = 0

on the hyperbolic disk (unit viscosity), and it is a Leray-Hopf solution
whenever ``f(t)^2 + 4 int_0^t f^2 <= f(0)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from . import geometry as geo
from .harmonic import HarmonicPotential
from .quadrature import deformation_energy, disk_rule_for, l2_norms
from .report import Report

__all__ = [
    "TimeProfile",
    "ExponentialProfile",
    "SampledProfile",
    "NSSolution",
    "ResidualTerms",
    "Admissibility",
    "InadmissibleProfileError",
    "parse_profile",
    "ns_residual_terms",
    "leray_hopf_admissible",
    "energy_report",
    "nonuniqueness_demo",
]


class InadmissibleProfileError(ValueError):
    """A time profile violates the Leray-Hopf energy condition."""

    def __init__(self, message, t_violation=None):
        super().__init__(message)
        self.t_violation = t_violation


class TimeProfile:
    """Scalar rescaling ``f(t)`` with derivative and ``F2(t) = int_0^t f^2``."""

    tolerance = 1e-12

    def f(self, t):
        raise NotImplementedError

    def df(self, t):
        raise NotImplementedError

    def F2(self, t):
        raise NotImplementedError

    @property
    def f0(self) -> float:
        return float(self.f(0.0))


@dataclass(frozen=True)
class ExponentialProfile(TimeProfile):
    """``f(t) = f0 exp(-rate t)``; everything in closed form."""

    rate: float
    scale: float = 1.0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("exponential profile needs a positive rate")

    def f(self, t):
        return self.scale * np.exp(-self.rate * np.asarray(t, dtype=float))

    def df(self, t):
        return -self.rate * self.f(t)

    def F2(self, t):
        t = np.asarray(t, dtype=float)
        return self.scale**2 * -np.expm1(-2.0 * self.rate * t) / (2.0 * self.rate)

    def margin(self, t):
        """``f0^2 - f^2 - 4 F2`` with ``f0^2 - f^2`` formed without cancellation."""
        t = np.asarray(t, dtype=float)
        return self.scale**2 * -np.expm1(-2.0 * self.rate * t) - 4.0 * self.F2(t)

    def label(self) -> str:
        return f"exp:{self.rate:g}:{self.scale:g}"


class SampledProfile(TimeProfile):
    """A profile given by samples; spline derivative, composite-Simpson ``F2``."""

    tolerance = 1e-8

    def __init__(self, t, f, simpson_points=401):
        t = np.asarray(t, dtype=float)
        f = np.asarray(f, dtype=float)
        if t.ndim != 1 or t.shape != f.shape or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("samples must start at t = 0 and increase")
        self.t = t
        self.samples = f
        self._spline = CubicSpline(t, f)
        self._dspline = self._spline.derivative()
        self.simpson_points = simpson_points

    def f(self, t):
        return self._spline(t)

    def df(self, t):
        return self._dspline(t)

    def F2(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape)
        for idx, tt in np.ndenumerate(t):
            s = np.linspace(0.0, float(tt), self.simpson_points)
            out[idx] = simpson(self._spline(s) ** 2, x=s) if tt > 0 else 0.0
        return out

    def label(self) -> str:
        return f"sampled:{self.t.size}"


def parse_profile(text: str) -> TimeProfile:
    """Parse ``exp:RATE[:F0]``."""
    parts = text.split(":")
    if parts[0] != "exp" or len(parts) not in (2, 3):
        raise ValueError(f"bad profile string {text!r}; expected exp:RATE[:F0]")
    try:
        rate = float(parts[1])
        scale = float(parts[2]) if len(parts) == 3 else 1.0
    except ValueError as exc:
        raise ValueError(f"bad number in profile string {text!r}") from exc
    return ExponentialProfile(rate, scale)


@dataclass(frozen=True)
class NSSolution:
    potential: HarmonicPotential
    profile: TimeProfile

    @property
    def one_form(self) -> geo.OneFormField:
        return self.potential.one_form()

    def velocity(self, t, p):
        return float(self.profile.f(t)) * geo.sharp(self.potential.gradient(p), p)

    def pressure(self, t, p):
        f, df = float(self.profile.f(t)), float(self.profile.df(t))
        _, norm_h = geo.pointwise_norms(self.potential.gradient(p), p)
        return (2.0 * f - df) * self.potential.value(p) - 0.5 * f * f * norm_h**2

    def divergence(self, t, p):
        return -float(self.profile.f(t)) * geo.codifferential_1form(self.one_form, p)


@dataclass(frozen=True)
class ResidualTerms:
    time_derivative: np.ndarray
    advection: np.ndarray
    laplacian: np.ndarray
    ricci: np.ndarray
    pressure: np.ndarray
    bernoulli: np.ndarray

    @property
    def total(self):
        return self.time_derivative + self.advection + self.laplacian + self.ricci + self.pressure


def ns_residual_terms(sol: NSSolution, t: float, p) -> ResidualTerms:
    """The five terms of the Navier-Stokes residual (and their sum via ``total``).

    ``bernoulli`` is ``f^2/2 d|dPhi|_h^2``, the closed form the advection
    term must match.
    """
    p = geo.as_points(p, dim=2)
    f, df = float(sol.profile.f(t)), float(sol.profile.df(t))
    alpha = sol.one_form
    dphi = sol.potential.gradient(p)
    v = f * geo.sharp(dphi, p)
    v_flat = alpha.scaled(f)
    grad_sq = geo.lie_derivative_closed_1form(alpha, p)
    return ResidualTerms(
        time_derivative=df * dphi,
        advection=geo.covariant_derivative_1form(v_flat, v, p),
        laplacian=-geo.hodge_laplacian_1form(v_flat, p),
        ricci=2.0 * geo.ricci_action(f * dphi, 2),
        pressure=(2.0 * f - df) * dphi - 0.5 * f * f * grad_sq,
        bernoulli=0.5 * f * f * grad_sq,
    )


@dataclass(frozen=True)
class Admissibility:
    passed: bool
    min_margin: float
    t_worst: float
    times: np.ndarray = field(repr=False)
    margins: np.ndarray = field(repr=False)
    tolerance: float = 0.0

    def __bool__(self):
        return self.passed


def leray_hopf_admissible(profile: TimeProfile, T: float, grid=None, tol: Optional[float] = None) -> Admissibility:
    """Check ``f(0)^2 - f(t)^2 - 4 F2(t) >= -tol`` on a time grid covering ``[0, T]``."""
    if T <= 0:
        raise ValueError("horizon must be positive")
    times = np.linspace(0.0, T, 201) if grid is None else np.asarray(grid, dtype=float)
    if isinstance(profile, ExponentialProfile):
        margins = profile.margin(times)
    else:
        f0 = profile.f0
        margins = f0 * f0 - np.asarray(profile.f(times)) ** 2 - 4.0 * profile.F2(times)
    tol = profile.tolerance if tol is None else tol
    k = int(np.argmin(margins))
    return Admissibility(bool(margins[k] >= -tol), float(margins[k]), float(times[k]), times, margins, tol)


def energy_report(sol: NSSolution, T: float, steps: int, rule=None) -> Report:
    """Energy inequality rows ``(t, f, E, four_F2, lhs, rhs, margin)``.

    ``E = f^2 ||dPhi||^2`` and ``four_F2 = 4 F2(t) ||Def sharp(dPhi)||^2``
    are the two terms of the Leray-Hopf energy inequality.
    """
    pot = sol.potential
    _, l2 = l2_norms(pot, rule or disk_rule_for(pot.order, 2))
    deform = deformation_energy(pot)
    times = np.linspace(0.0, T, steps + 1)
    f = np.asarray(sol.profile.f(times), dtype=float)
    F2 = np.asarray(sol.profile.F2(times), dtype=float)
    E = f * f * l2
    D = 4.0 * F2 * deform.value
    rhs = E[0]
    report = Report(["t", "f", "E", "four_F2", "lhs", "rhs", "margin"])
    for row in zip(times, f, E, D):
        t_, f_, E_, D_ = (float(x) for x in row)
        lhs = E_ + D_
        report.add(t=t_, f=f_, E=E_, four_F2=D_, lhs=lhs, rhs=rhs, margin=rhs - lhs)
    dist0 = np.abs(f - f[0]) * math.sqrt(l2)
    bridge = abs(deform.value - l2) / l2 if l2 > 0 else 0.0
    report.metrics.update(
        l2_energy=l2,
        deformation_energy=deform.value,
        deformation_converged=deform.converged,
        bridge_rel_err=bridge,
        min_margin=float(min(r["margin"] for r in report.rows)),
        initial_distance_first_step=float(dist0[1]) if dist0.size > 1 else 0.0,
    )
    return report


def _probe_points(rng, n, r_max=0.95):
    r = r_max * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def max_spacetime_residual(sol: NSSolution, times, points):
    """Largest residual norm and largest Ricci-term norm over a probe grid."""
    worst = 0.0
    ricci = 0.0
    for t in times:
        terms = ns_residual_terms(sol, float(t), points)
        worst = max(worst, float(np.max(np.linalg.norm(terms.total, axis=-1))))
        ricci = max(ricci, float(np.max(np.linalg.norm(terms.ricci, axis=-1))))
    return worst, ricci


def nonuniqueness_demo(pot: HarmonicPotential, f1: TimeProfile, f2: TimeProfile, T: float, steps: int = 20, rule=None, seed=0, n_probe=200, tol=1e-10) -> Report:
    """Two Leray-Hopf solutions from the same initial velocity.

    Raises
    ------
    ValueError
        If ``f1(0) != f2(0)``.
    InadmissibleProfileError
        If either profile fails the energy condition on ``[0, T]``.
    """
    if f1.f0 != f2.f0:
        raise ValueError(f"profiles start at different values ({f1.f0} vs {f2.f0}); not the same Cauchy problem")
    times = np.linspace(0.0, T, steps + 1)
    checks = []
    for name, prof in (("f1", f1), ("f2", f2)):
        adm = leray_hopf_admissible(prof, T, times)
        if not adm:
            raise InadmissibleProfileError(f"profile {name} violates the energy condition at t = {adm.t_worst:g} (margin {adm.min_margin:.3e})", adm.t_worst)
        checks.append(adm)
    rule = rule or disk_rule_for(pot.order, 2)
    _, l2 = l2_norms(pot, rule)
    deform = deformation_energy(pot).value
    pts, w = rule.nodes()
    dphi = pot.gradient(pts)
    lam = geo.conformal_factor(pts)

    sol1, sol2 = NSSolution(pot, f1), NSSolution(pot, f2)
    rng = np.random.default_rng(seed)
    probes = _probe_points(rng, n_probe)
    probe_times = np.linspace(0.0, T, min(steps, 20) + 1)
    res1, ricci1 = max_spacetime_residual(sol1, probe_times, probes)
    res2, ricci2 = max_spacetime_residual(sol2, probe_times, probes)

    report = Report(["t", "f", "E", "four_F2", "lhs", "rhs", "margin", "sep"])
    seps = []
    for t in times:
        # separation measured by quadrature of |v1 - v2|_h^2 dmu_h
        vel_diff = (float(f1.f(t)) - float(f2.f(t))) * geo.sharp(dphi, pts)
        _, nh = geo.pointwise_norms(geo.flat(vel_diff, pts), pts)
        sep = math.sqrt(math.fsum((w * nh**2 * lam**2).tolist()))
        seps.append(sep)
        fv = float(f1.f(t))
        E = fv * fv * l2
        D = 4.0 * float(f1.F2(t)) * deform
        rhs = f1.f0**2 * l2
        report.add(t=float(t), f=fv, E=E, four_F2=D, lhs=E + D, rhs=rhs, margin=rhs - E - D, sep=sep)
    seps = np.asarray(seps)
    predicted = np.abs(np.asarray(f1.f(times)) - np.asarray(f2.f(times))) * math.sqrt(l2)
    same_start = seps[0] == 0.0
    residual_ok = max(res1, res2) <= tol and min(ricci1, ricci2) > 0.0
    separated = bool(np.any(seps[1:] > 0.0))
    report.metrics.update(
        same_initial_data=bool(same_start),
        max_residual=max(res1, res2),
        min_ricci=min(ricci1, ricci2),
        min_margin=min(c.min_margin for c in checks),
        max_separation=float(seps.max()),
        separation_formula_err=float(np.max(np.abs(seps - predicted))),
        l2_energy=l2,
    )
    report.passed = bool(same_start and residual_ok and separated)
    return report
