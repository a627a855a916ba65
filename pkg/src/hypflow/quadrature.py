"""Integration over the disk and the ball, and truncated-energy growth curves.

Disk integrals use a Gauss rule for the weight ``r dr`` on ``[0, 1]`` times
the trapezoid rule in angle.  Integrands built from a truncated Fourier
potential are trigonometric polynomials with polynomial radial parts, so
with enough nodes every norm below is exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi

from . import geometry as geo
from .harmonic import BallPotential3D, HarmonicPotential, spectral_dirichlet_energy
from .report import Report

__all__ = [
    "DiskRule",
    "GradedDiskRule",
    "ShellRule",
    "SphereRule",
    "GrowthCurve",
    "DeformationEnergy",
    "NonFiniteIntegrandError",
    "disk_rule_for",
    "integrate_disk",
    "l2_norms",
    "l4_norm_hyperbolic",
    "deformation_energy",
    "norm_report",
    "shell_density",
    "truncated_energy_growth",
]


class NonFiniteIntegrandError(FloatingPointError):
    """An integrand produced a NaN or infinity at a quadrature node."""


def _checked(values, what="integrand"):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrandError(f"non-finite {what} value at a quadrature node")
    return values


def _fsum(values):
    # fixed-order compensated sum keeps reports bit-reproducible
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


@dataclass(frozen=True)
class DiskRule:
    """Gauss(r dr) radial rule of order ``n_r`` times ``n_theta`` uniform angles.

    Integrates ``r**a * cos(b*theta)`` exactly for ``a <= 2*n_r - 1`` and
    ``b < n_theta``.
    """

    n_r: int
    n_theta: int

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError("rule orders must be positive")

    def radial(self):
        # Gauss-Jacobi with weight (1 + x) on [-1, 1], mapped to r dr on [0, 1]
        x, w = roots_jacobi(self.n_r, 0.0, 1.0)
        return 0.5 * (x + 1.0), 0.25 * w

    def nodes(self):
        """Points ``(M, 2)`` and weights ``(M,)``; weights sum to pi."""
        r, wr = self.radial()
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
        w = np.repeat(wr, self.n_theta) * (2.0 * np.pi / self.n_theta)
        return pts, w

    def doubled(self) -> "DiskRule":
        return DiskRule(2 * self.n_r, 2 * self.n_theta)


@dataclass(frozen=True)
class GradedDiskRule:
    """Gauss-Legendre panels graded geometrically toward the rim.

    Panel edges are ``0, 1 - ratio, 1 - ratio**2, ...`` ending at ``r_cut``.
    Nodes are interior to each panel, so ``r_cut = 1`` never evaluates on
    the circle itself.
    """

    panels: int = 40
    order: int = 8
    n_theta: int = 32
    ratio: float = 0.5
    r_cut: float = 1.0

    def radial(self):
        edges = [0.0] + [1.0 - self.ratio**k for k in range(1, self.panels)] + [1.0]
        edges = np.minimum(np.asarray(edges), self.r_cut)
        edges = np.unique(edges)
        x, w = np.polynomial.legendre.leggauss(self.order)
        lo, hi = edges[:-1, None], edges[1:, None]
        r = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
        wr = (0.5 * (hi - lo) * w).ravel() * r
        return r, wr

    def nodes(self):
        r, wr = self.radial()
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
        w = np.repeat(wr, self.n_theta) * (2.0 * np.pi / self.n_theta)
        return pts, w

    def refined(self) -> "GradedDiskRule":
        return GradedDiskRule(self.panels, self.order + 4, self.n_theta + 8, self.ratio, self.r_cut)


def disk_rule_for(order: int, power: int = 2) -> DiskRule:
    """A rule exact for ``(1-r^2)^2 |dPhi|^(2*power)`` with ``Phi`` of the given order."""
    n = max(order, 1)
    return DiskRule(n_r=power * n + 4, n_theta=2 * power * n + 8)


def integrate_disk(f: Callable[[np.ndarray], np.ndarray], rule=None) -> float:
    """Quadrature of ``f`` over the unit disk with Euclidean area measure."""
    rule = rule or DiskRule(16, 32)
    pts, w = rule.nodes()
    return _fsum(w * _checked(f(pts)))


def _potential_rule(pot, rule, power):
    return rule if rule is not None else disk_rule_for(pot.order, power)


def l2_norms(pot: HarmonicPotential, rule=None):
    """Squared L2 norms of ``dPhi`` in the Euclidean and hyperbolic metrics.

    The hyperbolic value goes through the hyperbolic pointwise norm and the
    hyperbolic area density ``lam**2``.
    """
    rule = _potential_rule(pot, rule, 2)
    pts, w = rule.nodes()
    grad = pot.gradient(pts)
    norm_e, norm_h = geo.pointwise_norms(grad, pts)
    lam = geo.conformal_factor(pts)
    euclid = _fsum(w * _checked(norm_e**2))
    hyper = _fsum(w * _checked(norm_h**2 * lam**2))
    return euclid, hyper


def l4_norm_hyperbolic(pot: HarmonicPotential, rule=None) -> float:
    """Fourth power of the hyperbolic L4 norm of ``dPhi``."""
    rule = _potential_rule(pot, rule, 2)
    pts, w = rule.nodes()
    _, norm_h = geo.pointwise_norms(pot.gradient(pts), pts)
    lam = geo.conformal_factor(pts)
    return _fsum(w * _checked(norm_h**4 * lam**2))


def l4_norm_euclidean(pot: HarmonicPotential, rule=None) -> float:
    """Fourth power of the Euclidean L4 norm of ``dPhi``."""
    rule = _potential_rule(pot, rule, 2)
    pts, w = rule.nodes()
    norm_e, _ = geo.pointwise_norms(pot.gradient(pts), pts)
    return _fsum(w * _checked(norm_e**4))


@dataclass(frozen=True)
class DeformationEnergy:
    value: float
    previous: float
    change: float
    refinements: int
    converged: bool


def deformation_energy(pot: HarmonicPotential, rule: Optional[GradedDiskRule] = None, tol=1e-7, max_refinements=6) -> DeformationEnergy:
    """``int |Def v|_h^2 dmu_h`` for ``v = sharp(dPhi)`` on graded panels.

    The rule is refined until two consecutive values agree to ``tol``
    (relative).
    """
    alpha = pot.one_form()
    rule = rule or GradedDiskRule(order=pot.order + 4, n_theta=2 * pot.order + 16)

    def once(r):
        pts, w = r.nodes()
        _, norm2 = geo.deformation_tensor(alpha, pts)
        lam = geo.conformal_factor(pts)
        return _fsum(w * _checked(norm2 * lam**2, "deformation integrand"))

    prev = once(rule)
    for k in range(1, max_refinements + 1):
        rule = rule.refined()
        cur = once(rule)
        change = abs(cur - prev) / max(abs(cur), np.finfo(float).tiny)
        if change <= tol or cur == prev:
            return DeformationEnergy(cur, prev, change, k, True)
        prev = cur
    return DeformationEnergy(cur, prev, change, max_refinements, False)


def _rel(value, ref):
    return abs(value - ref) / abs(ref) if ref != 0 else abs(value)


def norm_report(pot: HarmonicPotential, rule=None) -> Report:
    """Euclidean and hyperbolic norms of ``dPhi`` next to the spectral oracle.

    The L4 row has no closed-form oracle; its check is the domination
    ``hyperbolic <= euclidean / 4``, recorded in the metrics.
    """
    oracle = spectral_dirichlet_energy(pot.data)
    report = Report(["name", "euclidean", "hyperbolic", "spectral_oracle", "rel_err"])
    e2, h2 = l2_norms(pot, rule)
    report.add(name="l2_squared", euclidean=e2, hyperbolic=h2, spectral_oracle=oracle, rel_err=max(_rel(e2, oracle), _rel(h2, oracle)))
    e4, h4 = l4_norm_euclidean(pot, rule), l4_norm_hyperbolic(pot, rule)
    report.add(name="l4_fourth", euclidean=e4, hyperbolic=h4, spectral_oracle=float("nan"), rel_err=float("nan"))
    dfm = deformation_energy(pot)
    report.add(name="deformation", euclidean=float("nan"), hyperbolic=dfm.value, spectral_oracle=oracle, rel_err=_rel(dfm.value, oracle))
    report.metrics = {
        "l2_rel_err": report.rows[0]["rel_err"],
        "l4_dominated": h4 <= 0.25 * e4,
        "deformation_rel_err": report.rows[2]["rel_err"],
        "deformation_converged": dfm.converged,
    }
    report.passed = report.metrics["l2_rel_err"] <= 1e-12 and report.metrics["l4_dominated"] and report.metrics["deformation_rel_err"] <= 1e-6
    return report


# ---------------------------------------------------------------------------
# truncated exhaustion by hyperbolic balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereRule:
    """Unit-sphere rule in dimension ``n``: angles for n = 2, Gauss x azimuth for n = 3."""

    dim: int
    polar: int = 6
    azimuth: int = 8

    def nodes(self):
        if self.dim == 2:
            theta = 2.0 * np.pi * np.arange(self.azimuth) / self.azimuth
            return np.stack([np.cos(theta), np.sin(theta)], -1), np.full(self.azimuth, 2.0 * np.pi / self.azimuth)
        if self.dim == 3:
            z, wz = np.polynomial.legendre.leggauss(self.polar)
            ang = 2.0 * np.pi * np.arange(self.azimuth) / self.azimuth
            s = np.sqrt(1.0 - z * z)
            pts = np.stack(
                [
                    (s[:, None] * np.cos(ang)).ravel(),
                    (s[:, None] * np.sin(ang)).ravel(),
                    np.repeat(z, self.azimuth),
                ],
                axis=-1,
            )
            return pts, np.repeat(wz, self.azimuth) * (2.0 * np.pi / self.azimuth)
        raise NotImplementedError(f"sphere rule for dimension {self.dim}")

    def doubled(self) -> "SphereRule":
        return SphereRule(self.dim, 2 * self.polar, 2 * self.azimuth)


@dataclass(frozen=True)
class ShellRule:
    """Gauss-Legendre panels in hyperbolic radius, one panel per reported shell."""

    radii: tuple
    order: int = 6

    def panels(self):
        edges = np.concatenate([[0.0], np.asarray(self.radii, dtype=float)])
        if np.any(np.diff(edges) <= 0):
            raise ValueError("hyperbolic radii must be positive and increasing")
        x, w = np.polynomial.legendre.leggauss(self.order)
        lo, hi = edges[:-1, None], edges[1:, None]
        return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def _potential_dim(pot) -> int:
    return 3 if isinstance(pot, BallPotential3D) else 2


def shell_density(pot, r: float, sphere: SphereRule) -> float:
    """``int_{S^(n-1)} |dPhi(r w)|_e^2 dw`` at Euclidean radius ``r``."""
    dirs, w = sphere.nodes()
    g = pot.gradient(r * dirs)
    return _fsum(w * _checked(np.sum(g * g, axis=-1), "shell integrand"))


@dataclass
class GrowthCurve:
    """Truncated energies ``E(R_j)`` over hyperbolic balls of radius ``R_j``."""

    dim: int
    radii: np.ndarray
    energy: np.ndarray
    increments: np.ndarray
    fit_slope: float = float("nan")
    fit_residual: float = float("nan")
    fit_window: tuple = ()

    def fit(self, lo: float, hi: float):
        """Least-squares line ``E ~ a + s R`` over ``lo <= R <= hi``."""
        sel = (self.radii >= lo - 1e-12) & (self.radii <= hi + 1e-12)
        if sel.sum() < 2:
            raise ValueError("fit window needs at least two radii")
        R, E = self.radii[sel], self.energy[sel]
        A = np.stack([np.ones_like(R), R], axis=-1)
        coef, *_ = np.linalg.lstsq(A, E, rcond=None)
        resid = E - A @ coef
        self.fit_slope = float(coef[1])
        self.fit_residual = float(np.max(np.abs(resid)))
        self.fit_window = (lo, hi)
        return self.fit_slope, self.fit_residual

    def rows(self):
        for R, E, dE in zip(self.radii, self.energy, self.increments):
            yield {
                "R": float(R),
                "E": float(E),
                "delta_E": float(dE),
                "fit_slope": self.fit_slope,
                "fit_residual": self.fit_residual,
            }


def truncated_energy_growth(pot, radii: Sequence[float], sphere: Optional[SphereRule] = None, order: int = 6) -> GrowthCurve:
    """Hyperbolic Dirichlet energy of ``dPhi`` over balls of hyperbolic radius ``R``.

    With ``r = tanh(R/2)`` and ``dr = dR / lam`` the energy over a ball is

        E(R) = int_0^R lam^(n-3) r^(n-1) int_{S^(n-1)} |dPhi(r w)|_e^2 dw dR,

    so the same accumulation runs in every dimension; only the weight and
    the potential differ.
    """
    dim = _potential_dim(pot)
    sphere = sphere or SphereRule(dim, azimuth=max(8, 2 * getattr(pot, "order", 4) + 4) if dim == 2 else 8)
    if sphere.dim != dim:
        raise ValueError("sphere rule dimension does not match the potential")
    shells = ShellRule(tuple(float(R) for R in radii), order)
    nodes, weights = shells.panels()
    increments = np.empty(nodes.shape[0])
    for j in range(nodes.shape[0]):
        terms = []
        for R, w in zip(nodes[j], weights[j]):
            r = math.tanh(0.5 * R)
            lam = 2.0 / ((1.0 - r) * (1.0 + r))
            terms.append(w * lam ** (dim - 3) * r ** (dim - 1) * shell_density(pot, r, sphere))
        inc = _fsum(_checked(terms, "shell contribution"))
        increments[j] = inc
    energy = np.cumsum(increments)
    return GrowthCurve(dim, np.asarray(shells.radii), energy, increments)
