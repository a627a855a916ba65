"""Harmonic extension of boundary data into the disk and the 3-ball.

In two dimensions the extension of a truncated Fourier series is the real
part of a complex polynomial, so potentials and all their derivatives are
evaluated exactly (up to rounding).  In three dimensions the extension uses
the hyperbolic Poisson kernel of the ball model,

    Phi(x) = (1/4pi) int_{S^2} ((1 - |x|^2) / |x - xi|^2)^2 phi(xi) dsigma(xi),

evaluated with a product rule in a frame centred on the direction of ``x``
so that the kernel peak is resolved all the way to the rim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .geometry import OneFormField, as_points

__all__ = [
    "BoundaryData",
    "HarmonicPotential",
    "BallPotential3D",
    "QuadratureConvergenceError",
    "harmonic_extend",
    "spectral_dirichlet_energy",
    "gradient_sup_bound",
    "ball_extend_3d",
]


class QuadratureConvergenceError(RuntimeError):
    """Doubling a quadrature rule moved the result by more than the tolerance."""


@dataclass(frozen=True)
class BoundaryData:
    """Boundary values ``phi(theta) = a0/2 + sum_k a_k cos k theta + b_k sin k theta``."""

    a0: float = 0.0
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        n = max(len(a), len(b))
        a += (0.0,) * (n - len(a))
        b += (0.0,) * (n - len(b))
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not all(np.isfinite(v) for v in (self.a0,) + a + b):
            raise ValueError("boundary coefficients must be finite")

    @property
    def order(self) -> int:
        return len(self.a)

    @classmethod
    def from_modes(cls, a0=0.0, cos=None, sin=None):
        """Build from sparse ``{k: coefficient}`` mappings."""
        cos = dict(cos or {})
        sin = dict(sin or {})
        n = max([0, *cos, *sin])
        a = [cos.get(k, 0.0) for k in range(1, n + 1)]
        b = [sin.get(k, 0.0) for k in range(1, n + 1)]
        return cls(a0, a, b)

    @classmethod
    def random(cls, order, rng, low=-1.0, high=1.0):
        a0, *rest = rng.uniform(low, high, size=2 * order + 1)
        return cls(a0, rest[:order], rest[order:])

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, 0.5 * self.a0)
        for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
            out = out + ak * np.cos(k * theta) + bk * np.sin(k * theta)
        return out

    def complex_coefficients(self) -> np.ndarray:
        """``c_0 = a0/2`` and ``c_k = a_k - i b_k``."""
        c = np.empty(self.order + 1, dtype=complex)
        c[0] = 0.5 * self.a0
        c[1:] = np.asarray(self.a) - 1j * np.asarray(self.b)
        return c

    def gradient_majorant(self) -> float:
        """``sum_k k (|a_k| + |b_k|)``, a bound for ``sup |dPhi|_e``."""
        k = np.arange(1, self.order + 1)
        return float(np.sum(k * (np.abs(self.a) + np.abs(self.b))))

    def smoothness_proxy(self, holder=0.5) -> float:
        k = np.arange(1, self.order + 1)
        return float(np.sum(k ** (1.0 + holder) * (np.abs(self.a) + np.abs(self.b))))

    def __add__(self, other):
        n = max(self.order, other.order)

        def pad(v):
            return np.pad(np.asarray(v, dtype=float), (0, n - len(v)))

        return BoundaryData(self.a0 + other.a0, pad(self.a) + pad(other.a), pad(self.b) + pad(other.b))

    def __mul__(self, s):
        s = float(s)
        return BoundaryData(s * self.a0, [s * v for v in self.a], [s * v for v in self.b])

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"a0": self.a0, "a": list(self.a), "b": list(self.b)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"a0", "a", "b"}
        if unknown:
            raise ValueError(f"unknown boundary-data keys: {sorted(unknown)}")
        a = list(d.get("a", []))
        b = list(d.get("b", []))
        if len(a) != len(b):
            raise ValueError("boundary data needs equally long 'a' and 'b' lists")
        return cls(d.get("a0", 0.0), a, b)

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class HarmonicPotential:
    """``Phi = Re F`` with ``F(z) = sum_k c_k z^k``."""

    coefficients: np.ndarray
    data: BoundaryData = field(default_factory=BoundaryData)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        d1 = P.polyder(c) if len(c) > 1 else np.zeros(1, dtype=complex)
        d2 = P.polyder(d1) if len(d1) > 1 else np.zeros(1, dtype=complex)
        d3 = P.polyder(d2) if len(d2) > 1 else np.zeros(1, dtype=complex)
        object.__setattr__(self, "_derivs", (c, d1, d2, d3))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def _F(self, p, m):
        p = as_points(p, dim=2)
        z = p[..., 0] + 1j * p[..., 1]
        return P.polyval(z, self._derivs[m])

    def value(self, p):
        return self._F(p, 0).real

    def gradient(self, p):
        f1 = self._F(p, 1)
        return np.stack([f1.real, -f1.imag], axis=-1)

    def hessian(self, p):
        f2 = self._F(p, 2)
        xx, xy = f2.real, -f2.imag
        return np.stack([np.stack([xx, xy], -1), np.stack([xy, -xx], -1)], -2)

    def third(self, p):
        f3 = self._F(p, 3)
        xxx, xxy = f3.real, -f3.imag
        xyy, yyy = -f3.real, f3.imag
        s = np.empty(np.shape(f3) + (2, 2, 2))
        s[..., 0, 0, 0] = xxx
        s[..., 0, 0, 1] = s[..., 0, 1, 0] = s[..., 1, 0, 0] = xxy
        s[..., 0, 1, 1] = s[..., 1, 0, 1] = s[..., 1, 1, 0] = xyy
        s[..., 1, 1, 1] = yyy
        return s

    def laplacian(self, p):
        return np.trace(self.hessian(p), axis1=-2, axis2=-1)

    def one_form(self) -> OneFormField:
        """``dPhi`` with analytic first and second component derivatives."""
        return OneFormField(self.gradient, self.hessian, self.third)


def harmonic_extend(data: BoundaryData) -> HarmonicPotential:
    """Harmonic extension of ``data`` into the unit disk."""
    return HarmonicPotential(data.complex_coefficients(), data)


def spectral_dirichlet_energy(data: BoundaryData) -> float:
    """Exact Dirichlet energy ``pi sum_k k (a_k^2 + b_k^2)``."""
    k = np.arange(1, data.order + 1)
    return float(np.pi * np.sum(k * (np.square(data.a) + np.square(data.b))))


def polar_grid(n_r, n_theta, r_max=0.95):
    """Interior polar grid with radii ``r_max * j / n_r`` (j = 1..n_r)."""
    r = r_max * np.arange(1, n_r + 1) / n_r
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    return np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)


def gradient_sup_bound(pot: HarmonicPotential, grid) -> float:
    """Largest Euclidean length of ``dPhi`` over the grid points."""
    g = pot.gradient(np.asarray(grid, dtype=float))
    return float(np.max(np.linalg.norm(g, axis=-1), initial=0.0))


# ---------------------------------------------------------------------------
# three dimensions
# ---------------------------------------------------------------------------


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


def _frames(omega):
    """Orthonormal frames ``(omega, e1, e2)`` for unit vectors ``omega``."""
    helper = np.where(np.abs(omega[..., :1]) < 0.9, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    e1 = helper - np.sum(helper * omega, axis=-1, keepdims=True) * omega
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(omega, e1)
    return e1, e2


@dataclass(frozen=True)
class BallPotential3D:
    """Hyperbolic-harmonic extension of ``phi`` into the unit 3-ball.

    The sphere is parametrized around the direction ``omega`` of the
    evaluation point by the chordal half-distance ``rho = |xi - omega| / 2``
    and an azimuth; ``dsigma = 4 rho drho dphi``.  ``rho`` is split into
    geometrically graded Gauss-Legendre panels around the kernel width
    ``(1 - r) / (2 sqrt(r))``.
    """

    phi: Callable[[np.ndarray], np.ndarray]
    polar_order: int = 8
    azimuth: int = 16
    grading_levels: int = 6
    max_chunk: int = 2_000_000

    def refined(self, factor=2) -> "BallPotential3D":
        return BallPotential3D(
            self.phi,
            polar_order=self.polar_order * factor,
            azimuth=self.azimuth * factor,
            grading_levels=self.grading_levels,
            max_chunk=self.max_chunk,
        )

    def _rho_rule(self, r):
        if r > 0.0:
            width = (1.0 - r) / (2.0 * np.sqrt(r))
        else:
            width = np.inf
        edges = [0.0]
        if width < 1.0:
            k = -self.grading_levels
            while width * 2.0**k < 1.0:
                edges.append(width * 2.0**k)
                k += 1
        edges.append(1.0)
        return _gauss_panels(edges, self.polar_order)

    def _sphere_nodes(self, omega, r):
        rho, wr = self._rho_rule(r)
        ang = 2.0 * np.pi * np.arange(self.azimuth) / self.azimuth
        e1, e2 = _frames(omega)
        cos_psi = 1.0 - 2.0 * rho * rho
        sin_psi = 2.0 * rho * np.sqrt(np.maximum(1.0 - rho * rho, 0.0))
        tang = np.cos(ang)[:, None] * e1[:, None, :] + np.sin(ang)[:, None] * e2[:, None, :]
        xi = cos_psi[None, :, None, None] * omega[:, None, None, :] + sin_psi[None, :, None, None] * tang[:, None, :, :]
        # normalized measure: 4 rho drho dphi / (4 pi)
        w = (4.0 * rho * wr)[:, None] * np.full(self.azimuth, 2.0 * np.pi / self.azimuth) / (4.0 * np.pi)
        return rho, xi, w

    def _evaluate(self, X, want_gradient):
        X = as_points(X, dim=3)
        shape = X.shape[:-1]
        flatX = X.reshape(-1, 3)
        radius = np.linalg.norm(flatX, axis=-1)
        out = np.empty((flatX.shape[0], 3) if want_gradient else flatX.shape[0])
        for r in np.unique(radius):
            idx = np.nonzero(radius == r)[0]
            per_point = (self.polar_order * 64) * self.azimuth
            step = max(1, self.max_chunk // max(per_point, 1))
            for start in range(0, idx.size, step):
                sel = idx[start : start + step]
                out[sel] = self._evaluate_shell(flatX[sel], r, want_gradient)
        return out.reshape(shape + ((3,) if want_gradient else ()))

    def _evaluate_shell(self, x, r, want_gradient):
        if r > 0.0:
            omega = x / r
        else:
            omega = np.tile([0.0, 0.0, 1.0], (x.shape[0], 1))
        rho, xi, w = self._sphere_nodes(omega, r)
        A = (1.0 - r) * (1.0 + r)
        B = (1.0 - r) ** 2 + 4.0 * r * rho * rho  # |x - xi|^2
        phi_xi = np.asarray(self.phi(xi), dtype=float)
        if not want_gradient:
            K = (A / B) ** 2
            return np.einsum("pqa,q,qa->p", phi_xi, K, w)
        phi_0 = np.asarray(self.phi(omega), dtype=float)
        # grad_x K = -4 A x / B^2 - 4 A^2 (x - xi) / B^3; its integral vanishes
        diff = phi_xi - phi_0[:, None, None]
        c1 = -4.0 * A / B**2
        c2 = -4.0 * A * A / B**3
        wd = diff * w[None]
        s0 = np.einsum("pqa,q->p", wd, c1 + c2)
        s1 = np.einsum("pqa,q,pqai->pi", wd, c2, xi)
        return s0[:, None] * x - s1

    def value(self, X):
        return self._evaluate(X, want_gradient=False)

    def gradient(self, X):
        return self._evaluate(X, want_gradient=True)

    def kernel_mass(self, X):
        """Quadrature of the normalized kernel; exactly 1 in exact arithmetic."""
        return BallPotential3D(lambda xi: np.ones(xi.shape[:-1]), self.polar_order, self.azimuth, self.grading_levels).value(X)

    def hyperbolic_laplacian(self, X, h=1e-3):
        """``lam^-2 (Lap_e Phi + 2 x.grad Phi / (1 - |x|^2))`` via differences of the gradient."""
        X = as_points(X, dim=3)
        lap = np.zeros(X.shape[:-1])
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            lap += (self.gradient(X + e)[..., i] - self.gradient(X - e)[..., i]) / (2.0 * h)
        one_m = 1.0 - np.sum(X * X, axis=-1)
        drift = 2.0 * np.sum(X * self.gradient(X), axis=-1) / one_m
        return (one_m / 2.0) ** 2 * (lap + drift)

    def check_convergence(self, probes, tol=1e-8):
        """Raise if doubling the rule changes ``Phi`` at ``probes`` by more than ``tol``."""
        a = self.value(probes)
        b = self.refined().value(probes)
        change = float(np.max(np.abs(a - b), initial=0.0))
        if change > tol:
            raise QuadratureConvergenceError(f"doubling the sphere rule changed Phi by {change:.3e} > {tol:.1e}")
        return change


def ball_extend_3d(phi, polar_order=8, azimuth=16, grading_levels=6) -> BallPotential3D:
    """Hyperbolic Poisson extension of ``phi`` (a function of points on S^2)."""
    return BallPotential3D(phi, polar_order, azimuth, grading_levels)
