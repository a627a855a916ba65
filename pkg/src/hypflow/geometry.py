"""Pointwise differential geometry of the Poincare ball model.

The metric is ``g = lam(x)**2 * delta`` with ``lam = 2 / (1 - |x|**2)``,
which has constant sectional curvature -1.  Every operator here works in
the Euclidean chart and is vectorized over leading axes: a point array has
shape ``(..., n)``, a covector array the same shape, and the Christoffel
symbols come back as ``(..., n, n, n)`` indexed ``[k, i, j]``.

Component derivatives of a one-form follow the convention
``J[..., i, j] = d_i alpha_j`` and ``S[..., i, j, k] = d_i d_j alpha_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "OutsideChartError",
    "StencilError",
    "OneFormField",
    "as_points",
    "conformal_factor",
    "log_gradient",
    "inverse_metric_factor",
    "sharp",
    "flat",
    "pointwise_norms",
    "christoffel",
    "covariant_derivative_1form",
    "codifferential_1form",
    "hodge_laplacian_1form",
    "ricci_action",
    "lie_derivative_closed_1form",
    "deformation_tensor",
    "fd_jacobian",
    "fd_second",
]

FD_STEP = 1e-4
RIM_WARNING_RADIUS = 0.999


class OutsideChartError(ValueError):
    """Raised for points with ``|x| >= 1``."""


class StencilError(ValueError):
    """Raised when a finite-difference stencil would leave the unit ball."""


def as_points(p, dim=None):
    """Validate and return ``p`` as a float array of chart points."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        raise ValueError("a point needs at least one coordinate")
    if dim is not None and p.shape[-1] != dim:
        raise ValueError(f"expected {dim} coordinates, got {p.shape[-1]}")
    r2 = np.sum(p * p, axis=-1)
    if not np.all(np.isfinite(r2)) or np.any(r2 >= 1.0):
        bad = np.max(np.sqrt(r2))
        raise OutsideChartError(f"point outside the unit ball chart (|x| = {bad:.6g})")
    return p


def near_rim(p) -> np.ndarray:
    """Boolean mask of points where ``lam**2`` amplifies rounding."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(np.sum(p * p, axis=-1)) >= RIM_WARNING_RADIUS


def _one_minus_r2(p):
    return 1.0 - np.sum(p * p, axis=-1)


def conformal_factor(p):
    """Return ``lam(p) = 2 / (1 - |p|^2)``."""
    p = as_points(p)
    return 2.0 / _one_minus_r2(p)


def log_gradient(p):
    """Return ``u = grad log lam = 2 x / (1 - |x|^2)``."""
    p = as_points(p)
    return 2.0 * p / _one_minus_r2(p)[..., None]


def inverse_metric_factor(p):
    """Return ``lam**-2`` and its Euclidean gradient ``-x (1 - |x|^2)``."""
    p = as_points(p)
    lam = 2.0 / _one_minus_r2(p)
    mu = 1.0 / (lam * lam)
    dmu = -p * _one_minus_r2(p)[..., None]
    return mu, dmu


def sharp(alpha, p):
    """Raise an index: ``v^i = lam^-2 alpha_i``."""
    lam = conformal_factor(p)
    return np.asarray(alpha, dtype=float) / (lam * lam)[..., None]


def flat(v, p):
    """Lower an index: ``alpha_i = lam^2 v^i``."""
    lam = conformal_factor(p)
    return np.asarray(v, dtype=float) * (lam * lam)[..., None]


def pointwise_norms(alpha, p):
    """Euclidean and hyperbolic lengths of a covector at ``p``.

    Returns
    -------
    (norm_e, norm_h) : tuple of ndarray
        ``norm_h = norm_e / lam(p)``.
    """
    lam = conformal_factor(p)
    norm_e = np.linalg.norm(np.asarray(alpha, dtype=float), axis=-1)
    return norm_e, norm_e / lam


def christoffel(p):
    """Christoffel symbols ``G[..., k, i, j]`` of the conformal metric."""
    u = log_gradient(p)
    n = u.shape[-1]
    eye = np.eye(n)
    # G^k_ij = d_ki u_j + d_kj u_i - d_ij u_k
    return (
        eye[:, :, None] * u[..., None, None, :]
        + eye[:, None, :] * u[..., None, :, None]
        - eye[None, :, :] * u[..., :, None, None]
    )


def ricci_action(alpha, n=2):
    """Ricci tensor of curvature -1 space acting on a covector: ``-(n-1) alpha``."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    return -(n - 1) * np.asarray(alpha, dtype=float)


def fd_jacobian(fun, p, h=FD_STEP, scale_to_boundary=True):
    """Central-difference Jacobian ``J[..., i, j] = d_i fun_j``.

    With ``scale_to_boundary`` the step shrinks to ``h * (1 - |p|)`` so the
    stencil stays inside the ball; otherwise a stencil crossing the rim
    raises :class:`StencilError`.
    """
    p = as_points(p)
    n = p.shape[-1]
    radius = np.sqrt(np.sum(p * p, axis=-1))
    if scale_to_boundary:
        step = h * (1.0 - radius)
    else:
        step = np.full(radius.shape, float(h))
        if np.any(radius + step >= 1.0):
            raise StencilError("finite-difference stencil leaves the unit ball")
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        shift = step[..., None] * e
        cols.append((np.asarray(fun(p + shift)) - np.asarray(fun(p - shift))) / (2.0 * step[..., None]))
    return np.stack(cols, axis=-2)


def fd_second(jac, p, h=FD_STEP, scale_to_boundary=True):
    """Central differences of a Jacobian evaluator: ``S[..., i, j, k]``."""
    p = as_points(p)
    n = p.shape[-1]
    radius = np.sqrt(np.sum(p * p, axis=-1))
    if scale_to_boundary:
        step = h * (1.0 - radius)
    else:
        step = np.full(radius.shape, float(h))
        if np.any(radius + step >= 1.0):
            raise StencilError("finite-difference stencil leaves the unit ball")
    out = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        shift = step[..., None] * e
        out.append((np.asarray(jac(p + shift)) - np.asarray(jac(p - shift))) / (2.0 * step[..., None, None]))
    return np.stack(out, axis=-3)


@dataclass(frozen=True)
class OneFormField:
    """A covector field on the ball given by its chart components.

    ``value`` is required.  ``jacobian`` and ``second`` are optional analytic
    derivative evaluators; when missing, central differences are used.
    """

    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    second: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = FD_STEP
    scale_to_boundary: bool = True

    def __call__(self, p):
        return np.asarray(self.value(as_points(p)), dtype=float)

    def jac(self, p):
        p = as_points(p)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(p), dtype=float)
        return fd_jacobian(self.value, p, self.fd_step, self.scale_to_boundary)

    def hess(self, p):
        p = as_points(p)
        if self.second is not None:
            return np.asarray(self.second(p), dtype=float)
        return fd_second(self.jac, p, self.fd_step, self.scale_to_boundary)

    def scaled(self, s):
        """The field ``s * alpha`` (derivative evaluators scaled alongside)."""
        s = float(s)
        return OneFormField(
            value=lambda p: s * np.asarray(self.value(p)),
            jacobian=None if self.jacobian is None else (lambda p: s * np.asarray(self.jacobian(p))),
            second=None if self.second is None else (lambda p: s * np.asarray(self.second(p))),
            fd_step=self.fd_step,
            scale_to_boundary=self.scale_to_boundary,
        )

    @classmethod
    def constant(cls, components):
        c = np.asarray(components, dtype=float)
        n = c.shape[-1]
        return cls(
            value=lambda p: np.broadcast_to(c, np.shape(p)).copy(),
            jacobian=lambda p: np.zeros(np.shape(p)[:-1] + (n, n)),
            second=lambda p: np.zeros(np.shape(p)[:-1] + (n, n, n)),
        )


def _covariant_jacobian(alpha: OneFormField, p):
    """``N[..., i, j] = nabla_i alpha_j = d_i alpha_j - G^k_ij alpha_k``."""
    a = alpha(p)
    return alpha.jac(p) - np.einsum("...kij,...k->...ij", christoffel(p), a)


def covariant_derivative_1form(alpha: OneFormField, v, p):
    """``(nabla_v alpha)_j = v^i (d_i alpha_j - G^k_ij alpha_k)``.

    ``v`` is either an array of vector components at ``p`` or a callable
    returning them.
    """
    p = as_points(p)
    vv = v(p) if callable(v) else np.asarray(v, dtype=float)
    return np.einsum("...i,...ij->...j", vv, _covariant_jacobian(alpha, p))


def codifferential_1form(alpha: OneFormField, p):
    """``delta alpha = -lam^-n sum_i d_i (lam^(n-2) alpha_i)``."""
    p = as_points(p)
    n = p.shape[-1]
    mu, _ = inverse_metric_factor(p)
    trace = np.trace(alpha.jac(p), axis1=-2, axis2=-1)
    if n == 2:
        return -mu * trace
    u = log_gradient(p)
    return -mu * (trace + (n - 2) * np.sum(u * alpha(p), axis=-1))


def hodge_laplacian_1form(alpha: OneFormField, p):
    """Hodge-de Rham Laplacian ``(d delta + delta d) alpha`` on the disk.

    Only the two-dimensional case is supported.
    """
    p = as_points(p)
    if p.shape[-1] != 2:
        raise NotImplementedError("the Hodge Laplacian is implemented for n = 2 only")
    mu, dmu = inverse_metric_factor(p)
    J = alpha.jac(p)
    S = alpha.hess(p)
    trace = J[..., 0, 0] + J[..., 1, 1]
    dtrace = S[..., :, 0, 0] + S[..., :, 1, 1]
    d_delta = -(dmu * trace[..., None] + mu[..., None] * dtrace)
    # dalpha = w dx^dy and delta(w dx^dy) = (d_y s, -d_x s) with s = mu w
    w = J[..., 0, 1] - J[..., 1, 0]
    dw = S[..., :, 0, 1] - S[..., :, 1, 0]
    ds = dmu * w[..., None] + mu[..., None] * dw
    delta_d = np.stack([ds[..., 1], -ds[..., 0]], axis=-1)
    return d_delta + delta_d


def lie_derivative_closed_1form(alpha: OneFormField, p):
    """``L_v alpha = d(alpha(v)) = d |alpha|_h^2`` for closed ``alpha``, ``v = sharp(alpha)``."""
    p = as_points(p)
    mu, dmu = inverse_metric_factor(p)
    a = alpha(p)
    J = alpha.jac(p)
    sq = np.sum(a * a, axis=-1)
    return dmu * sq[..., None] + 2.0 * mu[..., None] * np.einsum("...ji,...i->...j", J, a)


def deformation_tensor(alpha: OneFormField, p):
    """Symmetrized covariant derivative of ``alpha`` and its squared norm.

    Returns
    -------
    D : ndarray, shape (..., n, n)
        ``D_ij = (nabla_i alpha_j + nabla_j alpha_i) / 2`` (indices down).
    norm2 : ndarray
        ``|D|_h^2 = lam^-4 sum_ij D_ij^2``.
    """
    p = as_points(p)
    N = _covariant_jacobian(alpha, p)
    D = 0.5 * (N + np.swapaxes(N, -1, -2))
    mu, _ = inverse_metric_factor(p)
    return D, mu * mu * np.sum(D * D, axis=(-2, -1))


def metric_trace(D, p):
    """``g^ij D_ij = lam^-2 sum_i D_ii``."""
    mu, _ = inverse_metric_factor(p)
    return mu * np.trace(D, axis1=-2, axis2=-1)
