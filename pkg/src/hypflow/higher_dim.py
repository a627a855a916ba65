"""Energy of bounded harmonic extensions over growing hyperbolic balls, n = 2 vs n = 3.

The same shell accumulation runs in both dimensions.  In the disk the
truncated energies level off at the Dirichlet energy; in the 3-ball they
keep growing roughly linearly in the hyperbolic radius.  Results are
numerical evidence consistent with the absence of L2 harmonic 1-forms on
H^3, not a proof of it; the linear growth rate is derived asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .harmonic import BallPotential3D, BoundaryData, ball_extend_3d, harmonic_extend, spectral_dirichlet_energy
from .quadrature import GrowthCurve, SphereRule, truncated_energy_growth

__all__ = ["CONVERGENT", "DIVERGENT", "INCONCLUSIVE", "Classification", "classify", "run_growth", "dichotomy_experiment", "DichotomyResult"]

CONVERGENT = "CONVERGENT"
DIVERGENT = "DIVERGENT"
INCONCLUSIVE = "INCONCLUSIVE"

ZERO_ENERGY = 1e-14
DECAY_RATE_MIN = 0.5
TAIL_REL_TOL = 1e-2
FIT_REL_TOL = 1e-2
SLOPE_SHIFT_TOL = 0.05


@dataclass
class Classification:
    label: str
    slope: float
    slope_refined: float
    slope_shift: float
    fit_residual: float
    decay_rate: float
    tail_estimate: float
    limit_estimate: float
    note: str = ""


def _decay_rate(curve: GrowthCurve, lo: float, hi: float) -> float:
    """Exponential decay rate of the per-unit-radius increments over the window."""
    widths = np.diff(np.concatenate([[0.0], curve.radii]))
    rate = curve.increments / widths
    sel = (curve.radii >= lo) & (curve.radii <= hi) & (rate > 0)
    if sel.sum() < 2:
        return np.inf
    slope = np.polyfit(curve.radii[sel], np.log(rate[sel]), 1)[0]
    return float(-slope)


def classify(curve: GrowthCurve, refined: GrowthCurve, window, tail_rel_tol=TAIL_REL_TOL, slope_shift_tol=SLOPE_SHIFT_TOL) -> Classification:
    """Label a growth curve CONVERGENT, DIVERGENT or INCONCLUSIVE.

    ``refined`` is the same curve computed with doubled quadrature.
    """
    lo, hi = window
    slope, resid = curve.fit(lo, hi)
    slope_r, _ = refined.fit(lo, hi)
    shift = abs(slope_r - slope) / abs(slope) if slope != 0 else 0.0
    e_max = float(curve.energy[-1])
    if abs(e_max) <= ZERO_ENERGY and np.all(np.abs(curve.energy) <= ZERO_ENERGY):
        return Classification(CONVERGENT, slope, slope_r, 0.0, resid, np.inf, 0.0, 0.0, "zero energy")

    kappa = _decay_rate(curve, lo, hi)
    width = curve.radii[-1] - (curve.radii[-2] if curve.radii.size > 1 else 0.0)
    last_rate = curve.increments[-1] / width
    if kappa >= DECAY_RATE_MIN:
        tail = float(last_rate / kappa)
        if curve.energy.size >= 3:
            # Aitken delta-squared on the last three partial sums
            e1, e2, e3 = curve.energy[-3:]
            d1, d2 = e2 - e1, e3 - e2
            if d2 != d1 and d2 > 0:
                tail = float(-d2 * d2 / (d2 - d1))
        label = CONVERGENT if tail <= tail_rel_tol * abs(e_max) else INCONCLUSIVE
        return Classification(label, slope, slope_r, shift, resid, kappa, tail, e_max + tail, "increments decay exponentially")

    if shift > slope_shift_tol:
        return Classification(INCONCLUSIVE, slope, slope_r, shift, resid, kappa, np.inf, np.inf, "slope moved under quadrature doubling")
    if slope > 0 and resid <= FIT_REL_TOL * abs(e_max):
        return Classification(DIVERGENT, slope, slope_r, shift, resid, kappa, np.inf, np.inf, "linear growth in hyperbolic radius (derived asymptotics)")
    return Classification(INCONCLUSIVE, slope, slope_r, shift, resid, kappa, np.inf, np.inf, "neither decaying increments nor a clean linear fit")


def _refine(pot):
    return pot.refined() if isinstance(pot, BallPotential3D) else pot


def run_growth(pot, radii, sphere: Optional[SphereRule] = None, window=None):
    """Growth curve, its doubled-quadrature twin and the classification."""
    dim = 3 if isinstance(pot, BallPotential3D) else 2
    if sphere is None:
        sphere = SphereRule(3) if dim == 3 else SphereRule(2, azimuth=max(8, 2 * pot.order + 4))
    radii = np.asarray(radii, dtype=float)
    window = window or (0.4 * radii[-1], radii[-1])
    curve = truncated_energy_growth(pot, radii, sphere)
    refined = truncated_energy_growth(_refine(pot), radii, sphere.doubled())
    return curve, refined, classify(curve, refined, window)


@dataclass
class DichotomyResult:
    curve2: GrowthCurve
    curve3: GrowthCurve
    class2: Classification
    class3: Classification
    oracle2: float
    metrics: dict = field(default_factory=dict)

    @property
    def labels(self):
        return {"n2": self.class2.label, "n3": self.class3.label}


def dichotomy_experiment(data2d: BoundaryData, data3d: Callable, R_max=10.0, shells=40, window=None, polar_order=8, azimuth=16) -> DichotomyResult:
    """Run the 2D and 3D truncated-energy experiments through one pipeline."""
    if R_max < 6 or shells < 20:
        raise ValueError("need R_max >= 6 and at least 20 shells")
    radii = R_max * np.arange(1, shells + 1) / shells
    window = window or (0.4 * R_max, R_max)
    pot2 = harmonic_extend(data2d)
    pot3 = ball_extend_3d(data3d, polar_order=polar_order, azimuth=azimuth)
    c2, _, k2 = run_growth(pot2, radii, window=window)
    c3, _, k3 = run_growth(pot3, radii, window=window)
    oracle = spectral_dirichlet_energy(data2d)
    metrics = {
        "n2_limit_oracle": oracle,
        "n2_E_Rmax": float(c2.energy[-1]),
        "n2_tail_estimate": k2.tail_estimate,
        "n2_limit_estimate": k2.limit_estimate,
        "n2_tail_past_8": oracle - float(np.interp(8.0, c2.radii, c2.energy)) if R_max >= 8 else float("nan"),
        "n3_slope": k3.slope,
        "n3_slope_refined": k3.slope_refined,
        "n3_slope_shift": k3.slope_shift,
        "n3_fit_residual": k3.fit_residual,
        "n3_E_Rmax": float(c3.energy[-1]),
    }
    return DichotomyResult(c2, c3, k2, k3, oracle, metrics)
