import numpy as np
import pytest

from hypflow.harmonic import BoundaryData, ball_extend_3d, harmonic_extend, spectral_dirichlet_energy
from hypflow.quadrature import (
    DiskRule,
    GradedDiskRule,
    NonFiniteIntegrandError,
    SphereRule,
    deformation_energy,
    disk_rule_for,
    integrate_disk,
    l2_norms,
    l4_norm_euclidean,
    l4_norm_hyperbolic,
    norm_report,
    truncated_energy_growth,
)

X = harmonic_extend(BoundaryData(0.0, [1.0], [0.0]))
SQ = harmonic_extend(BoundaryData.from_modes(cos={2: 1.0}))
CONST = harmonic_extend(BoundaryData(4.0))


def polar_moment(a, b):
    """Exact int_D r^a cos(b theta) dA."""
    return 2 * np.pi / (a + 2) if b == 0 else 0.0


@pytest.mark.parametrize("n_r,n_theta", [(3, 5), (6, 12), (10, 7)])
def test_disk_rule_exactness(n_r, n_theta):
    rule = DiskRule(n_r, n_theta)
    for a in range(0, 2 * n_r):
        for b in range(0, n_theta):
            f = lambda p: np.hypot(p[:, 0], p[:, 1]) ** a * np.cos(b * np.arctan2(p[:, 1], p[:, 0]))  # noqa: E731
            assert abs(integrate_disk(f, rule) - polar_moment(a, b)) <= 1e-13


def test_disk_rule_weights():
    pts, w = DiskRule(12, 20).nodes()
    assert np.all(w > 0)
    assert abs(w.sum() - np.pi) <= 1e-13
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) < 1)


def test_integrate_disk_examples():
    rule = DiskRule(8, 8)
    assert integrate_disk(lambda p: np.ones(len(p)), rule) == pytest.approx(np.pi, abs=1e-13)
    r2 = lambda p: np.sum(p * p, -1)  # noqa: E731
    assert integrate_disk(lambda p: (1 - r2(p)) ** 2 / 4, rule) == pytest.approx(np.pi / 12, abs=1e-14)


def test_integrate_disk_rejects_non_finite():
    with pytest.raises(NonFiniteIntegrandError):
        integrate_disk(lambda p: 1 / (1 - np.sum(p * p, -1)) * np.nan)


def test_l2_norm_examples():
    for pot, want in [(X, np.pi), (SQ, 2 * np.pi)]:
        e, h = l2_norms(pot)
        assert e == pytest.approx(want, rel=1e-13)
        assert h == pytest.approx(want, rel=1e-13)
    assert l2_norms(CONST) == (0.0, 0.0)


def test_conformal_invariance(rng):
    for _ in range(20):
        data = BoundaryData.random(int(rng.integers(1, 17)), rng)
        pot = harmonic_extend(data)
        e, h = l2_norms(pot)
        oracle = spectral_dirichlet_energy(data)
        assert abs(e - h) <= 1e-12 * abs(e)
        assert abs(e - oracle) <= 1e-12 * oracle


def test_l4_examples():
    assert l4_norm_hyperbolic(X) == pytest.approx(np.pi / 12, rel=1e-13)
    assert l4_norm_hyperbolic(CONST) == 0.0


def test_l4_domination(rng):
    for _ in range(10):
        pot = harmonic_extend(BoundaryData.random(6, rng))
        assert l4_norm_hyperbolic(pot) <= 0.25 * l4_norm_euclidean(pot)


def test_doubling_is_stable_past_threshold(rng):
    for _ in range(5):
        pot = harmonic_extend(BoundaryData.random(8, rng))
        rule = disk_rule_for(pot.order)
        for f in (lambda r: l2_norms(pot, r)[1], lambda r: l4_norm_hyperbolic(pot, r)):
            a, b = f(rule), f(rule.doubled())
            assert abs(a - b) <= 1e-12 * abs(b)


def test_deformation_energy_examples():
    assert deformation_energy(X).value == pytest.approx(np.pi, rel=1e-6)
    assert deformation_energy(SQ).value == pytest.approx(2 * np.pi, rel=1e-6)
    assert deformation_energy(CONST).value == 0.0


def test_deformation_energy_bochner(rng):
    for _ in range(3):
        data = BoundaryData.random(5, rng)
        res = deformation_energy(harmonic_extend(data))
        assert res.converged
        assert res.value == pytest.approx(spectral_dirichlet_energy(data), rel=1e-6)


def test_deformation_rim_cut_is_small():
    full = deformation_energy(X).value
    cut = deformation_energy(X, GradedDiskRule(order=5, n_theta=18, r_cut=1 - 1e-6)).value
    assert cut < full
    assert (full - cut) / full <= 1e-5


def test_norm_report_schema():
    rep = norm_report(SQ)
    assert list(rep.columns) == ["name", "euclidean", "hyperbolic", "spectral_oracle", "rel_err"]
    assert rep.passed
    assert rep.to_csv().splitlines()[0] == "name,euclidean,hyperbolic,spectral_oracle,rel_err"


def test_growth_two_dimensions():
    radii = np.arange(1, 41) * 0.25
    curve = truncated_energy_growth(X, radii)
    np.testing.assert_allclose(curve.energy, np.pi * np.tanh(radii / 2) ** 2, rtol=1e-12)
    assert np.all(np.diff(curve.energy) >= 0)
    assert np.all(curve.increments >= 0)


def test_growth_constant_is_zero():
    radii = np.linspace(0.5, 10, 20)
    assert np.all(truncated_energy_growth(CONST, radii).energy == 0.0)
    ball = ball_extend_3d(lambda xi: np.full(xi.shape[:-1], 2.0))
    assert np.all(truncated_energy_growth(ball, radii).energy == 0.0)


def test_growth_three_dimensions(growth3):
    curve, fine, _ = growth3
    s, _ = curve.fit(4.0, 10.0)
    s2, _ = fine.fit(4.0, 10.0)
    assert s > 0
    assert abs(s2 - s) < 0.01 * abs(s)
    assert np.all(np.diff(curve.energy) > 0)


def test_growth_rejects_bad_radii():
    with pytest.raises(ValueError):
        truncated_energy_growth(X, [1.0, 0.5])


def test_growth_rows_schema():
    curve = truncated_energy_growth(X, [1.0, 2.0, 3.0])
    curve.fit(1.0, 3.0)
    row = next(curve.rows())
    assert list(row) == ["R", "E", "delta_E", "fit_slope", "fit_residual"]
