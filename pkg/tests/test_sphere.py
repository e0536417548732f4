import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from levylab.errors import InvalidArgument
from levylab.sets import CapSet, WholeSphere, hemisphere
from levylab.sphere import (
    CURVE_HEADER, ConcentrationCurve, adaptive_simpson, cap_alpha_exact, check_mask_lipschitz,
    check_quadratic_lipschitz, chordal_to_geodesic, empirical_alpha, empirical_curve, exact_curve,
    geodesic_distance, geodesic_to_chordal, levy_bound, levy_curve, mask_norm_functional,
    quadratic_functional, sample_uniform,
)


def cap_oracle(n, eps):
    # measure of {x_1 >= sin eps} on S^n via the regularized incomplete beta function
    return 0.5 * special.betainc(n / 2, 0.5, math.cos(eps) ** 2)


def unit_rows(rng, m, d, complex_=False):
    X = rng.standard_normal((m, d))
    if complex_:
        X = X + 1j * rng.standard_normal((m, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


# sampling

def test_dimension_one_samples_are_signs():
    X = sample_uniform(1, 500, seed=3)
    assert set(np.unique(X)) <= {-1.0, 1.0}


@pytest.mark.parametrize("field", ["real", "complex"])
@pytest.mark.parametrize("d", [2, 7, 50])
def test_samples_have_unit_norm(d, field):
    X = sample_uniform(d, 3000, seed=11, field=field)
    assert X.shape == (3000, d)
    assert np.iscomplexobj(X) == (field == "complex")
    assert np.max(np.abs(np.linalg.norm(X, axis=1) - 1)) < 1e-12


def test_first_coordinate_mean_is_centred():
    m = 10**5
    X = sample_uniform(50, m, seed=5)
    mean = X[:, 0].mean()
    assert abs(mean) <= 3 / math.sqrt(m)
    # sign-flip resampling: the observed mean is not extreme among random flips
    rng = np.random.default_rng(0)
    flips = np.array([(X[:, 0] * rng.choice([-1, 1], m)).mean() for _ in range(50)])
    assert abs(mean) <= 3 * flips.std() + 1e-12


def test_sampling_is_independent_of_thread_count(monkeypatch):
    monkeypatch.setenv("LEVYLAB_THREADS", "1")
    a = sample_uniform(9, 10000, seed=42)
    monkeypatch.setenv("LEVYLAB_THREADS", "4")
    b = sample_uniform(9, 10000, seed=42)
    assert np.array_equal(a, b)


def test_sampling_prefix_stable():
    # a longer run extends a shorter one with the same seed
    a = sample_uniform(4, 5000, seed=1)
    b = sample_uniform(4, 9000, seed=1)
    assert np.array_equal(a, b[:5000])


# distances

def test_geodesic_examples():
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert geodesic_distance(e1, e1) == 0.0
    assert geodesic_distance(e1, -e1) == pytest.approx(math.pi, abs=1e-15)
    assert geodesic_distance(e1, e2) == pytest.approx(math.pi / 2, abs=1e-15)


def test_geodesic_clamps_rounding():
    x = np.array([1.0, 1e-17])
    assert geodesic_distance(x, x * (1 + 1e-15)) == 0.0


def test_triangle_inequality(rng):
    X, Y, Z = (unit_rows(rng, 2000, 6) for _ in range(3))
    dxy, dyz, dxz = geodesic_distance(X, Y), geodesic_distance(Y, Z), geodesic_distance(X, Z)
    assert np.all(dxz <= dxy + dyz + 1e-10)


def test_complex_geodesic_uses_real_part(rng):
    x = unit_rows(rng, 1, 4, complex_=True)[0]
    assert geodesic_distance(x, 1j * x) == pytest.approx(math.pi / 2, abs=1e-12)


@given(st.floats(0, math.pi))
def test_chordal_geodesic_roundtrip(theta):
    assert chordal_to_geodesic(geodesic_to_chordal(theta)) == pytest.approx(theta, abs=1e-7)


# Levy bound

def test_levy_bound_examples():
    assert levy_bound(17, 0.0) == pytest.approx(0.626657, abs=1e-6)
    assert levy_bound(2, 1.0) == pytest.approx(math.sqrt(math.pi / 8) / math.e, rel=1e-14)
    assert levy_bound(2, 1.0) == pytest.approx(0.23053, abs=1e-5)


def test_levy_bound_strictly_decreasing():
    eps = np.linspace(0, 1.5, 31)
    assert np.all(np.diff(levy_bound(10, eps)) < 0)
    assert np.all(np.diff([levy_bound(n, 0.3) for n in range(1, 50)]) < 0)


def test_levy_bound_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        levy_bound(0, 0.1)
    with pytest.raises(InvalidArgument):
        levy_bound(3, -0.1)


# quadrature

def test_adaptive_simpson_against_quad():
    f = lambda t: np.sin(t) ** 37
    got = adaptive_simpson(f, 0.0, 1.3)
    want, _ = integrate.quad(lambda t: math.sin(t) ** 37, 0, 1.3, epsabs=1e-14, epsrel=1e-13)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_cap_alpha_half_at_zero():
    for n in (1, 2, 3, 10, 400):
        assert cap_alpha_exact(n, 0.0) == 0.5


def test_cap_alpha_s2_closed_form():
    eps = np.linspace(0, math.pi / 2, 100)
    assert np.max(np.abs(cap_alpha_exact(2, eps) - (1 - np.sin(eps)) / 2)) < 1e-9
    assert cap_alpha_exact(2, 0.3) == pytest.approx(0.35224, abs=1e-5)


@pytest.mark.parametrize("n", [1, 3, 5, 12, 60, 250])
def test_cap_alpha_matches_beta_oracle(n):
    for eps in (0.01, 0.2, 0.7, 1.4):
        assert cap_alpha_exact(n, eps) == pytest.approx(cap_oracle(n, eps), rel=1e-8, abs=1e-13)


def test_cap_alpha_monotone():
    eps = np.linspace(0, math.pi / 2, 60)
    vals = np.array([cap_alpha_exact(n, eps) for n in range(1, 80)])
    assert np.all(np.diff(vals, axis=1) <= 1e-9)
    assert np.all(np.diff(vals[:, 1:], axis=0) <= 1e-9)


def test_cap_alpha_domain():
    with pytest.raises(InvalidArgument):
        cap_alpha_exact(3, 2.0)
    with pytest.raises(InvalidArgument):
        cap_alpha_exact(0, 0.1)


def test_levy_domination_sample():
    eps = np.arange(1, 31) * 0.05
    for n in (2, 3, 10, 57, 200, 400):
        assert np.all(cap_alpha_exact(n + 1, eps) <= levy_bound(n, eps))


# empirical estimates

def test_hemisphere_s2_matches_closed_form():
    res = empirical_alpha(hemisphere(3), 3, 0.3, 10**5, seed=2)
    want = (1 - math.sin(0.3)) / 2
    assert abs(res.alpha - want) <= 3 * res.stderr
    assert res.lower_bound


def test_whole_sphere_alpha_zero():
    res = empirical_alpha(WholeSphere(), 5, 0.1, 1000, seed=0)
    assert res.alpha == 0.0 and res.mu_set == 1.0


@pytest.mark.parametrize("radius", [1.2, 1.4, math.pi / 2, 1.8])
def test_half_measure_property(radius):
    d, eps = 20, 0.2
    center = np.zeros(d)
    center[0] = 1.0
    res = empirical_alpha(CapSet(center, radius), d, eps, 20000, seed=4)
    if res.mu_set > cap_alpha_exact(d - 1, eps) + 3 * res.stderr_set:
        assert res.mu_neighborhood > 0.5


def test_empirical_converges_like_root_m():
    d, eps = 6, 0.25
    want = cap_alpha_exact(d - 1, eps)
    errs = []
    for m in (10**3, 10**4, 10**5):
        res = empirical_alpha(hemisphere(d), d, eps, m, seed=9)
        assert abs(res.alpha - want) <= 4 * res.stderr
        errs.append(abs(res.alpha - want) * math.sqrt(m))
    # scaled error stays O(1)
    assert max(errs) < 4 * math.sqrt(0.25)


def test_chordal_metric_option():
    eps = 0.3
    res = empirical_alpha(hemisphere(3), 3, eps, 50000, seed=1, metric="chordal")
    want = (1 - math.sin(chordal_to_geodesic(eps))) / 2
    assert abs(res.alpha - want) <= 3 * res.stderr


# functionals

def test_quadratic_functional_examples(rng):
    X = unit_rows(rng, 100, 8, complex_=True)
    assert np.allclose(quadratic_functional(np.eye(8), X), 1.0, atol=1e-14)
    assert np.all(quadratic_functional(np.zeros((8, 8)), X) == 0)


def test_mask_norm_examples(rng):
    f = unit_rows(rng, 1, 9)[0]
    assert mask_norm_functional(range(9), f) == pytest.approx(1.0, abs=1e-14)
    assert mask_norm_functional([], f) == 0.0


def test_quadratic_lipschitz(rng):
    T = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
    X, Y = unit_rows(rng, 1000, 30, True), unit_rows(rng, 1000, 30, True)
    chk = check_quadratic_lipschitz(T, X, Y)
    assert chk.violations == 0 and chk.constant == pytest.approx(2 * np.linalg.norm(T, 2))


def test_mask_lipschitz_near_pairs(rng):
    X = unit_rows(rng, 1000, 12)
    Y = X + 1e-3 * rng.standard_normal(X.shape)
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    assert check_mask_lipschitz([0, 3, 5], X, Y).violations == 0


# curves

def test_curve_csv_roundtrip():
    c = empirical_curve(4, np.linspace(0, 1, 5), 2000, seed=3)
    text = c.to_csv()
    assert text.splitlines()[0] == ",".join(CURVE_HEADER)
    assert ConcentrationCurve.from_csv(text) == c
    assert ConcentrationCurve.from_json(c.to_json()) == c


def test_exact_and_levy_curves():
    grid = np.linspace(0, 1.5, 31)
    ex, lv = exact_curve(11, grid), levy_curve(10, grid)
    assert ex.alpha[0] == 0.5
    assert all(a <= b for a, b in zip(ex.alpha, lv.alpha))
    assert ConcentrationCurve.from_csv(ex.to_csv()) == ex


def test_curve_validation():
    with pytest.raises(InvalidArgument):
        ConcentrationCurve((0.0, 0.1), (0.5, 0.6), "exact-cap", 3)
    with pytest.raises(InvalidArgument):
        ConcentrationCurve((0.0,), (0.4,), "exact-cap", 3)
    with pytest.raises(InvalidArgument):
        ConcentrationCurve((0.0,), (0.5,), "empirical", 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 300), st.floats(0, math.pi / 2))
def test_cap_alpha_in_range(n, eps):
    v = cap_alpha_exact(n, eps)
    assert 0 <= v <= 0.5
