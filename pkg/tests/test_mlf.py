from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest

from fracprop.errors import NonConvergence, PoleProximity
from fracprop.mlf import (
    FractionalOrder,
    Method,
    RayPoint,
    ml_eval,
    ml_integral,
    ml_kernel,
    ml_ray,
    ml_ray_batch,
    ml_ray_value,
    ml_series,
    ml_sup_sweep,
    ml_sup_sweep_detail,
    ray_explicit_term,
    series_radius,
)


def erfc_identity(z: complex) -> complex:
    """E_{1/2}(z) = exp(z^2) erfc(-z)."""
    mpmath.mp.dps = 40
    return complex(mpmath.exp(z * z) * mpmath.erfc(-z))


def ml_reference(alpha: float, z: complex) -> complex:
    """Plain partial sums in 80-digit arithmetic, past the largest term."""
    mpmath.mp.dps = 80
    # alpha * k + 1 must not round in double precision: terms near the peak
    # are huge and the rounding would swamp the cancelling sum
    a, z = mpmath.mpf(alpha), mpmath.mpc(z)
    total, k, small = mpmath.mpc(0), 0, 0
    while small < 5:
        term = z**k / mpmath.gamma(a * k + 1)
        total += term
        small = small + 1 if abs(term) < mpmath.mpf(10) ** -40 * max(1, abs(total)) else 0
        k += 1
    return complex(total)


# {{{ domain types


def test_order_validation():
    for bad in (0.0, -0.5, 1.5, math.nan):
        with pytest.raises(ValueError):
            FractionalOrder(bad)
    FractionalOrder(1.0)
    FractionalOrder(1e-3)


def test_order_phase():
    for alpha in (0.1, 0.3, 0.5, 0.77, 1.0):
        ph = FractionalOrder(alpha).phase
        assert abs(abs(ph) - 1.0) < 1e-15
        assert abs(cmath.phase(ph) + alpha * math.pi / 2) < 1e-15


def test_ray_point_argument():
    p = RayPoint(FractionalOrder(0.6), 2.0, 3.0)
    assert abs(cmath.phase(p.z) + 0.3 * math.pi) < 1e-15
    assert abs(abs(p.z) - 2.0**0.6 * 3.0) < 1e-14
    with pytest.raises(ValueError):
        RayPoint(0.5, -1.0, 1.0)
    with pytest.raises(ValueError):
        RayPoint(0.5, 1.0, -1.0)


# }}}


# {{{ series


def test_series_examples():
    v = ml_series(1.0, 1.0, 1e-12)
    assert v.method is Method.SERIES
    assert abs(v.value - math.e) < 1e-12
    assert ml_series(0.5, 0.0).value == 1.0
    v = ml_series(0.5, -1.0, 1e-12)
    assert abs(v.value - 0.427584) < 1e-6
    assert abs(v.value - erfc_identity(-1.0)) < 1e-13


def test_series_error_estimate_covers_truth():
    for alpha, z in [(0.5, 2 - 1j), (0.3, 3j), (0.8, -4.0), (0.9, 1.5 + 1.5j)]:
        v = ml_series(alpha, z, 1e-12)
        assert abs(v.value - ml_reference(alpha, z)) <= v.err_est + 1e-15


def test_series_nonconvergence_cap():
    with pytest.raises(NonConvergence):
        ml_series(0.5, 4.0, 1e-12, max_terms=10)


def test_series_extended_precision_for_large_arguments():
    # |z| = 10 at alpha 0.3 cancels catastrophically in double precision
    z = 10 * FractionalOrder(0.3).phase
    v = ml_series(0.3, z, 1e-12, max_terms=100000)
    assert abs(v.value - ml_integral(0.3, z, 1e-12).value) < 1e-9


# }}}


# {{{ kernel


def test_kernel_pole_example():
    with pytest.raises(PoleProximity):
        ml_kernel(0.5, 1.0, 1j)


def test_kernel_direct_value():
    z = cmath.exp(-1j * math.pi / 4) * 3
    mpmath.mp.dps = 30
    a = mpmath.mpf("0.5")
    ref = -mpmath.exp(-(2 ** (1 / a))) * z * mpmath.sin(mpmath.pi * a) / (
        mpmath.pi * a * (4 - 4 * z * mpmath.cos(mpmath.pi * a) + z * z)
    )
    assert abs(ml_kernel(0.5, 2.0, z) - complex(ref)) < 1e-15


def test_kernel_bound_small_alpha():
    # for alpha < 1/2 and omega >= 1/alpha the kernel on the ray is bounded by
    # exp(-r^(1/alpha)) / (pi A (1 - a^2 A)), A = cos(pi alpha), a = cos(pi alpha / 2)
    for alpha in (0.2, 0.3, 0.45):
        A, a = math.cos(math.pi * alpha), math.cos(math.pi * alpha / 2)
        ph = FractionalOrder(alpha).phase
        for omega in np.geomspace(1 / alpha, 1e4, 15):
            for r in np.geomspace(1e-3, 5.0, 40):
                k = ml_kernel(alpha, r, ph * omega)
                assert abs(k) <= math.exp(-(r ** (1 / alpha))) / (math.pi * A * (1 - a * a * A)) * (1 + 1e-12)


def test_kernel_bound_large_alpha():
    for alpha in (0.5, 0.7, 0.9, 0.99):
        ph = FractionalOrder(alpha).phase
        for omega in np.geomspace(2.0, 1e4, 15):
            for r in np.geomspace(1e-3, 5.0, 40):
                k = ml_kernel(alpha, r, ph * omega)
                assert abs(k) <= math.exp(-(r ** (1 / alpha))) / math.pi * (1 + 1e-12)


def test_pole_guard_never_fires_on_ray():
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9, 0.999):
        omegas = np.concatenate([[0.0], np.geomspace(1e-6, 1e7, 300)])
        for t in (0.5, 1.0, 3.0):
            vals, errs, _ = ml_ray_batch(alpha, t, omegas, 1e-12)
            assert np.all(np.isfinite(vals)) and np.all(np.isfinite(errs))


# }}}


# {{{ integral and dispatch


def test_integral_matches_series_moderate():
    z = cmath.exp(-1j * math.pi / 4) * 4
    s = ml_series(0.5, z, 1e-12)
    i = ml_integral(0.5, z, 1e-12)
    assert i.method is Method.INTEGRAL
    assert abs(s.value - i.value) <= s.err_est + i.err_est + 1e-12
    assert abs(i.value - erfc_identity(z)) < 1e-12


def test_integral_bounded_on_ray():
    z = cmath.exp(-0.45j * math.pi) * 100
    v = ml_integral(0.9, z, 1e-12)
    assert abs(v.value) < 10.0


def test_integral_off_ray_matches_reference():
    for alpha, z in [(0.5, -7.0 + 2j), (0.3, 6.0 - 1j), (0.7, 8j), (0.6, -3.0 - 9j)]:
        ref = erfc_identity(z) if alpha == 0.5 else ml_reference(alpha, z)
        v = ml_integral(alpha, z, 1e-12)
        assert abs(v.value - ref) <= max(v.err_est, 1e-13 * abs(ref)) * 10


def test_integral_rejects_zero():
    with pytest.raises(ValueError):
        ml_integral(0.5, 0.0)


def test_eval_examples():
    v = ml_eval(1.0, -2j)
    assert v.method is Method.EXACT
    assert v.value == cmath.exp(-2j)
    assert abs(abs(v.value) - 1.0) < 1e-15
    assert ml_eval(0.5, 0.0).value == 1.0
    z = cmath.exp(-0.35j * math.pi) * 7
    s = ml_series(0.7, z, 1e-12)
    i = ml_integral(0.7, z, 1e-12)
    assert abs(s.value - i.value) <= s.err_est + i.err_est + 1e-9
    assert abs(ml_eval(0.7, z).value - i.value) < 1e-12


def test_eval_alpha_one_is_exp_bitwise():
    for z in (0.3, -5 + 2j, 10j, -40.0):
        assert ml_eval(1.0, z).value == cmath.exp(z)


def test_eval_identity_half_order_across_backends():
    for z in [0.5, -2.0, 3j, 4 - 4j, -6.0 + 1j, 9.0 * cmath.exp(-0.25j * math.pi)]:
        assert abs(ml_eval(0.5, z, 1e-12).value - erfc_identity(z)) < 1e-11 * max(1.0, abs(erfc_identity(z)))


def test_eval_zero_exact():
    for alpha in (0.1, 0.5, 0.9, 1.0):
        assert ml_eval(alpha, 0).value == 1.0


# }}}


# {{{ ray


def test_ray_examples():
    for alpha in (0.2, 0.5, 1.0):
        assert ml_ray(RayPoint(alpha, 0.0, 7.0)) == 1.0
    for t, w in [(1.0, 1.0), (2.5, 3.0), (10.0, 100.0)]:
        v = ml_ray(RayPoint(1.0, t, w))
        assert abs(v - cmath.exp(-1j * t * w)) < 1e-15
        assert abs(abs(v) - 1.0) < 1e-14
    v = ml_ray(RayPoint(0.5, 1.0, 1.0))
    assert abs(abs(v) - 1.0) > 0.01


def test_ray_matches_eval():
    for alpha in (0.3, 0.6, 0.9):
        for t, w in [(1.0, 0.5), (1.0, 4.0), (2.0, 30.0), (0.3, 500.0)]:
            p = RayPoint(alpha, t, w)
            a = ml_ray_value(p, 1e-12)
            b = ml_eval(alpha, p.z, 1e-12)
            # ml_eval forms z**(1/alpha) by a generic complex power, whose
            # phase carries a rounding error proportional to t omega**(1/alpha)
            phase_err = 8 * np.finfo(float).eps * t * w ** (1 / alpha) / alpha
            tol = a.err_est + b.err_est + 1e-12 * max(1, abs(b.value)) + phase_err
            assert abs(a.value - b.value) <= tol


def test_ray_batch_matches_pointwise():
    omegas = np.array([0.0, 0.1, 1.0, 5.0, 50.0, 3e3])
    vals, errs, methods = ml_ray_batch(0.6, 1.3, omegas, 1e-12)
    for w, v, e, m in zip(omegas, vals, errs, methods):
        single = ml_ray_value(RayPoint(0.6, 1.3, float(w)), 1e-12)
        assert single.value == v and single.err_est == e and single.method is m


def test_explicit_term_modulus_on_ray():
    # the exponential term has a purely imaginary exponent on the ray
    for alpha in (0.3, 0.5, 0.8):
        for w in (1.0, 17.0, 1e4):
            term = ray_explicit_term(alpha, 1.0, w)
            assert abs(abs(term) - 1 / alpha) < 1e-12
            z = RayPoint(alpha, 1.0, w).z
            assert abs(term - cmath.exp(z ** (1 / alpha)) / alpha) < 1e-14 * max(1.0, w ** (1 / alpha))


def test_continuity_in_alpha_towards_exponential():
    target = cmath.exp(-1j)
    dists = [abs(ml_ray(RayPoint(a, 1.0, 1.0)) - target) for a in (0.9, 0.99, 0.999)]
    assert dists[0] > dists[1] > dists[2]


def test_series_radius_bounds():
    for alpha in (0.1, 0.3, 0.5, 0.9, 1.0):
        r = series_radius(alpha)
        assert 0 < r <= 5.0


# }}}


# {{{ sweeps


def test_sup_sweep_alpha_one_exact():
    assert ml_sup_sweep(1.0, 1e6, 1000) == 1.0


def test_sup_sweep_stable_under_doubling():
    for alpha in (0.5, 0.8):
        a = ml_sup_sweep(alpha, 1e6, 10000)
        b = ml_sup_sweep(alpha, 2e6, 10000)
        assert math.isfinite(a) and abs(a - b) < 0.01 * a


def test_sup_sweep_monotone_tail():
    # beyond the maximizer the running sup cannot grow (up to grid resolution)
    for alpha in (0.5, 0.7, 0.99):
        _, arg = ml_sup_sweep_detail(alpha, 1e6, 10000)
        sups = [ml_sup_sweep(alpha, wmax, 10000) for wmax in (10 * arg + 10, 1e3, 1e4, 1e6)]
        for a, b in zip(sups, sups[1:]):
            assert b <= a * (1 + 1e-3)


def test_sup_sweep_small_alpha_finite():
    sup = ml_sup_sweep(0.3, 1e6, 10000)
    assert math.isfinite(sup) and sup < 10.0


# }}}
