from __future__ import annotations

import math

import numpy as np
import pytest

from fracprop.errors import DegenerateGrid
from fracprop.fracops import (
    GWeight,
    SampledPath,
    TimeGrid,
    caputo_l1,
    equation_residual,
    l1_weights,
    rl_integral,
    semigroup_defect,
    startup_skip,
)
from fracprop.mlf import RayPoint, ml_eval, ml_ray, ml_ray_batch


def path(h: float, f, t_end: float = 1.0) -> SampledPath:
    return SampledPath.from_function(TimeGrid.covering(t_end, h), f)


def test_grid_validation():
    with pytest.raises(DegenerateGrid):
        TimeGrid(0.1, 1)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 10)
    g = TimeGrid.covering(1.0, 1e-3)
    assert g.n == 1001 and abs(g.t_end - 1.0) < 1e-12


def test_sampled_path_checks():
    g = TimeGrid(0.1, 5)
    with pytest.raises(ValueError):
        SampledPath(g, np.ones(4))
    with pytest.raises(ValueError):
        SampledPath(g, np.array([1, 2, np.nan, 4, 5]))
    u = SampledPath(g, np.arange(5.0))
    assert np.allclose((u + 2 * u).values, 3 * np.arange(5.0))


def test_gweight():
    g = GWeight(0.5)
    assert g(1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        GWeight(0.0)


# {{{ Riemann-Liouville integral


def test_rl_order_one_is_ordinary_integral():
    u = path(1e-3, np.ones_like)
    out = rl_integral(1.0, u)
    assert np.max(np.abs(out.values - u.grid.nodes)) < 1e-8


def test_rl_half_twice_is_full_integral():
    h = 1e-3
    u = path(h, np.ones_like)
    twice = rl_integral(0.5, rl_integral(0.5, u))
    once = rl_integral(1.0, u)
    assert np.max(np.abs(twice.values - once.values)) < 2 * h


def test_rl_closed_form_on_linear_data():
    u = path(1e-3, lambda t: t)
    t = u.grid.nodes
    ref = t**1.5 / math.gamma(2.5)
    assert np.max(np.abs(rl_integral(0.5, u).values - ref)) < 1e-12


def test_rl_rejects_nonpositive_order():
    with pytest.raises(ValueError):
        rl_integral(0.0, path(0.1, np.ones_like))


# }}}


# {{{ L1 Caputo


def test_l1_weights_monotone():
    b = l1_weights(0.4, 100000)
    assert b[0] == 1.0
    assert np.all(b > 0) and np.all(np.diff(b) < 0)


def test_caputo_kills_constants():
    for alpha in (0.1, 0.5, 0.9):
        d = caputo_l1(alpha, path(1e-2, lambda t: np.full(t.shape, 3.7 - 2j)))
        assert math.isnan(d.values[0].real)
        assert np.all(d.values[1:] == 0)


def test_caputo_of_linear_function():
    u = path(1e-3, lambda t: t)
    t = u.grid.nodes[1:]
    d = caputo_l1(0.5, u).values[1:]
    assert np.max(np.abs(d - t**0.5 / math.gamma(1.5))) < 1e-12


def test_caputo_linearity():
    g = TimeGrid(1e-2, 200)
    rng = np.random.default_rng(0)
    u = SampledPath(g, rng.normal(size=200) + 1j * rng.normal(size=200))
    v = SampledPath(g, rng.normal(size=200))
    a, b = 2.0 - 1j, -0.5
    lhs = caputo_l1(0.6, a * u + b * v).values[1:]
    rhs = (a * caputo_l1(0.6, u).values + b * caputo_l1(0.6, v).values)[1:]
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_caputo_rejects_order_one():
    with pytest.raises(ValueError):
        caputo_l1(1.0, path(0.1, np.ones_like))


def test_caputo_convergence_order_on_square():
    for alpha in (0.3, 0.5, 0.7):
        errs = []
        for h in (1e-2, 5e-3, 2.5e-3):
            u = path(h, lambda t: t * t)
            t = u.grid.nodes[1:]
            exact = 2 * t ** (2 - alpha) / math.gamma(3 - alpha)
            errs.append(np.max(np.abs(caputo_l1(alpha, u).values[1:] - exact)))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(rates - (2 - alpha)) <= 0.2), rates


def test_caputo_of_mittag_leffler_solution():
    # u = E_1/2(-t^1/2) solves D^1/2 u = -u
    errs = []
    for h in (2e-3, 1e-3):
        u = path(h, lambda t: np.array([ml_eval(0.5, -math.sqrt(s)).value for s in t]))
        k = startup_skip(u.grid.n)
        d = caputo_l1(0.5, u).values
        errs.append(np.max(np.abs(d[k:] + u.values[k:])))
    assert errs[1] < errs[0] < 0.05
    assert math.log2(errs[0] / errs[1]) >= 1.3


# }}}


# {{{ residual oracle


def test_residual_exponential_first_order():
    omega = 2.0
    res = [equation_residual(1.0, omega, path(h, lambda t: np.exp(-1j * omega * t))) for h in (2e-3, 1e-3)]
    assert res[1] < res[0] < 1e-2
    assert abs(math.log2(res[0] / res[1]) - 1.0) < 0.05


def _ray_path(alpha: float, h: float) -> SampledPath:
    # E_alpha((-i t)^alpha) depends on t only through t^alpha
    return path(h, lambda t: ml_ray_batch(alpha, 1.0, t**alpha)[0])


def test_ray_path_matches_pointwise():
    u = _ray_path(0.5, 1e-2)
    for k in (0, 7, 100):
        assert abs(u.values[k] - ml_ray(RayPoint(0.5, u.grid.nodes[k], 1.0))) < 1e-12


def test_residual_of_ray_solution():
    r1 = equation_residual(0.5, 1.0, _ray_path(0.5, 1e-3))
    r2 = equation_residual(0.5, 1.0, _ray_path(0.5, 5e-4))
    assert r1 < 0.05
    assert math.log2(r1 / r2) >= 1.3


def test_residual_detects_perturbation():
    u = _ray_path(0.5, 1e-3)
    vals = u.values.copy()
    vals[500] += 0.1
    assert equation_residual(0.5, 1.0, SampledPath(u.grid, vals)) >= 0.1 * (1 - 1e-9)


def test_residual_needs_nodes():
    with pytest.raises(DegenerateGrid):
        equation_residual(0.5, 1.0, SampledPath(TimeGrid(0.1, 3), np.ones(3)))


def test_startup_skip():
    assert startup_skip(2) == 1
    assert startup_skip(1001) == 101


# }}}


# {{{ semigroup law


def test_semigroup_half_half_on_constant():
    d1 = semigroup_defect(0.5, 0.5, path(1e-3, np.ones_like))
    d2 = semigroup_defect(0.5, 0.5, path(5e-4, np.ones_like))
    assert d1 < 5e-3
    assert 1.9 <= d1 / d2 <= 2.1


def test_semigroup_integer_orders():
    assert semigroup_defect(1.0, 1.0, path(1e-3, lambda t: t)) < 1e-6


def test_semigroup_sine_halves():
    d1 = semigroup_defect(0.25, 0.75, path(1e-3, np.sin))
    d2 = semigroup_defect(0.25, 0.75, path(5e-4, np.sin))
    assert d1 / d2 >= 2.0


def test_semigroup_rejects_bad_orders():
    with pytest.raises(ValueError):
        semigroup_defect(0.0, 0.5, path(0.1, np.ones_like))


# }}}
