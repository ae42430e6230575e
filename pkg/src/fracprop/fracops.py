"""Discrete fractional calculus on uniform time grids.

Riemann-Liouville integrals use the product-trapezoidal rule (exact for
piecewise linear data), Caputo derivatives the L1 scheme.  Both are fixed
linear convolution stencils, which is what makes them usable as an
independent residual oracle for candidate solutions of
``D^alpha u = (-i)^alpha omega u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracprop.errors import DegenerateGrid
from fracprop.gamma import gamma
from fracprop.mlf import FractionalOrder, as_order


@dataclass(frozen=True)
class TimeGrid:
    """Nodes ``t_k = k h`` for ``k = 0, ..., n - 1``."""

    h: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"step must be positive, got {self.h!r}")
        if int(self.n) != self.n or self.n < 2:
            raise DegenerateGrid(f"a time grid needs at least 2 nodes, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def covering(cls, t_end: float, h: float) -> TimeGrid:
        """Grid with step ``h`` on ``[0, t_end]``; ``t_end / h`` is rounded."""
        return cls(h, int(round(t_end / h)) + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @property
    def t_end(self) -> float:
        return (self.n - 1) * self.h


@dataclass(frozen=True)
class SampledPath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        # node 0 may be undefined (Caputo output); everything else must be finite
        if not np.all(np.isfinite(values[1:])) or np.isinf(values[0]):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TimeGrid, f: Callable[[np.ndarray], np.ndarray]) -> SampledPath:
        return cls(grid, np.broadcast_to(f(grid.nodes), (grid.n,)))

    def __add__(self, other: SampledPath) -> SampledPath:
        _check_same_grid(self, other)
        return SampledPath(self.grid, self.values + other.values)

    def __mul__(self, c: complex) -> SampledPath:
        return SampledPath(self.grid, c * self.values)

    __rmul__ = __mul__


def _check_same_grid(u: SampledPath, v: SampledPath) -> None:
    if u.grid != v.grid:
        raise ValueError("paths live on different grids")


@dataclass(frozen=True)
class GWeight:
    """The power kernel ``g_alpha(t) = t^(alpha - 1) / Gamma(alpha)``."""

    alpha: float

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (self.alpha - 1.0) / gamma(self.alpha)


# {{{ weights


def _second_difference_powers(beta: float, m: np.ndarray) -> np.ndarray:
    """``(m+1)^beta - 2 m^beta + (m-1)^beta`` for ``m >= 1`` without the
    catastrophic cancellation of the naive formula."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    one = m == 1.0
    out[one] = 2.0**beta - 2.0
    mm = m[~one]
    out[~one] = mm**beta * (
        np.expm1(beta * np.log1p(1.0 / mm)) + np.expm1(beta * np.log1p(-1.0 / mm))
    )
    return out


def l1_weights(alpha: float, n: int) -> np.ndarray:
    """L1 weights ``b_j = (j+1)^(1-alpha) - j^(1-alpha)`` for ``j < n``."""
    j = np.arange(n, dtype=float)
    b = np.empty(n)
    b[0] = 1.0
    jj = j[1:]
    b[1:] = jj ** (1.0 - alpha) * np.expm1((1.0 - alpha) * np.log1p(1.0 / jj))
    return b


def _trapezoid_weights(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Product-trapezoid weights: the start weight ``a_{0,k}`` for each node
    ``k`` and the convolution weights ``c_m`` for interior samples."""
    beta = alpha + 1.0
    k = np.arange(n, dtype=float)
    start = np.zeros(n)
    if n > 1:
        start[1] = alpha
    kk = k[2:]
    # (k-1)^beta - (k - beta) k^alpha
    start[2:] = kk**beta * (np.expm1(beta * np.log1p(-1.0 / kk)) + beta / kk)

    c = np.empty(n)
    c[0] = 1.0
    if n > 1:
        c[1:] = _second_difference_powers(beta, k[1:])
    return start, c


# }}}


def rl_integral(alpha: float, u: SampledPath) -> SampledPath:
    """Riemann-Liouville integral ``J^alpha u = g_alpha * u`` at every node.

    Product-trapezoidal convolution quadrature: ``u`` is replaced by its
    piecewise linear interpolant and integrated against ``g_alpha`` exactly.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    n, h = u.grid.n, u.grid.h
    start, c = _trapezoid_weights(alpha, n)
    vals = u.values
    out = np.zeros(n, dtype=complex)
    out[1:] = start[1:] * vals[0] + np.convolve(c, vals[1:])[: n - 1]
    out *= h**alpha / gamma(alpha + 2.0)
    return SampledPath(u.grid, out)


def caputo_l1(order: FractionalOrder | float, u: SampledPath) -> SampledPath:
    """L1 approximation of the Caputo derivative; node 0 is NaN.

    ``D^alpha u(t_k) ~ h^(-alpha) / Gamma(2 - alpha)
    * sum_{j<k} b_j (u_{k-j} - u_{k-j-1})``, order ``2 - alpha`` for
    smooth ``u``.
    """
    alpha = as_order(order).alpha
    if alpha >= 1.0:
        raise ValueError("the L1 scheme needs 0 < alpha < 1")
    n, h = u.grid.n, u.grid.h
    if n < 2:
        raise DegenerateGrid("L1 scheme needs at least two nodes")
    b = l1_weights(alpha, n)
    du = np.diff(u.values)
    out = np.empty(n, dtype=complex)
    out[0] = complex(math.nan, math.nan)
    out[1:] = np.convolve(b[: n - 1], du)[: n - 1] * (h ** (-alpha) / gamma(2.0 - alpha))
    return SampledPath(u.grid, out)


def startup_skip(n: int) -> int:
    """Number of leading nodes excluded from residual certification."""
    return max(1, math.ceil(n / 10))


def equation_residual(
    order: FractionalOrder | float, omega: complex, u: SampledPath
) -> float:
    """Max over certified nodes of ``|D^alpha u - (-i)^alpha omega u|``.

    The first ``ceil(n / 10)`` nodes are skipped: near ``t = 0`` solutions
    behave like ``t^alpha`` and the L1 consistency error is not small there.
    At ``alpha = 1`` the derivative is the backward difference.
    """
    order = as_order(order)
    n = u.grid.n
    if n < 4:
        raise DegenerateGrid(f"residual needs at least 4 nodes, got {n}")
    if order.alpha == 1.0:
        deriv = np.concatenate([[np.nan], np.diff(u.values) / u.grid.h])
    else:
        deriv = caputo_l1(order, u).values
    res = deriv - order.phase * omega * u.values
    return float(np.max(np.abs(res[startup_skip(n):])))


def semigroup_defect(alpha: float, beta: float, u: SampledPath) -> float:
    """``max_k |J^(alpha+beta) u - J^alpha J^beta u|`` over all nodes."""
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("orders must be positive")
    lhs = rl_integral(alpha + beta, u).values
    rhs = rl_integral(alpha, rl_integral(beta, u)).values
    return float(np.max(np.abs(lhs - rhs)))
