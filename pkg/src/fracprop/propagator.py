r"""The solution family :math:`U_\alpha(t) = W E_\alpha((-it)^\alpha a) W^*`.

``U_alpha(t) u0`` solves ``D^alpha u = (-i)^alpha A u`` with ``u(0) = u0``.
It is applied as a spectral multiplier and never assembled as a matrix.
For ``alpha = 1`` the multiplier is ``exp(-i t a)`` exactly, so the family
coincides with the unitary group ``exp(-i t A)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fracprop._parallel import ordered_map
from fracprop.errors import FracpropError
from fracprop.fracops import SampledPath, TimeGrid, equation_residual
from fracprop.mlf import DEFAULT_TOL, FractionalOrder, as_order, ml_ray_batch
from fracprop.spectral import (
    Decomposition,
    PeriodicGrid,
    SpectralModel,
    State,
    _as_state,
    apply_spectral,
)


@dataclass(frozen=True, eq=False)
class SolutionFamily:
    model: SpectralModel
    order: FractionalOrder
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", as_order(self.order))
        if not isinstance(self.model, (Decomposition, PeriodicGrid)):
            raise TypeError(f"unsupported spectral model {type(self.model).__name__}")
        if np.any(self.model.spectrum < 0.0):
            raise ValueError("spectral values must be nonnegative")

    @property
    def alpha(self) -> float:
        return self.order.alpha


def _check_time(t: float) -> float:
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    return t


def ray_multiplier(family: SolutionFamily, t: float) -> np.ndarray:
    """``E_alpha((-i t)^alpha a_j)`` for every spectral value ``a_j``."""
    t = _check_time(t)
    spec = family.model.spectrum
    # grid spectra repeat every value twice
    uniq, inverse = np.unique(spec, return_inverse=True)
    values, _, _ = ml_ray_batch(family.order, t, uniq, family.tol)
    return values[inverse]


def propagate(family: SolutionFamily, t: float, u0) -> State:
    """``U_alpha(t) u0``."""
    _as_state(u0, family.model.dim)
    return apply_spectral(family.model, ray_multiplier(family, t), u0)


def adjoint_propagate(family: SolutionFamily, t: float, u0) -> State:
    """``U_alpha(t)* u0``: the multiplier ``E_alpha((i t)^alpha a)``, which is
    the conjugate of the forward one since the series has real coefficients."""
    _as_state(u0, family.model.dim)
    return apply_spectral(family.model, np.conj(ray_multiplier(family, t)), u0)


def gram_multiplier(family: SolutionFamily, t: float) -> np.ndarray:
    """``|E_alpha((i t)^alpha a_j)|^2``, the spectral symbol of ``U U* = U* U``."""
    return np.abs(ray_multiplier(family, t)) ** 2


def unitary_reference(model: SpectralModel, t: float, u0) -> State:
    """``exp(-i t A) u0``."""
    t = _check_time(t)
    return apply_spectral(model, np.exp(-1j * (t * model.spectrum)), u0)


def free_propagate(grid: PeriodicGrid, order: FractionalOrder | float, t: float, g) -> State:
    """Fractional free particle ``D^alpha u = (-i)^alpha (-u_xx)`` on the torus."""
    return propagate(SolutionFamily(grid, as_order(order)), t, g)


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    error: float
    failure: str | None = None


def alpha_sweep(
    model: SpectralModel,
    alphas: Sequence[float],
    t: float,
    u0,
    tol: float = DEFAULT_TOL,
) -> list[SweepPoint]:
    """``||U_alpha(t) u0 - exp(-i t A) u0||`` for each ``alpha``, in input
    order.  A failing ``alpha`` yields ``error = nan`` and a message instead
    of aborting the sweep."""
    ref = unitary_reference(model, t, u0).values

    def one(alpha: float) -> SweepPoint:
        try:
            u = propagate(SolutionFamily(model, as_order(alpha), tol), t, u0).values
        except (FracpropError, ValueError) as exc:
            return SweepPoint(float(alpha), math.nan, f"{type(exc).__name__}: {exc}")
        return SweepPoint(float(alpha), float(np.linalg.norm(u - ref)))

    return ordered_map(one, alphas)


def norm_trace(family: SolutionFamily, u0, ts: Sequence[float]) -> list[tuple[float, float]]:
    """``(t, ||U_alpha(t) u0||)`` for ascending nonnegative ``ts``."""
    ts = [_check_time(t) for t in ts]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("times must be ascending")
    _as_state(u0, family.model.dim)
    return ordered_map(lambda t: (t, propagate(family, t, u0).norm), ts)


def commutation_defect(family: SolutionFamily, t: float, u0) -> float:
    """``||A U(t) u0 - U(t) A u0||`` with ``A`` applied spectrally."""
    spec = family.model.spectrum
    lhs = apply_spectral(family.model, spec, propagate(family, t, u0))
    rhs = propagate(family, t, apply_spectral(family.model, spec, u0))
    return float(np.linalg.norm(lhs.values - rhs.values))


def channel_paths(
    family: SolutionFamily, t_grid: TimeGrid, u0, *, phase_sign: int = -1
) -> list[SampledPath]:
    """Time series of every spectral coefficient of ``U_alpha(t) u0``.

    ``phase_sign=+1`` evaluates with ``(+i)^alpha`` instead, the wrong
    branch, and is only useful as a negative control.
    """
    if phase_sign not in (-1, 1):
        raise ValueError("phase_sign must be -1 or +1")
    coeffs = family.model.to_spectral(_as_state(u0, family.model.dim))
    s_base = t_grid.nodes**family.alpha

    def path(j: int) -> SampledPath:
        # E depends on t only through t^alpha a, so evaluate at unit time
        vals, _, _ = ml_ray_batch(family.order, 1.0, s_base * family.model.spectrum[j], family.tol)
        if phase_sign == 1:
            vals = np.conj(vals)
        return SampledPath(t_grid, coeffs[j] * vals)

    return ordered_map(path, range(family.model.dim))


def residual_certify(
    family: SolutionFamily, t_grid: TimeGrid, u0, *, phase_sign: int = -1
) -> float:
    """Largest L1-oracle residual of ``D^alpha v = (-i)^alpha a_j v`` over the
    spectral channels of the propagated solution.

    Channels are the eigenvectors (or Fourier modes), so for a non-diagonal
    model this certifies ``W* u(t)``; unitarity of ``W`` carries the result
    back.  The first tenth of the time grid is excluded.
    """
    if t_grid.n < 100:
        raise ValueError(f"certification needs a time grid with >= 100 nodes, got {t_grid.n}")
    paths = channel_paths(family, t_grid, u0, phase_sign=phase_sign)
    spec = family.model.spectrum
    residuals = ordered_map(
        lambda j: equation_residual(family.order, spec[j], paths[j]), range(len(paths))
    )
    return float(max(residuals))
