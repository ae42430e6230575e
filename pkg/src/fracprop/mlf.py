r"""Mittag-Leffler function :math:`E_\alpha(z)` for complex ``z`` and
:math:`0 < \alpha \le 1`.

Two independent backends are provided:

* the power series :math:`\sum_k z^k / \Gamma(\alpha k + 1)`, summed in
  double precision when cancellation is mild and with extended (MPFR)
  working precision otherwise;
* the integral representation

  .. math::

      E_\alpha(z) = \int_0^\infty K_\alpha(r, z)\,dr
          + \frac{1}{\alpha} e^{z^{1/\alpha}},
      \qquad
      K_\alpha(r, z) = -\frac{e^{-r^{1/\alpha}} z \sin(\pi\alpha)}
          {\pi\alpha (r^2 - 2 r z \cos(\pi\alpha) + z^2)},

  integrated with adaptive Gauss-Legendre panels.  The exponential term is
  present for :math:`|\arg z| < \alpha\pi` and absent beyond it.

The evolution equation only ever needs :math:`E_\alpha` on the ray
:math:`z = e^{-i\alpha\pi/2} t^\alpha \omega`; :func:`ml_ray` and
:func:`ml_ray_batch` evaluate there with the exponential term taken in the
exact form :math:`e^{-i t \omega^{1/\alpha}}`.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from fracprop.errors import NonConvergence, NumericalError, PoleProximity, QuadratureFailure
from fracprop.gamma import GAMMA_MAX_ARG, lgamma, rgamma

log = logging.getLogger(__name__)

SERIES_RADIUS = 5.0
POLE_GUARD = 1e-12
MAX_TERMS = 2000
MAX_DEPTH = 48
DEFAULT_TOL = 1e-12
# largest series term (relative to 1) tolerated by the double-precision path
CANCELLATION_LIMIT = 2.0**10
SWEEP_OMEGA_MIN = 1e-4

_EPS = np.finfo(float).eps
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


# {{{ domain types


@dataclass(frozen=True)
class FractionalOrder:
    """Validated time-derivative order ``alpha`` in ``(0, 1]``."""

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not math.isfinite(a) or not 0.0 < a <= 1.0:
            raise ValueError(f"fractional order must lie in (0, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @cached_property
    def phase(self) -> complex:
        """The factor ``(-i)**alpha = exp(-i alpha pi / 2)``."""
        if self.alpha == 1.0:
            return -1j
        return cmath.exp(-0.5j * math.pi * self.alpha)


def as_order(order: FractionalOrder | float) -> FractionalOrder:
    if isinstance(order, FractionalOrder):
        return order
    return FractionalOrder(order)


class Method(enum.Enum):
    SERIES = "series"
    INTEGRAL = "integral"
    EXACT = "exact"


@dataclass(frozen=True)
class MLValue:
    value: complex
    method: Method
    err_est: float


@dataclass(frozen=True)
class RayPoint:
    """A point ``(t, omega)`` whose argument lies on the ray
    ``arg z = -alpha pi / 2``."""

    order: FractionalOrder
    t: float
    omega: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", as_order(self.order))
        if not (self.t >= 0.0 and math.isfinite(self.t)):
            raise ValueError(f"t must be finite and >= 0, got {self.t!r}")
        if not (self.omega >= 0.0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be finite and >= 0, got {self.omega!r}")

    @property
    def z(self) -> complex:
        return self.order.phase * (self.t**self.order.alpha * self.omega)


# }}}


# {{{ series backend


def _log_peak(alpha: float, r: float) -> float:
    """Logarithm of the largest series term magnitude ``max_k r^k/Gamma(ak+1)``."""
    if r <= 1.0:
        return 0.0
    # the continuous maximiser solves digamma(alpha k + 1) = log(r) / alpha
    try:
        x = math.exp(math.log(r) / alpha) + 0.5
    except OverflowError:
        return math.inf
    kstar = max(0.0, (x - 1.0) / alpha)
    if kstar > 1e15:
        return math.inf
    lr = math.log(r)
    best = 0.0
    for k in range(max(0, int(kstar) - 2), int(kstar) + 3):
        best = max(best, k * lr - lgamma(alpha * k + 1.0))
    return best


@lru_cache(maxsize=256)
def cancellation_radius(alpha: float) -> float:
    """Largest ``|z|`` whose series terms stay below ``CANCELLATION_LIMIT``."""
    target = math.log(CANCELLATION_LIMIT)
    lo, hi = 1.0, 2.0
    while _log_peak(alpha, hi) <= target:
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _log_peak(alpha, mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def series_radius(alpha: float) -> float:
    """Radius below which :func:`ml_eval` uses the double-precision series."""
    return min(SERIES_RADIUS, cancellation_radius(alpha))


def _series_double(
    alpha: float, zs: np.ndarray, tol: float, max_terms: int
) -> tuple[np.ndarray, np.ndarray]:
    zs = np.asarray(zs, dtype=complex)
    m = zs.size
    logz = np.log(np.where(zs == 0, 1.0, zs))
    partial = np.ones(m, dtype=complex)
    zk = np.ones(m, dtype=complex)
    abssum = np.ones(m)
    last = np.zeros((m, 3))
    small = np.zeros(m, dtype=int)
    done = np.zeros(m, dtype=bool)
    values = np.empty(m, dtype=complex)
    errs = np.empty(m)

    k = 0
    while not done.all():
        k += 1
        if k > max_terms:
            bad = zs[~done][0]
            raise NonConvergence(
                f"series for E_{alpha}({bad}) did not converge in {max_terms} terms"
            )
        x = alpha * k + 1.0
        zk = zk * zs
        if x <= GAMMA_MAX_ARG:
            term = zk * rgamma(x)
        else:
            term = np.full(m, np.nan, dtype=complex)
        direct = np.isfinite(term) & (np.abs(zk) < 1e300)
        if not direct.all():
            with np.errstate(over="ignore"):
                logterm = k * logz - lgamma(x)
                term = np.where(direct, term, np.where(zs == 0, 0.0, np.exp(logterm)))

        active = ~done
        partial[active] += term[active]
        aterm = np.abs(term)
        abssum[active] += aterm[active]
        last[active, k % 3] = aterm[active]
        if not np.all(np.isfinite(partial[active])):
            bad = zs[active & ~np.isfinite(partial)][0]
            raise NonConvergence(f"series for E_{alpha}({bad}) overflowed")

        below = aterm < tol * np.maximum(1.0, np.abs(partial))
        small = np.where(below, small + 1, 0)
        fin = active & (small >= 3)
        if fin.any():
            values[fin] = partial[fin]
            errs[fin] = last[fin].sum(axis=1) + 4.0 * _EPS * abssum[fin]
            done |= fin

    return values, errs


def _series_extended(
    alpha: float, z: complex, tol: float, max_terms: int, log_peak: float
) -> tuple[complex, float]:
    import gmpy2
    from gmpy2 import mpc, mpfr

    guard = 32 + max_terms.bit_length()
    prec = 53 + guard + int(math.ceil(log_peak / math.log(2.0)))

    # alpha = p/q exactly (as the nearest double) lets terms be advanced by
    # t_k = t_{k-q} z^q / prod_{j=1..p} (alpha (k-q) + j)
    frac = Fraction(alpha).limit_denominator(64)
    rational = float(frac) == alpha
    p, q = frac.numerator, frac.denominator
    # terms grow monotonically up to the peak when |z| >= 1
    first_check = int(max(0.0, (math.exp(math.log(abs(z)) / alpha) - 0.5) / alpha)) if abs(z) >= 1 else 0
    tol2 = tol * tol

    with gmpy2.context(precision=prec):
        zz = mpc(z)
        a_mp = mpfr(p) / q if rational else mpfr(alpha)
        if rational:
            ring = [zz**r / gmpy2.gamma(a_mp * r + 1) for r in range(q)]
            step = zz**q * mpfr(q) ** p

        partial = mpc(1)
        zk = mpc(1)
        last = [0.0, 0.0, 0.0]
        small = 0
        k = 0
        while True:
            k += 1
            if k > max_terms:
                raise NonConvergence(
                    f"series for E_{alpha}({z}) did not converge in {max_terms} terms"
                )
            if rational:
                if k >= q:
                    base = p * (k - q)
                    den = 1
                    for j in range(1, p + 1):
                        den *= base + j * q
                    ring[k % q] = ring[k % q] * step / den
                term = ring[k % q]
            else:
                zk *= zz
                term = zk / gmpy2.gamma(a_mp * k + 1)
            partial += term
            if k < first_check:
                continue
            nt = float(gmpy2.norm(term))
            last[k % 3] = math.sqrt(nt)
            if nt < tol2 * max(1.0, float(gmpy2.norm(partial))):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        value = complex(partial)

    roundoff = k * math.exp(log_peak - prec * math.log(2.0) + 4.0)
    return value, sum(last) + roundoff


def ml_series(
    order: FractionalOrder | float,
    z: complex,
    tol: float = DEFAULT_TOL,
    *,
    max_terms: int = MAX_TERMS,
    precision: str = "auto",
) -> MLValue:
    """Sum the Mittag-Leffler power series until three consecutive terms fall
    below ``tol * max(1, |partial sum|)``.

    ``precision`` is ``"double"``, ``"extended"`` or ``"auto"``; the latter
    switches to MPFR arithmetic once the largest term exceeds
    ``CANCELLATION_LIMIT``, since the partial sums then cancel.  ``err_est``
    is the sum of the last three term magnitudes plus a roundoff bound.

    Raises :class:`NonConvergence` after ``max_terms`` terms.
    """
    order = as_order(order)
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if precision not in ("auto", "double", "extended"):
        raise ValueError(f"unknown precision mode {precision!r}")
    z = complex(z)
    alpha = order.alpha

    log_peak = _log_peak(alpha, abs(z))
    if precision == "double" or (
        precision == "auto" and log_peak <= math.log(CANCELLATION_LIMIT)
    ):
        values, errs = _series_double(alpha, np.array([z]), tol, max_terms)
        return MLValue(complex(values[0]), Method.SERIES, float(errs[0]))

    if not math.isfinite(log_peak):
        raise NonConvergence(f"series for E_{alpha}({z}) needs unbounded precision")
    value, err = _series_extended(alpha, z, tol, max_terms, log_peak)
    return MLValue(value, Method.SERIES, err)


# }}}


# {{{ integral backend


def _kernel_values(alpha: float, r: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s, c = math.sin(math.pi * alpha), math.cos(math.pi * alpha)
    den = r * r - 2.0 * r * z * c + z * z
    num = -np.exp(-(r ** (1.0 / alpha))) * z * s
    return num / (math.pi * alpha * den), den


def ml_kernel(order: FractionalOrder | float, r: float, z: complex) -> complex:
    """Integrand ``K_alpha(r, z)`` of the integral representation.

    Raises :class:`PoleProximity` when the denominator is below
    ``POLE_GUARD * (r**2 + |z|**2)``.
    """
    order = as_order(order)
    z = complex(z)
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r!r}")
    if z == 0:
        raise ValueError("z must be nonzero")
    val, den = _kernel_values(order.alpha, np.array([float(r)]), np.array([z]))
    if abs(den[0]) < POLE_GUARD * (r * r + abs(z) ** 2):
        raise PoleProximity(f"kernel denominator vanishes at r={r}, z={z}")
    return complex(val[0])


def _distance_to_halfline(p: complex, start: float) -> float:
    if p.real >= start:
        return abs(p.imag)
    return abs(p - start)


def _integral_setup(alpha: float, z: complex, tol: float) -> tuple[list[float], float]:
    """Panel breakpoints on ``[0, R]`` and the tail bound beyond ``R``."""
    roots = (z * cmath.exp(1j * math.pi * alpha), z * cmath.exp(-1j * math.pi * alpha))
    for p in roots:
        if p.real > 0.0 and abs(p.imag) <= 1e-10 * abs(p):
            raise PoleProximity(
                f"kernel pole on the integration path for z={z} (|arg z| = alpha*pi)"
            )

    s = math.sin(math.pi * alpha)
    absz = abs(z)

    def floor(start: float) -> float:
        return _distance_to_halfline(roots[0], start) * _distance_to_halfline(roots[1], start)

    r0 = max(1.0, math.log(1.0 / tol) ** alpha)
    c0 = absz * s / (math.pi * alpha * floor(r0))
    rmax = r0 if c0 <= 1.0 else max(r0, math.log(c0 / tol) ** alpha)
    x = rmax ** (1.0 / alpha)
    tail = absz * s / (math.pi * alpha * floor(rmax)) * alpha * x ** (alpha - 1.0) * math.exp(-x)

    breaks = {0.0, rmax}
    for b in (absz, 1.0):
        if 0.0 < b < rmax:
            breaks.add(b)
    return sorted(breaks), tail


def _gl_panel(alpha: float, z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    r = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    zz = z[:, None]
    val, den = _kernel_values(alpha, r, zz)
    guard = np.abs(den) < POLE_GUARD * (r * r + np.abs(zz) ** 2)
    if guard.any():
        i = int(np.argwhere(guard)[0, 0])
        err = PoleProximity(f"kernel denominator vanishes near r={r[i].mean()}, z={z[i]}")
        err.z = complex(z[i])
        raise err
    return half * (val @ _GL_WEIGHTS)


def _integral_batch(
    alpha: float, zs: np.ndarray, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive Gauss-Legendre quadrature of ``int_0^inf K(r, z) dr`` for each
    ``z``; returns the integrals and their error estimates (tail included).

    Every ``z`` is refined independently, so the result for one point does
    not depend on the rest of the batch.
    """
    zs = np.asarray(zs, dtype=complex)
    m = zs.size
    values = np.zeros(m, dtype=complex)
    errs = np.zeros(m)
    if m == 0:
        return values, errs

    idx_l, a_l, b_l = [], [], []
    length = np.empty(m)
    for i, z in enumerate(zs):
        try:
            breaks, tail = _integral_setup(alpha, complex(z), tol)
        except NumericalError as exc:
            exc.z = complex(z)
            raise
        errs[i] = tail
        length[i] = breaks[-1]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            idx_l.append(i)
            a_l.append(lo)
            b_l.append(hi)

    idx = np.array(idx_l, dtype=int)
    a = np.array(a_l)
    b = np.array(b_l)
    whole = _gl_panel(alpha, zs[idx], a, b)

    depth = 0
    while idx.size:
        mid = 0.5 * (a + b)
        zi = zs[idx]
        left = _gl_panel(alpha, zi, a, mid)
        right = _gl_panel(alpha, zi, mid, b)
        refined = left + right
        est = np.abs(whole - refined)
        allowed = np.maximum(tol * (b - a) / length[idx], 64.0 * _EPS * np.abs(refined))
        ok = est <= allowed

        np.add.at(values, idx[ok], refined[ok])
        np.add.at(errs, idx[ok], est[ok])

        keep = ~ok
        if not keep.any():
            break
        depth += 1
        if depth > MAX_DEPTH:
            bad = complex(zs[idx[keep][0]])
            exc = QuadratureFailure(
                f"adaptive quadrature for E_{alpha}({bad}) exceeded depth {MAX_DEPTH}"
            )
            exc.z = bad
            raise exc
        idx = np.concatenate([idx[keep], idx[keep]])
        a, b = np.concatenate([a[keep], mid[keep]]), np.concatenate([mid[keep], b[keep]])
        whole = np.concatenate([left[keep], right[keep]])

    return values, errs


def _explicit_term(alpha: float, z: complex) -> complex:
    if abs(cmath.phase(z)) < alpha * math.pi:
        return cmath.exp(z ** (1.0 / alpha)) / alpha
    return 0j


def ml_integral(order: FractionalOrder | float, z: complex, tol: float = DEFAULT_TOL) -> MLValue:
    """Evaluate ``E_alpha(z)`` through the integral representation.

    The tail beyond ``R = (log(C / tol))**alpha`` is bounded using the
    ``exp(-r**(1/alpha))`` decay of the kernel and added to ``err_est``.
    """
    order = as_order(order)
    z = complex(z)
    if z == 0:
        raise ValueError("the integral representation requires z != 0")
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol!r}")
    alpha = order.alpha
    if alpha == 1.0:
        # sin(pi alpha) = 0: the kernel vanishes identically
        return MLValue(cmath.exp(z), Method.INTEGRAL, 0.0)
    values, errs = _integral_batch(alpha, np.array([z]), tol)
    return MLValue(complex(values[0]) + _explicit_term(alpha, z), Method.INTEGRAL, float(errs[0]))


# }}}


# {{{ dispatch


def ml_eval(order: FractionalOrder | float, z: complex, tol: float = DEFAULT_TOL) -> MLValue:
    """Evaluate ``E_alpha(z)``, choosing the backend.

    ``alpha == 1`` is the exponential.  Otherwise the double-precision series
    is used inside :func:`series_radius` and the integral representation
    outside; each falls back to the other on failure.
    """
    order = as_order(order)
    z = complex(z)
    alpha = order.alpha
    if alpha == 1.0:
        return MLValue(cmath.exp(z), Method.EXACT, 0.0)
    if z == 0:
        return MLValue(1.0 + 0j, Method.SERIES, 0.0)

    if abs(z) <= series_radius(alpha):
        try:
            return ml_series(order, z, tol, precision="double")
        except NonConvergence as exc:
            log.debug("series failed, using integral: %s", exc)
            return ml_integral(order, z, tol)

    try:
        return ml_integral(order, z, tol)
    except (PoleProximity, QuadratureFailure) as exc:
        log.debug("integral failed, using series: %s", exc)
        return ml_series(order, z, tol)


def ray_explicit_term(order: FractionalOrder | float, t: float, omega):
    """Exponential part ``exp(z**(1/alpha)) / alpha`` of the integral
    representation at ``z = (-i t)**alpha * omega``.

    On the ray ``z**(1/alpha) = -i t omega**(1/alpha)`` exactly, so the
    term is formed from that phase directly; a generic complex power would
    lose the unit modulus once ``t omega**(1/alpha)`` is large.
    """
    alpha = as_order(order).alpha
    return np.exp(-1j * (t * np.asarray(omega, dtype=float) ** (1.0 / alpha))) / alpha


def ml_ray_batch(
    order: FractionalOrder | float,
    t: float,
    omegas: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate ``E_alpha((-i t)**alpha * omega)`` for an array of ``omega``.

    Returns ``(values, err_est, methods)`` where ``methods`` holds
    :class:`Method` members.  Each entry is identical to what
    :func:`ml_ray_value` returns for that point alone.
    """
    order = as_order(order)
    alpha = order.alpha
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    omegas = np.asarray(omegas, dtype=float)
    shape = omegas.shape
    omegas = omegas.ravel()
    if np.any(~np.isfinite(omegas)) or np.any(omegas < 0.0):
        raise ValueError("spectral values must be finite and >= 0")

    values = np.ones(omegas.size, dtype=complex)
    errs = np.zeros(omegas.size)
    methods = np.full(omegas.size, Method.EXACT, dtype=object)

    if alpha == 1.0:
        values = np.exp(-1j * (t * omegas))
        return values.reshape(shape), errs.reshape(shape), methods.reshape(shape)

    s = t**alpha * omegas
    z = order.phase * s
    nonzero = s > 0.0
    use_series = nonzero & (s <= series_radius(alpha))
    use_integral = nonzero & ~use_series

    if use_series.any():
        sv, se = _series_double(alpha, z[use_series], tol, MAX_TERMS)
        values[use_series] = sv
        errs[use_series] = se
        methods[use_series] = Method.SERIES

    if use_integral.any():
        om = omegas[use_integral]
        try:
            iv, ie = _integral_batch(alpha, z[use_integral], tol)
        except NumericalError as exc:
            bad = getattr(exc, "z", None)
            where = f" at omega={abs(bad) / t**alpha!r}" if bad is not None else ""
            raise type(exc)(f"{exc}{where}") from exc
        values[use_integral] = iv + ray_explicit_term(order, t, om)
        errs[use_integral] = ie
        methods[use_integral] = Method.INTEGRAL

    return values.reshape(shape), errs.reshape(shape), methods.reshape(shape)


def ml_ray_value(point: RayPoint, tol: float = DEFAULT_TOL) -> MLValue:
    values, errs, methods = ml_ray_batch(point.order, point.t, np.array([point.omega]), tol)
    return MLValue(complex(values[0]), methods[0], float(errs[0]))


def ml_ray(point: RayPoint, tol: float = DEFAULT_TOL) -> complex:
    """``E_alpha((-i t)**alpha * omega)``; exactly ``1`` at ``t = 0``."""
    return ml_ray_value(point, tol).value


# }}}


# {{{ bound sweeps


def sweep_grid(omega_max: float, n: int) -> np.ndarray:
    """``omega = 0`` followed by ``n - 1`` log-spaced points up to ``omega_max``."""
    if n < 2:
        raise ValueError(f"sweep needs n >= 2, got {n}")
    if not omega_max > SWEEP_OMEGA_MIN:
        raise ValueError(f"omega_max must exceed {SWEEP_OMEGA_MIN}, got {omega_max!r}")
    return np.concatenate([[0.0], np.geomspace(SWEEP_OMEGA_MIN, omega_max, n - 1)])


def ml_sup_sweep_detail(
    order: FractionalOrder | float, omega_max: float, n: int, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """Return ``(sup |E_alpha((-i)^alpha omega)|, argmax omega)`` over
    :func:`sweep_grid`; ``t = 1`` suffices by the scaling ``t^alpha omega``."""
    omegas = sweep_grid(omega_max, n)
    if as_order(order).alpha == 1.0:
        # |exp(-i omega)| = 1 exactly; avoid abs() rounding to 1 + eps
        return 1.0, 0.0
    values, _, _ = ml_ray_batch(order, 1.0, omegas, tol)
    mods = np.abs(values)
    i = int(np.argmax(mods))
    return float(mods[i]), float(omegas[i])


def ml_sup_sweep(
    order: FractionalOrder | float, omega_max: float, n: int, tol: float = DEFAULT_TOL
) -> float:
    return ml_sup_sweep_detail(order, omega_max, n, tol)[0]


# }}}
