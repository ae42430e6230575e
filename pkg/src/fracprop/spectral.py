"""Finite models of a positive self-adjoint generator in multiplication form.

A :class:`HermitianModel` is diagonalised as ``A = W diag(a) W*``; a
:class:`PeriodicGrid` realises ``-d^2/dx^2`` on a torus, where the unitary
discrete Fourier transform plays the role of ``W`` and ``a(xi) = xi^2``.
Functions of ``A`` are applied as multipliers on the spectral side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracprop.errors import DimensionMismatch, NotHermitian, NotPositive

HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = -1e-10

Multiplier = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class HermitianModel:
    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        diff = np.abs(a - a.conj().T)
        if diff.max() > HERMITIAN_TOL:
            i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
            raise NotHermitian(
                f"entry ({i}, {j}) = {a[i, j]} does not match conj of ({j}, {i}) = {a[j, i]}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def diagonal(cls, values) -> HermitianModel:
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.entries @ _as_state(x, self.dim)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``A = W diag(eigenvalues) W*`` with ascending, nonnegative eigenvalues."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def spectrum(self) -> np.ndarray:
        return self.eigenvalues

    def to_spectral(self, x: np.ndarray) -> np.ndarray:
        return self.basis.conj().T @ x

    def from_spectral(self, c: np.ndarray) -> np.ndarray:
        return self.basis @ c

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.conj().T

    def norm(self) -> float:
        """Operator norm of ``A``."""
        return float(np.max(np.abs(self.eigenvalues)))


def decompose(model: HermitianModel) -> Decomposition:
    """Eigendecomposition with a fixed phase convention.

    Each eigenvector is rotated so that its largest-magnitude component is
    real and positive (ties go to the lowest index).  Eigenvalues in
    ``[POSITIVITY_TOL, 0)`` are clamped to zero; anything lower raises
    :class:`NotPositive`.
    """
    evals, evecs = np.linalg.eigh(model.entries)
    if evals[0] < POSITIVITY_TOL:
        raise NotPositive(f"eigenvalue {float(evals[0])!r} is negative; the generator must be positive")
    evals = np.maximum(evals, 0.0)

    lead = np.argmax(np.abs(evecs), axis=0)
    lead_vals = evecs[lead, np.arange(evecs.shape[1])]
    evecs = evecs * (np.abs(lead_vals) / lead_vals)[None, :]

    evals.setflags(write=False)
    evecs.setflags(write=False)
    return Decomposition(evals, evecs)


@dataclass(frozen=True)
class PeriodicGrid:
    """``n`` equispaced points on ``[-L/2, L/2)`` with periodic boundary."""

    n: int
    length: float

    def __post_init__(self) -> None:
        n = int(self.n)
        if n != self.n or n < 2 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 2, got {self.n!r}")
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise ValueError(f"grid length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", n)

    @property
    def dim(self) -> int:
        return self.n

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def points(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies ``2 pi k / L`` in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def spectrum(self) -> np.ndarray:
        return self.frequencies**2

    def to_spectral(self, x: np.ndarray) -> np.ndarray:
        return np.fft.fft(x, norm="ortho")

    def from_spectral(self, c: np.ndarray) -> np.ndarray:
        return np.fft.ifft(c, norm="ortho")

    def norm(self) -> float:
        return float(np.max(self.spectrum))

    def l2_norm(self, x: np.ndarray) -> float:
        """Discrete ``L^2(-L/2, L/2)`` norm (Riemann sum)."""
        return float(np.linalg.norm(x) * math.sqrt(self.dx))


SpectralModel = Decomposition | PeriodicGrid


@dataclass(frozen=True, eq=False)
class State:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __len__(self) -> int:
        return self.values.size


def _as_state(x, dim: int) -> np.ndarray:
    v = x.values if isinstance(x, State) else np.asarray(x, dtype=complex)
    if v.shape != (dim,):
        raise DimensionMismatch(f"state has shape {v.shape}, model has dimension {dim}")
    return v


def _multiplier_values(f: Multiplier, spectrum: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(spectrum), dtype=complex)
    if vals.shape == ():
        vals = np.full(spectrum.shape, complex(vals))
    if vals.shape != spectrum.shape:
        raise DimensionMismatch(
            f"multiplier returned shape {vals.shape} for spectrum of shape {spectrum.shape}"
        )
    return vals


def apply_spectral(model: SpectralModel, mult: np.ndarray, x) -> State:
    """Apply precomputed multiplier values (one per spectral point)."""
    v = _as_state(x, model.dim)
    mult = np.asarray(mult, dtype=complex)
    if mult.shape != (model.dim,):
        raise DimensionMismatch(f"{mult.size} multiplier values for dimension {model.dim}")
    return State(model.from_spectral(mult * model.to_spectral(v)))


def apply_multiplier(decomp: Decomposition, f: Multiplier, x) -> State:
    """``W diag(f(a)) W* x``.

    ``f`` is applied to the whole eigenvalue array at once, so it should be
    a numpy-style vectorised function (a constant is broadcast).
    """
    _as_state(x, decomp.dim)
    return apply_spectral(decomp, _multiplier_values(f, decomp.eigenvalues), x)


def fourier_multiplier(grid: PeriodicGrid, f: Multiplier, x) -> State:
    """Unitary FFT, multiply mode ``k`` by ``f(xi_k^2)``, inverse FFT."""
    _as_state(x, grid.n)
    return apply_spectral(grid, _multiplier_values(f, grid.spectrum), x)
