"""Brute-force cross-checks: ring realizations of periodic operators,
direct application to finitely supported vectors, partial geometric means."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NonPositive, NotPeriodic, TooLarge
from .lattice import PeriodicTailSequence, StrictlyLocalOperator, normalize_side, symbol_at
from .numkernel import general_eigenvalues

MAX_DENSE_DIM = 2048
DEFAULT_CELLS = 64


def circulant_matrix(op: StrictlyLocalOperator, side, cells: int) -> np.ndarray:
    """Dense matrix of the side's periodic operator on a ring of
    ``n_side * cells`` sites (shifts wrap around)."""
    side = normalize_side(side)
    n_side = op.period(side)
    sites = n_side * int(cells)
    n = op.n
    dim = n * sites
    if dim > MAX_DENSE_DIM:
        raise TooLarge(f"ring dimension {dim} exceeds {MAX_DENSE_DIM}", dim=dim)
    mat = np.zeros((dim, dim), dtype=complex)
    for k, seq in op.coeffs.items():
        table = seq.tail_table(side, n_side)
        for x in range(sites):
            y = (x + k) % sites
            mat[x * n:(x + 1) * n, y * n:(y + 1) * n] += table[x % n_side]
    return mat


def circulant_spectrum(op: StrictlyLocalOperator, side, cells: int = DEFAULT_CELLS) -> np.ndarray:
    """Eigenvalues of the ring realization of a purely periodic operator."""
    if not op.is_purely_periodic():
        raise NotPeriodic("operator has a non-periodic core or different tails")
    return general_eigenvalues(circulant_matrix(op, side, cells))


def symbol_union(op: StrictlyLocalOperator, side, cells: int) -> np.ndarray:
    """Eigenvalues of the symbol over all ``cells``-th roots of unity."""
    z = np.exp(2j * np.pi * np.arange(cells) / cells)
    return general_eigenvalues(symbol_at(op, side, z)).ravel()


def multiset_distance(a, b) -> float:
    """Bottleneck distance between two equal-size multisets in C."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass(frozen=True)
class FiniteVector:
    """C^n-valued sequence supported on ``[start, start + len(values))``."""

    start: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "values", vals)

    @property
    def stop(self) -> int:
        return self.start + len(self.values)

    def sites(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    def at(self, x: int) -> np.ndarray:
        if self.start <= x < self.stop:
            return self.values[x - self.start]
        return np.zeros(self.values.shape[1], dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def apply(op: StrictlyLocalOperator, v: FiniteVector) -> FiniteVector:
    """``(A v)(x) = sum_k A_k(x) v(x + k)`` on the grown support."""
    if v.values.shape[1] != op.n:
        raise ValueError(f"vector has {v.values.shape[1]} components, operator needs {op.n}")
    k0 = op.k0
    lo, hi = v.start - k0, v.stop + k0
    padded = np.zeros((hi - lo + 2 * k0, op.n), dtype=complex)
    padded[2 * k0:2 * k0 + len(v.values)] = v.values
    out = np.zeros((hi - lo, op.n), dtype=complex)
    for k, seq in op.coeffs.items():
        coeff = seq.values(lo, hi)
        # padded index of site x + k is x + k - lo + k0
        shifted = padded[k + k0:k + k0 + hi - lo]
        out += np.einsum("xij,xj->xi", coeff, shifted)
    return FiniteVector(lo, out)


def geometric_mean_limit(seq: PeriodicTailSequence, horizon: int) -> float:
    """``(prod_{0 <= m < horizon} s(m)) ** (1 / horizon)`` in log domain."""
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be positive")
    vals = np.asarray(seq.values(0, horizon), dtype=float)
    if np.any(vals <= 0) or np.any(np.asarray(seq.all_values(), dtype=float) <= 0):
        raise NonPositive("geometric means need positive values")
    return float(np.exp(math.fsum(np.log(vals)) / horizon))
