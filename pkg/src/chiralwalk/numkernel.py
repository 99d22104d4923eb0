"""Small dense complex-matrix primitives.

Thin, checked wrappers around LAPACK (through numpy) plus the
corner-tridiagonal Hermitian family used for periodic real-part symbols.
All functions accept a single matrix or a stack ``(..., d, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    NonFinite,
    NonSquare,
    NonUnitPhase,
    NotHermitian,
)

HERMITIAN_TOL = 1e-12
UNIT_TOL = 1e-12


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite complex array whose last two axes are square."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim < 2:
        arr = arr.reshape(arr.shape + (1,) * (2 - arr.ndim))
    if arr.shape[-1] != arr.shape[-2] or arr.shape[-1] < 1:
        raise NonSquare(f"expected square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("matrix has NaN or infinite entries")
    return arr


def hermitian_defect(m) -> float:
    arr = as_matrix(m)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr - np.conj(np.swapaxes(arr, -1, -2)))))


def determinant(m):
    return np.linalg.det(as_matrix(m))


def hermitian_eigenvalues(m, *, check_residual: bool = False) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix (or stack).

    With ``check_residual`` the eigenvectors are also computed and the
    backward error ``||mV - V diag(w)|| <= 1e-10 ||m||`` is enforced.
    """
    arr = as_matrix(m)
    defect = hermitian_defect(arr)
    if defect > HERMITIAN_TOL:
        raise NotHermitian(f"max |m - m*| = {defect:.3e}", defect=defect)
    try:
        if not check_residual:
            return np.linalg.eigvalsh(arr)
        w, v = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    resid = np.linalg.norm(arr @ v - v * w[..., None, :], ord=2, axis=(-2, -1))
    scale = np.maximum(np.linalg.norm(arr, ord=2, axis=(-2, -1)), 1.0)
    if np.any(resid > 1e-10 * scale):
        raise ConvergenceFailure("eigen-decomposition backward error too large")
    return w


def general_eigenvalues(m) -> np.ndarray:
    """All eigenvalues with multiplicity (Hessenberg + shifted QR)."""
    arr = as_matrix(m)
    try:
        return np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def unitarity_defect(m) -> float:
    arr = as_matrix(m)
    d = arr.shape[-1]
    prod = np.conj(np.swapaxes(arr, -1, -2)) @ arr
    return float(np.max(np.abs(prod - np.eye(d))))


def check_unit_phase(z) -> np.ndarray:
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(np.abs(zz) - 1.0) > UNIT_TOL):
        raise NonUnitPhase("phase must lie on the unit circle")
    return zz


@dataclass(frozen=True, eq=False)
class CornerTridiagonal:
    """Periodic Hermitian tridiagonal matrix with phase-carrying corners.

    ``off[i]`` couples site ``i`` to ``i + 1``; ``off[m-1]`` closes the ring
    and picks up ``z`` in entry ``(m-1, 0)`` and ``z*`` in entry ``(0, m-1)``.
    """

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float).ravel()
        off = np.asarray(self.off, dtype=float).ravel()
        if diag.shape != off.shape or diag.size == 0:
            raise ValueError("diag and off must be non-empty and the same length")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)

    @property
    def dim(self) -> int:
        return self.diag.size


def realize(t: CornerTridiagonal, z) -> np.ndarray:
    """Dense matrix of ``t`` at phase ``z``; a stack if ``z`` is an array.

    m=1 gives the scalar ``off*z* + diag + off*z``; m=2 puts
    ``off[0] + off[1]*z*`` above the diagonal. Both are what the additive
    ring assembly below produces when the bonds coincide.
    """
    zz = check_unit_phase(z)
    m = t.dim
    out = np.zeros(zz.shape + (m, m), dtype=complex)
    idx = np.arange(m)
    out[..., idx, idx] = t.diag
    for i in range(m):
        j = (i + 1) % m
        phase = zz if i == m - 1 else np.ones_like(zz)
        out[..., i, j] += t.off[i] * phase
        out[..., j, i] += t.off[i] * np.conj(phase)
    return out
