"""Winding numbers, Fredholm indices and essential spectra from symbols."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CurveThroughOrigin, NotHermitianFamily, RefinementExhausted
from .lattice import SIDES, StrictlyLocalOperator, symbol_coefficients
from .numkernel import HERMITIAN_TOL, general_eigenvalues, hermitian_defect

DEFAULT_SAMPLES = 1024
DEFAULT_BUDGET = 16
MIN_MODULUS_TOL = 1e-9
MERGE_TOL = 1e-9
RESOLUTION_FLOOR = 1e-12
TWO_PI = 2.0 * math.pi
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CircleCurve:
    """A closed curve ``t -> evaluator(exp(2 pi i t))``, ``t`` in [0, 1).

    ``evaluator`` must accept an array of unit phases.
    """

    evaluator: Callable
    sample_count: int = DEFAULT_SAMPLES
    adaptive_budget: int = DEFAULT_BUDGET

    def __call__(self, t):
        return np.asarray(self.evaluator(np.exp(2j * np.pi * np.asarray(t, dtype=float))), dtype=complex)


def _track_argument(curve: CircleCurve, min_modulus_tol: float):
    t = np.arange(curve.sample_count) / curve.sample_count
    f = curve(t)
    for rounds in range(curve.adaptive_budget + 1):
        mod = np.abs(f)
        imin = int(np.argmin(mod))
        if mod[imin] < min_modulus_tol:
            raise CurveThroughOrigin(
                f"|f| = {mod[imin]:.3e} at t = {t[imin]:.6f}",
                t=float(t[imin]), modulus=float(mod[imin]),
            )
        f_next = np.roll(f, -1)
        darg = np.angle(f_next / f)
        bad = np.abs(darg) >= math.pi / 2
        if not bad.any():
            total = darg.sum() / TWO_PI
            wn = int(round(total))
            if abs(total - wn) > 1e-6:  # pragma: no cover - angles are wrapped exactly
                raise RefinementExhausted(f"non-integer winding {total}")
            return wn, float(mod.min()), t, f
        if rounds == curve.adaptive_budget:
            t_next = np.append(t[1:], t[0] + 1.0)
            _through_origin(curve, t[bad], t_next[bad], min_modulus_tol)
            break
        t_next = np.roll(t, -1)
        t_next[-1] += 1.0
        mids = 0.5 * (t[bad] + t_next[bad])
        t = np.concatenate([t, mids])
        f = np.concatenate([f, curve(mids)])
        order = np.argsort(t, kind="stable")
        t, f = t[order], f[order]
    raise RefinementExhausted(
        f"argument steps still >= pi/2 after {curve.adaptive_budget} refinements"
    )


def _through_origin(curve: CircleCurve, lo: np.ndarray, hi: np.ndarray, min_modulus_tol: float):
    # a step that stays unresolved usually straddles a zero of the curve
    for a, b in zip(lo, hi):
        s, val = _golden_min(lambda u: float(np.abs(curve(np.array([u]))[0])), float(a), float(b))
        if val < min_modulus_tol:
            raise CurveThroughOrigin(f"|f| = {val:.3e} at t = {s % 1.0:.6f}", t=float(s % 1.0), modulus=val)


def winding_number(curve: CircleCurve, min_modulus_tol: float = MIN_MODULUS_TOL) -> int:
    """Counterclockwise winding of ``curve`` about the origin.

    Increments of the principal argument are accumulated between samples;
    any step of size >= pi/2 is bisected (at most ``adaptive_budget``
    rounds) before the total is rounded.
    """
    return _track_argument(curve, min_modulus_tol)[0]


def _golden_min(g, a: float, b: float, iters: int = 80) -> tuple[float, float]:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - _GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _GOLDEN * (b - a)
            gd = g(d)
        if b - a < 1e-15:
            break
    return (c, gc) if gc <= gd else (d, gd)


def _refined_min_modulus(curve: CircleCurve, t: np.ndarray, f: np.ndarray) -> float:
    mod = np.abs(f)
    i = int(np.argmin(mod))
    n = len(t)
    a = t[i - 1] if i > 0 else t[-1] - 1.0
    b = t[i + 1] if i + 1 < n else t[0] + 1.0
    _, val = _golden_min(lambda s: float(np.abs(curve(np.array([s]))[0])), a, b)
    return float(min(val, mod[i]))


@dataclass
class IndexReport:
    fredholm: bool
    wn_left: int | None
    wn_right: int | None
    index: int | None
    min_abs_det: float
    sides: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fredholm": self.fredholm,
            "wn_left": self.wn_left,
            "wn_right": self.wn_right,
            "index": self.index,
            "min_abs_det": self.min_abs_det,
            "sides": self.sides,
            "warnings": list(self.warnings),
        }


def determinant_curve(op: StrictlyLocalOperator, side, samples: int = DEFAULT_SAMPLES,
                      adaptive_budget: int = DEFAULT_BUDGET) -> CircleCurve:
    coeffs = symbol_coefficients(op, side)

    def det_of_symbol(z):
        z = np.asarray(z, dtype=complex)
        mats = sum((z ** p)[..., None, None] * c for p, c in coeffs.items())
        return np.linalg.det(mats)

    return CircleCurve(det_of_symbol, samples, adaptive_budget)


def fredholm_index(op: StrictlyLocalOperator, samples: int = DEFAULT_SAMPLES,
                   min_modulus_tol: float = MIN_MODULUS_TOL,
                   adaptive_budget: int = DEFAULT_BUDGET) -> IndexReport:
    """Fredholm test and index ``wn(det A(R, .)) - wn(det A(L, .))``."""
    sides = {}
    warnings = []
    winds = {}
    min_det = math.inf
    for side in SIDES:
        curve = determinant_curve(op, side, samples, adaptive_budget)
        try:
            wn, _, t, f = _track_argument(curve, min_modulus_tol)
        except CurveThroughOrigin as exc:
            modulus = exc.details["modulus"]
            sides[side] = {"fredholm": False, "winding": None, "min_abs_det": modulus}
            min_det = min(min_det, modulus)
            code = "VanishingSymbol" if modulus == 0.0 else "NearDegenerate"
            warnings.append(f"{code}: side {side} det symbol reaches {modulus:.3e}")
            continue
        refined = _refined_min_modulus(curve, t, f)
        if refined < min_modulus_tol:
            sides[side] = {"fredholm": False, "winding": None, "min_abs_det": refined}
            warnings.append(f"NearDegenerate: side {side} det symbol reaches {refined:.3e}")
        else:
            sides[side] = {"fredholm": True, "winding": wn, "min_abs_det": refined}
            winds[side] = wn
        min_det = min(min_det, refined)
    fredholm = all(sides[s]["fredholm"] for s in SIDES)
    index = winds["R"] - winds["L"] if fredholm else None
    return IndexReport(
        fredholm=fredholm,
        wn_left=winds.get("L"),
        wn_right=winds.get("R"),
        index=index,
        min_abs_det=float(min_det),
        sides=sides,
        warnings=warnings,
    )


# bands --------------------------------------------------------------------

def merge_intervals(intervals, merge_tol: float = MERGE_TOL) -> list[tuple[float, float]]:
    ivs = sorted((float(lo), float(hi)) for lo, hi in intervals)
    merged: list[list[float]] = []
    for lo, hi in ivs:
        if merged and lo - merged[-1][1] < merge_tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def arcs_from_intervals(intervals, merge_tol: float = MERGE_TOL) -> list[tuple[float, float]]:
    """Arcs ``{theta : cos(theta) in band}`` as angle ranges inside [0, 2 pi].

    Each band gives a mirror pair of arcs; arcs are split at angle 0, so a
    band reaching +1 shows up as ``[0, a]`` and ``[2 pi - a, 2 pi]``.
    """
    arcs = []
    for lo, hi in intervals:
        lo_c = min(max(lo, -1.0), 1.0)
        hi_c = min(max(hi, -1.0), 1.0)
        top = (math.acos(hi_c), math.acos(lo_c))
        arcs.append(top)
        arcs.append((TWO_PI - top[1], TWO_PI - top[0]))
    return merge_intervals(arcs, merge_tol)


@dataclass(frozen=True)
class SpectralBands:
    """Disjoint closed real intervals plus the matching unit-circle arcs."""

    intervals: tuple
    resolution: float = 0.0

    @classmethod
    def from_intervals(cls, intervals, resolution: float = 0.0,
                       merge_tol: float = MERGE_TOL) -> "SpectralBands":
        return cls(tuple(merge_intervals(intervals, merge_tol)), float(resolution))

    @property
    def arcs(self) -> tuple:
        return tuple(arcs_from_intervals(self.intervals))

    def union(self, other: "SpectralBands") -> "SpectralBands":
        return SpectralBands.from_intervals(
            list(self.intervals) + list(other.intervals),
            max(self.resolution, other.resolution),
        )

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= x <= hi + tol for lo, hi in self.intervals)

    def contains_phase(self, w: complex, tol: float = 0.0) -> bool:
        """Whether the unit-circle point ``w`` lies on an arc (angular ``tol``)."""
        theta = math.atan2(w.imag, w.real) % TWO_PI
        for lo, hi in self.arcs:
            if lo - tol <= theta <= hi + tol:
                return True
            if theta + TWO_PI <= hi + tol or theta - TWO_PI >= lo - tol:
                return True
        return False

    def endpoint_distance(self, other: "SpectralBands") -> float:
        """Max endpoint discrepancy; infinite when the band counts differ."""
        if len(self.intervals) != len(other.intervals):
            return math.inf
        if not self.intervals:
            return 0.0
        a = np.asarray(self.intervals, dtype=float)
        b = np.asarray(other.intervals, dtype=float)
        return float(np.max(np.abs(a - b)))

    def to_dict(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "arcs": [list(a) for a in self.arcs],
            "resolution": self.resolution,
        }


def branch_ranges(family: Callable, samples: int = DEFAULT_SAMPLES,
                  refine: bool = True) -> tuple[list[tuple[float, float]], float]:
    """Ranges of the sorted eigenvalue branches of a Hermitian family.

    ``family`` maps an array of angles ``t`` to a stack of Hermitian matrices
    at ``z = exp(i t)``. Sampled extrema are polished by golden-section
    search on the bracketing grid cells; the returned resolution is the
    largest such correction (never below ``RESOLUTION_FLOOR``).
    """
    t = TWO_PI * np.arange(samples) / samples
    mats = family(t)
    defect = hermitian_defect(mats)
    if defect > HERMITIAN_TOL:
        raise NotHermitianFamily(f"symbol family not Hermitian (defect {defect:.3e})")
    evals = np.linalg.eigvalsh(mats)
    dt = TWO_PI / samples
    resolution = RESOLUTION_FLOOR
    ranges = []
    for j in range(evals.shape[1]):
        branch = evals[:, j]
        lo, hi = float(branch.min()), float(branch.max())
        if refine:
            def g(s, _j=j):
                return float(np.linalg.eigvalsh(family(np.array([s])))[0, _j])

            t_lo = t[int(np.argmin(branch))]
            _, lo_ref = _golden_min(g, t_lo - dt, t_lo + dt)
            t_hi = t[int(np.argmax(branch))]
            _, hi_neg = _golden_min(lambda s: -g(s), t_hi - dt, t_hi + dt)
            lo_ref, hi_ref = min(lo, lo_ref), max(hi, -hi_neg)
            resolution = max(resolution, lo - lo_ref, hi_ref - hi)
            lo, hi = lo_ref, hi_ref
        ranges.append((lo, hi))
    return ranges, float(resolution)


def essential_spectrum_bands(op: StrictlyLocalOperator, samples: int = DEFAULT_SAMPLES,
                             refine: bool = True, merge_tol: float = MERGE_TOL) -> SpectralBands:
    """Union over both sides of the eigenvalue ranges of a Hermitian symbol."""
    intervals = []
    resolution = 0.0
    for side in SIDES:
        coeffs = symbol_coefficients(op, side)

        def family(t, _c=coeffs):
            z = np.exp(1j * np.asarray(t, dtype=float))
            return sum((z ** p)[..., None, None] * c for p, c in _c.items())

        ranges, res = branch_ranges(family, samples, refine)
        intervals.extend(ranges)
        resolution = max(resolution, res)
    return SpectralBands.from_intervals(intervals, resolution, merge_tol)


@dataclass(frozen=True)
class SpectrumCloud:
    points: np.ndarray
    sides: np.ndarray
    phases: np.ndarray
    resolution: float

    def to_dict(self) -> dict:
        return {
            "count": int(self.points.size),
            "resolution": self.resolution,
        }


def essential_spectrum_cloud(op: StrictlyLocalOperator, samples: int = DEFAULT_SAMPLES) -> SpectrumCloud:
    """Eigenvalues of the symbol over sampled phases, both sides, tagged."""
    pts, sides, phases = [], [], []
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    for side in SIDES:
        coeffs = symbol_coefficients(op, side)
        mats = sum((z ** p)[:, None, None] * c for p, c in coeffs.items())
        ev = general_eigenvalues(mats)
        pts.append(ev.ravel())
        sides.append(np.full(ev.size, side))
        phases.append(np.repeat(z, ev.shape[1]))
    return SpectrumCloud(
        np.concatenate(pts), np.concatenate(sides), np.concatenate(phases), TWO_PI / samples
    )
