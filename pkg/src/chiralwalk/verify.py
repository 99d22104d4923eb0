"""Invariant checks run by ``chiralwalk verify``.

Operator-level checks take the ``(Gamma, U)`` pair explicitly so a
corrupted pair can be fed in and must be caught.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChiralWalkError, UnsupportedPeriod
from .fredholm import fredholm_index
from .lattice import SIDES, StrictlyLocalOperator, downsample, periodic_part, symbol_at
from .numkernel import hermitian_defect, unitarity_defect
from .oracle import MAX_DENSE_DIM, FiniteVector, apply, circulant_spectrum, multiset_distance, symbol_union
from .splitstep import (
    SIGNS,
    SplitStepModel,
    closed_bands,
    essential_spectrum_U,
    half_step_blocks,
    index_pm,
    real_part_blocks,
    side_bands,
)

SYMBOL_TOL = 1e-12
CIRCULANT_TOL = 1e-9
ARC_TOL = 1e-8
SEED = 20240611


@dataclass
class Check:
    name: str
    defect: float
    tol: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "defect": self.defect, "tol": self.tol,
                "passed": self.passed, "note": self.note}


def _phases(count: int = 64) -> np.ndarray:
    rng = np.random.default_rng(SEED)
    return np.exp(2j * np.pi * rng.uniform(size=count))


def _adj(m):
    return np.conj(np.swapaxes(m, -1, -2))


def _coeff_defect(a: StrictlyLocalOperator, b: StrictlyLocalOperator) -> float:
    diff = (a - b).pruned()
    vals = [np.abs(s.all_values()).max() for s in diff.coeffs.values()]
    return float(max(vals, default=0.0))


def _cells_for(op: StrictlyLocalOperator, side, cells: int) -> int:
    per_cell = op.n * op.period(side)
    return max(1, min(int(cells), MAX_DENSE_DIM // per_cell))


def circulant_check(op: StrictlyLocalOperator, side, cells: int) -> Check:
    part = periodic_part(op, side)
    m = _cells_for(part, side, cells)
    ring = circulant_spectrum(part, side, m)
    d = multiset_distance(ring, symbol_union(part, side, m))
    note = f"cells={m}" + ("" if m == cells else f" (capped from {cells})")
    return Check(f"circulant_equality_{side}", d, CIRCULANT_TOL, note)


def check_pair(gamma: StrictlyLocalOperator, walk: StrictlyLocalOperator, model: SplitStepModel,
               samples: int, cells: int) -> list[Check]:
    z = _phases()
    checks = []
    uni, gam_h, gam_u, chi = 0.0, 0.0, 0.0, 0.0
    for side in SIDES:
        n_side = math.lcm(gamma.period(side), walk.period(side))
        G = symbol_at(gamma, side, z, period=n_side)
        U = symbol_at(walk, side, z, period=n_side)
        uni = max(uni, unitarity_defect(U))
        gam_h = max(gam_h, hermitian_defect(G))
        gam_u = max(gam_u, unitarity_defect(G))
        chi = max(chi, float(np.abs(_adj(U) - G @ U @ G).max()))
    checks += [
        Check("symbol_unitarity", uni, SYMBOL_TOL),
        Check("gamma_symbol_hermitian", gam_h, SYMBOL_TOL),
        Check("gamma_symbol_unitarity", gam_u, SYMBOL_TOL),
        Check("chiral_symbol_identity", chi, SYMBOL_TOL),
    ]

    rng = np.random.default_rng(SEED)
    lo, hi = walk.core_window()
    worst = 0.0
    adj = walk.adjoint()
    for _ in range(50):
        v = FiniteVector(lo - 8, rng.normal(size=(hi - lo + 16, 2)) + 1j * rng.normal(size=(hi - lo + 16, 2)))
        lhs = apply(adj, v)
        rhs = apply(gamma, apply(walk, apply(gamma, v)))
        off = lhs.start - rhs.start
        worst = max(worst, float(np.abs(lhs.values - rhs.values[off:off + len(lhs.values)]).max()))
        if off > 0:
            worst = max(worst, float(np.abs(rhs.values[:off]).max()), float(np.abs(rhs.values[off + len(lhs.values):]).max()))
    checks.append(Check("chiral_operator_identity", worst, SYMBOL_TOL, "50 random vectors"))

    for side in SIDES:
        checks.append(circulant_check(walk, side, cells))
    bands = essential_spectrum_U(model, samples)
    far = 0.0
    for side in SIDES:
        part = periodic_part(walk, side)
        ring = circulant_spectrum(part, side, _cells_for(part, side, cells))
        for w in ring:
            off_band = min((max(lo_ - w.real, w.real - hi_, 0.0) for lo_, hi_ in bands.intervals), default=math.inf)
            far = max(far, off_band, abs(abs(w) - 1.0))
    checks.append(Check("circulant_on_arcs", far, ARC_TOL))
    return checks


def check_model(model: SplitStepModel, samples: int, cells: int) -> list[Check]:
    z = _phases()
    checks = []
    blocks = half_step_blocks(model)
    worst = 0.0
    for side in SIDES:
        for sign in SIGNS:
            num = np.linalg.det(2.0 * symbol_at(blocks.f1[sign], side, z))
            closed = blocks.determinant_closed_form(side, sign, z)
            scale = max(float(np.abs(closed).max()), 1e-300)
            worst = max(worst, float(np.abs(num - closed).max()) / scale)
    checks.append(Check("determinant_closed_form", worst, SYMBOL_TOL, "relative"))

    parts = real_part_blocks(model)
    f1m, f1p, f2p, f2m = blocks.f1[-1], blocks.f1[+1], blocks.f2[+1], blocks.f2[-1]
    d = max(
        _coeff_defect(f1m.adjoint() @ f1m - f1p.adjoint() @ f1p, parts.r_plus),
        _coeff_defect(f2m.adjoint() @ f2m - f2p.adjoint() @ f2p, parts.r_minus),
        _coeff_defect(f2m.adjoint() @ f1p - f2p.adjoint() @ f1m, 1j * parts.q),
    )
    checks.append(Check("real_part_identities", d, SYMBOL_TOL))

    report = index_pm(model, samples)
    agree = all(v["agree"] for v in report.per_sign.values())
    checks.append(Check("index_cross_check", 0.0 if agree else 1.0, 0.0))

    for side in SIDES:
        try:
            closed = closed_bands(model, side)
        except UnsupportedPeriod:
            continue
        sampled = side_bands(model, side, samples)
        dist = closed.bands.endpoint_distance(sampled)
        checks.append(Check(f"closed_bands_{side}", dist, max(sampled.resolution, 1e-12),
                            f"period {closed.period}"))
    return checks


def check_operator(op: StrictlyLocalOperator, samples: int, cells: int) -> list[Check]:
    z = _phases()
    checks = []
    adj = op.adjoint()
    worst = 0.0
    for side in SIDES:
        worst = max(worst, float(np.abs(symbol_at(adj, side, z) - _adj(symbol_at(op, side, z))).max()))
    checks.append(Check("adjoint_symbol_identity", worst, SYMBOL_TOL))
    for side in SIDES:
        checks.append(circulant_check(op, side, cells))
        part = periodic_part(op, side)
        base = fredholm_index(part, samples)
        down = fredholm_index(downsample(part, part.period(side)), samples)
        same = base.fredholm == down.fredholm and base.index == down.index
        checks.append(Check(f"downsample_index_{side}", 0.0 if same else 1.0, 0.0))
    return checks


def run_checks(fn, *args) -> list[Check]:
    try:
        return fn(*args)
    except ChiralWalkError as exc:
        return [Check(f"{fn.__name__}_error", math.inf, 0.0, f"{exc.code}: {exc}")]
