"""The chiral split-step walk: operators, Lambda-averaged tails, indices
and essential spectra.

``Gamma = diag(1, L*) C(p) diag(1, L)`` and ``U = Gamma C(a)`` where
``C(s) = [[s, sqrt(1-s^2)], [sqrt(1-s^2), -s]]`` acts pointwise. Both
coefficient sequences ``p`` and ``a`` are scalar
:class:`PeriodicTailSequence` objects with values in [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotFredholm, OutOfDomain, UndefinedProduct, UndefinedQuotient, UnsupportedPeriod
from .fredholm import (
    DEFAULT_SAMPLES,
    SpectralBands,
    branch_ranges,
    fredholm_index,
)
from .lattice import (
    SIDES,
    PeriodicTailSequence,
    StrictlyLocalOperator,
    _lcm,
    _minimal_period,
    normalize_side,
)
from .numkernel import CornerTridiagonal, realize

SIGNS = (+1, -1)
LOG_TOL = 1e-9


def normalize_sign(sign) -> int:
    if sign in (+1, "+", "plus", "+1"):
        return +1
    if sign in (-1, "-", "minus", "-1"):
        return -1
    raise ValueError(f"unknown sign {sign!r}; use 'plus' or 'minus'")


def sign_name(sign: int) -> str:
    return "plus" if sign > 0 else "minus"


# extended half line --------------------------------------------------------

@dataclass(frozen=True)
class ExtendedHalfLine:
    """A number in [0, inf] stored as its logarithm (``-inf`` is 0)."""

    log: float

    @classmethod
    def of(cls, value: float) -> "ExtendedHalfLine":
        if value < 0 or math.isnan(value):
            raise OutOfDomain(f"{value} is not in [0, inf]")
        if value == 0:
            return cls(-math.inf)
        return cls(math.log(value))

    @property
    def value(self) -> float:
        return math.exp(self.log) if self.log < 709.0 else math.inf

    def is_zero(self) -> bool:
        return self.log == -math.inf

    def is_infinite(self) -> bool:
        return self.log == math.inf

    def __mul__(self, other: "ExtendedHalfLine") -> "ExtendedHalfLine":
        if {self.log, other.log} == {-math.inf, math.inf}:
            raise UndefinedProduct("0 * inf is left undefined")
        return ExtendedHalfLine(self.log + other.log)

    def __pow__(self, r: float) -> "ExtendedHalfLine":
        if r == 0:
            if math.isinf(self.log):
                raise UndefinedProduct("0**0 and inf**0 are left undefined")
            return ExtendedHalfLine(0.0)
        return ExtendedHalfLine(self.log * r)

    def inverse(self) -> "ExtendedHalfLine":
        return ExtendedHalfLine(-self.log)


def _check_unit_interval(s: float) -> float:
    s = float(s)
    if not -1.0 <= s <= 1.0:
        raise OutOfDomain(f"{s} is not in [-1, 1]")
    return s


def lambda_map(s: float) -> ExtendedHalfLine:
    """``(1 + s) / (1 - s)`` as an extended half-line value."""
    s = _check_unit_interval(s)
    if s == 1.0:
        return ExtendedHalfLine(math.inf)
    if s == -1.0:
        return ExtendedHalfLine(-math.inf)
    return ExtendedHalfLine(2.0 * math.atanh(s))


def lambda_inverse(v: ExtendedHalfLine) -> float:
    if v.log == math.inf:
        return 1.0
    if v.log == -math.inf:
        return -1.0
    return math.tanh(v.log / 2.0)


def _log_lambda(s: float) -> float:
    return lambda_map(s).log


# model ---------------------------------------------------------------------

def _as_scalar_sequence(s) -> PeriodicTailSequence:
    if isinstance(s, PeriodicTailSequence):
        seq = s
    else:
        seq = PeriodicTailSequence.constant(float(s))
    if seq.value_shape != ():
        raise ValueError("split-step parameters must be scalar sequences")
    return seq.map(lambda v: np.asarray(v, dtype=float))


def _sqrt_clip(v):
    return np.sqrt(np.clip(v, 0.0, None))


@dataclass(frozen=True, eq=False)
class SplitStepModel:
    """Parameter sequences ``p`` and ``a`` of the split-step walk."""

    p: PeriodicTailSequence
    a: PeriodicTailSequence

    def __post_init__(self):
        p = _as_scalar_sequence(self.p)
        a = _as_scalar_sequence(self.a)
        for name, s in (("p", p), ("a", a)):
            vals = s.all_values()
            if not np.all(np.isfinite(vals)):
                raise OutOfDomain(f"{name} has non-finite values")
            if np.any(np.abs(vals) > 1.0):
                raise OutOfDomain(f"{name} leaves [-1, 1]", name=name)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_tails(cls, p_left, p_right, a_left, a_right, p_core=(), a_core=(),
                   p_start=0, a_start=0) -> "SplitStepModel":
        return cls(
            PeriodicTailSequence.from_tails(np.asarray(p_left, float), np.asarray(p_right, float),
                                            np.asarray(p_core, float), p_start),
            PeriodicTailSequence.from_tails(np.asarray(a_left, float), np.asarray(a_right, float),
                                            np.asarray(a_core, float), a_start),
        )

    def sup_abs(self) -> float:
        return float(max(np.abs(self.p.all_values()).max(), np.abs(self.a.all_values()).max()))

    def is_strict(self) -> bool:
        """``sup |p| < 1`` and ``sup |a| < 1``."""
        return self.sup_abs() < 1.0

    def period(self, side) -> int:
        return _lcm(self.p.period(side), self.a.period(side))

    def minimal_period(self, side) -> int:
        side = normalize_side(side)
        n = self.period(side)
        table = np.stack([self.p.tail_table(side, n), self.a.tail_table(side, n)], axis=1)
        return _minimal_period(table)

    def tails(self, side, period: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        n = self.period(side) if period is None else period
        return self.p.tail_table(side, n), self.a.tail_table(side, n)

    # derived sequences
    def plus(self, name: str) -> PeriodicTailSequence:
        return getattr(self, name).map(lambda v: _sqrt_clip(1.0 + v))

    def minus(self, name: str) -> PeriodicTailSequence:
        return getattr(self, name).map(lambda v: _sqrt_clip(1.0 - v))

    def co(self, name: str) -> PeriodicTailSequence:
        """``sqrt(1 - s^2)`` for ``s`` = p or a."""
        return getattr(self, name).map(lambda v: _sqrt_clip(1.0 - v * v))

    def to_dict(self) -> dict:
        def seq(s):
            out = {"left_period": s.left_tail.tolist(), "right_period": s.right_tail.tolist()}
            if len(s.core_values):
                out["core"] = {"start": s.core_start, "values": s.core_values.tolist()}
            return out

        return {"kind": "splitstep", "p": seq(self.p), "a": seq(self.a)}


def tail_average(model: SplitStepModel, side) -> tuple[float, float]:
    """Lambda-averaged limits ``(p(side), a(side))`` of the periodic tails."""
    return tuple(_average_tail(getattr(model, name).tail(side)) for name in ("p", "a"))


def _average_tail(tail) -> float:
    tail = np.asarray(tail, dtype=float)
    if np.all(tail == tail[0]):
        return float(tail[0])  # skip the tanh/atanh round trip
    logs = [_log_lambda(s) for s in tail]
    if math.inf in logs and -math.inf in logs:
        raise UndefinedQuotient("tail contains both +1 and -1")
    total = math.fsum(logs) if not any(math.isinf(v) for v in logs) else sum(logs)
    return lambda_inverse(ExtendedHalfLine(total / len(logs)))


# operators -----------------------------------------------------------------

def _mult(seq: PeriodicTailSequence) -> StrictlyLocalOperator:
    return StrictlyLocalOperator.multiplication(seq)


def _coin(s: PeriodicTailSequence) -> StrictlyLocalOperator:
    def mat(v):
        c = _sqrt_clip(1.0 - v * v)
        return np.stack([np.stack([v, c], -1), np.stack([c, -v], -1)], -2)

    return StrictlyLocalOperator(2, {0: s.map(mat)})


def _half_shift(power: int) -> StrictlyLocalOperator:
    one = StrictlyLocalOperator.identity(1)
    return StrictlyLocalOperator.from_blocks([[one, None], [None, StrictlyLocalOperator.shift(power)]])


def gamma_operator(model: SplitStepModel) -> StrictlyLocalOperator:
    return (_half_shift(-1) @ _coin(model.p) @ _half_shift(1)).pruned()


def evolution_operator(model: SplitStepModel) -> StrictlyLocalOperator:
    return (gamma_operator(model) @ _coin(model.a)).pruned()


def coin_operator(model: SplitStepModel) -> StrictlyLocalOperator:
    """The pointwise coin ``C(a)``."""
    return _coin(model.a)


@dataclass
class HalfStepBlocks:
    """Entries of ``eta* eps = [[F1-, F2+], [F1+, F2-]]``."""

    f1: dict
    f2: dict
    model: SplitStepModel

    def determinant_closed_form(self, side, sign, z):
        """``det 2 F1(side, z)`` from the product of the two diagonals."""
        sign = normalize_sign(sign)
        p, a = self.model.tails(side)
        n = len(p)
        p_p, p_m = np.sqrt(1 + p), np.sqrt(1 - p)
        a_same, a_opp = np.sqrt(1 + sign * a), np.sqrt(1 - sign * a)
        f0 = -sign * p_p * a_opp
        f_minus = a_same * np.roll(p_m, 1)
        zz = np.asarray(z, dtype=complex)
        return np.prod(f0) + (-1) ** (n + 1) * np.prod(f_minus) * np.conj(zz)


def half_step_blocks(model: SplitStepModel) -> HalfStepBlocks:
    """``2 F1,s = -s p+ a-s + as L* p-`` and ``2 F2,s = -s p- as + a-s L* p+``.

    Built by expanding ``eta* eps`` so the closed forms are checked, not
    assumed.
    """
    one = StrictlyLocalOperator.identity(1)
    Ls = StrictlyLocalOperator.shift(-1)
    pp, pm = _mult(model.plus("p")), _mult(model.minus("p"))
    ap, am = _mult(model.plus("a")), _mult(model.minus("a"))
    eps = StrictlyLocalOperator.from_blocks([[one, None], [None, Ls]]) @ StrictlyLocalOperator.from_blocks(
        [[pp, -pm], [pm, pp]]
    )
    eta = StrictlyLocalOperator.from_blocks([[ap, -am], [am, ap]])
    # both factors carry 1/sqrt(2)
    F = (0.5 * (eta.adjoint() @ eps)).pruned()
    return HalfStepBlocks(
        f1={-1: F.block(0, 0).pruned(), +1: F.block(1, 0).pruned()},
        f2={+1: F.block(0, 1).pruned(), -1: F.block(1, 1).pruned()},
        model=model,
    )


@dataclass
class RealPartBlocks:
    r_plus: StrictlyLocalOperator
    r_minus: StrictlyLocalOperator
    q: StrictlyLocalOperator


def real_part_blocks(model: SplitStepModel) -> RealPartBlocks:
    """The diagonal real-part blocks and the off-diagonal imaginary block
    of ``U`` in the frame that diagonalizes ``Gamma``."""
    L = StrictlyLocalOperator.shift(1)
    Ls = StrictlyLocalOperator.shift(-1)
    pp, pm = _mult(model.plus("p")), _mult(model.minus("p"))
    b = model.co("a")
    q = _mult(model.co("p"))
    a = model.a
    a_next = a.shifted(1)
    one_p = model.p.map(lambda v: 1.0 + v)
    one_m = model.p.map(lambda v: 1.0 - v)
    ppb = _mult(PeriodicTailSequence.combine([model.plus("p"), b], np.multiply))
    pmb = _mult(PeriodicTailSequence.combine([model.minus("p"), b], np.multiply))

    def prod(x, y):
        return _mult(PeriodicTailSequence.combine([x, y], np.multiply))

    r_plus = pm @ L @ ppb + ppb @ Ls @ pm + prod(one_p, a) - prod(one_m, a_next)
    r_minus = pp @ L @ pmb + pmb @ Ls @ pp - prod(one_m, a) + prod(one_p, a_next)
    minus_2i_q = pp @ L @ ppb - pmb @ Ls @ pm - q @ _mult(PeriodicTailSequence.combine([a, a_next], np.add))
    return RealPartBlocks(
        r_plus=(0.5 * r_plus).pruned(),
        r_minus=(0.5 * r_minus).pruned(),
        q=(0.5j * minus_2i_q).pruned(),
    )


def real_part_symbol(model: SplitStepModel, side, sign, period: int | None = None) -> CornerTridiagonal:
    """Corner-tridiagonal symbol of the real-part block for ``sign`` on ``side``.

    ``diag[m] = ((p+-1) a + (p-+1) a(+1))_m / 2`` and
    ``off[m] = sqrt((1-+p_m)(1+-p_{m+1})(1-a_{m+1}^2)) / 2``, indices cyclic.
    """
    sign = normalize_sign(sign)
    p, a = model.tails(side, period)
    p1, a1 = np.roll(p, -1), np.roll(a, -1)
    diag = ((p + sign) * a + (p - sign) * a1) / 2.0
    off = _sqrt_clip((1 - sign * p) * (1 + sign * p1) * (1 - a1 * a1)) / 2.0
    return CornerTridiagonal(diag, off)


def real_part_matrix(model: SplitStepModel, side, sign, z) -> np.ndarray:
    return realize(real_part_symbol(model, side, sign), z)


# indices -------------------------------------------------------------------

def _log_products(model: SplitStepModel, side, sign: int) -> tuple[float, float]:
    """``log prod (1+p)(1-+a)`` and ``log prod (1-p)(1+-a)`` over one period."""
    p, a = model.tails(side)
    with np.errstate(divide="ignore"):
        first = np.log1p(p) + np.log1p(-sign * a)
        second = np.log1p(-p) + np.log1p(sign * a)
    return float(np.sum(first)), float(np.sum(second))


def _side_verdict(model: SplitStepModel, side, sign: int) -> dict:
    first, second = _log_products(model, side, sign)
    if first == second:
        return {"fredholm": False, "orientation": 0, "gap": 0.0, "near_degenerate": False}
    if math.isinf(first) or math.isinf(second):
        gap = math.inf
    else:
        gap = abs(first - second)
    fredholm = gap > LOG_TOL
    return {
        "fredholm": fredholm,
        "orientation": (1 if first > second else -1) if fredholm else 0,
        "gap": gap,
        "near_degenerate": not fredholm,
    }


@dataclass
class ChiralIndexReport:
    """Per-sign Fredholm verdicts and indices of the chiral pair."""

    per_sign: dict = field(default_factory=dict)
    limits: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def fredholm(self) -> bool:
        return all(v["fredholm"] for v in self.per_sign.values())

    def index(self, sign) -> int | None:
        return self.per_sign[sign_name(normalize_sign(sign))]["index"]

    def require_fredholm(self) -> "ChiralIndexReport":
        if not self.fredholm:
            bad = {
                s: {side: v["sides"][side]["fredholm"] for side in SIDES}
                for s, v in self.per_sign.items() if not v["fredholm"]
            }
            raise NotFredholm(f"+-1 lies in the essential spectrum: {bad}", sides=bad)
        return self

    def to_dict(self) -> dict:
        return {
            "fredholm": self.fredholm,
            "ind_plus": self.per_sign["plus"]["index"],
            "ind_minus": self.per_sign["minus"]["index"],
            "per_sign": self.per_sign,
            "limits": self.limits,
            "warnings": list(self.warnings),
        }


def index_pm(model: SplitStepModel, samples: int = DEFAULT_SAMPLES, cross_check: bool = True) -> ChiralIndexReport:
    """Fredholm test and indices ``ind_+-`` from the Lambda-averaged limits,
    cross-checked against the winding of ``det F1,+-`` on each side."""
    report = ChiralIndexReport()
    for side in SIDES:
        try:
            p_lim, a_lim = tail_average(model, side)
            report.limits[side] = {"p": p_lim, "a": a_lim}
        except UndefinedQuotient as exc:
            report.limits[side] = {"p": None, "a": None, "error": exc.code}
    blocks = half_step_blocks(model) if cross_check else None
    for sign in SIGNS:
        name = sign_name(sign)
        sides = {side: _side_verdict(model, side, sign) for side in SIDES}
        for side, v in sides.items():
            if v["near_degenerate"] and v["gap"] > 0:
                report.warnings.append(
                    f"NearDegenerate: sign {name} side {side} log-product gap {v['gap']:.3e}"
                )
        fredholm = all(v["fredholm"] for v in sides.values())
        entry = {"fredholm": fredholm, "sides": sides, "index": None,
                 "winding_index": None, "windings": None, "agree": None}
        if fredholm:
            entry["index"] = (sides["R"]["orientation"] - sides["L"]["orientation"]) // 2
        if cross_check:
            wr = fredholm_index(blocks.f1[sign], samples=samples)
            entry["windings"] = {"L": wr.wn_left, "R": wr.wn_right}
            entry["winding_index"] = wr.index
            entry["agree"] = (wr.fredholm == fredholm) and (wr.index == entry["index"])
            if not entry["agree"]:
                report.warnings.append(f"CrossCheckMismatch: sign {name}")
        report.per_sign[name] = entry
    return report


# spectra -------------------------------------------------------------------

def _family(model: SplitStepModel, side, sign):
    t_sym = real_part_symbol(model, side, sign)
    return lambda t: realize(t_sym, np.exp(1j * np.asarray(t, dtype=float)))


def real_part_bands(model: SplitStepModel, side, sign, samples: int = DEFAULT_SAMPLES,
                    refine: bool = True) -> SpectralBands:
    ranges, res = branch_ranges(_family(model, side, sign), samples, refine)
    return SpectralBands.from_intervals(ranges, res)


def side_bands(model: SplitStepModel, side, samples: int = DEFAULT_SAMPLES,
               refine: bool = True) -> SpectralBands:
    """``E(side)``: union over the phase of both real-part symbol spectra."""
    out = real_part_bands(model, side, +1, samples, refine)
    return out.union(real_part_bands(model, side, -1, samples, refine))


def essential_spectrum_U(model: SplitStepModel, samples: int = DEFAULT_SAMPLES,
                         refine: bool = True) -> SpectralBands:
    """Real-part bands ``E(L) u E(R)``; ``.arcs`` gives the spectrum of U."""
    return side_bands(model, "L", samples, refine).union(side_bands(model, "R", samples, refine))


@dataclass
class ClosedBands:
    bands: SpectralBands
    period: int
    singleton: bool
    connected: bool
    parameters: dict

    def to_dict(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.bands.intervals],
            "period": self.period,
            "singleton": self.singleton,
            "connected": self.connected,
            "parameters": self.parameters,
        }


def closed_bands(model: SplitStepModel, side) -> ClosedBands:
    """Exact band edges for tails of (minimal) period 1 or 2."""
    n = model.minimal_period(side)
    p, a = (t[:n] for t in model.tails(side))
    q, b = _sqrt_clip(1 - p * p), _sqrt_clip(1 - a * a)
    if n == 1:
        mid, half = float(p[0] * a[0]), float(q[0] * b[0])
        return ClosedBands(
            SpectralBands.from_intervals([(mid - half, mid + half)]),
            1, half == 0.0, True, {"pa": mid, "qb": half},
        )
    if n != 2:
        raise UnsupportedPeriod(f"no closed form for tail period {n}", period=n)
    d = float((p[0] + p[1]) * (a[0] + a[1]) / 4.0)
    base = 2.0 - (1.0 + p[0] * p[1]) * (1.0 + a[0] * a[1])
    cross = float(q[0] * q[1] * b[0] * b[1])
    d1, d2 = float((base - cross) / 2.0), float((base + cross) / 2.0)
    r1, r2 = math.sqrt(max(d * d + d1, 0.0)), math.sqrt(max(d * d + d2, 0.0))
    lower = (d - r2, d - r1)
    upper = (d + r1, d + r2)
    return ClosedBands(
        SpectralBands.from_intervals([lower, upper]),
        2, cross == 0.0, r1 == 0.0, {"d": d, "d1": d1, "d2": d2},
    )
