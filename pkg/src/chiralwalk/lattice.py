"""Eventually periodic coefficient sequences and strictly local operators.

A strictly local operator acts on l^2(Z, C^n) as

    (A psi)(x) = sum_k A_k(x) psi(x + k),      |k| <= k0,

i.e. ``A = sum_k A_k L^k`` with the left shift ``(L psi)(x) = psi(x + 1)``.
Coefficients are stored as :class:`PeriodicTailSequence` objects: a finite
core table plus exactly periodic left and right tails. The tail value at
site ``x`` is always ``tail[x mod n]``, independent of where the core sits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import NonFinite, PeriodMismatch, ShapeMismatch
from .numkernel import check_unit_phase

SIDES = ("L", "R")
_SIDE_ALIASES = {
    "L": "L", "l": "L", "left": "L", "-inf": "L", "-": "L",
    "R": "R", "r": "R", "right": "R", "+inf": "R", "inf": "R", "+": "R",
}


def normalize_side(side) -> str:
    try:
        return _SIDE_ALIASES[str(side)]
    except KeyError:
        raise ValueError(f"unknown side {side!r}; use 'L' or 'R'") from None


def _lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def _minimal_period(tail: np.ndarray) -> int:
    n = tail.shape[0]
    for d in range(1, n + 1):
        if n % d == 0 and np.array_equal(tail, np.roll(tail, -d, axis=0)):
            return d
    return n


@dataclass(frozen=True, eq=False)
class PeriodicTailSequence:
    """Sequence on Z: ``core_values`` on ``[core_start, core_start + len)``,
    periodic tails elsewhere. Values may be scalars or arrays of any fixed
    shape (the leading axis of each table indexes sites/phases)."""

    core_start: int
    core_values: np.ndarray
    left_tail: np.ndarray
    right_tail: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left_tail)
        right = np.asarray(self.right_tail)
        if left.ndim == 0 or right.ndim == 0 or len(left) == 0 or len(right) == 0:
            raise ValueError("tails must contain at least one value")
        shape = left.shape[1:]
        core = np.asarray(self.core_values)
        if core.size == 0:
            core = np.zeros((0,) + shape, dtype=left.dtype)
        if right.shape[1:] != shape or core.shape[1:] != shape:
            raise ShapeMismatch("core and tail values must share one shape")
        dtype = np.result_type(left, right, core)
        object.__setattr__(self, "core_start", int(self.core_start))
        object.__setattr__(self, "core_values", core.astype(dtype))
        object.__setattr__(self, "left_tail", left.astype(dtype))
        object.__setattr__(self, "right_tail", right.astype(dtype))

    # construction ----------------------------------------------------
    @classmethod
    def constant(cls, value) -> "PeriodicTailSequence":
        v = np.asarray(value)[None]
        return cls(0, v[:0], v, v)

    @classmethod
    def periodic(cls, tail) -> "PeriodicTailSequence":
        t = np.asarray(tail)
        return cls(0, t[:0], t, t)

    @classmethod
    def from_tails(cls, left, right, core=(), core_start=0) -> "PeriodicTailSequence":
        left = np.asarray(left)
        right = np.asarray(right)
        core = np.asarray(core, dtype=np.result_type(left, right))
        if core.size == 0:
            core = np.zeros((0,) + left.shape[1:], dtype=core.dtype)
        return cls(core_start, core, left, right)

    # shape information ----------------------------------------------
    @property
    def core_end(self) -> int:
        return self.core_start + len(self.core_values)

    @property
    def left_period(self) -> int:
        return len(self.left_tail)

    @property
    def right_period(self) -> int:
        return len(self.right_tail)

    @property
    def value_shape(self) -> tuple:
        return self.left_tail.shape[1:]

    def period(self, side) -> int:
        return self.left_period if normalize_side(side) == "L" else self.right_period

    def tail(self, side) -> np.ndarray:
        return self.left_tail if normalize_side(side) == "L" else self.right_tail

    def tail_table(self, side, period: int | None = None) -> np.ndarray:
        """Limit values ``lim s(n x + m)`` for ``m = 0..n-1``, for any
        multiple ``n`` of the side's own period."""
        t = self.tail(side)
        n = len(t) if period is None else int(period)
        if n % len(t):
            raise PeriodMismatch(f"period {n} is not a multiple of {len(t)}")
        return t[np.arange(n) % len(t)]

    # evaluation -------------------------------------------------------
    def value_at(self, x: int):
        x = int(x)
        if x < self.core_start:
            return self.left_tail[x % self.left_period]
        if x >= self.core_end:
            return self.right_tail[x % self.right_period]
        return self.core_values[x - self.core_start]

    __call__ = value_at

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Stacked values on the integer range ``[lo, hi)``."""
        xs = np.arange(lo, hi)
        out = np.empty((len(xs),) + self.value_shape, dtype=self.left_tail.dtype)
        left = xs < self.core_start
        right = xs >= self.core_end
        mid = ~(left | right)
        out[left] = self.left_tail[xs[left] % self.left_period]
        out[right] = self.right_tail[xs[right] % self.right_period]
        out[mid] = self.core_values[xs[mid] - self.core_start]
        return out

    def all_values(self) -> np.ndarray:
        """Every value the sequence takes (core and both tails)."""
        return np.concatenate([self.core_values, self.left_tail, self.right_tail])

    # transformations --------------------------------------------------
    def shifted(self, k: int) -> "PeriodicTailSequence":
        """The sequence ``x -> s(x + k)``."""
        k = int(k)
        return PeriodicTailSequence(
            self.core_start - k,
            self.core_values,
            np.roll(self.left_tail, -k, axis=0),
            np.roll(self.right_tail, -k, axis=0),
        )

    def map(self, fn) -> "PeriodicTailSequence":
        """Apply a stack-wise function (leading axis = sites) to every table."""
        return PeriodicTailSequence(
            self.core_start,
            np.asarray(fn(self.core_values)),
            np.asarray(fn(self.left_tail)),
            np.asarray(fn(self.right_tail)),
        )

    def aligned(self, lo: int, hi: int, n_left: int, n_right: int) -> "PeriodicTailSequence":
        """Same sequence re-expressed with core window ``[lo, hi)`` and tail
        periods ``n_left``/``n_right``; the window must cover the current core."""
        if lo > self.core_start or hi < self.core_end:
            raise ValueError("aligned window must contain the core")
        if n_left % self.left_period or n_right % self.right_period:
            raise PeriodMismatch("aligned periods must be multiples of the tails")
        return PeriodicTailSequence(
            lo,
            self.values(lo, hi),
            self.tail_table("L", n_left),
            self.tail_table("R", n_right),
        )

    @staticmethod
    def combine(seqs, fn) -> "PeriodicTailSequence":
        """Pointwise ``fn(*values)`` over sequences with possibly different
        cores and periods."""
        seqs = list(seqs)
        lo = min(s.core_start for s in seqs)
        hi = max(s.core_end for s in seqs)
        nl = _lcm(*(s.left_period for s in seqs))
        nr = _lcm(*(s.right_period for s in seqs))
        al = [s.aligned(lo, hi, nl, nr) for s in seqs]
        return PeriodicTailSequence(
            lo,
            np.asarray(fn(*(s.core_values for s in al))),
            np.asarray(fn(*(s.left_tail for s in al))),
            np.asarray(fn(*(s.right_tail for s in al))),
        )

    def simplified(self) -> "PeriodicTailSequence":
        """Canonical form: minimal tail periods, core trimmed where it
        already agrees with the tails."""
        left = self.left_tail[: _minimal_period(self.left_tail)]
        right = self.right_tail[: _minimal_period(self.right_tail)]
        start, core = self.core_start, self.core_values
        while len(core) and np.array_equal(core[0], left[start % len(left)]):
            core = core[1:]
            start += 1
        end = start + len(core)
        while len(core) and np.array_equal(core[-1], right[(end - 1) % len(right)]):
            core = core[:-1]
            end -= 1
        return PeriodicTailSequence(start, core, left, right)

    def is_purely_periodic(self) -> bool:
        s = self.simplified()
        return (
            len(s.core_values) == 0
            and s.left_period == s.right_period
            and np.array_equal(s.left_tail, s.right_tail)
        )

    def equals(self, other: "PeriodicTailSequence", atol: float = 0.0) -> bool:
        a, b = self, other
        lo = min(a.core_start, b.core_start)
        hi = max(a.core_end, b.core_end)
        nl = _lcm(a.left_period, b.left_period)
        nr = _lcm(a.right_period, b.right_period)
        a = a.aligned(lo, hi, nl, nr)
        b = b.aligned(lo, hi, nl, nr)
        return all(
            np.allclose(x, y, rtol=0.0, atol=atol)
            for x, y in (
                (a.core_values, b.core_values),
                (a.left_tail, b.left_tail),
                (a.right_tail, b.right_tail),
            )
        )


@dataclass(frozen=True)
class AsymptoticProfile:
    """Limit tables ``a^k(side, m)`` of an operator, stacked ``(n_side, n, n)``."""

    side: str
    period: int
    limits: dict


@dataclass(frozen=True, eq=False)
class StrictlyLocalOperator:
    """``sum_k A_k L^k`` with ``n x n`` matrix-valued coefficient sequences."""

    n: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for k, seq in self.coeffs.items():
            if seq.value_shape != (self.n, self.n):
                raise ShapeMismatch(
                    f"coefficient {k} has value shape {seq.value_shape}, "
                    f"expected {(self.n, self.n)}"
                )
            cleaned[int(k)] = seq.map(lambda v: np.asarray(v, dtype=complex))
        object.__setattr__(self, "coeffs", dict(sorted(cleaned.items())))

    # factories ------------------------------------------------------
    @classmethod
    def identity(cls, n: int = 1) -> "StrictlyLocalOperator":
        return cls(n, {0: PeriodicTailSequence.constant(np.eye(n))})

    @classmethod
    def shift(cls, power: int = 1, n: int = 1) -> "StrictlyLocalOperator":
        """``L**power`` acting diagonally on C^n."""
        return cls(n, {int(power): PeriodicTailSequence.constant(np.eye(n))})

    @classmethod
    def multiplication(cls, seq: PeriodicTailSequence) -> "StrictlyLocalOperator":
        """Multiplication by a scalar (n=1) or matrix-valued sequence."""
        if seq.value_shape == ():
            seq = seq.map(lambda v: np.asarray(v)[:, None, None])
        return cls(seq.value_shape[0], {0: seq})

    @classmethod
    def from_blocks(cls, blocks) -> "StrictlyLocalOperator":
        """Assemble an operator on C^(b*m) from a ``b x b`` grid of
        m-dimensional operators (entries may be ``None`` for zero)."""
        b = len(blocks)
        m = next(op.n for row in blocks for op in row if op is not None)
        ks = sorted({k for row in blocks for op in row if op is not None for k in op.coeffs})
        zero = PeriodicTailSequence.constant(np.zeros((m, m), dtype=complex))
        coeffs = {}
        for k in ks:
            grid = [
                [
                    op.coeffs.get(k, zero) if op is not None else zero
                    for op in row
                ]
                for row in blocks
            ]
            flat = [s for row in grid for s in row]

            def assemble(*vals, _b=b):
                rows = [np.concatenate(vals[i * _b:(i + 1) * _b], axis=-1) for i in range(_b)]
                return np.concatenate(rows, axis=-2)

            coeffs[k] = PeriodicTailSequence.combine(flat, assemble)
        return cls(b * m, coeffs)

    # structure ------------------------------------------------------
    @property
    def k0(self) -> int:
        return max((abs(k) for k in self.coeffs), default=0)

    def periods(self) -> tuple[int, int]:
        """Common ``(n_L, n_R)``: the lcm over all coefficient tails."""
        seqs = list(self.coeffs.values()) or [PeriodicTailSequence.constant(0.0)]
        return (
            _lcm(*(s.left_period for s in seqs)),
            _lcm(*(s.right_period for s in seqs)),
        )

    def period(self, side) -> int:
        return self.periods()[0 if normalize_side(side) == "L" else 1]

    def core_window(self) -> tuple[int, int]:
        seqs = list(self.coeffs.values())
        if not seqs:
            return (0, 0)
        return min(s.core_start for s in seqs), max(s.core_end for s in seqs)

    def aligned(self) -> "StrictlyLocalOperator":
        lo, hi = self.core_window()
        nl, nr = self.periods()
        return StrictlyLocalOperator(
            self.n, {k: s.aligned(lo, hi, nl, nr) for k, s in self.coeffs.items()}
        )

    def coefficient(self, k: int, x: int) -> np.ndarray:
        seq = self.coeffs.get(int(k))
        if seq is None:
            return np.zeros((self.n, self.n), dtype=complex)
        return seq.value_at(x)

    def block(self, i: int, j: int) -> "StrictlyLocalOperator":
        """Scalar operator sitting in entry ``(i, j)`` of every coefficient."""
        return StrictlyLocalOperator(
            1, {k: s.map(lambda v: v[:, i:i + 1, j:j + 1]) for k, s in self.coeffs.items()}
        )

    def is_purely_periodic(self) -> bool:
        return all(s.is_purely_periodic() for s in self.coeffs.values())

    def profile(self, side) -> AsymptoticProfile:
        side = normalize_side(side)
        n_side = self.period(side)
        return AsymptoticProfile(
            side, n_side, {k: s.tail_table(side, n_side) for k, s in self.coeffs.items()}
        )

    # algebra ----------------------------------------------------------
    def _binary(self, other, fn) -> "StrictlyLocalOperator":
        if self.n != other.n:
            raise ShapeMismatch("operator dimensions differ")
        zero = PeriodicTailSequence.constant(np.zeros((self.n, self.n), dtype=complex))
        ks = sorted(set(self.coeffs) | set(other.coeffs))
        return StrictlyLocalOperator(
            self.n,
            {
                k: PeriodicTailSequence.combine(
                    [self.coeffs.get(k, zero), other.coeffs.get(k, zero)], fn
                )
                for k in ks
            },
        )

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, c) -> "StrictlyLocalOperator":
        return StrictlyLocalOperator(self.n, {k: s.map(lambda v: c * v) for k, s in self.coeffs.items()})

    __rmul__ = scaled

    def __matmul__(self, other: "StrictlyLocalOperator") -> "StrictlyLocalOperator":
        # (AB)_k(x) = sum_{k1 + k2 = k} A_k1(x) B_k2(x + k1)
        if self.n != other.n:
            raise ShapeMismatch("operator dimensions differ")
        terms: dict[int, list] = {}
        for k1, a in self.coeffs.items():
            for k2, b in other.coeffs.items():
                prod = PeriodicTailSequence.combine([a, b.shifted(k1)], np.matmul)
                terms.setdefault(k1 + k2, []).append(prod)
        coeffs = {
            k: PeriodicTailSequence.combine(parts, lambda *vs: sum(vs))
            for k, parts in terms.items()
        }
        return StrictlyLocalOperator(self.n, coeffs)

    def adjoint(self) -> "StrictlyLocalOperator":
        # (A*)_k(x) = A_{-k}(x + k)^*
        return StrictlyLocalOperator(
            self.n,
            {
                -k: s.shifted(-k).map(lambda v: np.conj(np.swapaxes(v, -1, -2)))
                for k, s in self.coeffs.items()
            },
        )

    def pruned(self, atol: float = 0.0) -> "StrictlyLocalOperator":
        """Drop coefficient sequences that vanish identically."""
        keep = {
            k: s for k, s in self.coeffs.items()
            if np.max(np.abs(s.all_values()), initial=0.0) > atol
        }
        return StrictlyLocalOperator(self.n, keep)

    def equals(self, other: "StrictlyLocalOperator", atol: float = 0.0) -> bool:
        if self.n != other.n:
            return False
        zero = PeriodicTailSequence.constant(np.zeros((self.n, self.n), dtype=complex))
        return all(
            self.coeffs.get(k, zero).equals(other.coeffs.get(k, zero), atol)
            for k in set(self.coeffs) | set(other.coeffs)
        )


# symbols ----------------------------------------------------------------

def symbol_coefficients(op: StrictlyLocalOperator, side, period: int | None = None) -> dict:
    """Laurent coefficients ``{p: C_p}`` with ``A(side, z) = sum_p C_p z^p``.

    The symbol has dimension ``n * n_side`` and block layout ``(i, m)``:
    block ``(i, j)`` is ``sum_k diag(a_ij^k(side, .)) S(z)^k`` where ``S`` is
    the cyclic shift on C^n_side whose wrap-around entry carries ``z``.
    ``period`` may be any multiple of the operator's own period on ``side``.
    """
    side = normalize_side(side)
    n_side = op.period(side) if period is None else int(period)
    n = op.n
    dim = n * n_side
    out: dict[int, np.ndarray] = {}
    rows = np.arange(n_side)
    for k, seq in op.coeffs.items():
        table = seq.tail_table(side, n_side)  # (n_side, n, n)
        cols = (rows + k) % n_side
        powers = (rows + k) // n_side
        for r in rows:
            mat = out.setdefault(int(powers[r]), np.zeros((dim, dim), dtype=complex))
            # entry ((i, r), (j, c)) += a_ij^k(r)
            mat[r::n_side, cols[r]::n_side] += table[r]
    return out


def symbol_at(op: StrictlyLocalOperator, side, z, period: int | None = None) -> np.ndarray:
    """Symbol matrix at ``z`` (or a stack for an array of phases)."""
    zz = check_unit_phase(z)
    coeffs = symbol_coefficients(op, side, period)
    dim = op.n * (op.period(side) if period is None else int(period))
    out = np.zeros(zz.shape + (dim, dim), dtype=complex)
    for p, c in coeffs.items():
        out += (zz ** p)[..., None, None] * c
    return out


def periodic_part(op: StrictlyLocalOperator, side) -> StrictlyLocalOperator:
    """The purely periodic operator built from one side's tails."""
    n_side = op.period(side)
    return StrictlyLocalOperator(
        op.n,
        {k: PeriodicTailSequence.periodic(s.tail_table(side, n_side)) for k, s in op.coeffs.items()},
    )


# downsampling -----------------------------------------------------------

def downsample(op: StrictlyLocalOperator, m: int) -> StrictlyLocalOperator:
    """Regroup ``m`` consecutive sites into one cell.

    The result is the ``m*n``-dimensional operator whose cell-``y`` state is
    ``(psi_i(m y + r))`` in block layout ``(i, r)``. All tail periods must
    divide ``m`` so the regrouped coefficients have period-1 tails.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be positive")
    nl, nr = op.periods()
    if m % nl or m % nr:
        raise PeriodMismatch(f"tail periods ({nl}, {nr}) must divide m={m}")
    n = op.n
    dim = n * m
    lo, hi = op.core_window()
    cell_lo = lo // m
    cell_hi = -((-hi) // m)
    if cell_hi < cell_lo:
        cell_hi = cell_lo
    probe_cells = list(range(cell_lo, cell_hi)) + [cell_lo - 1, cell_hi]

    tables: dict[int, dict[int, np.ndarray]] = {}
    for cell in probe_cells:
        for k, seq in op.coeffs.items():
            for r in range(m):
                val = seq.value_at(m * cell + r)
                c = (r + k) % m
                j = (r + k) // m
                mats = tables.setdefault(j, {})
                mat = mats.setdefault(cell, np.zeros((dim, dim), dtype=complex))
                mat[r::m, c::m] += val
    coeffs = {}
    zero = np.zeros((dim, dim), dtype=complex)
    for j, by_cell in tables.items():
        core = np.array([by_cell.get(c, zero) for c in range(cell_lo, cell_hi)]).reshape(-1, dim, dim)
        left = by_cell.get(cell_lo - 1, zero)[None]
        right = by_cell.get(cell_hi, zero)[None]
        coeffs[j] = PeriodicTailSequence(cell_lo, core, left, right)
    return StrictlyLocalOperator(dim, coeffs)


# validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    violations: list
    operator: StrictlyLocalOperator | None = None


def validate(op: StrictlyLocalOperator) -> ValidationReport:
    """Check the invariants the engines rely on. Never raises."""
    violations = []
    periods = {(s.left_period, s.right_period) for s in op.coeffs.values()}
    if len(periods) > 1:
        violations.append(
            {"code": PeriodMismatch.code, "message": f"coefficient tails use periods {sorted(periods)}"}
        )
    for k, s in op.coeffs.items():
        if not np.all(np.isfinite(s.all_values())):
            violations.append({"code": NonFinite.code, "message": f"coefficient {k} has non-finite entries"})
        if s.value_shape != (op.n, op.n):
            violations.append({"code": ShapeMismatch.code, "message": f"coefficient {k} has shape {s.value_shape}"})
    if not op.coeffs:
        violations.append({"code": "Empty", "message": "operator has no coefficients"})
    if violations:
        return ValidationReport(False, violations, None)
    return ValidationReport(True, [], op.aligned())
