import numpy as np
import pytest
from conftest import random_operator, random_periodic_hermitian

from chiralwalk.errors import NonUnitPhase, PeriodMismatch
from chiralwalk.lattice import (
    PeriodicTailSequence,
    StrictlyLocalOperator,
    downsample,
    symbol_at,
    validate,
)
from chiralwalk.oracle import circulant_spectrum, multiset_distance, symbol_union

L = StrictlyLocalOperator.shift(1)


def test_value_at_phase_rule():
    s = PeriodicTailSequence.from_tails([1, 2], [5, 7], core=[9], core_start=0)
    assert s.value_at(0) == 9
    assert s.value_at(-2) == 1
    assert s.value_at(-1) == 2
    assert s.value_at(3) == 7
    assert s.value_at(2) == 5
    assert PeriodicTailSequence.constant(4.5).value_at(-1000) == 4.5


def test_shifted_sequence():
    s = PeriodicTailSequence.from_tails([1, 2], [5, 7, 8], core=[9, 10], core_start=-1)
    t = s.shifted(3)
    for x in range(-10, 10):
        assert t.value_at(x) == s.value_at(x + 3)


def test_symbol_examples():
    for z in (1.0, 1j, np.exp(0.3j)):
        assert symbol_at(L, "R", z)[0, 0] == pytest.approx(z)
        assert np.allclose(symbol_at(L, "R", z, period=2), [[0, 1], [z, 0]])
    mult = StrictlyLocalOperator.multiplication(PeriodicTailSequence.periodic([0.3, -1.2]))
    assert np.allclose(symbol_at(mult, "L", 1j), np.diag([0.3, -1.2]))


def test_symbol_rejects_off_circle():
    with pytest.raises(NonUnitPhase):
        symbol_at(L, "L", 2.0)


def test_symbol_is_linear_and_respects_adjoint_and_products(rng):
    a = random_operator(rng)
    b = random_operator(rng, ks=(-2, 0, 1))
    for side in "LR":
        z = np.exp(2j * np.pi * rng.uniform(size=8))
        sa, sb = symbol_at(a, side, z, period=6), symbol_at(b, side, z, period=6)
        assert np.allclose(symbol_at(a + b, side, z, period=6), sa + sb, atol=1e-12)
        assert np.allclose(symbol_at(a.adjoint(), side, z, period=6), np.conj(np.swapaxes(sa, -1, -2)), atol=1e-12)
        assert np.allclose(symbol_at(a @ b, side, z, period=6), sa @ sb, atol=1e-12)


def test_composition_matches_dense_action(rng):
    from chiralwalk.oracle import FiniteVector, apply

    a = random_operator(rng)
    b = random_operator(rng, ks=(-2, 1))
    v = FiniteVector(-6, rng.normal(size=(12, 2)))
    left = apply(a @ b, v)
    right = apply(a, apply(b, v))
    off = left.start - right.start
    assert np.allclose(left.values, right.values[off:off + len(left.values)], atol=1e-12)


def test_downsample_examples(rng):
    d = downsample(L, 2)
    for z in np.exp(2j * np.pi * rng.uniform(size=5)):
        assert np.allclose(symbol_at(d, "R", z), [[0, 1], [z, 0]])
    ident = downsample(StrictlyLocalOperator.identity(2), 3)
    assert ident.n == 6 and ident.equals(StrictlyLocalOperator.identity(6))


def test_downsample_preserves_symbol_spectrum(rng):
    op = random_periodic_hermitian(rng, n=1, period=2)
    d = downsample(op, 2)
    assert multiset_distance(symbol_union(op, "R", 16), symbol_union(d, "R", 16)) < 1e-9
    assert multiset_distance(circulant_spectrum(op, "R", 16), circulant_spectrum(d, "R", 16)) < 1e-9


def test_downsample_requires_dividing_period(rng):
    op = StrictlyLocalOperator.multiplication(PeriodicTailSequence.periodic([1.0, 2.0, 3.0]))
    with pytest.raises(PeriodMismatch):
        downsample(op, 2)


def test_validate():
    assert validate(L).ok
    seqs = {
        0: PeriodicTailSequence.periodic(np.ones((2, 1, 1))),
        1: PeriodicTailSequence.periodic(np.ones((3, 1, 1))),
    }
    rep = validate(StrictlyLocalOperator(1, seqs))
    assert not rep.ok and rep.violations[0]["code"] == "PeriodMismatch"
    bad = StrictlyLocalOperator(1, {0: PeriodicTailSequence.constant(np.array([[np.nan]]))})
    rep = validate(bad)
    assert not rep.ok and rep.violations[0]["code"] == "NonFinite"


def test_bandedness(rng):
    from chiralwalk.oracle import FiniteVector, apply

    a = random_operator(rng, ks=(-2, 0, 1))
    out = apply(a, FiniteVector(0, np.eye(2)[:1]))
    assert out.start == -2 and out.stop == 3
