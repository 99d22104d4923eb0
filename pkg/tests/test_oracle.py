import numpy as np
import pytest
from conftest import random_model, random_periodic_hermitian

from chiralwalk.errors import NonPositive, NotPeriodic, TooLarge
from chiralwalk.lattice import PeriodicTailSequence, StrictlyLocalOperator
from chiralwalk.oracle import (
    FiniteVector,
    apply,
    circulant_spectrum,
    geometric_mean_limit,
    multiset_distance,
    symbol_union,
)
from chiralwalk.splitstep import evolution_operator, gamma_operator

L = StrictlyLocalOperator.shift(1)


def test_circulant_examples(rng):
    cos = 0.5 * (L + L.adjoint())
    expected = np.cos(2 * np.pi * np.arange(8) / 8)
    assert multiset_distance(circulant_spectrum(cos, "R", 8), expected) <= 1e-12
    assert np.allclose(circulant_spectrum(StrictlyLocalOperator.identity(2), "L", 5), 1.0)
    op = random_periodic_hermitian(rng, n=2, period=2)
    assert multiset_distance(circulant_spectrum(op, "R", 32), symbol_union(op, "R", 32)) <= 1e-9


def test_circulant_errors():
    with pytest.raises(TooLarge):
        circulant_spectrum(StrictlyLocalOperator.identity(4), "R", 1000)
    wall = StrictlyLocalOperator.multiplication(PeriodicTailSequence.from_tails([0.0], [1.0]))
    with pytest.raises(NotPeriodic):
        circulant_spectrum(wall, "R", 8)


def test_multiset_distance():
    assert multiset_distance([1, 2, 3], [3.1, 1, 2]) == pytest.approx(0.1)
    assert multiset_distance([1, 2], [1]) == np.inf


def test_apply_shift():
    out = apply(L, FiniteVector(0, np.array([[1.0]])))
    assert out.at(-1)[0] == 1.0 and out.at(0)[0] == 0.0 and out.at(1)[0] == 0.0


def test_walk_preserves_norm_and_is_chiral(rng):
    for _ in range(5):
        m = random_model(rng)
        G, U = gamma_operator(m), evolution_operator(m)
        GUG = G @ U @ G
        for _ in range(10):
            v = FiniteVector(int(rng.integers(-8, 8)), rng.normal(size=(12, 2)) + 1j * rng.normal(size=(12, 2)))
            assert abs(apply(U, v).norm() - v.norm()) <= 1e-12 * v.norm()
            a, b = apply(U.adjoint(), v), apply(GUG, v)
            off = a.start - b.start
            assert np.abs(a.values - b.values[off:off + len(a.values)]).max() <= 1e-12


def test_apply_linear_and_band_limited(rng):
    op = random_periodic_hermitian(rng, n=2, period=3)
    v = FiniteVector(-3, rng.normal(size=(5, 2)))
    w = FiniteVector(-3, rng.normal(size=(5, 2)))
    lhs = apply(op, FiniteVector(-3, 2.0 * v.values - w.values))
    rhs = 2.0 * apply(op, v).values - apply(op, w).values
    assert np.allclose(lhs.values, rhs)
    assert lhs.start == -3 - op.k0 and lhs.stop == 2 + op.k0


def test_geometric_mean_examples():
    assert geometric_mean_limit(PeriodicTailSequence.constant(3.0), 100) == pytest.approx(3.0, rel=1e-14)
    assert abs(geometric_mean_limit(PeriodicTailSequence.periodic([2.0, 8.0]), 10 ** 6) - 4.0) <= 1e-6
    tail = np.array([1.0, 2.0, 4.0])
    core = tail[np.arange(5) % 3] * np.array([1.3, 0.8, 1.1, 0.9, 1.2])
    seq = PeriodicTailSequence.from_tails([1.0], tail, core=core, core_start=0)
    assert abs(geometric_mean_limit(seq, 10 ** 6) - 2.0) <= 1e-6


def test_geometric_mean_core_error_is_order_one_over_horizon():
    # log G(x) - log 2 = (core log deviation + partial-period term) / x
    tail = np.array([1.0, 2.0, 4.0])
    core = np.array([7.0, 0.1, 3.0, 9.0, 0.5])
    seq = PeriodicTailSequence.from_tails([1.0], tail, core=core, core_start=0)
    bound = abs(np.log(core / tail[np.arange(5) % 3]).sum()) + np.log(4.0)
    for x in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        assert abs(np.log(geometric_mean_limit(seq, x)) - np.log(2.0)) * x <= bound + 1e-6
    with pytest.raises(NonPositive):
        geometric_mean_limit(PeriodicTailSequence.periodic([1.0, -1.0]), 10)
