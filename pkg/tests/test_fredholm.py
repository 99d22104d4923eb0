import numpy as np
import pytest
from conftest import random_periodic_hermitian
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralwalk.errors import CurveThroughOrigin, NotHermitianFamily, RefinementExhausted
from chiralwalk.fredholm import (
    CircleCurve,
    SpectralBands,
    arcs_from_intervals,
    essential_spectrum_bands,
    essential_spectrum_cloud,
    fredholm_index,
    winding_number,
)
from chiralwalk.lattice import PeriodicTailSequence, StrictlyLocalOperator, downsample
from chiralwalk.splitstep import SplitStepModel, evolution_operator, half_step_blocks, real_part_blocks

L = StrictlyLocalOperator.shift(1)


def test_winding_examples():
    assert winding_number(CircleCurve(lambda z: z ** 3)) == 3
    assert winding_number(CircleCurve(lambda z: 1 + 2 * np.conj(z))) == -1
    assert winding_number(CircleCurve(lambda z: 3 + np.conj(z))) == 0


def test_winding_errors():
    with pytest.raises(CurveThroughOrigin):
        winding_number(CircleCurve(lambda z: 1 + z))
    with pytest.raises(RefinementExhausted):
        winding_number(CircleCurve(lambda z: z ** 40, sample_count=7, adaptive_budget=0))


def test_winding_adaptive_refinement():
    # 8 samples cannot resolve z^5 but bisection can
    assert winding_number(CircleCurve(lambda z: z ** 5, sample_count=8)) == 5


def _laurent(coeffs, shift):
    return lambda z: sum(c * z ** (k - shift) for k, c in enumerate(coeffs))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_winding_is_additive(seed):
    rng = np.random.default_rng(seed)
    f = _laurent(rng.normal(size=5) + 1j * rng.normal(size=5), int(rng.integers(0, 5)))
    g = _laurent(rng.normal(size=5) + 1j * rng.normal(size=5), int(rng.integers(0, 5)))
    try:
        wf = winding_number(CircleCurve(f))
        wg = winding_number(CircleCurve(g))
        wfg = winding_number(CircleCurve(lambda z: f(z) * g(z)))
    except CurveThroughOrigin:
        return
    assert wfg == wf + wg


def test_fredholm_index_examples():
    rep = fredholm_index(L)
    assert rep.fredholm and rep.index == 0
    zero_left = StrictlyLocalOperator.multiplication(PeriodicTailSequence.from_tails([0.0], [1.0]))
    rep = fredholm_index(zero_left)
    assert not rep.fredholm and rep.index is None
    assert any("VanishingSymbol" in w for w in rep.warnings)


def test_domain_wall_half_step_index():
    model = SplitStepModel.from_tails([-0.5], [0.5], [0.0], [0.0])
    rep = fredholm_index(half_step_blocks(model).f1[+1])
    assert (rep.wn_left, rep.wn_right, rep.index) == (-1, 0, 1)


def test_near_degenerate_warning():
    op = StrictlyLocalOperator.multiplication(PeriodicTailSequence.from_tails([1e-11], [1.0]))
    rep = fredholm_index(op)
    assert not rep.fredholm
    assert any(w.startswith("NearDegenerate") for w in rep.warnings)


def test_index_of_shift_wall():
    # L on the right, identity on the left: index = 1 - 0
    op = StrictlyLocalOperator(1, {
        0: PeriodicTailSequence.from_tails(np.ones((1, 1, 1)), np.zeros((1, 1, 1))),
        1: PeriodicTailSequence.from_tails(np.zeros((1, 1, 1)), np.ones((1, 1, 1))),
    })
    rep = fredholm_index(op)
    assert rep.fredholm and rep.index == 1


def test_bands_examples():
    cos = 0.5 * (L + L.adjoint())
    assert essential_spectrum_bands(cos).intervals == ((-1.0, 1.0),)
    model = SplitStepModel.from_tails([0.5], [0.5], [0.5], [0.5])
    bands = essential_spectrum_bands(real_part_blocks(model).r_plus)
    assert np.allclose(bands.intervals, [(-0.5, 1.0)], atol=1e-12)
    mult = StrictlyLocalOperator.multiplication(PeriodicTailSequence.periodic([0.25, -0.5]))
    assert essential_spectrum_bands(mult).intervals == ((-0.5, -0.5), (0.25, 0.25))


def test_bands_reject_non_hermitian():
    with pytest.raises(NotHermitianFamily):
        essential_spectrum_bands(L)


def test_bands_invariant_under_conjugate_grid(rng):
    op = random_periodic_hermitian(rng, n=1, period=3)
    a = essential_spectrum_bands(op, 512)
    b = essential_spectrum_bands(op.adjoint().adjoint(), 512)
    assert a.endpoint_distance(b) <= 1e-12
    # conjugating the symbol maps z to z*; the transposed operator has conjugate symbol
    conj = StrictlyLocalOperator(1, {-k: s.shifted(-k).map(lambda v: np.swapaxes(v, -1, -2))
                                     for k, s in op.coeffs.items()})
    c = essential_spectrum_bands(conj, 512)
    assert a.endpoint_distance(c) <= 1e-9


def test_bands_doubling_samples_within_resolution(rng):
    op = random_periodic_hermitian(rng, n=2, period=3)
    coarse = essential_spectrum_bands(op, 256)
    fine = essential_spectrum_bands(op, 512)
    assert coarse.endpoint_distance(fine) <= max(coarse.resolution, fine.resolution) + 1e-12


def test_arcs_and_merging():
    assert arcs_from_intervals([(-1.0, 1.0)]) == [(0.0, 2 * np.pi)]
    s = np.sqrt(0.5)
    arcs = arcs_from_intervals([(s, s), (-s, -s)])
    assert np.allclose(arcs, [(np.pi / 4,) * 2, (3 * np.pi / 4,) * 2, (5 * np.pi / 4,) * 2, (7 * np.pi / 4,) * 2])
    merged = SpectralBands.from_intervals([(0.0, 0.3), (0.3 + 1e-10, 0.5), (0.7, 0.8)])
    assert merged.intervals == ((0.0, 0.5), (0.7, 0.8))


def test_cloud_examples(rng):
    model = SplitStepModel.from_tails(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 3),
                                      rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 1))
    cloud = essential_spectrum_cloud(evolution_operator(model), 256)
    assert np.abs(np.abs(cloud.points) - 1).max() <= 1e-10
    cloud = essential_spectrum_cloud(L, 64)
    assert np.allclose(np.sort(np.angle(cloud.points[cloud.sides == "R"]) % (2 * np.pi)),
                       2 * np.pi * np.arange(64) / 64)


def test_index_invariant_under_downsampling(rng):
    for _ in range(5):
        seqs = {k: PeriodicTailSequence.periodic(rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2)))
                for k in (-1, 0, 1)}
        op = StrictlyLocalOperator(2, seqs)
        a, b = fredholm_index(op), fredholm_index(downsample(op, 2))
        assert a.fredholm == b.fredholm and a.index == b.index


def test_real_curve_crossing_between_samples_is_not_fredholm():
    # det of a Hermitian symbol is real; a sign change between samples must read as a zero
    op = StrictlyLocalOperator.multiplication(PeriodicTailSequence.constant(0.3)) + 0.5 * (L + L.adjoint())
    with pytest.raises(CurveThroughOrigin):
        winding_number(CircleCurve(lambda z: 0.3 + (z + np.conj(z)) / 2, sample_count=7))
    rep = fredholm_index(op, 7)
    assert not rep.fredholm and rep.index is None
