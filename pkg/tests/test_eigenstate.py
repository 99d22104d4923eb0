import math

import numpy as np
import pytest
from conftest import random_model

from chiralwalk.eigenstate import (
    build_eigenstate,
    decay_certificate,
    delta_profile,
    protected_state,
    series_branch,
)
from chiralwalk.errors import FredholmViolated, SupremumViolated, WindowTooSmall, ZeroIndex
from chiralwalk.oracle import FiniteVector, apply, geometric_mean_limit
from chiralwalk.lattice import PeriodicTailSequence
from chiralwalk.splitstep import SplitStepModel, evolution_operator, gamma_operator, index_pm

DOMAIN_WALL = SplitStepModel.from_tails([-0.5], [0.5], [0.0], [0.0])
REVERSED = SplitStepModel.from_tails([0.5], [-0.5], [0.0], [0.0])
CONSTANT = SplitStepModel.from_tails([0.5], [0.5], [0.0], [0.0])


def test_delta_profile_examples(rng):
    m = SplitStepModel.from_tails([0.5], [0.5], [0.0], [0.0])
    assert delta_profile(m, 1, +1)(7) == pytest.approx(math.sqrt(1 / 3), rel=1e-15)
    m = random_model(rng, bound=0.9)
    xs = np.arange(-10, 10)
    for sign in (1, -1):
        assert np.allclose(delta_profile(m, 1, sign)(xs) * delta_profile(m, 2, sign)(xs), 1.0, atol=1e-14)
    sym = SplitStepModel.from_tails([0.3, -0.2], [0.6], [0.0], [0.0])
    assert np.allclose(delta_profile(sym, 1, +1)(xs), delta_profile(sym, 1, -1)(xs))


def test_delta_profile_needs_strict_bounds():
    with pytest.raises(SupremumViolated):
        delta_profile(SplitStepModel.from_tails([1.0], [0.5], [0.0], [0.0]), 1, +1)


def test_series_branch_examples():
    assert series_branch(DOMAIN_WALL, +1) == 1 and series_branch(DOMAIN_WALL, -1) == 1
    assert series_branch(REVERSED, +1) == 2 and series_branch(REVERSED, -1) == 2
    assert series_branch(CONSTANT, +1) is None
    with pytest.raises(FredholmViolated):
        series_branch(SplitStepModel.from_tails([0.3], [0.5], [0.3], [0.0]), +1)


def test_series_branch_matches_index(rng):
    for _ in range(30):
        m = random_model(rng, bound=0.95)
        rep = index_pm(m, 256, cross_check=False)
        for sign, name in ((1, "plus"), (-1, "minus")):
            if not rep.per_sign[name]["fredholm"]:
                continue
            j = series_branch(m, sign)
            assert {1: 1, 2: -1, None: 0}[j] == rep.per_sign[name]["index"]


def test_root_test_agrees_with_geometric_mean(rng):
    # the convergent branch decays on the right (mean < 1) and grows toward the left (mean > 1)
    checked = 0
    for _ in range(20):
        m = random_model(rng, bound=0.9)
        for sign in (1, -1):
            try:
                j = series_branch(m, sign)
            except FredholmViolated:
                continue
            if j is None:
                continue
            d = delta_profile(m, j, sign)
            nr, nl = m.period("R"), m.period("L")
            right = PeriodicTailSequence.periodic(d(1000 * nr + np.arange(nr)))
            left = PeriodicTailSequence.periodic(d(-1000 * nl + np.arange(nl)))
            assert geometric_mean_limit(right, 10 ** 4) < 1.0 < geometric_mean_limit(left, 10 ** 4)
            checked += 1
    assert checked > 0


def test_domain_wall_state():
    b = build_eigenstate(DOMAIN_WALL, +1, 128)
    assert b.psi[b.sites == 0][0] == 1.0
    assert b.residual <= 1e-8
    ratios = b.norm_sq[1:] / b.norm_sq[:-1]
    right = ratios[b.sites[:-1] >= 0]
    left = 1.0 / ratios[b.sites[1:] <= 0]
    assert np.abs(right - 1 / 3).max() <= 1e-10 and np.abs(left - 1 / 3).max() <= 1e-10
    assert np.allclose(b.norm_sq, 2.0 * 3.0 ** (-np.abs(b.sites)), rtol=1e-12)


def test_recursion_is_exact(rng):
    m = random_model(rng, bound=0.9)
    for sign in (1, -1):
        try:
            b = build_eigenstate(m, sign, 64)
        except (ZeroIndex, FredholmViolated, WindowTooSmall):
            continue
        d = delta_profile(m, b.j, sign)(b.sites[:-1])
        assert np.abs(b.psi[1:] - sign * d * b.psi[:-1]).max() <= 1e-13 * np.abs(b.psi).max()


def test_top_component_formula():
    m = SplitStepModel.from_tails([-0.4], [0.3], [0.2], [-0.1])
    b = build_eigenstate(m, -1, 64)
    s = (-1) ** b.j
    a = m.a.values(-64, 65)
    lam = (1 + s * a) / (1 - s * a)  # Lambda(-sign s a) with sign = -1
    assert np.allclose(b.Psi[:, 0], s * np.sqrt(lam) * b.psi)


def test_chirality_of_state():
    for sign in (1, -1):
        b = build_eigenstate(DOMAIN_WALL, sign, 96)
        G, U = gamma_operator(DOMAIN_WALL), evolution_operator(DOMAIN_WALL)
        g = apply(G, FiniteVector(-96, b.Psi))
        ug = apply(U, g)
        off = g.start - ug.start
        diff = ug.values[off:off + len(g.values)] - sign * g.values
        assert np.abs(diff[3:-3]).max() <= 1e-8


def test_residual_stays_at_rounding_level():
    m = SplitStepModel.from_tails([-0.6, -0.4], [0.5], [0.05, 0.0], [0.1])
    res = []
    for w in (24, 48, 96):
        # exact kernel vector, so the residual stays at rounding level for any window
        res.append(build_eigenstate(m, +1, w).residual)
    assert max(res) <= 1e-12


def test_exactly_one_state_per_sign():
    # the other branch diverges, so the kernel is one-dimensional, matching |ind| = 1
    rep = index_pm(DOMAIN_WALL)
    for sign in (1, -1):
        j = series_branch(DOMAIN_WALL, sign)
        other = 3 - j
        d = delta_profile(DOMAIN_WALL, other, sign)
        assert d(10) > 1 and d(-10) < 1
        assert abs(rep.index(sign)) == 1


def test_zero_index_and_window_errors():
    with pytest.raises(ZeroIndex):
        build_eigenstate(CONSTANT, +1, 32)
    slow = SplitStepModel.from_tails([-0.05], [0.05], [0.0], [0.0])
    with pytest.raises(WindowTooSmall):
        build_eigenstate(slow, +1, 16)


def test_domain_wall_certificate():
    b = protected_state(DOMAIN_WALL, +1, 128)
    c = b.certificate
    assert c.delta_low == pytest.approx(1 / 3, abs=1e-15) and c.delta_high == pytest.approx(1 / 3, abs=1e-15)
    assert c.lambda_low == 2.0 and c.lambda_high == 2.0
    assert c.onset <= 4
    assert 0 < c.delta_low <= c.delta_high < 1 and c.c_high <= c.c_low and c.kappa_low <= c.kappa_high


def test_certificate_sandwich_random(rng):
    done = 0
    for _ in range(30):
        m = random_model(rng, bound=0.8)
        for sign in (1, -1):
            try:
                b = build_eigenstate(m, sign, 200)
            except (ZeroIndex, FredholmViolated, WindowTooSmall):
                continue
            c = decay_certificate(b, m)
            ax = np.abs(b.sites)
            sel = (ax >= c.onset) & (ax <= 198)
            lo = math.log(c.kappa_low) - c.c_low * ax[sel]
            hi = math.log(c.kappa_high) - c.c_high * ax[sel]
            assert np.all(lo <= b.log_norm_sq[sel] + 1e-12) and np.all(b.log_norm_sq[sel] <= hi + 1e-12)
            done += 1
    assert done > 5
