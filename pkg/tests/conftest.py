import numpy as np
import pytest

from chiralwalk.lattice import PeriodicTailSequence, StrictlyLocalOperator
from chiralwalk.splitstep import SplitStepModel


def random_model(rng, n_left=2, n_right=2, core=3, bound=1.0):
    """Split-step model with random tails and a random core."""
    u = lambda size: rng.uniform(-bound, bound, size)
    return SplitStepModel.from_tails(
        u(n_left), u(n_right), u(n_left), u(n_right),
        u(core), u(core), p_start=int(rng.integers(-3, 3)), a_start=int(rng.integers(-3, 3)),
    )


def periodic_model(rng, period=2, bound=1.0):
    p = rng.uniform(-bound, bound, period)
    a = rng.uniform(-bound, bound, period)
    return SplitStepModel.from_tails(p, p, a, a)


def random_sequence(rng, n, n_left=2, n_right=3, core=3, complex_values=True):
    def draw(size):
        out = rng.normal(size=(size, n, n))
        if complex_values:
            out = out + 1j * rng.normal(size=(size, n, n))
        return out

    return PeriodicTailSequence(int(rng.integers(-3, 3)), draw(core), draw(n_left), draw(n_right))


def random_operator(rng, n=2, ks=(-1, 0, 1), **kw):
    return StrictlyLocalOperator(n, {k: random_sequence(rng, n, **kw) for k in ks})


def random_periodic_hermitian(rng, n=1, period=2):
    """``A + A*`` for a purely periodic ``A`` with bandwidth 1."""
    seqs = {k: PeriodicTailSequence.periodic(rng.normal(size=(period, n, n)) + 1j * rng.normal(size=(period, n, n)))
            for k in (-1, 0, 1)}
    op = StrictlyLocalOperator(n, seqs)
    return op + op.adjoint()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
