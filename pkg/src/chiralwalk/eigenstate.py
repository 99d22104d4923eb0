"""Symmetry-protected eigenstates of the split-step walk at +1 / -1.

The state is ``Psi = (c(x) psi(x), psi(x))`` where ``psi`` solves the
first-order recursion ``psi(x + 1) = s delta(x) psi(x)`` (``s`` the sign of
the eigenvalue) and ``c = -s (-1)^j sqrt(Lambda(-s (-1)^j a))``. Magnitudes
are accumulated as logarithms so large windows neither over- nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FredholmViolated, SandwichFailure, SupremumViolated, WindowTooSmall, ZeroIndex
from .lattice import SIDES
from .oracle import FiniteVector, apply
from .splitstep import (
    SplitStepModel,
    _side_verdict,
    evolution_operator,
    lambda_map,
    normalize_sign,
    sign_name,
    tail_average,
)

BOUNDARY_MASS_TOL = 1e-3
SANDWICH_RTOL = 1e-12


def _require_strict(model: SplitStepModel):
    if not model.is_strict():
        raise SupremumViolated(
            f"need sup|p| < 1 and sup|a| < 1, got {model.sup_abs()}", sup=model.sup_abs()
        )


def _log_delta(model: SplitStepModel, j: int, sign: int):
    """Vectorized ``x -> log delta_{j,sign}(x)``."""
    s = (-1) ** j

    def f(xs):
        p = model.p.values(int(xs[0]), int(xs[-1]) + 1)
        a = model.a.values(int(xs[0]), int(xs[-1]) + 1)
        # log sqrt(Lambda(u) Lambda(v)) = atanh(u) + atanh(v)
        return np.arctanh(s * p) + np.arctanh(-sign * s * a)

    return f


def delta_profile(model: SplitStepModel, j: int, sign):
    """``x -> sqrt(Lambda((-1)^j p(x)) Lambda(-+(-1)^j a(x)))``."""
    _require_strict(model)
    sign = normalize_sign(sign)
    if j not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    log_d = _log_delta(model, j, sign)

    def delta(x):
        xs = np.atleast_1d(np.asarray(x, dtype=int))
        out = np.exp(np.array([log_d(np.array([v]))[0] for v in xs]))
        return out if np.ndim(x) else float(out[0])

    return delta


def series_branch(model: SplitStepModel, sign) -> int | None:
    """The branch ``j`` whose two-sided series of ``prod delta^2`` converges,
    or ``None`` when neither does (index zero)."""
    sign = normalize_sign(sign)
    orient = {}
    for side in SIDES:
        v = _side_verdict(model, side, sign)
        if not v["fredholm"]:
            raise FredholmViolated(
                f"p - {'+' if sign < 0 else '-'}a vanishes after averaging on side {side}",
                side=side,
            )
        orient[side] = v["orientation"]  # sign of p(side) -+ a(side)
    for j in (1, 2):
        s = (-1) ** j
        if s * orient["R"] < 0 < s * orient["L"]:
            return j
    return None


@dataclass
class DecayCertificate:
    j: int
    sign: int
    delta_low: float
    delta_high: float
    lambda_low: float
    lambda_high: float
    eps: float
    c_low: float
    c_high: float
    kappa_low: float
    kappa_high: float
    onset: int
    onset_left: int
    onset_right: int

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "sign": sign_name(self.sign),
            "delta_low": self.delta_low,
            "delta_high": self.delta_high,
            "lambda_low": self.lambda_low,
            "lambda_high": self.lambda_high,
            "eps": self.eps,
            "c_low": self.c_low,
            "c_high": self.c_high,
            "kappa_low": self.kappa_low,
            "kappa_high": self.kappa_high,
            "onset": self.onset,
            "onset_left": self.onset_left,
            "onset_right": self.onset_right,
        }


@dataclass
class EigenstateBundle:
    window: tuple
    j: int
    sign: int
    sites: np.ndarray
    psi: np.ndarray
    Psi: np.ndarray
    log_norm_sq: np.ndarray
    residual: float
    boundary_mass: float
    certificate: DecayCertificate | None = None
    warnings: list = field(default_factory=list)

    @property
    def norm_sq(self) -> np.ndarray:
        return np.exp(self.log_norm_sq)

    def to_dict(self) -> dict:
        out = {
            "window": list(self.window),
            "j": self.j,
            "sign": sign_name(self.sign),
            "residual": self.residual,
            "boundary_mass": self.boundary_mass,
            "warnings": list(self.warnings),
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def build_eigenstate(model: SplitStepModel, sign, window: int) -> EigenstateBundle:
    """Protected eigenstate of ``U`` at ``sign`` on ``[-window, window]``.

    ``psi(0) = 1``. The residual is ``max |((U - sign) Psi)(x)|`` over the
    sites whose stencil stays inside the window.
    """
    _require_strict(model)
    sign = normalize_sign(sign)
    window = int(window)
    if window < 2:
        raise ValueError("window must be at least 2")
    j = series_branch(model, sign)
    if j is None:
        raise ZeroIndex(f"no protected state at {sign:+d}: index is zero", sign=sign)
    xs = np.arange(-window, window + 1)
    log_d = _log_delta(model, j, sign)(xs)  # log delta(x) for x in window
    # log|psi(x)|: forward sums for x > 0, backward for x < 0
    log_psi = np.zeros(xs.size)
    zero = window
    log_psi[zero + 1:] = np.cumsum(log_d[zero:-1])
    log_psi[:zero] = -np.cumsum(log_d[:zero][::-1])[::-1]
    phase = np.where(xs % 2 == 0, 1.0, float(sign))  # sign ** x
    psi = phase * np.exp(log_psi)

    s = (-1) ** j
    a = model.a.values(-window, window + 1)
    # log Lambda(-sign s a) = 2 atanh(-sign s a)
    log_lam = 2.0 * np.arctanh(-sign * s * a)
    top = -sign * s * np.exp(0.5 * log_lam) * psi
    Psi = np.stack([top, psi], axis=1).astype(complex)
    log_norm_sq = 2.0 * log_psi + np.log1p(np.exp(log_lam))

    U = evolution_operator(model)
    image = apply(U, FiniteVector(-window, Psi))
    k0 = U.k0
    inner = slice(k0, xs.size - k0)
    out = image.values[k0:k0 + xs.size] - sign * Psi  # image starts at -window - k0
    residual = float(np.max(np.abs(out[inner]))) if xs.size > 2 * k0 else 0.0

    top_log = np.max(log_norm_sq)
    weights = np.exp(log_norm_sq - top_log)
    boundary_mass = float((weights[0] + weights[-1]) / weights.sum())
    bundle = EigenstateBundle(
        window=(-window, window), j=j, sign=sign, sites=xs, psi=psi.astype(complex),
        Psi=Psi, log_norm_sq=log_norm_sq, residual=residual, boundary_mass=boundary_mass,
    )
    if boundary_mass > BOUNDARY_MASS_TOL:
        raise WindowTooSmall(
            f"boundary carries {boundary_mass:.3e} of the mass; enlarge the window",
            boundary_mass=boundary_mass, bundle=bundle,
        )
    return bundle


def decay_certificate(bundle: EigenstateBundle, model: SplitStepModel) -> DecayCertificate:
    """Constants with ``kappa_low e^{-c_low |x|} <= |Psi(x)|^2 <= kappa_high e^{-c_high |x|}``
    for ``|x| >= onset`` up to two sites from the window edge."""
    j, sign = bundle.j, bundle.sign
    s = (-1) ** j
    logs = {}
    for side in SIDES:
        p_lim, a_lim = tail_average(model, side)
        logs[side] = lambda_map(p_lim).log + lambda_map(-sign * a_lim).log
    t_left = math.exp(-s * logs["L"])
    t_right = math.exp(s * logs["R"])
    d_low, d_high = min(t_left, t_right), max(t_left, t_right)
    # keep both d_low - eps and d_high + eps inside (0, 1)
    eps = min(1.0 - d_high, d_low) / 2.0
    c_low = -math.log(d_low - eps)
    c_high = -math.log(d_high + eps)

    lam = np.exp(2.0 * np.arctanh(-sign * s * model.a.all_values()))
    lam_low, lam_high = float(lam.min() + 1.0), float(lam.max() + 1.0)
    psi0_sq = float(abs(bundle.psi[bundle.sites == 0][0]) ** 2)
    k_low, k_high = psi0_sq * lam_low, psi0_sq * lam_high

    xs = bundle.sites
    ax = np.abs(xs)
    slack = SANDWICH_RTOL
    ok = (
        (math.log(k_low) - c_low * ax <= bundle.log_norm_sq + slack)
        & (bundle.log_norm_sq <= math.log(k_high) - c_high * ax + slack)
    )
    edge = bundle.window[1] - 2
    onsets = {}
    for side, mask in (("L", xs <= 0), ("R", xs >= 0)):
        sel = mask & (ax <= edge)
        dist, good = ax[sel], ok[sel]
        order = np.argsort(dist)
        dist, good = dist[order], good[order]
        bad = np.nonzero(~good)[0]
        if bad.size == 0:
            onsets[side] = 0
        elif bad[-1] == dist.size - 1:
            raise SandwichFailure(
                f"decay sandwich fails at the {side} window edge",
                side=side,
            )
        else:
            onsets[side] = int(dist[bad[-1]] + 1)
    return DecayCertificate(
        j=j, sign=sign, delta_low=d_low, delta_high=d_high,
        lambda_low=lam_low, lambda_high=lam_high, eps=eps,
        c_low=c_low, c_high=c_high, kappa_low=k_low, kappa_high=k_high,
        onset=max(onsets.values()), onset_left=onsets["L"], onset_right=onsets["R"],
    )


def protected_state(model: SplitStepModel, sign, window: int) -> EigenstateBundle:
    bundle = build_eigenstate(model, sign, window)
    bundle.certificate = decay_certificate(bundle, model)
    return bundle
