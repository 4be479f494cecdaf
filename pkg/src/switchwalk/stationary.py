"""Invariant measures of switching walks and of their ladder and overshoot chains.

Everything here works on lattice indices; a measure returned as a
``FiniteMeasure`` holds atom masses (density times the span ``h``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .laws import ContinuousLaw
from .ladder import LadderSystem, ladder_system, switch_weight
from .measures import (FiniteMeasure, FinitePmf, Number, WindowDensity,
                       as_number, convolve, minus, plus)
from .renewal import RenewalMeasure, renewal_measure


def _times_span(v, h):
    return v * h if isinstance(v, Fraction) else v * float(h)


def _check_proper(law, name, tol):
    if abs(law.defect) > tol:
        raise ValueError(f"{name} must be proper within {tol:g} (defect {float(law.defect):.3g})")


def nu(D: FinitePmf, A_prime: FinitePmf, alpha, tol: float = 1e-12) -> FiniteMeasure:
    """Invariant measure of the switching ladder-heights chain.

    Density ``P(D < x) + P(A' > x) - 1 + a P(D = x) + (1 - a) P(A' = x)`` with
    ``a = p alpha / (p alpha + p' (1 - alpha))``, ``p = P(D < 0)`` and
    ``p' = P(A' > 0)``.  Supported on ``[min D, max A']``.
    """
    _check_proper(D, "D", tol)
    _check_proper(A_prime, "A'", tol)
    alpha = as_number(alpha)
    p, pp = D.prob_lt(0), A_prime.prob_gt(0)
    a = switch_weight(p, pp, alpha)
    h = D.span
    atoms = {}
    for x in range(min(D.lo, 0), max(A_prime.hi, 0) + 1):
        f = D.prob_lt(x) + A_prime.prob_gt(x) - 1 + a * D.mass(x) + (1 - a) * A_prime.mass(x)
        if f < -10 * tol:
            raise ValueError(f"negative density {float(f):.3g} at {x}: inconsistent ladder laws")
        atoms[x] = _times_span(f, h)
    return FiniteMeasure(atoms, h)


def lift_parts(phi: FiniteMeasure, U_plus: RenewalMeasure, U_minus_prime: RenewalMeasure, alpha):
    """``(U_+ * phi^+, U_-' * phi^-)``, each ``None`` when its part of ``phi`` is empty."""
    if U_plus.side != "plus" or U_minus_prime.side != "minus":
        raise ValueError("need a right-sided U_+ and a left-sided U_-'")
    pp, pm = plus(phi, alpha), minus(phi, alpha)
    up = None if pp.is_empty() else convolve(U_plus.base, pp)
    down = None if pm.is_empty() else convolve(U_minus_prime.base, pm)
    return up, down


def lift(phi: FiniteMeasure, U_plus: RenewalMeasure, U_minus_prime: RenewalMeasure, alpha,
         window: Optional[int] = None) -> WindowDensity:
    """``U_+ * phi^+ + U_-' * phi^-`` on the windows of the renewal measures.

    ``window`` crops the result to ``[-window, window]``.
    """
    parts = [w for w in lift_parts(phi, U_plus, U_minus_prime, alpha) if w is not None]
    if not parts:
        return FiniteMeasure({}, phi.span).to_window(0, 0)
    out = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    if window is not None:
        out = out.cropped(-window, window)
    if not out.has_interior:
        raise ValueError("lifted measure has no valid interior on this window")
    return out


def pi(D: FinitePmf, A_prime: FinitePmf, tol: float = 1e-12) -> FiniteMeasure:
    """Invariant measure of the two-periodic chain of overshoots at zero.

    Density ``P(D <= x) - P(D + A' <= x)`` for ``x < 0`` and
    ``P(A' > x) - P(D + A' > x)`` for ``x >= 0``.  The caller is responsible
    for the hypothesis ``alpha = 1`` (lattice case).
    """
    _check_proper(D, "D", tol)
    _check_proper(A_prime, "A'", tol)
    S = convolve(D, A_prime)
    h = D.span
    atoms = {}
    for x in range(min(D.lo, 0), max(A_prime.hi, 0) + 1):
        if x < 0:
            f = D.prob_le(x) - S.prob_le(x)
        else:
            f = A_prime.prob_gt(x) - S.prob_gt(x)
        if f < -10 * tol:
            raise ValueError(f"negative overshoot density {float(f):.3g} at {x}")
        atoms[x] = _times_span(f, h)
    return FiniteMeasure(atoms, h)


class OvershootDensity:
    """Overshoot density ``p [F(x) 1(x<0) + (1 - F(x)) 1(x>=0)]`` of a
    continuous random walk, with its normalized cdf and an inverse-cdf sampler.
    """

    def __init__(self, law: ContinuousLaw, p: float = 1.0):
        self.law = law
        self.p = float(p)
        self.neg_mass = float(law.lower_partial(0.0))   # E X^-
        self.pos_mass = float(law.upper_partial(0.0))   # E X^+
        self.abs_mean = self.neg_mass + self.pos_mass

    @property
    def total_mass(self) -> float:
        return self.p * self.abs_mean

    def density(self, x):
        x = np.asarray(x, dtype=float)
        F = self.law.cdf(x)
        return self.p * np.where(x < 0, F, 1.0 - F)

    def cdf(self, x):
        """Normalized cdf; the factor ``p`` cancels."""
        x = np.asarray(x, dtype=float)
        neg = self.law.lower_partial(np.minimum(x, 0.0))
        pos = self.neg_mass + self.pos_mass - self.law.upper_partial(np.maximum(x, 0.0))
        return np.clip(np.where(x < 0, neg, pos) / self.abs_mean, 0.0, 1.0)

    def ppf(self, u, xtol: float = 1e-12):
        u = np.asarray(u, dtype=float)
        lo, hi = -1.0, 1.0
        while float(self.cdf(lo)) > max(u.min(), 1e-300) and lo > -1e8:
            lo *= 2
        while float(self.cdf(hi)) < min(u.max(), 1.0 - 1e-16) and hi < 1e8:
            hi *= 2
        a = np.full(u.shape, lo)
        b = np.full(u.shape, hi)
        for _ in range(200):
            mid = 0.5 * (a + b)
            below = self.cdf(mid) < u
            a = np.where(below, mid, a)
            b = np.where(below, b, mid)
            if np.max(b - a) < xtol:
                break
        return 0.5 * (a + b)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))


def pi_rw(X: Union[FinitePmf, ContinuousLaw], p) -> Union[FiniteMeasure, OvershootDensity]:
    """Overshoot measure of a random walk, ``p [P(X <= x) 1(x<0) + P(X > x) 1(x>=0)]``."""
    if isinstance(X, ContinuousLaw):
        return OvershootDensity(X, float(p))
    p = as_number(p)
    h = X.span
    atoms = {}
    for x in range(min(X.lo, 0), max(X.hi, 0) + 1):
        f = p * (X.prob_le(x) if x < 0 else X.prob_gt(x))
        atoms[x] = _times_span(f, h)
    return FiniteMeasure(atoms, h)


def _mass_of(m: FiniteMeasure) -> Number:
    return m.total() if not m.is_empty() else Fraction(0)


@dataclass(frozen=True)
class StationaryBundle:
    """``nu``, a window of ``mu`` and (when defined) ``pi`` for one walk."""

    ladders: LadderSystem
    nu: FiniteMeasure
    mu: WindowDensity
    pi: Optional[FiniteMeasure]
    U_plus: RenewalMeasure
    U_minus_prime: RenewalMeasure
    p: Number
    p_prime: Number
    a: Number
    alpha: Number
    mu_total_mass: Union[Number, float]
    window: int
    x1: FinitePmf = field(repr=False, default=None)
    x1p: FinitePmf = field(repr=False, default=None)
    notes: tuple = ()

    @property
    def provenance(self) -> dict:
        return {"backend": self.ladders.backend, "ladder_tol": self.ladders.tol_achieved,
                "certified": self.ladders.certified}


def mu_total_mass(ladders: LadderSystem, nu_measure: FiniteMeasure, x1: FinitePmf, x1p: FinitePmf):
    """``|U_+| |nu^+| + |U_-'| |nu^-|`` when ``E X1 < 0 < E X1'``, else ``inf``."""
    if not (x1.mean_index() < 0 < x1p.mean_index()):
        return math.inf
    alpha = ladders.alpha
    u_plus = 1 / ladders.A_strict.defect
    u_minus = 1 / ladders.D_strict_prime.defect
    return u_plus * _mass_of(plus(nu_measure, alpha)) + u_minus * _mass_of(minus(nu_measure, alpha))


def mu_window(ladders: LadderSystem, nu_measure: FiniteMeasure, window: int):
    U_p = renewal_measure(ladders.A_strict, window, side="plus")
    U_m = renewal_measure(ladders.D_strict_prime, window, side="minus")
    mu = lift(nu_measure, U_p, U_m, ladders.alpha, window=window)
    return mu, U_p, U_m


def stationary_bundle(x1: FinitePmf, x1p: FinitePmf, alpha=1, window: int = 50,
                      tol: float = 1e-12, ladders: Optional[LadderSystem] = None) -> StationaryBundle:
    """Ladders, ``nu``, ``mu`` on ``[-window, window]`` and ``pi`` for one walk."""
    alpha = as_number(alpha)
    L = ladders or ladder_system(x1, x1p, alpha, tol)
    v = nu(L.D, L.A_prime, alpha, tol=max(tol, L.tol_achieved))
    mu, U_p, U_m = mu_window(L, v, window)
    notes = []
    if alpha == 1:
        overshoots = pi(L.D, L.A_prime, tol=max(tol, L.tol_achieved))
    else:
        overshoots = None
        notes.append("pi is only defined here for alpha = 1 on a lattice")
    return StationaryBundle(L, v, mu, overshoots, U_p, U_m, L.p, L.p_prime, L.a, alpha,
                            mu_total_mass(L, v, x1, x1p), window, x1, x1p, tuple(notes))


@dataclass(frozen=True)
class NormalizedMu:
    """``mu / mu(Z)`` on a window; ``finite`` is False for infinite ``mu``."""

    finite: bool
    total_mass: Union[Number, float]
    distribution: Optional[FinitePmf]
    window: int = 0

    @property
    def tail_mass(self):
        return None if self.distribution is None else self.distribution.defect


def normalize_mu(bundle: StationaryBundle, tol: float = 1e-12, max_window: int = 1 << 14) -> NormalizedMu:
    """Stationary distribution in the finite-``mu`` regime, else an infinity flag.

    The window is doubled until the mass it leaves out is below ``tol``
    (relative), or ``max_window`` is reached.
    """
    total = bundle.mu_total_mass
    if total == math.inf:
        return NormalizedMu(False, math.inf, None)
    W = max(bundle.window, 8)
    while True:
        mu, _, _ = mu_window(bundle.ladders, bundle.nu, W)
        masses = {k: mu.mass(k) for k in range(-W, W + 1)}
        inside = sum(masses.values())
        if (1 - inside / total) < tol or 2 * W > max_window:
            break
        W *= 2
    dist = FinitePmf({k: v / total for k, v in masses.items()}, bundle.mu.span)
    return NormalizedMu(True, total, dist, W)
