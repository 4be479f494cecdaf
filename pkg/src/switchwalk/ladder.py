"""Ladder-height laws of lattice random walks with finitely supported steps.

Two solvers are provided.

``"wiener-hopf"`` (default)
    Factorizes ``z^m (1 - E z^X)`` through its roots.  Roots strictly outside
    the unit disc belong to the ascending factor, roots strictly inside to
    the descending one; the root at ``z = 1`` (double when ``E X = 0``) is
    split according to the sign of the drift and divided out exactly before
    root finding.  Roots are computed with mpmath at 60 digits.  The result is
    then tried as a rational: if the candidate passes both factorization
    identities exactly in rational arithmetic it is returned on the exact
    backend, otherwise the floats are returned together with the measured
    identity residual.

``"truncated"``
    Absorbing-chain first-passage solve on the transient levels ``[t0, L]``
    with ``L`` doubled until the total-variation change and the unabsorbed
    mass both drop below ``tol``.  Unabsorbed mass decays only like ``1/L``
    at zero drift, so this solver is mostly a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
from scipy.linalg import solve_banded

from .measures import (EXACT, FLOAT, FinitePmf, Number, as_number, convolve,
                       point_mass)

WH_DPS = 60
MAX_LEVEL = 1 << 18


class AssumptionError(ValueError):
    """Walk spec violates ``E X1 <= 0 <= E X1'`` (or is degenerate at zero)."""


class LadderLaw(FinitePmf):
    """A ladder-height law plus how it was obtained.

    Attributes
    ----------
    method : str
    certified : bool
        False when the truncated solver ran out of levels before ``tol``.
    error_bound : float
        Bound on the total-variation error of the masses (0 when exact).
    level : int
        Truncation level used (0 for the factorization solver).
    """

    __slots__ = ("method", "certified", "error_bound", "level", "history")

    def __init__(self, atoms, span, method, certified=True, error_bound=0.0, level=0, history=()):
        super().__init__(atoms, span)
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "certified", certified)
        object.__setattr__(self, "error_bound", error_bound)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "history", tuple(history))


def validate_walk(x1: FinitePmf, x1p: FinitePmf) -> None:
    """Exact-engine form of the zero-crossing assumption."""
    for name, law in (("X1", x1), ("X1'", x1p)):
        if not law.is_proper(1e-12):
            raise AssumptionError(f"{name} must be a proper law (defect {float(law.defect):.3g})")
        if law.support == (0,):
            raise AssumptionError(f"{name} is degenerate at 0")
    if x1.mean_index() > 0:
        raise AssumptionError(f"E X1 = {float(x1.mean()):.6g} > 0: walk does not cross zero infinitely often")
    if x1p.mean_index() < 0:
        raise AssumptionError(f"E X1' = {float(x1p.mean()):.6g} < 0: walk does not cross zero infinitely often")


# ---------------------------------------------------------------------------
# Wiener-Hopf factorization solver
# ---------------------------------------------------------------------------


def _exact_probs(X: FinitePmf) -> dict:
    return {k: (v if isinstance(v, Fraction) else Fraction(v)) for k, v in X.atoms.items()}


def _deflate_at_one(coeffs_desc: list) -> list:
    """Divide a polynomial (descending coefficients) by ``z - 1``."""
    out = []
    acc = Fraction(0)
    for c in coeffs_desc[:-1]:
        acc = acc + c
        out.append(acc)
    if acc + coeffs_desc[-1] != 0:
        raise ArithmeticError("z = 1 is not a root")
    return out


def _poly_from_roots(roots) -> list:
    """Coefficients (ascending) of prod (1 - t / r) in the variable t."""
    coef = [mpmath.mpc(1)]
    for r in roots:
        new = coef + [mpmath.mpc(0)]
        for i in range(len(coef)):
            new[i + 1] -= coef[i] / r
        coef = new
    return coef


def _mp_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


@lru_cache(maxsize=512)
def _factorize(X: FinitePmf) -> dict:
    """The four first ladder laws of a walk with step law ``X``.

    Returns a dict with keys ``A_strict``, ``A``, ``D``, ``D_strict`` (atoms
    as dicts in the reduced lattice of ``X``), the common gcd ``g`` of the
    support, ``backend`` and ``residual``.
    """
    if not X.is_proper(1e-12):
        raise ValueError("step law must be proper")
    if X.support == (0,):
        raise ValueError("step law is degenerate at 0")
    g = 0
    for k in X.support:
        g = math.gcd(g, k)
    probs = {k // g: v for k, v in _exact_probs(X).items()}
    total = sum(probs.values())
    probs = {k: v / total for k, v in probs.items()}  # float inputs: exact renormalization
    m = max(0, -min(probs))
    M = max(0, max(probs))
    mean = sum(k * v for k, v in probs.items())

    asc = [Fraction(0)] * (m + M + 1)  # z^m (1 - phi(z)), ascending powers
    asc[m] = Fraction(1)
    for k, v in probs.items():
        asc[k + m] -= v
    desc = asc[::-1]
    mult = 2 if (m >= 1 and M >= 1 and mean == 0) else 1
    for _ in range(mult):
        desc = _deflate_at_one(desc)

    with mpmath.workdps(WH_DPS):
        if len(desc) > 1:
            roots = mpmath.polyroots([mpmath.mpf(c.numerator) / c.denominator for c in desc],
                                     maxsteps=500, extraprec=4 * WH_DPS)
        else:
            roots = []
        out_roots = [r for r in roots if abs(r) > 1]
        in_roots = [r for r in roots if abs(r) < 1]
        if mean >= 0 and M >= 1:
            out_roots.append(mpmath.mpc(1))
        if mean <= 0 and m >= 1:
            in_roots.append(mpmath.mpc(1))
        if len(out_roots) != M or len(in_roots) != m:
            raise ArithmeticError(
                f"root split failed: {len(out_roots)} outer / {len(in_roots)} inner, expected {M} / {m}")

        a_poly = _poly_from_roots(out_roots)  # 1 - E z^{A_s}
        d_poly = _poly_from_roots([1 / s for s in in_roots])  # 1 - E z^{D_s}, variable 1/z
        lead = a_poly[M]
        C = mpmath.re(mpmath.mpf(asc[m + M].numerator) / asc[m + M].denominator / lead)
        eps = mpmath.mpf(10) ** (-(WH_DPS - 15))
        clean = lambda v: mpmath.mpf(0) if abs(v) < eps else mpmath.re(v)
        a_s = {k: clean(-a_poly[k]) for k in range(1, M + 1)}
        d_s = {-k: clean(-d_poly[k]) for k in range(1, m + 1)}
        mp_laws = {
            "A_strict": a_s,
            "D_strict": d_s,
            "A": {0: 1 - C, **{k: C * v for k, v in a_s.items()}},
            "D": {0: 1 - C, **{k: C * v for k, v in d_s.items()}},
        }
        exact = {}
        for name, law in mp_laws.items():
            exact[name] = {}
            for k, v in law.items():
                f = _mp_to_fraction(v).limit_denominator(10 ** 15)
                exact[name][k] = f
                if abs(mpmath.mpf(f.numerator) / f.denominator - v) > eps:
                    exact = None
                    break
            if exact is None:
                break
        floats = {name: {k: float(v) for k, v in law.items()} for name, law in mp_laws.items()}

    x_law = FinitePmf(probs)
    if exact is not None and _exact_ok(x_law, exact, m, M):
        return {**{n: {k: v for k, v in law.items() if v != 0} for n, law in exact.items()},
                "g": g, "backend": EXACT, "residual": Fraction(0)}
    res = max(_wh_identity_residual(x_law, floats["A_strict"], floats["D"]),
              _wh_identity_residual(x_law, floats["A"], floats["D_strict"]))
    return {**{n: {k: v for k, v in law.items() if v != 0} for n, law in floats.items()},
            "g": g, "backend": FLOAT, "residual": float(res)}


def _wh_identity_residual(x_law: FinitePmf, up: dict, down: dict) -> Number:
    """sup | law(X) - (up + down - up * down) |, computed exactly."""
    up_f = {k: Fraction(v) for k, v in up.items()}
    down_f = {k: Fraction(v) for k, v in down.items()}
    rhs = {}
    for k, v in up_f.items():
        rhs[k] = rhs.get(k, 0) + v
    for k, v in down_f.items():
        rhs[k] = rhs.get(k, 0) + v
    for i, u in up_f.items():
        for j, v in down_f.items():
            rhs[i + j] = rhs.get(i + j, 0) - u * v
    keys = set(rhs) | set(x_law.atoms)
    return max(abs(Fraction(x_law.mass(k)) - rhs.get(k, 0)) for k in keys)


def _exact_ok(x_law, laws, m, M) -> bool:
    for name, law in laws.items():
        if any(v < 0 for v in law.values()) or sum(law.values()) > 1:
            return False
    if any(not (1 <= k <= M) for k in laws["A_strict"]) or any(not (-m <= k <= -1) for k in laws["D_strict"]):
        return False
    return (_wh_identity_residual(x_law, laws["A_strict"], laws["D"]) == 0
            and _wh_identity_residual(x_law, laws["A"], laws["D_strict"]) == 0)


_WH_KEY = {("ascending", "strict"): "A_strict", ("ascending", "weak"): "A",
           ("descending", "weak"): "D", ("descending", "strict"): "D_strict"}


def _check_config(direction, kind):
    if (direction, kind) not in _WH_KEY:
        raise ValueError(f"bad ladder configuration {(direction, kind)!r}")


def _wh_law(X: FinitePmf, direction: str, kind: str) -> LadderLaw:
    f = _factorize(X)
    g = f["g"]
    atoms = {k * g: v for k, v in f[_WH_KEY[direction, kind]].items()}
    err = 0.0 if f["backend"] == EXACT else float(f["residual"])
    return LadderLaw(atoms, X.span, "wiener-hopf", True, err, 0)


# ---------------------------------------------------------------------------
# truncated absorbing-chain solver
# ---------------------------------------------------------------------------


def _absorb(steps: dict, t0: int, L: int):
    """First-passage probabilities for the walk killed below ``t0`` or above ``L``.

    Returns ``(H, esc, zs)``: ``H[i, j]`` is the probability, from transient
    level ``t0 + i``, to first leave ``[t0, L]`` by landing on ``zs[j] < t0``;
    ``esc[i]`` the probability of leaving above ``L`` first.
    """
    m = max(0, -min(steps))
    M = max(0, max(steps))
    n = L - t0 + 1
    ab = np.zeros((m + M + 1, n))
    # banded storage: ab[u + i - j, j] = A[i, j], with u = M upper diagonals
    for i in range(n):
        ab[M, i] = 1.0
    for k, pk in steps.items():
        if k == 0:
            ab[M, :] -= pk
            continue
        # A[i, i + k] = -p_k  ->  row in band: M + i - (i + k) = M - k
        if k > 0:
            ab[M - k, k:] -= pk
        else:
            ab[M - k, : n + k] -= pk
    zs = list(range(t0 - m, t0))
    rhs = np.zeros((n, len(zs) + 1))
    for k, pk in steps.items():
        if k < 0:
            for i in range(min(-k, n)):
                rhs[i, (t0 + i + k) - (t0 - m)] += pk
        elif k > 0:
            rhs[max(n - k, 0):, -1] += pk
    sol = solve_banded((m, M), ab, rhs)
    return sol[:, :-1], sol[:, -1], zs


def _truncated_from(steps: dict, t0: int, start, L: int):
    """Absorption law and unabsorbed mass from ``start`` (a level or a step law)."""
    H, esc, zs = _absorb(steps, t0, L)
    law = {z: 0.0 for z in zs}
    if isinstance(start, dict):  # first step out of the origin
        unabsorbed = 0.0
        for k, pk in start.items():
            if k < t0:
                law[k] = law.get(k, 0.0) + pk
            elif k <= L:
                for j, z in enumerate(zs):
                    law[z] += pk * H[k - t0, j]
                unabsorbed += pk * esc[k - t0]
            else:
                unabsorbed += pk
    else:
        i = start - t0
        for j, z in enumerate(zs):
            law[z] += H[i, j]
        unabsorbed = float(esc[i])
    return law, unabsorbed


def _truncated_solve(steps: dict, t0: int, start, tol: float, drift_away: bool, min_level: int):
    L = max(min_level, 8 * max(abs(k) for k in steps))
    prev, history = None, []
    while True:
        law, unabsorbed = _truncated_from(steps, t0, start, L)
        change = math.inf if prev is None else 0.5 * sum(abs(law.get(z, 0.0) - prev.get(z, 0.0))
                                                        for z in set(law) | set(prev))
        bound = change if drift_away else max(unabsorbed, change if prev is not None else 0.0)
        history.append((L, unabsorbed, change))
        done = change < tol and (drift_away or unabsorbed < tol)
        if done or 2 * L > MAX_LEVEL:
            err = bound if drift_away else unabsorbed
            return law, done, err, L, history
        prev = law
        L *= 2


def _truncated_law(X: FinitePmf, direction: str, kind: str, tol: float) -> LadderLaw:
    sign = 1 if direction == "descending" else -1
    steps = {sign * k: float(v) for k, v in X.atoms.items()}
    mean = sum(k * v for k, v in steps.items())
    if kind == "weak":
        t0, start = 1, steps  # absorbed at <= 0
    else:
        t0, start = 0, 0      # absorbed at < 0
    law, ok, err, L, hist = _truncated_solve(steps, t0, start, tol, drift_away=mean > 0, min_level=0)
    atoms = {sign * z: v for z, v in law.items() if v > 0}
    return LadderLaw(atoms, X.span, "truncated", ok, err, L, hist)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def ladder_law(X: FinitePmf, direction: str, kind: str, tol: float = 1e-12,
               method: str = "wiener-hopf") -> LadderLaw:
    """Law of the first ladder height of the walk with step law ``X``.

    Parameters
    ----------
    direction : {"ascending", "descending"}
    kind : {"weak", "strict"}
        Weak ladders stop at ``S_k >= 0`` (``<= 0``), strict ones at
        ``S_k > 0`` (``< 0``).
    tol : float
        Target accuracy of the truncated solver (ignored by the exact one).

    Returns
    -------
    LadderLaw
        Possibly defective; the defect is the probability that the ladder
        epoch is infinite.
    """
    _check_config(direction, kind)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if X.support == (0,) or X.is_empty():
        raise ValueError("step law is degenerate at 0")
    if method == "wiener-hopf":
        return _wh_law(X, direction, kind)
    if method == "truncated":
        return _truncated_law(X, direction, kind, tol)
    raise ValueError(f"unknown method {method!r}")


def wiener_hopf_residual(X: FinitePmf, A_s: FinitePmf, D: FinitePmf) -> Number:
    """sup-norm of ``law(X) - (law(A_s) + law(D) - law(A_s) * law(D))``."""
    if not (X.span == A_s.span == D.span):
        raise ValueError("span mismatch")
    rhs = A_s + D - convolve(A_s, D) if not (A_s.is_empty() or D.is_empty()) else A_s + D
    diff = X - rhs
    if diff.is_empty():
        return Fraction(0) if (X.backend == A_s.backend == D.backend == EXACT) else 0.0
    r = max(abs(v) for v in diff.atoms.values())
    return r if isinstance(r, Fraction) else float(r)


def _renewal_entrance(G: dict, y: int) -> dict:
    """Entrance law below zero from ``y >= 0`` along ladder points with step law ``G < 0``."""
    u = {y: Fraction(1) if all(isinstance(v, Fraction) for v in G.values()) else 1.0}
    out = {}
    for x in range(y, -1, -1):
        ux = u.get(x)
        if ux is None or ux == 0:
            continue
        for k, gk in G.items():
            z = x + k
            if z >= 0:
                u[z] = u.get(z, 0) + ux * gk
            else:
                out[z] = out.get(z, 0) + ux * gk
    return out


def entrance_kernel(X: FinitePmf, start: int, absorb: str, tol: float = 1e-12,
                    method: str = "wiener-hopf") -> LadderLaw:
    """Law of the walk's position on first entering the absorbing half-line.

    ``absorb="negatives"`` requires ``start >= 0`` and gives the first point
    in ``(-inf, 0)``; ``absorb="nonnegatives"`` requires ``start < 0`` and
    gives the first point in ``[0, inf)``.  ``start`` is a lattice index.
    """
    if absorb == "negatives":
        if start < 0:
            raise ValueError("start must be >= 0 when absorbing into the negatives")
    elif absorb == "nonnegatives":
        if start >= 0:
            raise ValueError("start must be < 0 when absorbing into the nonnegatives")
    else:
        raise ValueError(f"bad absorbing side {absorb!r}")
    if X.support == (0,) or X.is_empty():
        raise ValueError("step law is degenerate at 0")

    if method == "wiener-hopf":
        if absorb == "negatives":
            G = ladder_law(X, "descending", "strict")
            out = _renewal_entrance(dict(G.atoms), start)
        else:
            G = ladder_law(X, "ascending", "strict")
            # reflect: entering [0, inf) from start < 0 == entering (-inf, 0] of the mirror
            # from -start > 0; strict ascending steps are >= 1, so shift by one level.
            refl = {-k: v for k, v in G.atoms.items()}
            out = {-z - 1: v for z, v in _renewal_entrance(refl, -start - 1).items()}
        return LadderLaw(out, X.span, "wiener-hopf", True, G.error_bound, 0)
    if method != "truncated":
        raise ValueError(f"unknown method {method!r}")
    if absorb == "negatives":
        steps = {k: float(v) for k, v in X.atoms.items()}
        t0, s, sign = 0, start, 1
    else:
        steps = {-k: float(v) for k, v in X.atoms.items()}
        t0, s, sign = 1, -start, -1
    mean = sum(k * v for k, v in steps.items())
    law, ok, err, L, hist = _truncated_solve(steps, t0, s, tol, drift_away=mean > 0, min_level=2 * s)
    return LadderLaw({sign * z: v for z, v in law.items() if v > 0}, X.span, "truncated", ok, err, L, hist)


@dataclass(frozen=True)
class LadderSystem:
    """All ladder laws a switching walk needs, plus the derived constants.

    ``D``, ``A`` and the strict ``D_strict``, ``A_strict`` belong to the walk
    with step ``X1``; the primed ones to the walk with step ``X1'``.
    """

    D: LadderLaw
    A: LadderLaw
    A_prime: LadderLaw
    D_prime: LadderLaw
    A_strict: LadderLaw
    D_strict_prime: LadderLaw
    D_strict: LadderLaw
    A_strict_prime: LadderLaw
    alpha: Number
    p: Number
    p_prime: Number
    a: Number
    q: Number
    q_prime: Number
    tol_achieved: float
    truncation_level_used: int
    backend: str
    certified: bool

    def laws(self) -> dict:
        return {n: getattr(self, n) for n in ("D", "A", "A_prime", "D_prime", "A_strict",
                                              "D_strict_prime", "D_strict", "A_strict_prime")}


def switch_weight(p, p_prime, alpha) -> Number:
    """``a = p alpha / (p alpha + p' (1 - alpha))``; 0/0 is rejected."""
    den = p * alpha + p_prime * (1 - alpha)
    if den == 0:
        raise AssumptionError("p*alpha + p'*(1-alpha) = 0: the switch weight is undefined")
    return p * alpha / den


def ladder_system(x1: FinitePmf, x1p: FinitePmf, alpha=1, tol: float = 1e-12,
                  method: str = "wiener-hopf") -> LadderSystem:
    validate_walk(x1, x1p)
    alpha = as_number(alpha)
    laws = {
        "D": ladder_law(x1, "descending", "weak", tol, method),
        "A": ladder_law(x1, "ascending", "weak", tol, method),
        "A_strict": ladder_law(x1, "ascending", "strict", tol, method),
        "D_strict": ladder_law(x1, "descending", "strict", tol, method),
        "A_prime": ladder_law(x1p, "ascending", "weak", tol, method),
        "D_prime": ladder_law(x1p, "descending", "weak", tol, method),
        "D_strict_prime": ladder_law(x1p, "descending", "strict", tol, method),
        "A_strict_prime": ladder_law(x1p, "ascending", "strict", tol, method),
    }
    p = laws["D"].prob_lt(0)
    p_prime = laws["A_prime"].prob_gt(0)
    a = switch_weight(p, p_prime, alpha)
    q = laws["A_strict"].defect
    q_prime = laws["D_strict_prime"].defect
    backend = EXACT if all(l.backend == EXACT for l in laws.values()) and isinstance(alpha, Fraction) else FLOAT
    return LadderSystem(
        **laws, alpha=alpha, p=p, p_prime=p_prime, a=a, q=q, q_prime=q_prime,
        tol_achieved=max(float(l.error_bound) for l in laws.values()),
        truncation_level_used=max(l.level for l in laws.values()),
        backend=backend, certified=all(l.certified for l in laws.values()),
    )


def step_law_of(values: dict, span=1) -> FinitePmf:
    """Convenience constructor mirroring spec files: ``{index: probability}``."""
    return FinitePmf(values, span)


__all__ = [
    "AssumptionError", "LadderLaw", "LadderSystem", "entrance_kernel", "ladder_law",
    "ladder_system", "switch_weight", "validate_walk", "wiener_hopf_residual", "point_mass",
]
