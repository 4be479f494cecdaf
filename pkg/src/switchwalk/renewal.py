"""Renewal measures of one-sided lattice laws, deconvolution and supremum laws."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .measures import (EXACT, FinitePmf, Number, Tail, WindowDensity,
                       _to_array, convolve)

PROPER_TOL = 1e-12


@dataclass(frozen=True)
class RenewalMeasure:
    """``U = sum_n G^{*n}`` on a one-sided window.

    ``base`` holds the density (the atom at zero has density ``1/h``),
    ``total_mass`` is ``1 / (1 - |G|)`` for a defective generator and
    ``math.inf`` otherwise.
    """

    base: WindowDensity
    generator: FinitePmf
    total_mass: Union[Number, float]
    side: str  # "plus" or "minus"


def _side_of(G: FinitePmf) -> str:
    if G.is_empty():
        return "none"
    if 0 in G.atoms:
        raise ValueError("generator has an atom at 0")
    if G.lo > 0:
        return "plus"
    if G.hi < 0:
        return "minus"
    raise ValueError("generator charges both sides of 0")


def renewal_measure(G: FinitePmf, window: int, side: str = None) -> RenewalMeasure:
    """Renewal measure of a one-sided (possibly defective) law ``G``.

    Parameters
    ----------
    G : FinitePmf
        Supported in ``(0, inf)`` or in ``(-inf, 0)``; may be totally
        defective, in which case ``U = delta_0``.
    window : int
        Half-line extent ``W``; values are exact on ``[0, W]`` (or
        ``[-W, 0]``) since ``G`` points away from zero.
    side : {"plus", "minus"}, optional
        Required only when ``G`` is empty, to orient the window.
    """
    s = _side_of(G)
    if s == "none":
        if side not in ("plus", "minus"):
            raise ValueError("an empty generator needs an explicit side")
        s = side
    elif side is not None and side != s:
        raise ValueError(f"generator lives on the {s} side, not {side}")
    if window < 0:
        raise ValueError("window must be non-negative")
    h = G.span
    exact = G.backend == EXACT
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    # masses m(x) = 1{x=0} + sum_k m(x - k) G(k), walking away from zero
    sgn = 1 if s == "plus" else -1
    mass = [zero] * (window + 1)  # mass[j] at index sgn * j
    mass[0] = one
    steps = [(sgn * k, v) for k, v in G.atoms.items()]
    for j in range(1, window + 1):
        acc = zero
        for k, v in steps:
            if k <= j:
                acc += mass[j - k] * v
        mass[j] = acc
    dens = [v / h if exact else v / float(h) for v in mass]
    if s == "plus":
        base = WindowDensity(h, 0, _to_array(dens), (0, window), Tail.zero(), Tail.unknown())
    else:
        base = WindowDensity(h, -window, _to_array(dens[::-1]), (-window, 0), Tail.unknown(), Tail.zero())
    g = G.total()
    if G.is_proper(PROPER_TOL):
        total = math.inf
    else:
        total = 1 / (1 - g)
    return RenewalMeasure(base, G, total, s)


def renewal_deconvolve(psi: WindowDensity, G: FinitePmf) -> WindowDensity:
    """Solve ``psi = phi + psi * G`` for ``phi``, i.e. ``phi = psi - psi * G``.

    The result keeps signs (no clamping); ``result.signed`` reports density
    below ``-1e-9``, which means ``psi`` was not a renewal image.
    """
    if G.is_empty():
        return psi
    _side_of(G)
    out = psi - convolve(psi, G)
    if not out.has_interior:
        raise ValueError("window too small: deconvolution has no valid interior")
    return out


def supremum_law(A_s: FinitePmf, window: int, tol: float = 1e-12) -> FinitePmf:
    """Law of ``M = sup_n S_n`` of a walk drifting to ``-inf``, on ``[0, W]``.

    ``M`` has law ``q U_+`` with ``q = 1 - |A_s|``; the returned pmf's
    ``defect`` is exactly the mass beyond the window.
    """
    if A_s.defect <= tol:
        raise ValueError("strict ascending ladder law is proper: the supremum is infinite")
    U = renewal_measure(A_s, window, side="plus")
    q = A_s.defect
    h = A_s.span
    atoms = {k: q * U.base.mass(k) for k in range(0, window + 1)}
    return FinitePmf(atoms, h)
