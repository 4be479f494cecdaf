"""Switching-walk specs and exact application of their transition kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .ladder import LadderSystem, entrance_kernel, ladder_system, validate_walk, AssumptionError
from .laws import ContinuousLaw
from .measures import (EXACT, FiniteMeasure, FinitePmf, Number, WindowDensity,
                       as_number, convolve, detect_span, distance, minus, plus)


@dataclass(frozen=True)
class WalkSpec:
    """A switching random walk.

    On the lattice, ``x1`` / ``x1p`` are step laws indexed in units of
    ``span`` (the joint span); ``alpha`` is the probability of using ``x1``
    at zero.  Continuous specs carry ``ContinuousLaw`` objects instead and
    are simulation-only.
    """

    x1: Union[FinitePmf, ContinuousLaw]
    x1p: Union[FinitePmf, ContinuousLaw]
    alpha: Number = Fraction(1)
    span: Fraction = Fraction(1)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_number(self.alpha))
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")

    @classmethod
    def lattice(cls, x1: dict, x1p: dict, alpha=1, base=1, name: str = "") -> "WalkSpec":
        """Build from ``{integer multiple of base: probability}`` maps; detects the span."""
        d, a, b = detect_span(FinitePmf(x1, base), FinitePmf(x1p, base))
        return cls(a, b, alpha, d, name)

    @classmethod
    def continuous(cls, x1: ContinuousLaw, x1p: ContinuousLaw, alpha=1, name: str = "") -> "WalkSpec":
        return cls(x1, x1p, alpha, Fraction(0), name)

    @property
    def is_lattice(self) -> bool:
        return isinstance(self.x1, FinitePmf)

    @property
    def is_random_walk(self) -> bool:
        return self.x1 == self.x1p

    @property
    def max_jump(self) -> int:
        self._need_lattice()
        return max(abs(self.x1.lo), abs(self.x1.hi), abs(self.x1p.lo), abs(self.x1p.hi))

    def _need_lattice(self):
        if not self.is_lattice:
            raise TypeError("exact kernels need a lattice spec")

    def validate(self) -> None:
        if self.is_lattice:
            validate_walk(self.x1, self.x1p)
        else:
            if self.x1.mean > 0 or self.x1p.mean < 0:
                raise AssumptionError("continuous spec violates E X1 <= 0 <= E X1'")

    def ladders(self, tol: float = 1e-12, method: str = "wiener-hopf") -> LadderSystem:
        self._need_lattice()
        return ladder_system(self.x1, self.x1p, self.alpha, tol, method)


@dataclass(frozen=True)
class KernelImage:
    input: WindowDensity
    output: WindowDensity
    kernel_id: str
    residual_sup: Number


def _as_window(phi) -> WindowDensity:
    if isinstance(phi, FiniteMeasure):
        return phi.to_window() if not phi.is_empty() else phi.to_window(0, 0)
    return phi


def _switch_apply(phi, up: FinitePmf, down: FinitePmf, alpha, kernel_id) -> KernelImage:
    """``phi^+ * up + phi^- * down`` where ``up`` is used on ``x > 0``."""
    w = _as_window(phi)
    pp, pm = plus(w, alpha), minus(w, alpha)
    out = convolve(pp, up) + convolve(pm, down)
    res = distance(out, w, "sup").value if out.has_interior else float("nan")
    return KernelImage(w, out, kernel_id, res)


def apply_P(phi, spec: WalkSpec) -> KernelImage:
    """One step of the switching walk applied to a measure (density form)."""
    spec._need_lattice()
    return _switch_apply(phi, spec.x1, spec.x1p, spec.alpha, "P")


def apply_PH(phi, ladders: LadderSystem, alpha=None) -> KernelImage:
    """One step of the switching ladder-heights chain (steps ``D`` and ``A'``)."""
    alpha = ladders.alpha if alpha is None else as_number(alpha)
    return _switch_apply(phi, ladders.D, ladders.A_prime, alpha, "P_H")


def apply_finite(phi: FiniteMeasure, up: FinitePmf, down: FinitePmf, alpha) -> FiniteMeasure:
    """Same as the kernels above for a finite measure, staying finite."""
    alpha = as_number(alpha)
    pp, pm = plus(phi, alpha), minus(phi, alpha)
    out = FiniteMeasure({}, phi.span)
    if not pp.is_empty():
        out = out + convolve(pp, up)
    if not pm.is_empty():
        out = out + convolve(pm, down)
    return out


# ---------------------------------------------------------------------------
# overshoot chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingKernels:
    """Rows ``down[y]`` (``y >= 0`` to the next point ``< 0``) and
    ``up[y]`` (``y < 0`` to the next point ``>= 0``)."""

    down: dict
    up: dict
    span: Fraction

    def _apply(self, rows: dict, phi: FiniteMeasure) -> FiniteMeasure:
        out = FiniteMeasure({}, self.span)
        for y, mass in phi.atoms.items():
            if y not in rows:
                raise KeyError(f"no kernel row for state {y}")
            out = out + rows[y].scaled(mass)
        return out

    def apply_down(self, phi: FiniteMeasure) -> FiniteMeasure:
        return self._apply(self.down, phi)

    def apply_up(self, phi: FiniteMeasure) -> FiniteMeasure:
        return self._apply(self.up, phi)

    def row_defects(self) -> dict:
        rows = {("down", y): r for y, r in self.down.items()}
        rows.update({("up", y): r for y, r in self.up.items()})
        return {k: r.defect for k, r in rows.items()}


def crossing_kernels(spec: WalkSpec, ladders: LadderSystem, tol: float = 1e-12,
                     states: Optional[FiniteMeasure] = None, method: str = "wiener-hopf") -> CrossingKernels:
    """Entrance kernels across zero for every state of ``states`` (default: the
    support of the overshoot measure)."""
    spec._need_lattice()
    if spec.alpha != 1:
        raise ValueError("overshoot kernels are only defined for alpha = 1 on a lattice")
    if states is None:
        from .stationary import pi
        states = pi(ladders.D, ladders.A_prime, tol=max(tol, ladders.tol_achieved))
    down = {y: entrance_kernel(spec.x1, y, "negatives", tol, method) for y in states.support if y >= 0}
    up = {y: entrance_kernel(spec.x1p, y, "nonnegatives", tol, method) for y in states.support if y < 0}
    return CrossingKernels(down, up, spec.span)


def overshoot_residuals(spec: WalkSpec, ladders: LadderSystem, overshoots: FiniteMeasure,
                        kernels: Optional[CrossingKernels] = None) -> dict:
    """sup-residuals of ``pi^- -> pi^+`` (up) and ``pi^+ -> pi^-`` (down)."""
    K = kernels or crossing_kernels(spec, ladders, states=overshoots)
    pi_plus, pi_minus = plus(overshoots, 1), minus(overshoots, 1)
    sup = lambda a, b: distance(a, b, "sup").value
    up_img = K.apply_up(pi_minus)
    down_img = K.apply_down(pi_plus)
    return {
        "up": sup(up_img, pi_plus),
        "down": sup(down_img, pi_minus),
        "two_step": sup(K.apply_up(K.apply_down(pi_plus)), pi_plus),
    }


# ---------------------------------------------------------------------------
# dual kernel
# ---------------------------------------------------------------------------


def _weight(s: int, alpha):
    return alpha if s == 1 else 1 - alpha


def _in_plus(x: int, s: int) -> bool:
    return x > 0 or (x == 0 and s == 1)


@dataclass(frozen=True)
class DualKernel:
    """Table ``rows[(y, t)][(x, s)]`` with its row-sum and balance residuals."""

    rows: dict
    row_sum_residual: Number
    balance_residual: Number


def dual_kernel_Q(ladders: LadderSystem, nu_measure: FiniteMeasure, alpha=None) -> DualKernel:
    """Time reversal of the extended ladder chain relative to the extended ``nu``.

    From ``(y, t)`` with ``nu``-density ``p(y) > 0`` the kernel charges
    ``(x, s)`` with ``s_alpha p(x) / p(y)`` times ``P(y - D = x)`` when
    ``(x, s)`` is on the plus side and ``P(y - A' = x)`` otherwise; rows with
    ``p(y) = 0`` are ``s_alpha delta_0``.
    """
    alpha = ladders.alpha if alpha is None else as_number(alpha)
    D, Ap = ladders.D, ladders.A_prime
    dens = nu_measure.density
    support = [y for y in nu_measure.support]
    rows = {}
    for y in range(min(support + [0]), max(support + [0]) + 1):
        py = dens(y)
        for t in (0, 1):
            row = {}
            if py == 0:
                for s in (0, 1):
                    w = _weight(s, alpha)
                    if w != 0:
                        row[(0, s)] = w
            else:
                for k, pk in D.atoms.items():
                    x = y - k
                    for s in (0, 1):
                        if _in_plus(x, s) and _weight(s, alpha) != 0:
                            row[(x, s)] = row.get((x, s), 0) + _weight(s, alpha) * dens(x) / py * pk
                for k, pk in Ap.atoms.items():
                    x = y - k
                    for s in (0, 1):
                        if not _in_plus(x, s) and _weight(s, alpha) != 0:
                            row[(x, s)] = row.get((x, s), 0) + _weight(s, alpha) * dens(x) / py * pk
            rows[(y, t)] = row

    row_res = max(abs(sum(rows[(y, t)].values()) - 1) for y in support for t in (0, 1))

    def ph(x, s, y, t):
        law = D if _in_plus(x, s) else Ap
        return _weight(t, alpha) * law.mass(y - x)

    bal = Fraction(0) if ladders.backend == EXACT and isinstance(alpha, Fraction) else 0.0
    for x in support:
        for y in support:
            for s in (0, 1):
                for t in (0, 1):
                    lhs = _weight(s, alpha) * dens(x) * ph(x, s, y, t)
                    rhs = _weight(t, alpha) * dens(y) * rows[(y, t)].get((x, s), 0)
                    bal = max(bal, abs(lhs - rhs))
    to_out = lambda v: v if isinstance(v, Fraction) else float(v)
    return DualKernel(rows, to_out(row_res), to_out(bal))
