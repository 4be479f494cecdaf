"""Finitely supported and windowed measures on a lattice ``h*Z``.

Two containers are used throughout the package:

``FiniteMeasure`` / ``FinitePmf``
    Atom masses keyed by integer lattice index ``k`` (the point ``k*h``).
    A ``FinitePmf`` is a sub-probability law; whatever mass is missing is
    its ``defect``.

``WindowDensity``
    Density with respect to the Haar measure of the lattice, in which every
    atom has mass ``h``.  So the mass of ``{k*h}`` is ``values[k - lo] * h``.
    The density is stored on an integer window ``[lo, hi]`` together with the
    sub-window (``interior``) on which the values are exact, and a
    description of what lies beyond each edge of the window (``Tail``).

Masses are either ``fractions.Fraction`` (the exact backend) or ``float``.
Ints and decimal strings are promoted to ``Fraction``.  Mixing the two
backends degrades to ``float``; ``backend`` reports which one produced a
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Optional, Union

import numpy as np

Number = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"

PMF_TOL = 1e-10


def as_number(value) -> Number:
    """Promote ints / rational strings to ``Fraction``; keep floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not masses")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise TypeError(f"unsupported mass type {type(value).__name__}")


def backend_of(values: Iterable) -> str:
    for v in values:
        if not isinstance(v, Fraction):
            return FLOAT
    return EXACT


def _zero(backend: str) -> Number:
    return Fraction(0) if backend == EXACT else 0.0


def _to_array(values, backend: Optional[str] = None) -> np.ndarray:
    vals = [as_number(v) if not isinstance(v, (Fraction, float)) else v for v in values]
    if backend is None:
        backend = backend_of(vals)
    if backend == EXACT:
        arr = np.empty(len(vals), dtype=object)
        arr[:] = vals
    else:
        arr = np.array([float(v) for v in vals], dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _array_backend(arr: np.ndarray) -> str:
    if arr.dtype == object:
        return backend_of(arr.tolist())
    return FLOAT


# ---------------------------------------------------------------------------
# finite measures
# ---------------------------------------------------------------------------


class FiniteMeasure:
    """Finite (possibly signed) measure with finitely many atoms on ``span*Z``.

    Parameters
    ----------
    atoms : mapping int -> mass
        Lattice index ``k`` (the point ``k*span``) to atom mass.  Zero masses
        are dropped.
    span : positive rational
        Lattice step ``h``.
    """

    __slots__ = ("span", "atoms", "_hash")

    def __init__(self, atoms: Mapping[int, Number] | Iterable = (), span=1):
        span = Fraction(span)
        if span <= 0:
            raise ValueError("span must be positive")
        items = dict(atoms).items() if not isinstance(atoms, Mapping) else atoms.items()
        clean = {}
        for k, v in items:
            if int(k) != k:
                raise ValueError(f"lattice index {k!r} is not an integer")
            v = as_number(v)
            if v != 0:
                clean[int(k)] = clean.get(int(k), 0) + v
        clean = {k: clean[k] for k in sorted(clean) if clean[k] != 0}
        object.__setattr__(self, "span", span)
        object.__setattr__(self, "atoms", MappingProxyType(clean))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    # -- basic queries -------------------------------------------------------
    @property
    def backend(self) -> str:
        return backend_of(self.atoms.values())

    @property
    def support(self) -> tuple:
        return tuple(self.atoms)

    @property
    def lo(self) -> int:
        if not self.atoms:
            raise ValueError("empty measure has no support")
        return next(iter(self.atoms))

    @property
    def hi(self) -> int:
        if not self.atoms:
            raise ValueError("empty measure has no support")
        return next(reversed(self.atoms))

    def is_empty(self) -> bool:
        return not self.atoms

    def zero(self) -> Number:
        return _zero(self.backend)

    def mass(self, k: int) -> Number:
        return self.atoms.get(k, self.zero())

    def density(self, k: int) -> Number:
        """Density w.r.t. the lattice Haar measure at index ``k``."""
        m = self.mass(k)
        return m / self.span if isinstance(m, Fraction) else m / float(self.span)

    def total(self) -> Number:
        return sum(self.atoms.values(), self.zero())

    def prob_lt(self, k: int) -> Number:
        return sum((v for j, v in self.atoms.items() if j < k), self.zero())

    def prob_le(self, k: int) -> Number:
        return sum((v for j, v in self.atoms.items() if j <= k), self.zero())

    def prob_gt(self, k: int) -> Number:
        return sum((v for j, v in self.atoms.items() if j > k), self.zero())

    def prob_ge(self, k: int) -> Number:
        return sum((v for j, v in self.atoms.items() if j >= k), self.zero())

    def mean_index(self) -> Number:
        """First moment in lattice-index units (not normalized by total)."""
        return sum((k * v for k, v in self.atoms.items()), self.zero())

    def mean(self) -> Number:
        m = self.mean_index()
        return m * self.span if isinstance(m, Fraction) else m * float(self.span)

    # -- transformations ------------------------------------------------------
    def _like(self, atoms) -> "FiniteMeasure":
        return FiniteMeasure(atoms, self.span)

    def scaled(self, c) -> "FiniteMeasure":
        c = as_number(c)
        return FiniteMeasure({k: c * v for k, v in self.atoms.items()}, self.span)

    def reflected(self) -> "FiniteMeasure":
        return self._like({-k: v for k, v in self.atoms.items()})

    def shifted(self, s: int) -> "FiniteMeasure":
        return self._like({k + s: v for k, v in self.atoms.items()})

    def as_float(self) -> "FiniteMeasure":
        return self._like({k: float(v) for k, v in self.atoms.items()})

    def __add__(self, other: "FiniteMeasure") -> "FiniteMeasure":
        _check_span(self, other)
        out = dict(self.atoms)
        for k, v in other.atoms.items():
            out[k] = out.get(k, 0) + v
        return FiniteMeasure(out, self.span)

    def __sub__(self, other: "FiniteMeasure") -> "FiniteMeasure":
        return self + other.scaled(-1)

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return self.span == other.span and dict(self.atoms) == dict(other.atoms)

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.span, tuple(self.atoms.items()))))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in self.atoms.items())
        return f"{type(self).__name__}({{{body}}}, span={self.span})"

    def to_window(self, lo: Optional[int] = None, hi: Optional[int] = None) -> "WindowDensity":
        """Exact density on a window covering the support, zero tails."""
        if self.atoms:
            lo = self.lo if lo is None else min(lo, self.lo)
            hi = self.hi if hi is None else max(hi, self.hi)
        else:
            lo = 0 if lo is None else lo
            hi = lo if hi is None else hi
        vals = [self.density(k) for k in range(lo, hi + 1)]
        arr = _to_array(vals, self.backend if self.atoms else EXACT)
        return WindowDensity(self.span, lo, arr, (lo, hi), Tail.zero(), Tail.zero())


class FinitePmf(FiniteMeasure):
    """Sub-probability law with finitely many atoms; ``defect = 1 - total``.

    Masses must be non-negative (within ``1e-12``) and sum to at most one
    (within ``1e-10``).
    """

    __slots__ = ()

    def __init__(self, atoms=(), span=1):
        super().__init__(atoms, span)
        for k, v in self.atoms.items():
            if v < -1e-12:
                raise ValueError(f"negative mass {v} at index {k}")
        if self.total() > 1 + PMF_TOL:
            raise ValueError(f"total mass {float(self.total())} exceeds one")

    def _like(self, atoms) -> "FinitePmf":
        return FinitePmf(atoms, self.span)

    @property
    def defect(self) -> Number:
        return 1 - self.total()

    def is_proper(self, tol: float = PMF_TOL) -> bool:
        return abs(self.defect) <= tol

    def as_pmf(self) -> "FinitePmf":
        return self


def pmf(atoms, span=1) -> FinitePmf:
    """Shorthand: ``pmf({-1: "1/2", 1: "1/2"})``."""
    return FinitePmf(atoms, span)


def point_mass(k: int = 0, span=1) -> FinitePmf:
    return FinitePmf({k: 1}, span)


def _check_span(a, b):
    if a.span != b.span:
        raise ValueError(f"span mismatch: {a.span} vs {b.span}")


def to_pmf(m: FiniteMeasure) -> FinitePmf:
    return m if isinstance(m, FinitePmf) else FinitePmf(m.atoms, m.span)


# ---------------------------------------------------------------------------
# windowed densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tail:
    """What a ``WindowDensity`` is beyond one edge of its window."""

    kind: str  # "zero" | "unknown" | "constant"
    value: Number = Fraction(0)

    @classmethod
    def zero(cls) -> "Tail":
        return cls("zero", Fraction(0))

    @classmethod
    def unknown(cls) -> "Tail":
        return cls("unknown", Fraction(0))

    @classmethod
    def constant(cls, c) -> "Tail":
        c = as_number(c)
        return cls("zero", c) if c == 0 else cls("constant", c)

    @property
    def known(self) -> bool:
        return self.kind != "unknown"

    def scaled(self, c) -> "Tail":
        if not self.known:
            return self
        return Tail.constant(self.value * c)

    def __add__(self, other: "Tail") -> "Tail":
        if not (self.known and other.known):
            return Tail.unknown()
        return Tail.constant(self.value + other.value)


class WindowDensity:
    """Density w.r.t. the lattice Haar measure on the index window ``[lo, hi]``.

    ``interior = (ilo, ihi)`` is the sub-window on which values are exact.
    ``left`` / ``right`` describe the density below ``lo`` / above ``hi``;
    they are only trusted when the interior reaches that edge of the window.
    """

    __slots__ = ("span", "lo", "values", "interior", "left", "right")

    def __init__(self, span, lo: int, values, interior=None, left: Tail = None, right: Tail = None):
        span = Fraction(span)
        if span <= 0:
            raise ValueError("span must be positive")
        arr = values if isinstance(values, np.ndarray) else _to_array(list(values))
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("window values must be a non-empty 1-d sequence")
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        lo = int(lo)
        hi = lo + arr.size - 1
        if interior is None:
            interior = (lo, hi)
        ilo, ihi = int(interior[0]), int(interior[1])
        if ilo <= ihi and (ilo < lo or ihi > hi):
            raise ValueError("interior must lie inside the window")
        object.__setattr__(self, "span", span)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "interior", (ilo, ihi))
        object.__setattr__(self, "left", left or Tail.unknown())
        object.__setattr__(self, "right", right or Tail.unknown())

    def __setattr__(self, name, value):
        raise AttributeError("WindowDensity is immutable")

    @property
    def hi(self) -> int:
        return self.lo + self.values.size - 1

    @property
    def backend(self) -> str:
        b = _array_backend(self.values)
        for t in (self.left, self.right):
            if t.known and not isinstance(t.value, Fraction):
                b = FLOAT
        return b

    @property
    def has_interior(self) -> bool:
        return self.interior[0] <= self.interior[1]

    @property
    def valid_range(self) -> tuple:
        """Index range on which the density is known; ``None`` = unbounded."""
        ilo, ihi = self.interior
        if not self.has_interior:
            return (ilo, ihi)
        vlo = None if (ilo == self.lo and self.left.known) else ilo
        vhi = None if (ihi == self.hi and self.right.known) else ihi
        return (vlo, vhi)

    def _raw(self, k: int) -> Number:
        if self.lo <= k <= self.hi:
            return self.values[k - self.lo]
        tail = self.left if k < self.lo else self.right
        return tail.value if tail.known else _zero(self.backend)

    def value(self, k: int) -> Number:
        """Density at index ``k``; raises outside the known region."""
        vlo, vhi = self.valid_range
        if (vlo is not None and k < vlo) or (vhi is not None and k > vhi):
            raise ValueError(f"index {k} outside the valid region {self.valid_range}")
        return self._raw(k)

    def mass(self, k: int) -> Number:
        v = self.value(k)
        return v * self.span if isinstance(v, Fraction) else v * float(self.span)

    def interior_values(self) -> np.ndarray:
        ilo, ihi = self.interior
        return self.values[ilo - self.lo: ihi - self.lo + 1]

    def min_value(self) -> Number:
        return min(self.interior_values().tolist())

    @property
    def signed(self) -> bool:
        """True when the interior carries negative density beyond ``-1e-9``."""
        return self.has_interior and self.min_value() < -1e-9

    def as_float(self) -> "WindowDensity":
        f = lambda t: Tail(t.kind, float(t.value))
        return WindowDensity(self.span, self.lo, self.values.astype(np.float64),
                             self.interior, f(self.left), f(self.right))

    def extended(self, lo: int, hi: int) -> "WindowDensity":
        """Grow the window to ``[min(lo, self.lo), max(hi, self.hi)]``."""
        lo, hi = min(lo, self.lo), max(hi, self.hi)
        if lo == self.lo and hi == self.hi:
            return self
        vals = [self._raw(k) for k in range(lo, hi + 1)]
        arr = _to_array(vals, self.backend)
        vlo, vhi = self.valid_range
        return _from_valid(self.span, lo, arr, vlo, vhi, self.left, self.right)

    def cropped(self, lo: int, hi: int) -> "WindowDensity":
        """Restrict the window; tails become unknown where data is cut off."""
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        if lo > hi:
            raise ValueError("crop leaves an empty window")
        arr = self.values[lo - self.lo: hi - self.lo + 1]
        ilo, ihi = max(self.interior[0], lo), min(self.interior[1], hi)
        left = self.left if lo == self.lo else Tail.unknown()
        right = self.right if hi == self.hi else Tail.unknown()
        return WindowDensity(self.span, lo, arr, (ilo, ihi), left, right)

    def scaled(self, c) -> "WindowDensity":
        c = as_number(c)
        return WindowDensity(self.span, self.lo, _to_array((self.values * c).tolist()),
                             self.interior, self.left.scaled(c), self.right.scaled(c))

    def __add__(self, other: "WindowDensity") -> "WindowDensity":
        if isinstance(other, FiniteMeasure):
            other = other.to_window()
        _check_span(self, other)
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        a, b = self.extended(lo, hi), other.extended(lo, hi)
        arr = _to_array((a.values + b.values).tolist())
        vlo = _max_opt(a.valid_range[0], b.valid_range[0], low=True)
        vhi = _max_opt(a.valid_range[1], b.valid_range[1], low=False)
        return _from_valid(self.span, lo, arr, vlo, vhi, a.left + b.left, a.right + b.right)

    def __sub__(self, other) -> "WindowDensity":
        if isinstance(other, FiniteMeasure):
            other = other.to_window()
        return self + other.scaled(-1)

    def masses(self) -> dict:
        """Atom masses on the interior, keyed by index."""
        ilo, ihi = self.interior
        return {k: self.mass(k) for k in range(ilo, ihi + 1)}

    def to_measure(self) -> FiniteMeasure:
        """Exact finite measure; requires a fully valid window with zero tails."""
        if self.valid_range != (None, None) or self.left.kind != "zero" or self.right.kind != "zero":
            raise ValueError("only fully known, zero-tailed windows convert to finite measures")
        return FiniteMeasure(self.masses(), self.span)

    def __repr__(self):
        return (f"WindowDensity(span={self.span}, window=[{self.lo}, {self.hi}], "
                f"interior={self.interior}, left={self.left.kind}, right={self.right.kind}, "
                f"backend={self.backend})")


def _max_opt(x, y, low: bool):
    """Tightest bound of two valid-range ends (``None`` is unbounded)."""
    if x is None:
        return y
    if y is None:
        return x
    return max(x, y) if low else min(x, y)


def _from_valid(span, lo, arr, vlo, vhi, left, right) -> WindowDensity:
    hi = lo + arr.size - 1
    ilo = lo if vlo is None else max(vlo, lo)
    ihi = hi if vhi is None else min(vhi, hi)
    if vlo is not None:
        left = Tail.unknown()
    if vhi is not None:
        right = Tail.unknown()
    if ilo > ihi:
        ilo, ihi = lo + 1, lo  # canonical empty interior
    return WindowDensity(span, lo, arr, (ilo, ihi), left, right)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def convolve(a, b: FiniteMeasure):
    """Convolution ``a * b`` with ``b`` a finite measure.

    ``a`` may be a ``FiniteMeasure`` (result: finite measure, a ``FinitePmf``
    when both inputs are) or a ``WindowDensity``.  For windows the value at
    ``x`` is ``sum_z a(x - z) b({z})``; the valid region shrinks by the reach
    of ``b`` on sides whose tail is unknown, and a constant tail ``c`` becomes
    ``c * b.total()``.
    """
    if not isinstance(b, FiniteMeasure):
        raise TypeError("second argument must be a FiniteMeasure")
    _check_span(a, b)
    if b.is_empty():
        raise ValueError("cannot convolve with an empty measure")
    if isinstance(a, FiniteMeasure):
        out = {}
        for i, u in a.atoms.items():
            for j, v in b.atoms.items():
                out[i + j] = out.get(i + j, 0) + u * v
        cls = FinitePmf if isinstance(a, FinitePmf) and isinstance(b, FinitePmf) else FiniteMeasure
        return cls(out, a.span)
    if not isinstance(a, WindowDensity):
        raise TypeError("first argument must be a FiniteMeasure or WindowDensity")

    kmin, kmax = b.lo, b.hi
    w = kmax - kmin
    backend = EXACT if a.backend == EXACT and b.backend == EXACT else FLOAT
    ext = [a._raw(k) for k in range(a.lo - w, a.hi + w + 1)]
    kern = [b.mass(k) for k in range(kmin, kmax + 1)]
    if backend == EXACT:
        ext_arr = np.empty(len(ext), dtype=object)
        ext_arr[:] = ext
        kern_arr = np.empty(len(kern), dtype=object)
        kern_arr[:] = kern
    else:
        ext_arr = np.array([float(v) for v in ext])
        kern_arr = np.array([float(v) for v in kern])
    full = np.convolve(ext_arr, kern_arr)
    n = a.values.size
    out = full[w: w + n + w]
    lo = a.lo + kmin
    vlo, vhi = a.valid_range
    if vlo is not None:
        vlo += kmax
    if vhi is not None:
        vhi += kmin
    tot = b.total()
    return _from_valid(a.span, lo, _to_array(out.tolist(), backend), vlo, vhi,
                       a.left.scaled(tot), a.right.scaled(tot))


@dataclass(frozen=True)
class SignRestriction:
    """Split of a measure at zero: ``plus`` keeps ``x > 0`` and ``alpha`` of
    the atom at zero, ``minus`` keeps ``x < 0`` and ``1 - alpha`` of it."""

    alpha: Number
    sign: str  # "plus" | "minus"

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_number(self.alpha))
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.sign not in ("plus", "minus"):
            raise ValueError("sign must be 'plus' or 'minus'")

    @property
    def weight_at_zero(self) -> Number:
        return self.alpha if self.sign == "plus" else 1 - self.alpha

    def keeps(self, k: int) -> bool:
        return k > 0 if self.sign == "plus" else k < 0


def restrict(phi, r: SignRestriction):
    """Sign restriction of a finite measure or window density."""
    w0 = r.weight_at_zero
    if isinstance(phi, FiniteMeasure):
        out = {k: v for k, v in phi.atoms.items() if r.keeps(k)}
        if 0 in phi.atoms:
            out[0] = phi.atoms[0] * w0
        cls = FinitePmf if isinstance(phi, FinitePmf) else FiniteMeasure
        return cls(out, phi.span)

    w = phi.extended(min(phi.lo, 0), max(phi.hi, 0))
    backend = w.backend if isinstance(w0, Fraction) else FLOAT
    zero = _zero(backend)
    vals = []
    for k in range(w.lo, w.hi + 1):
        v = w.values[k - w.lo]
        vals.append(v if r.keeps(k) else (v * w0 if k == 0 else zero))
    arr = _to_array(vals, backend)
    vlo, vhi = w.valid_range
    left, right = w.left, w.right
    if r.sign == "plus":
        left = Tail.zero()
        if vlo is None or vlo <= 0:
            vlo = None
    else:
        right = Tail.zero()
        if vhi is None or vhi >= 0:
            vhi = None
    if vlo is not None and vhi is not None and vlo > vhi:
        raise ValueError("restriction has no valid region")
    return _from_valid(w.span, w.lo, arr, vlo, vhi, left, right)


def plus(phi, alpha):
    return restrict(phi, SignRestriction(alpha, "plus"))


def minus(phi, alpha):
    return restrict(phi, SignRestriction(alpha, "minus"))


class Distance(NamedTuple):
    value: float
    lo: Optional[int]
    hi: Optional[int]


def distance(a, b, norm: str = "sup") -> Distance:
    """``norm`` of ``a - b`` over the region where both are known.

    ``norm`` is ``"sup"`` (sup of the density difference) or ``"tv"``
    (half the total absolute mass difference).  ``lo``/``hi`` of the result
    give the region compared; ``None`` means both measures were known on all
    of the lattice and the region is the union of their windows.
    """
    if norm not in ("sup", "tv"):
        raise ValueError(f"unknown norm {norm!r}")
    if isinstance(a, FiniteMeasure):
        a = a.to_window() if not a.is_empty() else FiniteMeasure({}, a.span).to_window(0, 0)
    if isinstance(b, FiniteMeasure):
        b = b.to_window() if not b.is_empty() else FiniteMeasure({}, b.span).to_window(0, 0)
    _check_span(a, b)
    if not (a.has_interior and b.has_interior):
        raise ValueError("empty interior")
    vlo = _max_opt(a.valid_range[0], b.valid_range[0], low=True)
    vhi = _max_opt(a.valid_range[1], b.valid_range[1], low=False)
    lo = min(a.lo, b.lo) if vlo is None else vlo
    hi = max(a.hi, b.hi) if vhi is None else vhi
    if lo > hi:
        raise ValueError("the valid interiors do not intersect")
    diffs = [a._raw(k) - b._raw(k) for k in range(lo, hi + 1)]
    if norm == "sup":
        val = max(abs(d) for d in diffs)
        if vlo is None and a.left.value != b.left.value:
            val = max(val, abs(a.left.value - b.left.value))
        if vhi is None and a.right.value != b.right.value:
            val = max(val, abs(a.right.value - b.right.value))
    else:
        if (vlo is None and a.left.value != b.left.value) or (vhi is None and a.right.value != b.right.value):
            return Distance(math.inf, vlo, vhi)
        val = sum(abs(d) for d in diffs) * a.span / 2
    return Distance(val if isinstance(val, Fraction) else float(val), vlo, vhi)


def detect_span(x1: FinitePmf, x1p: FinitePmf):
    """Joint lattice step of two laws declared on a common base lattice.

    Returns ``(d, x1, x1p)`` with both laws re-indexed to step ``d``.
    """
    _check_span(x1, x1p)
    g = 0
    for k in tuple(x1.support) + tuple(x1p.support):
        g = math.gcd(g, k)
    if g == 0:
        raise ValueError("both laws are degenerate at zero: no lattice step")
    d = x1.span * g
    re = lambda m: FinitePmf({k // g: v for k, v in m.atoms.items()}, d)
    return d, re(x1), re(x1p)
