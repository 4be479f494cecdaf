"""Continuous increment families used by the Monte Carlo engine.

Each law exposes its cdf and the partial expectation ``E[(X - x)^+]``, which
is all the overshoot density of a random walk needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr


class ContinuousLaw:
    """Base class; subclasses implement ``cdf``, ``upper_partial``, ``sample``."""

    family = "abstract"

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def upper_partial(self, x):
        """``E[(X - x)^+]``."""
        raise NotImplementedError

    def lower_partial(self, x):
        """``E[(x - X)^+] = x - E X + E[(X - x)^+]``."""
        x = np.asarray(x, dtype=float)
        return x - self.mean + self.upper_partial(x)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Normal(ContinuousLaw):
    loc: float = 0.0
    scale: float = 1.0
    family = "normal"

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def mean(self):
        return float(self.loc)

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.loc) / self.scale)

    def upper_partial(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        pdf = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        return self.scale * (pdf - z * ndtr(-z))

    def sample(self, rng, n):
        return rng.normal(self.loc, self.scale, size=n)

    def to_dict(self):
        return {"family": "normal", "mean": self.loc, "sd": self.scale}


@dataclass(frozen=True)
class Uniform(ContinuousLaw):
    low: float = -1.0
    high: float = 1.0
    family = "uniform"

    def __post_init__(self):
        if not self.high > self.low:
            raise ValueError("need high > low")

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0)

    def upper_partial(self, x):
        x = np.asarray(x, dtype=float)
        inside = (self.high - x) ** 2 / (2 * (self.high - self.low))
        return np.where(x <= self.low, self.mean - x, np.where(x >= self.high, 0.0, inside))

    def sample(self, rng, n):
        return rng.uniform(self.low, self.high, size=n)

    def to_dict(self):
        return {"family": "uniform", "low": self.low, "high": self.high}


@dataclass(frozen=True)
class Degenerate(ContinuousLaw):
    """Point mass, as a non-lattice increment (e.g. ``sqrt(2)``)."""

    value: float = 0.0
    family = "degenerate"

    @property
    def mean(self):
        return float(self.value)

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.value).astype(float)

    def upper_partial(self, x):
        return np.maximum(self.value - np.asarray(x, dtype=float), 0.0)

    def sample(self, rng, n):
        return np.full(n, float(self.value))

    def to_dict(self):
        return {"family": "degenerate", "value": self.value}


@dataclass(frozen=True)
class ExpMixture(ContinuousLaw):
    """Mixture of shifted exponentials ``shift + direction * Exp(rate)``.

    ``components`` is a tuple of ``(weight, shift, direction, rate)`` with
    ``direction`` in ``{+1, -1}``; weights sum to one.
    """

    components: tuple = field(default_factory=tuple)
    family = "expmix"

    def __post_init__(self):
        comps = tuple((float(w), float(c), int(s), float(r)) for w, c, s, r in self.components)
        if not comps:
            raise ValueError("need at least one component")
        if abs(sum(w for w, *_ in comps) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to one")
        for w, _, s, r in comps:
            if w < 0 or s not in (1, -1) or r <= 0:
                raise ValueError("bad mixture component")
        object.__setattr__(self, "components", comps)

    @property
    def mean(self):
        return sum(w * (c + s / r) for w, c, s, r in self.components)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, c, s, r in self.components:
            if s == 1:
                out += w * np.where(x < c, 0.0, -np.expm1(-r * np.maximum(x - c, 0.0)))
            else:
                out += w * np.where(x >= c, 1.0, np.exp(-r * np.maximum(c - x, 0.0)))
        return out

    def upper_partial(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, c, s, r in self.components:
            if s == 1:
                t = np.maximum(x - c, 0.0)
                out += w * np.where(x <= c, c - x + 1.0 / r, np.exp(-r * t) / r)
            else:
                t = np.maximum(c - x, 0.0)
                out += w * np.where(x >= c, 0.0, t + np.expm1(-r * t) / r)
        return out

    def sample(self, rng, n):
        weights = np.array([w for w, *_ in self.components])
        idx = np.searchsorted(np.cumsum(weights), rng.random(n), side="right")
        idx = np.minimum(idx, len(weights) - 1)
        e = rng.exponential(1.0, size=n)
        shift = np.array([c for _, c, _, _ in self.components])[idx]
        sign = np.array([s for _, _, s, _ in self.components])[idx]
        rate = np.array([r for *_, r in self.components])[idx]
        return shift + sign * e / rate

    def to_dict(self):
        return {"family": "expmix",
                "components": [list(c) for c in self.components]}


def law_from_dict(d: dict) -> ContinuousLaw:
    fam = d.get("family")
    if fam == "normal":
        return Normal(float(d.get("mean", 0.0)), float(d.get("sd", 1.0)))
    if fam == "uniform":
        return Uniform(float(d["low"]), float(d["high"]))
    if fam == "degenerate":
        v = d["value"]
        return Degenerate(math.sqrt(2) if v == "sqrt2" else float(v))
    if fam == "expmix":
        return ExpMixture(tuple(tuple(c) for c in d["components"]))
    raise ValueError(f"unknown continuous family {fam!r}")
