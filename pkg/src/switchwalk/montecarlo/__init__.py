"""Seeded simulation of switching walks and empirical stationarity checks.

The hot loops live in a compiled extension (``_core``); when it is not
importable, or ``SWITCHWALK_PURE=1`` is set, the pure-Python ``_pycore``
with identical outputs is used instead.  ``BACKEND`` names the active one.

Random numbers come from numpy's counter-based ``Philox`` generator keyed
by a ``SeedSequence``; replica ``r`` of seed ``s`` uses the ``r``-th child
of ``SeedSequence(s)``, so every replica is reproducible on its own.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _pycore
from ..kernels import WalkSpec
from ..measures import FiniteMeasure

try:
    if os.environ.get("SWITCHWALK_PURE", "") not in ("", "0"):
        raise ImportError("pure-Python core requested")
    from . import _core as _ccore
except ImportError:
    _ccore = None

BACKEND = "cython" if _ccore is not None else "python"
BACKENDS = ("cython", "python") if _ccore is not None else ("python",)


def core_module(backend: Optional[str] = None):
    """The kernel module for ``backend`` (default: the active one)."""
    backend = backend or BACKEND
    if backend == "python":
        return _pycore
    if backend == "cython":
        if _ccore is None:
            raise RuntimeError("compiled core is not available")
        return _ccore
    raise ValueError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)


def replica_streams(seed, replicas: int) -> list:
    """Independent child seed sequences, one per replica."""
    return _seed_sequence(seed).spawn(int(replicas))


def generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(_seed_sequence(seed)))


def _seed_label(ss: np.random.SeedSequence) -> dict:
    return {"entropy": int(ss.entropy), "spawn_key": [int(k) for k in ss.spawn_key]}


class _StepSampler:
    """Draws increments of one law: inverse-cdf on a lattice, the law's own
    sampler otherwise."""

    def __init__(self, law, lattice: bool):
        self.lattice = lattice
        if lattice:
            self.values = np.array(law.support, dtype=np.int64)
            p = np.array([float(law.atoms[k]) for k in law.support])
            cum = np.cumsum(p) / p.sum()
            cum[-1] = 1.0
            self.cum = cum
        else:
            self.law = law

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.lattice:
            idx = np.searchsorted(self.cum, rng.random(n), side="right")
            return self.values[np.minimum(idx, len(self.values) - 1)]
        return np.ascontiguousarray(self.law.sample(rng, n), dtype=np.float64)


def _coins(rng: np.random.Generator, n: int, alpha: float) -> np.ndarray:
    # alpha in {0, 1} makes the coin deterministic; no draw is spent on it
    if alpha >= 1:
        return np.ones(n, dtype=np.uint8)
    if alpha <= 0:
        return np.zeros(n, dtype=np.uint8)
    return (rng.random(n) < alpha).astype(np.uint8)


class _Streams:
    """Increment and coin arrays in the fixed draw order ``X, X', B``."""

    def __init__(self, spec: WalkSpec, rng: np.random.Generator):
        self.rng = rng
        self.lattice = spec.is_lattice
        self.sx = _StepSampler(spec.x1, self.lattice)
        self.sxp = _StepSampler(spec.x1p, self.lattice)
        self.alpha = float(spec.alpha)

    def draw(self, n: int):
        x = self.sx(self.rng, n)
        xp = self.sxp(self.rng, n)
        return x, xp, _coins(self.rng, n, self.alpha)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """``positions[n] = Y_n`` for ``n = 0..N`` and the coins ``bits[n] = B_n``.

    Lattice positions are integer indices (multiply by ``spec.span`` for
    values); continuous positions are floats.
    """

    spec: WalkSpec
    y0: Union[int, float]
    bits: np.ndarray
    positions: np.ndarray
    seed: dict
    N: int
    backend: str

    @property
    def values(self) -> np.ndarray:
        if self.spec.is_lattice:
            return self.positions * float(self.spec.span)
        return self.positions

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.positions.tobytes())
        h.update(self.bits.tobytes())
        return h.hexdigest()


def simulate(spec: WalkSpec, y0=0, N: int = 1000, seed=0, backend: Optional[str] = None) -> Trajectory:
    """Run ``N`` steps of the switching walk from ``y0``.

    Parameters
    ----------
    spec : WalkSpec
        Lattice or continuous walk.
    y0 : int or float
        Starting index (lattice) or value (continuous).
    N : int
        Number of steps, at least 1.
    seed : int or numpy.random.SeedSequence
        Seed material; see :func:`replica_streams` for replicas.
    backend : {"cython", "python"}, optional
        Kernel implementation; both give identical paths.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    ss = _seed_sequence(seed)
    streams = _Streams(spec, generator(ss))
    x, xp, b = streams.draw(int(N))
    core = core_module(backend)
    if spec.is_lattice:
        pos = core.walk_int(int(y0), x, xp, b)
    else:
        pos = core.walk_real(float(y0), x, xp, b)
    return Trajectory(spec, y0, b, pos, _seed_label(ss), int(N), backend or BACKEND)


def extract_ladder_chain(tr: Trajectory, backend: Optional[str] = None):
    """Switching ladder times ``T_n`` and heights ``H_n = Y_{T_n}``.

    From a point in the plus side (``y > 0``, or ``y = 0`` with coin 1) the
    next ladder time is the first later ``k`` with ``Y_k <= y``; otherwise
    the first with ``Y_k >= y``.
    """
    core = core_module(backend)
    fn = core.ladder_times_int if tr.positions.dtype == np.int64 else core.ladder_times_real
    T = fn(tr.positions, tr.bits)
    return T, tr.positions[T]


@dataclass(frozen=True, eq=False)
class Crossings:
    """Zero crossings: step index, overshoot position and direction (+1 up, -1 down)."""

    index: np.ndarray
    value: np.ndarray
    direction: np.ndarray

    def __len__(self):
        return len(self.index)

    def alternates(self) -> bool:
        d = self.direction
        return bool(np.all(d[1:] != d[:-1]))


def extract_crossings(tr: Trajectory) -> Crossings:
    """Steps ``k`` with ``Y_{k-1} < 0 <= Y_k`` (up) or ``Y_{k-1} >= 0 > Y_k`` (down)."""
    nonneg = tr.positions >= 0
    k = np.flatnonzero(nonneg[1:] != nonneg[:-1]) + 1
    direction = np.where(nonneg[k], 1, -1).astype(np.int8)
    return Crossings(k, tr.positions[k], direction)


def occupation(tr: Trajectory, burn_in: int = 0) -> dict:
    """Visit counts of ``Y_1..Y_N`` (lattice indices), after ``burn_in`` steps."""
    if not tr.spec.is_lattice:
        raise TypeError("occupation counts need a lattice trajectory")
    return _counts(tr.positions[1 + burn_in:])


def _counts(values: np.ndarray) -> dict:
    if len(values) == 0:
        return {}
    lo = int(values.min())
    c = np.bincount(values - lo)
    nz = np.flatnonzero(c)
    return {int(i) + lo: int(c[i]) for i in nz}


def excursions(spec: WalkSpec, starts: np.ndarray, seed, max_steps: int = 10 ** 6,
               block: int = 1 << 16, backend: Optional[str] = None):
    """Next overshoot across zero from each start.

    Returns ``(overshoots, crossed, steps)``; for an excursion that does not
    cross within ``max_steps`` steps ``crossed`` is False and the overshoot
    entry holds the last position.  Starts are processed in order from one
    stream, drawn in blocks.
    """
    core = core_module(backend)
    lattice = spec.is_lattice
    fc = core.first_crossing_int if lattice else core.first_crossing_real
    streams = _Streams(spec, generator(seed))
    n = len(starts)
    out = np.empty(n, dtype=np.int64 if lattice else np.float64)
    crossed = np.zeros(n, dtype=bool)
    steps = np.zeros(n, dtype=np.int64)
    x = xp = b = None
    off = block
    for i in range(n):
        y = starts[i]
        y = int(y) if lattice else float(y)
        side0 = y >= 0
        used = 0
        c = False
        while used < max_steps:
            if off == block:
                x, xp, b = streams.draw(block)
                off = 0
            stop = min(block, off + max_steps - used)
            new, y, c = fc(y, side0, x, xp, b, off, stop)
            used += new - off
            off = new
            if c:
                break
        out[i] = y
        crossed[i] = c
        steps[i] = used
    return out, crossed, steps


# ---------------------------------------------------------------------------
# statistical comparisons
# ---------------------------------------------------------------------------


@dataclass
class SimReport:
    """Outcome of a stationarity check; arrays hold the first replica's path."""

    chain: str
    backend: str
    occupation: dict = field(default_factory=dict)
    ladder_times: np.ndarray = None
    ladder_heights: np.ndarray = None
    crossings: Optional[Crossings] = None
    distances: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    replica_count: int = 0
    seeds: list = field(default_factory=list)
    n_samples: int = 0
    censored: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts.values())

    def to_dict(self, head: int = 50) -> dict:
        def arr(a):
            return None if a is None else [v.item() for v in a[:head]]

        cr = None
        if self.crossings is not None:
            cr = {"count": len(self.crossings),
                  "index": arr(self.crossings.index),
                  "value": arr(self.crossings.value),
                  "direction": arr(self.crossings.direction)}
        return {
            "chain": self.chain,
            "backend": self.backend,
            "occupation": {str(k): v for k, v in sorted(self.occupation.items())},
            "ladder_times": arr(self.ladder_times),
            "ladder_heights": arr(self.ladder_heights),
            "crossings": cr,
            "distances": dict(self.distances),
            "thresholds": dict(self.thresholds),
            "verdicts": dict(self.verdicts),
            "passed": self.passed,
            "replica_count": self.replica_count,
            "seeds": self.seeds,
            "n_samples": self.n_samples,
            "censored": self.censored,
            "notes": list(self.notes),
        }


def _reference_probs(reference, window=None) -> dict:
    """Normalized probabilities (by lattice index) of a finite reference."""
    dist = getattr(reference, "distribution", reference)
    if dist is None:
        raise ValueError("reference has infinite mass; pass a window")
    if isinstance(dist, FiniteMeasure):
        atoms = {k: float(v) for k, v in dist.atoms.items()}
    else:
        atoms = {int(k): float(v) for k, v in dict(dist).items()}
    if window is not None:
        atoms = {k: v for k, v in atoms.items() if -window <= k <= window}
    total = sum(atoms.values())
    if total <= 0:
        raise ValueError("reference has zero mass on the comparison window")
    return {k: v / total for k, v in atoms.items()}


def total_variation(counts: dict, probs: dict) -> float:
    n = sum(counts.values())
    if n == 0:
        raise ValueError("no samples")
    keys = set(counts) | set(probs)
    return 0.5 * sum(abs(counts.get(k, 0) / n - probs.get(k, 0.0)) for k in sorted(keys))


def ks_statistic(u: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance of the values ``u = F(samples)`` from uniform."""
    u = np.sort(np.asarray(u, dtype=float))
    n = len(u)
    if n == 0:
        raise ValueError("no samples")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def censored_ks(u: np.ndarray, n_censored: int) -> float:
    """KS bound valid whatever the censored samples are: the worse of
    placing them all at the bottom or all at the top."""
    if n_censored == 0:
        return ks_statistic(u)
    low = np.concatenate([np.zeros(n_censored), u])
    high = np.concatenate([u, np.ones(n_censored)])
    return max(ks_statistic(low), ks_statistic(high))


def ks_threshold(n: int, rng: np.random.Generator, level: float = 0.99, reps: int = 1000) -> float:
    """``level`` quantile of the KS statistic of ``n`` uniforms, by simulation."""
    stats = [ks_statistic(rng.random(n)) for _ in range(reps)]
    return float(np.quantile(stats, level))


def _replica_bootstrap(per_replica: Sequence[dict], rng, level: float, reps: int) -> float:
    pooled = {}
    for c in per_replica:
        for k, v in c.items():
            pooled[k] = pooled.get(k, 0) + v
    n = sum(pooled.values())
    probs = {k: v / n for k, v in pooled.items()}
    R = len(per_replica)
    stats = []
    for _ in range(reps):
        boot = {}
        for r in rng.integers(0, R, size=R):
            for k, v in per_replica[r].items():
                boot[k] = boot.get(k, 0) + v
        stats.append(total_variation(boot, probs))
    return float(np.quantile(stats, level))


def _merge(counts: Sequence[dict]) -> dict:
    out = {}
    for c in counts:
        for k, v in c.items():
            out[k] = out.get(k, 0) + v
    return out


def stationarity_test(spec: WalkSpec, reference, chain: str = "occupation", replicas: int = 1,
                      steps: int = 10 ** 6, seed=0, y0=0, significance: float = 0.01,
                      tolerance: Optional[float] = None, window: Optional[int] = None,
                      burn_in: int = 0, samples: Optional[int] = None, max_steps: int = 10 ** 6,
                      bootstrap: int = 1000, backend: Optional[str] = None) -> SimReport:
    """Compare simulated chains with an exact invariant law.

    Parameters
    ----------
    spec : WalkSpec
    reference : FiniteMeasure, NormalizedMu or OvershootDensity
        Lattice references are normalized (on ``window`` if given); the
        continuous overshoot reference must provide ``cdf`` and ``sample``.
    chain : {"occupation", "ladder", "overshoot"}
        Positions ``Y_n``, ladder heights ``H_n`` or crossing overshoots.
    replicas, steps, seed, y0
        Lattice runs: ``replicas`` trajectories of ``steps`` steps from ``y0``.
    significance : float
        Bootstrap thresholds are the ``1 - significance`` quantiles.
    tolerance : float, optional
        Fixed TV tolerance for lattice verdicts; without it the verdict uses
        the replica bootstrap (needs ``replicas >= 2``).
    samples, max_steps
        Continuous overshoot check: number of stationary starts and the step
        cap per excursion.  Censored excursions enter the KS bound at both
        extremes.
    """
    if chain not in ("occupation", "ladder", "overshoot"):
        raise ValueError(f"unknown chain {chain!r}")
    level = 1 - significance
    used_backend = backend or BACKEND
    if not spec.is_lattice:
        if chain != "overshoot":
            raise ValueError("continuous specs are only compared on the overshoot chain")
        return _continuous_overshoot(spec, reference, replicas, seed, level, samples or steps,
                                     max_steps, bootstrap, used_backend)

    probs = _reference_probs(reference, window)
    children = replica_streams(seed, replicas)
    per_replica = []
    report = SimReport(chain, used_backend, replica_count=replicas,
                       seeds=[_seed_label(c) for c in children])
    for r, ss in enumerate(children):
        tr = simulate(spec, y0, steps, ss, backend)
        if chain == "occupation":
            vals = tr.positions[1 + burn_in:]
        elif chain == "ladder":
            T, H = extract_ladder_chain(tr, backend)
            vals = H[1:][T[1:] > burn_in]
            if r == 0:
                report.ladder_times, report.ladder_heights = T, H
        else:
            cr = extract_crossings(tr)
            vals = cr.value[cr.index > burn_in]
            if r == 0:
                report.crossings = cr
        if window is not None:
            vals = vals[(vals >= -window) & (vals <= window)]
        per_replica.append(_counts(vals))
    pooled = _merge(per_replica)
    report.occupation = pooled
    report.n_samples = sum(pooled.values())
    tv = total_variation(pooled, probs)
    report.distances["tv"] = tv
    if replicas >= 2:
        rng = generator(np.random.SeedSequence(_seed_sequence(seed).entropy, spawn_key=(2 ** 31,)))
        report.thresholds["tv_bootstrap"] = _replica_bootstrap(per_replica, rng, level, bootstrap)
    if tolerance is not None:
        report.thresholds["tv"] = float(tolerance)
    elif "tv_bootstrap" in report.thresholds:
        report.thresholds["tv"] = report.thresholds["tv_bootstrap"]
    else:
        raise ValueError("a fixed tolerance is needed with fewer than two replicas")
    report.verdicts["tv"] = tv <= report.thresholds["tv"]
    return report


def _continuous_overshoot(spec, reference, replicas, seed, level, n, max_steps, bootstrap, backend):
    root = _seed_sequence(seed)
    children = root.spawn(replicas + 1)
    sizes = [n // replicas + (1 if r < n % replicas else 0) for r in range(replicas)]
    values, flags = [], []
    for size, ss in zip(sizes, children[:replicas]):
        start_ss, walk_ss = ss.spawn(2)
        starts = reference.sample(generator(start_ss), size)
        ov, crossed, _ = excursions(spec, starts, walk_ss, max_steps=max_steps, backend=backend)
        values.append(ov)
        flags.append(crossed)
    ov = np.concatenate(values)
    crossed = np.concatenate(flags)
    u = reference.cdf(ov[crossed])
    censored = int((~crossed).sum())
    ks = censored_ks(u, censored)
    thr = ks_threshold(n, generator(children[-1]), level, bootstrap)
    report = SimReport("overshoot", backend, replica_count=replicas,
                       seeds=[_seed_label(c) for c in children[:replicas]],
                       n_samples=n, censored=censored)
    report.distances["ks"] = ks
    report.thresholds["ks"] = thr
    report.verdicts["ks"] = ks <= thr
    if censored:
        report.notes.append(f"{censored} excursions hit the {max_steps}-step cap")
    return report


__all__ = [
    "BACKEND", "BACKENDS", "Crossings", "SimReport", "Trajectory", "censored_ks", "core_module",
    "excursions", "extract_crossings", "extract_ladder_chain", "generator", "ks_statistic",
    "ks_threshold", "occupation", "replica_streams", "simulate", "stationarity_test",
    "total_variation",
]
