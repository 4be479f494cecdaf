import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_specs, worked_specs
from switchwalk import Degenerate, FiniteMeasure, Normal, WalkSpec, ladder_law
from switchwalk import montecarlo as mc

F = Fraction
SPECS = worked_specs()
GOLDEN = json.loads((Path(__file__).parent / "golden" / "pm1_trajectory.json").read_text())


def rescan_ladder(pos, bits):
    """Direct transcription of the ladder-time definition, one index at a time."""
    T = [0]
    while True:
        t = T[-1]
        y = pos[t]
        down = y > 0 or (y == 0 and bits[t] == 1) if t < len(bits) else None
        nxt = None
        for k in range(t + 1, len(pos)):
            if (down and pos[k] <= y) or (not down and pos[k] >= y):
                nxt = k
                break
        if nxt is None:
            return T
        T.append(nxt)


def rescan_crossings(pos):
    out = []
    for k in range(1, len(pos)):
        if pos[k - 1] < 0 <= pos[k]:
            out.append((k, pos[k], 1))
        elif pos[k - 1] >= 0 > pos[k]:
            out.append((k, pos[k], -1))
    return out


def test_two_cycle():
    tr = mc.simulate(SPECS["deterministic"], 0, 8, seed=1)
    assert tr.positions.tolist() == [0, -1] * 4 + [0]
    T, H = mc.extract_ladder_chain(tr)
    assert T.tolist() == list(range(9))
    assert H.tolist() == [0, -1] * 4 + [0]
    assert mc.extract_crossings(tr).value.tolist() == [-1, 0] * 4


def test_monotone_descent_gives_ladder_time_every_step():
    tr = mc.simulate(SPECS["deterministic"], 5, 5, seed=0)
    assert tr.positions.tolist() == [5, 4, 3, 2, 1, 0]
    assert mc.extract_ladder_chain(tr)[0].tolist() == list(range(6))


def test_interval_map_orbit():
    s = WalkSpec.continuous(Degenerate(-1.0), Degenerate(math.sqrt(2)))
    tr = mc.simulate(s, 0.0, 2000, seed=0)
    y = tr.positions
    assert np.all((y >= -1 - 1e-9) & (y < math.sqrt(2) + 1e-9))
    step = np.diff(y)
    expect = np.where(y[:-1] >= 0, -1.0, math.sqrt(2))
    assert np.allclose(step, expect)


def test_pure_coin_use_at_zero():
    s = WalkSpec.lattice({-1: 1}, {1: 1}, F(1, 2))
    tr = mc.simulate(s, 0, 2000, seed=3)
    at_zero = tr.positions[:-1] == 0
    up = tr.positions[1:][at_zero] == 1
    # the coin decides: B = 1 uses X1 (down), B = 0 uses X1' (up)
    assert np.array_equal(up, tr.bits[at_zero] == 0)
    assert 0.4 < up.mean() < 0.6


def test_golden_trajectory():
    s = SPECS["pm1"]
    tr = mc.simulate(s, GOLDEN["y0"], GOLDEN["N"], GOLDEN["seed"])
    assert tr.positions.tolist() == GOLDEN["positions"]
    assert tr.digest() == GOLDEN["digest"]
    T, H = mc.extract_ladder_chain(tr)
    assert T.tolist() == GOLDEN["T"] and H.tolist() == GOLDEN["H"]
    assert T.tolist() == rescan_ladder(tr.positions.tolist(), tr.bits.tolist())
    cr = mc.extract_crossings(tr)
    got = [[int(i), int(v), int(d)] for i, v, d in zip(cr.index, cr.value, cr.direction)]
    assert got == GOLDEN["crossings"]
    assert [tuple(c) for c in got] == rescan_crossings(tr.positions.tolist())


def test_seed_determinism_and_replicas():
    s = SPECS["skew"]
    a = mc.simulate(s, 0, 5000, 42)
    b = mc.simulate(s, 0, 5000, 42)
    c = mc.simulate(s, 0, 5000, 43)
    assert a.digest() == b.digest() != c.digest()
    r0, r1 = mc.replica_streams(42, 2)
    again = mc.replica_streams(42, 2)[1]
    assert mc.simulate(s, 0, 100, r1).digest() == mc.simulate(s, 0, 100, again).digest()
    assert mc.simulate(s, 0, 100, r0).digest() != mc.simulate(s, 0, 100, r1).digest()


def test_simulate_rejects_zero_steps():
    with pytest.raises(ValueError):
        mc.simulate(SPECS["pm1"], 0, 0, 1)


@pytest.mark.skipif(len(mc.BACKENDS) < 2, reason="compiled core not built")
@given(st.integers(0, 2 ** 32), st.sampled_from(random_specs(6, seed=4)), st.integers(-4, 4))
@settings(max_examples=25, deadline=None)
def test_compiled_and_python_cores_agree(seed, spec, y0):
    a = mc.simulate(spec, y0, 3000, seed, backend="cython")
    b = mc.simulate(spec, y0, 3000, seed, backend="python")
    assert a.digest() == b.digest()
    for be in ("cython", "python"):
        assert np.array_equal(mc.extract_ladder_chain(a, be)[0], mc.extract_ladder_chain(a, "python")[0])
    starts = np.arange(-3, 4)
    for lattice_spec in (spec, WalkSpec.continuous(Normal(-0.1, 1.0), Normal(0.2, 1.5))):
        st_ = starts if lattice_spec.is_lattice else starts.astype(float) + 0.5
        o1 = mc.excursions(lattice_spec, st_, seed, max_steps=500, block=64, backend="cython")
        o2 = mc.excursions(lattice_spec, st_, seed, max_steps=500, block=64, backend="python")
        for u, v in zip(o1, o2):
            assert np.array_equal(u, v)


@given(st.integers(0, 2 ** 32), st.sampled_from(random_specs(6, seed=8)))
@settings(max_examples=20, deadline=None)
def test_alternation_and_monotone_ladder_times(seed, spec):
    tr = mc.simulate(spec, 0, 2000, seed)
    T, _ = mc.extract_ladder_chain(tr)
    assert np.all(np.diff(T) > 0) and T[0] == 0
    assert mc.extract_crossings(tr).alternates()
    assert T.tolist() == rescan_ladder(tr.positions.tolist(), tr.bits.tolist())


BOROVKOV = WalkSpec.lattice({-2: F(2, 3), 1: F(1, 3)}, {2: F(2, 3), -1: F(1, 3)}, 1, name="borovkov")
DRIFTING = [s for s in random_specs(30, seed=21) if s.x1.mean_index() < 0 < s.x1p.mean_index()][:4]


@pytest.mark.parametrize("spec", [BOROVKOV] + DRIFTING, ids=lambda s: s.name)
def test_ladder_increment_frequencies(spec):
    # from a plus-side ladder point the next height is the point plus an
    # independent D; from a minus-side point, plus an independent A'.
    # Drift towards zero on both sides keeps ladder epochs short.
    L = spec.ladders()
    tr = mc.simulate(spec, 0, 400000, seed=17)
    T, H = mc.extract_ladder_chain(tr)
    on_plus = (H[:-1] > 0) | ((H[:-1] == 0) & (tr.bits[T[:-1]] == 1))
    inc = np.diff(H)
    for law, mask in ((L.D, on_plus), (L.A_prime, ~on_plus)):
        sample = inc[mask]
        n = len(sample)
        assert n > 1000
        for k in law.support:
            p = float(law.mass(k))
            freq = np.mean(sample == k)
            assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / n) + 1e-12, (k, freq, p)


def test_two_cycle_occupation_is_exactly_half():
    rep = mc.stationarity_test(SPECS["deterministic"], FiniteMeasure({-1: 1, 0: 1}), "occupation",
                               replicas=2, steps=1000, seed=5, tolerance=0.0)
    assert rep.distances["tv"] == 0 and rep.passed
    assert rep.occupation == {-1: 1000, 0: 1000}


def test_zero_mass_window_rejected():
    with pytest.raises(ValueError):
        mc.stationarity_test(SPECS["deterministic"], FiniteMeasure({5: 1}), "occupation", 1, 10,
                             tolerance=0.1, window=2)


def test_single_replica_needs_tolerance():
    with pytest.raises(ValueError):
        mc.stationarity_test(SPECS["pm1"], FiniteMeasure({-1: 1, 0: 1}), "overshoot", 1, 100)


def test_ks_helpers():
    rng = np.random.default_rng(0)
    u = rng.random(2000)
    assert mc.censored_ks(u, 0) == mc.ks_statistic(u)
    assert mc.censored_ks(u, 20) >= mc.ks_statistic(u)
    assert mc.ks_statistic(np.array([0.5])) == 0.5
    thr = mc.ks_threshold(4000, np.random.default_rng(1), 0.99, 300)
    assert abs(thr * math.sqrt(4000) - 1.63) < 0.15


def test_report_serializes():
    rep = mc.stationarity_test(SPECS["skew"], FiniteMeasure({-2: 2, -1: 3, 0: 3, 1: 2}), "overshoot",
                               replicas=3, steps=20000, seed=2, bootstrap=50)
    doc = rep.to_dict()
    assert json.loads(json.dumps(doc)) == doc
    assert rep.crossings.alternates()
    assert set(rep.thresholds) == {"tv", "tv_bootstrap"}
