import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from oracles import random_rw_specs, worked_specs
from switchwalk import (FiniteMeasure, Normal, OvershootDensity, Uniform, WalkSpec, apply_P, normalize_mu,
                        nu, pi, pi_rw, stationary_bundle)
from switchwalk.measures import distance

F = Fraction
SPECS = worked_specs()


def bundle(spec, window=30):
    return stationary_bundle(spec.x1, spec.x1p, spec.alpha, window)


def mu_values(b, lo, hi):
    return [b.mu.mass(k) for k in range(lo, hi + 1)]


def test_deterministic_spec():
    b = bundle(SPECS["deterministic"])
    assert b.nu == FiniteMeasure({-1: 1, 0: 1})
    assert mu_values(b, -5, 5) == [0] * 4 + [1, 1] + [0] * 5
    assert b.pi == FiniteMeasure({-1: 1, 0: 1})
    nm = normalize_mu(b)
    assert nm.finite and nm.total_mass == 2
    assert dict(nm.distribution.atoms) == {-1: F(1, 2), 0: F(1, 2)}


def test_simple_walk():
    b = bundle(SPECS["pm1"])
    assert b.nu == FiniteMeasure({-1: F(1, 2), 0: F(1, 2)})
    assert all(v == F(1, 2) for v in b.mu.interior_values())
    assert b.pi == FiniteMeasure({-1: F(1, 4), 0: F(1, 4)})
    assert b.mu_total_mass == math.inf
    assert not normalize_mu(b).finite


def test_skew_pair():
    b = bundle(SPECS["skew"])
    assert dict(b.nu.atoms) == {-2: F(1, 3), -1: F(2, 3), 0: F(2, 3), 1: F(1, 3)}
    expect = [1 if k not in (-1, 0) else F(2, 3) for k in range(-10, 11)]
    assert mu_values(b, -10, 10) == expect
    assert dict(b.pi.atoms) == {-2: F(2, 9), -1: F(1, 3), 0: F(1, 3), 1: F(2, 9)}


def test_alpha_split_on_simple_walk():
    s = WalkSpec.lattice({-1: F(1, 2), 1: F(1, 2)}, {-1: F(1, 2), 1: F(1, 2)}, F(1, 3))
    b = bundle(s)
    assert dict(b.nu.atoms) == {-1: F(1, 6), 0: F(1, 2), 1: F(1, 3)}
    assert all(v == F(1, 2) for v in b.mu.interior_values())
    assert b.pi is None and b.notes


def test_borovkov_total_mass_matches_window_sum():
    s = WalkSpec.lattice({-2: F(2, 3), 1: F(1, 3)}, {2: F(2, 3), -1: F(1, 3)})
    b = bundle(s, 50)
    assert b.mu_total_mass < math.inf
    # brute force: sum the windowed masses on a wide window
    wide = stationary_bundle(s.x1, s.x1p, 1, 400, ladders=b.ladders)
    direct = sum(float(wide.mu.mass(k)) for k in range(-400, 401))
    assert math.isclose(direct, float(b.mu_total_mass), rel_tol=1e-12)
    nm = normalize_mu(b)
    assert nm.finite and float(nm.tail_mass) < 1e-12
    img = apply_P(nm.distribution, s)
    assert img.residual_sup < 1e-12


@pytest.mark.parametrize("spec", random_rw_specs(5, seed=3), ids=lambda s: s.name)
def test_random_walk_collapse(spec):
    b = bundle(spec, 40)
    p = b.ladders.p
    tol = 0 if b.ladders.backend == "exact" else 1e-12
    assert abs(b.ladders.p_prime - p) <= tol
    assert all(abs(v - p) <= tol for v in b.mu.interior_values())
    assert distance(b.pi, pi_rw(spec.x1, p)).value <= tol


def test_nu_rejects_defective_laws():
    from switchwalk import FinitePmf
    with pytest.raises(ValueError):
        nu(FinitePmf({-1: F(1, 2)}), FinitePmf({1: 1}), 1)
    with pytest.raises(ValueError):
        pi(FinitePmf({-1: F(1, 2)}), FinitePmf({1: 1}))


@pytest.mark.parametrize("law", [Normal(0.0, 1.0), Uniform(-1.0, 2.0), Normal(-0.3, 2.0)])
def test_overshoot_density_normalization(law):
    o = OvershootDensity(law, p=0.7)
    total, _ = integrate.quad(lambda x: float(o.density(x)), -60, 60, points=[0.0], limit=200)
    assert math.isclose(total, o.total_mass, rel_tol=1e-7)
    xs = np.linspace(-4, 4, 9)
    for x in xs:
        part, _ = integrate.quad(lambda t: float(o.density(t)), -60, x, points=[0.0] if x > 0 else None, limit=200)
        assert abs(part / total - float(o.cdf(x))) < 1e-7
    u = np.array([0.01, 0.3, 0.5, 0.77, 0.999])
    assert np.allclose(o.cdf(o.ppf(u)), u, atol=1e-9)


def test_gaussian_overshoot_mass():
    o = OvershootDensity(Normal(0.0, 1.0), p=1.0)
    assert math.isclose(o.total_mass, math.sqrt(2 / math.pi), rel_tol=1e-12)
