"""Acceptance suite: one test per criterion, each printed as a pass/fail line."""

import io
from pathlib import Path
from fractions import Fraction

import numpy as np
import pytest

from oracles import (brute_P_matrix_image, brute_switch_kernel, enum_ladder, green_ladder,
                     random_rw_specs, random_specs, worked_specs)
from switchwalk import (FiniteMeasure, Normal, WalkSpec, apply_P, apply_PH, convolve, dual_kernel_Q,
                        ladder_law, lift_parts, normalize_mu, overshoot_residuals, pi_rw,
                        renewal_deconvolve, stationary_bundle, wiener_hopf_residual)
from switchwalk import montecarlo as mc
from switchwalk.cli import run
from switchwalk.measures import distance, minus, plus

F = Fraction
TOL = 1e-8
WORKED = worked_specs()
SUITE = list(WORKED.values()) + random_specs(20, seed=2024)
RW_SUITE = random_rw_specs(10, seed=7)
_BUNDLES = {}
SPECS = Path(__file__).resolve().parent.parent / "specs"


def bundle(spec: WalkSpec, alpha=None):
    alpha = spec.alpha if alpha is None else alpha
    key = (spec, alpha)
    if key not in _BUNDLES:
        W = 50 * spec.max_jump
        _BUNDLES[key] = stationary_bundle(spec.x1, spec.x1p, alpha, W)
    return _BUNDLES[key]


def _fmt(x) -> str:
    return f"{float(x):.3g}"


def _exact_zero(values) -> bool:
    return all(v == 0 and isinstance(v, Fraction) for v in values)


def test_c01_nu_invariance(criterion):
    with criterion(1, "nu invariant under P_H") as c:
        res = [(bundle(s).ladders.backend, apply_PH(bundle(s).nu, bundle(s).ladders).residual_sup) for s in SUITE]
        worst = max(float(r) for _, r in res)
        exact = [r for backend, r in res if backend == "exact"]
        c.check(worst <= TOL and _exact_zero(exact),
                f"max residual {_fmt(worst)} over {len(SUITE)} specs, {len(exact)} exact specs at 0")


def test_c02_mu_invariance(criterion):
    with criterion(2, "mu invariant under P on a 50*max-jump window") as c:
        worst, checked = 0.0, 0
        for s in SUITE:
            img = apply_P(bundle(s).mu, s)
            checked += 1
            worst = max(worst, float(img.residual_sup))
        c.check(worst <= TOL, f"max residual {_fmt(worst)} over {checked} specs")


def test_c03_random_walk_collapse(criterion):
    with criterion(3, "random walks: mu = p * Haar and p = p'") as c:
        worst_mu, worst_p = 0.0, 0.0
        for s in RW_SUITE:
            b = bundle(s)
            worst_mu = max(worst_mu, max(abs(float(v - b.p)) for v in b.mu.interior_values()))
            worst_p = max(worst_p, abs(float(b.p - b.p_prime)))
        c.check(worst_mu <= TOL and worst_p <= TOL,
                f"|mu - p| {_fmt(worst_mu)}, |p - p'| {_fmt(worst_p)} over {len(RW_SUITE)} walks")


def test_c04_wiener_hopf(criterion):
    with criterion(4, "Wiener-Hopf identity") as c:
        worst = 0.0
        for s in SUITE + RW_SUITE:
            L = s.ladders()
            worst = max(worst, float(wiener_hopf_residual(s.x1, L.A_strict, L.D)),
                        float(wiener_hopf_residual(s.x1p, L.A_strict_prime, L.D_prime)))
        exact = []
        for name in ("pm1", "skew"):
            L = WORKED[name].ladders()
            exact += [wiener_hopf_residual(WORKED[name].x1, L.A_strict, L.D),
                      wiener_hopf_residual(WORKED[name].x1p, L.A_strict_prime, L.D_prime)]
        c.check(worst <= TOL and _exact_zero(exact),
                f"max residual {_fmt(worst)}; pm1 and skew exact residuals {[str(r) for r in exact]}")


def test_c05_renewal_stabilization(criterion):
    with criterion(5, "U+ * nu_1^+ has constant density p'") as c:
        worst = 0.0
        for s in RW_SUITE:
            b = bundle(s, F(1))
            img = convolve(b.U_plus.base, plus(b.nu, 1))
            vals = img.interior_values()
            assert len(vals) > 10
            worst = max(worst, max(abs(float(v - b.p_prime)) for v in vals))
        c.check(worst <= TOL, f"max |density - p'| {_fmt(worst)} over {len(RW_SUITE)} walks")


def test_c06_pi_invariance(criterion):
    with criterion(6, "pi invariant under the crossing kernels") as c:
        worst = 0.0
        for s in SUITE:
            s1 = WalkSpec(s.x1, s.x1p, 1, s.span, s.name)
            b = bundle(s1, F(1))
            worst = max(worst, max(float(v) for v in overshoot_residuals(s1, b.ladders, b.pi).values()))
        form = 0.0
        for s in RW_SUITE:
            b = bundle(s, F(1))
            form = max(form, float(distance(b.pi, pi_rw(s.x1, b.p)).value))
        c.check(worst <= TOL and form <= 1e-10,
                f"composite residual {_fmt(worst)} over {len(SUITE)} specs; random-walk form gap {_fmt(form)}")


def test_c07_dual_kernel(criterion):
    with criterion(7, "dual kernel row sums and detailed balance") as c:
        rows, bal = 0.0, 0.0
        for s in SUITE:
            b = bundle(s)
            Q = dual_kernel_Q(b.ladders, b.nu)
            rows = max(rows, float(Q.row_sum_residual))
            bal = max(bal, float(Q.balance_residual))
        c.check(rows <= TOL and bal <= TOL, f"row sums {_fmt(rows)}, balance {_fmt(bal)} over {len(SUITE)} specs")


def test_c08_renewal_roundtrip(criterion):
    with criterion(8, "deconvolution inverts the renewal lift") as c:
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(10):
            s = SUITE[int(rng.integers(0, len(SUITE)))]
            alpha = F(int(rng.integers(0, 4)), 3)
            b = bundle(s)
            atoms = {int(k): F(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
                     for k in rng.choice(np.arange(-4, 5), size=int(rng.integers(1, 6)), replace=False)}
            phi = FiniteMeasure(atoms)
            up, down = lift_parts(phi, b.U_plus, b.U_minus_prime, alpha)
            if up is not None:
                worst = max(worst, float(distance(renewal_deconvolve(up, b.ladders.A_strict), plus(phi, alpha)).value))
            if down is not None:
                worst = max(worst, float(distance(renewal_deconvolve(down, b.ladders.D_strict_prime),
                                                  minus(phi, alpha)).value))
        c.check(worst <= 1e-10, f"max sup error {_fmt(worst)} over 10 random measures")


def test_c09_monte_carlo(criterion):
    with criterion(9, "Monte Carlo occupation and overshoot checks") as c:
        bor = WalkSpec.lattice({-2: F(2, 3), 1: F(1, 3)}, {2: F(2, 3), -1: F(1, 3)}, 1, name="borovkov")
        nm = normalize_mu(stationary_bundle(bor.x1, bor.x1p, 1, 50))
        occ = mc.stationarity_test(bor, nm, "occupation", replicas=1, steps=10 ** 6, seed=20240917, tolerance=0.02)
        gauss = WalkSpec.continuous(Normal(0.0, 1.0), Normal(0.0, 1.0), name="gaussian")
        ov = mc.stationarity_test(gauss, pi_rw(Normal(0.0, 1.0), 1.0), "overshoot", replicas=4,
                                  seed=20240918, samples=10 ** 5, max_steps=10 ** 6, bootstrap=1000)
        tv, ks, thr = occ.distances["tv"], ov.distances["ks"], ov.thresholds["ks"]
        c.check(occ.passed and ov.passed,
                f"TV {_fmt(tv)} <= 0.02; KS {_fmt(ks)} vs 99% threshold {_fmt(thr)} "
                f"({ov.censored} of {ov.n_samples} excursions censored)")


def test_c10_oracle_equivalence(criterion):
    with criterion(10, "ladder laws and kernels match brute-force oracles") as c:
        worst_gap, laws, kernels = 0.0, 0, 0
        configs = [(d, k) for d in ("descending", "ascending") for k in ("weak", "strict")]
        rng = np.random.default_rng(10)
        assert all(-3 <= z <= 3 for s in SUITE for X in (s.x1, s.x1p) for z in X.support)
        for s in SUITE:
            for X in (s.x1, s.x1p):
                mean = float(X.mean_index())
                for d, k in configs:
                    law = ladder_law(X, d, k)
                    ref, bound = green_ladder(X, d, k, level=5000)
                    away = (mean > 1e-12) if d == "descending" else (mean < -1e-12)
                    # escapes past a far edge return with geometrically small probability
                    tol = 1e-9 if away else bound + 1e-12
                    low, alive = enum_ladder(X, d, k, n_steps=12)
                    for z in set(ref) | set(law.support) | set(low):
                        gap = float(law.mass(z)) - ref.get(z, 0.0)
                        assert -1e-9 <= gap <= tol, (s.name, d, k, z, gap, tol)
                        lgap = law.mass(z) - low.get(z, 0)
                        assert -1e-12 <= float(lgap) <= float(alive) + 1e-12
                        worst_gap = max(worst_gap, abs(gap) if away else 0.0)
                    laws += 1
            L = s.ladders()
            for _ in range(3):
                phi = FiniteMeasure({int(x): F(int(rng.integers(1, 5)), 4) for x in rng.integers(-4, 5, size=3)})
                for img, ref in ((apply_P(phi, s).output, brute_P_matrix_image(s, dict(phi.atoms))),
                                 (apply_PH(phi, L).output,
                                  brute_switch_kernel(dict(phi.atoms), dict(L.D.atoms), dict(L.A_prime.atoms), s.alpha))):
                    for x in range(img.lo, img.hi + 1):
                        assert abs(float(img.mass(x) - ref.get(x, 0))) <= 1e-14
                    kernels += 1
        c.check(True, f"{laws} ladder laws inside certified oracle bounds (max gap {_fmt(worst_gap)} "
                      f"where the bound is tight), {kernels} kernel images equal")


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    return run(list(argv), stdout=out, stderr=err), out.getvalue()


def test_c11_determinism(criterion):
    with criterion(11, "byte-identical reports for identical seeds") as c:
        specs = SPECS
        outputs = []
        for _ in range(2):
            runs = []
            for cmd in ("ladder", "stationary", "verify"):
                runs.append(_cli(cmd, "--spec", str(specs / "skew.json")))
            runs.append(_cli("simulate", "--spec", str(specs / "borovkov.json"), "--steps", "50000"))
            runs.append(_cli("simulate", "--spec", str(specs / "gaussian.json"), "--replicas", "2"))
            outputs.append(runs)
        same = outputs[0] == outputs[1]
        codes = [code for code, _ in outputs[0]]
        digests = {mc.simulate(WORKED["skew"], 0, 10 ** 5, 99).digest() for _ in range(3)}
        c.check(same and codes == [0] * 5 and len(digests) == 1,
                f"{len(outputs[0])} reports compared, identical={same}, exit codes {codes}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
