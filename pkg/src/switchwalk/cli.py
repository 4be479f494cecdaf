"""Command-line front end: spec files in, JSON/CSV reports out.

A spec file is JSON::

    {
      "name": "pm1",
      "base": "1",
      "X1":  [[-1, "1/2"], [1, "1/2"]],
      "X1p": [[-1, "1/2"], [1, "1/2"]],
      "alpha": "1",
      "tasks": {"window": 50, "tol": 1e-10, "steps": 100000, "seed": 1, "replicas": 4}
    }

Lattice values are multiples of ``base``; probabilities given as strings
("2/3", "0.25") or integers are exact, JSON floats use the float backend.
A continuous law is a family object such as ``{"family": "normal", "mean": 0,
"sd": 1}``.  Exit codes: 0 when every requested check passes, 1 when a
check fails, 2 for a malformed spec or a violated drift assumption.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .kernels import (WalkSpec, apply_P, apply_PH, dual_kernel_Q,
                      overshoot_residuals)
from .ladder import AssumptionError, LadderSystem, wiener_hopf_residual
from .laws import law_from_dict
from .measures import EXACT, FiniteMeasure, WindowDensity, as_number, distance, minus, plus
from .renewal import renewal_deconvolve
from .stationary import lift_parts, normalize_mu, pi_rw, stationary_bundle

EXIT_OK, EXIT_FAIL, EXIT_BAD_SPEC = 0, 1, 2
COMMANDS = ("ladder", "stationary", "verify", "simulate", "report")


class SpecError(ValueError):
    """Malformed spec file."""


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------


def _parse_lattice_law(entries, base: Fraction, name: str) -> dict:
    if not isinstance(entries, list) or not entries:
        raise SpecError(f"{name} must be a non-empty list of [value, probability] pairs")
    out = {}
    for item in entries:
        if not (isinstance(item, (list, tuple)) and len(item) == 2):
            raise SpecError(f"{name}: bad entry {item!r}")
        try:
            value = Fraction(str(item[0]))
            prob = as_number(item[1])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"{name}: bad entry {item!r} ({exc})") from None
        k = value / base
        if k.denominator != 1:
            raise SpecError(f"{name}: value {item[0]} is not a multiple of the base step {base}")
        if prob < 0:
            raise SpecError(f"{name}: negative probability {item[1]!r}")
        out[int(k)] = out.get(int(k), 0) + prob
    total = sum(out.values())
    if abs(total - 1) > 1e-12:
        raise SpecError(f"{name}: probabilities sum to {float(total)!r}, not 1")
    return out


def parse_spec(doc: dict) -> tuple:
    """``(WalkSpec, tasks)`` from a decoded spec document."""
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    for key in ("X1", "X1p"):
        if key not in doc:
            raise SpecError(f"missing key {key!r}")
    name = str(doc.get("name", ""))
    tasks = doc.get("tasks", {}) or {}
    if not isinstance(tasks, dict):
        raise SpecError("tasks must be an object")
    try:
        alpha = as_number(doc.get("alpha", 1))
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad alpha: {exc}") from None
    continuous = [isinstance(doc[k], dict) for k in ("X1", "X1p")]
    try:
        if all(continuous):
            spec = WalkSpec.continuous(law_from_dict(doc["X1"]), law_from_dict(doc["X1p"]), alpha, name)
        elif any(continuous):
            raise SpecError("X1 and X1p must both be lattice or both continuous")
        else:
            base = Fraction(str(doc.get("base", 1)))
            if base <= 0:
                raise SpecError("base must be positive")
            x1 = _parse_lattice_law(doc["X1"], base, "X1")
            x1p = _parse_lattice_law(doc["X1p"], base, "X1p")
            spec = WalkSpec.lattice(x1, x1p, alpha, base, name)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, AssumptionError):
            raise
        raise SpecError(str(exc)) from None
    return spec, tasks


def load_spec(path) -> tuple:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from None
    return parse_spec(doc)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def num(v):
    """Fractions as ``"p/q"`` strings, floats as shortest round-trip decimals."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return repr(v)
    return v


def scalar(v, provenance: str) -> dict:
    return {"value": num(v), "provenance": provenance}


def _prov(backend: str) -> str:
    return "exact" if backend == EXACT else "float"


def table(m, provenance: Optional[str] = None) -> dict:
    """A measure as a table with its window, interior, span and backend."""
    if isinstance(m, FiniteMeasure):
        lo, hi = (m.lo, m.hi) if not m.is_empty() else (0, -1)
        return {"kind": "masses", "span": str(m.span), "backend": m.backend,
                "window": [lo, hi], "interior": [lo, hi],
                "provenance": provenance or _prov(m.backend),
                "entries": [[k, num(v)] for k, v in m.atoms.items()]}
    if isinstance(m, WindowDensity):
        ilo, ihi = m.interior
        return {"kind": "density", "span": str(m.span), "backend": m.backend,
                "window": [m.lo, m.hi], "interior": [ilo, ihi],
                "tails": {"left": [m.left.kind, num(m.left.value) if m.left.value is not None else None],
                          "right": [m.right.kind, num(m.right.value) if m.right.value is not None else None]},
                "provenance": provenance or _prov(m.backend),
                "entries": [[m.lo + i, num(v)] for i, v in enumerate(m.values)]}
    raise TypeError(f"cannot tabulate {type(m).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_rows(doc: dict, prefix: str = ""):
    """Flatten every measure table of ``doc`` into ``(table, index, x, value)`` rows."""
    for key in sorted(doc):
        v = doc[key]
        name = f"{prefix}{key}"
        if isinstance(v, dict) and "entries" in v and "span" in v:
            h = Fraction(v["span"])
            for k, val in v["entries"]:
                yield name, k, str(k * h), val
        elif isinstance(v, dict):
            yield from _csv_rows(v, name + ".")


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "index", "x", "value"])
    for row in _csv_rows(doc):
        w.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _spec_doc(spec: WalkSpec) -> dict:
    if spec.is_lattice:
        return {"name": spec.name, "span": str(spec.span), "alpha": num(spec.alpha),
                "X1": table(spec.x1), "X1p": table(spec.x1p)}
    return {"name": spec.name, "alpha": num(spec.alpha),
            "X1": spec.x1.to_dict(), "X1p": spec.x1p.to_dict()}


def _lattice_only(spec: WalkSpec, command: str):
    if not spec.is_lattice:
        raise SpecError(f"`{command}` needs a lattice spec; continuous specs support `simulate` only")


def _solver_tol(tol: float) -> float:
    # the verification tolerance may be 0; the truncated solver needs a positive target
    return min(max(tol, 1e-15), 1e-12)


def _ladders(spec, opts) -> LadderSystem:
    return spec.ladders(tol=_solver_tol(opts.tol), method=opts.method)


def cmd_ladder(spec: WalkSpec, opts) -> tuple:
    _lattice_only(spec, "ladder")
    L = _ladders(spec, opts)
    prov = _prov(L.backend)
    doc = {
        "spec": _spec_doc(spec),
        "laws": {n: dict(table(law, prov), method=law.method, certified=law.certified,
                         error_bound=num(law.error_bound))
                 for n, law in L.laws().items()},
        "constants": {n: scalar(getattr(L, n), prov) for n in ("p", "p_prime", "a", "q", "q_prime", "alpha")},
        "backend": L.backend,
        "certified": L.certified,
        "tol_achieved": num(L.tol_achieved),
    }
    return doc, True


def _window(spec: WalkSpec, opts, tasks) -> int:
    if opts.window is not None:
        return int(opts.window)
    if "window" in tasks:
        return int(tasks["window"])
    return 50 * spec.max_jump


def cmd_stationary(spec: WalkSpec, opts, tasks) -> tuple:
    _lattice_only(spec, "stationary")
    L = _ladders(spec, opts)
    W = _window(spec, opts, tasks)
    B = stationary_bundle(spec.x1, spec.x1p, spec.alpha, W, _solver_tol(opts.tol), ladders=L)
    prov = _prov(L.backend)
    doc = {
        "spec": _spec_doc(spec),
        "window": W,
        "nu": table(B.nu, prov),
        "mu": table(B.mu, prov),
        "pi": table(B.pi, prov) if B.pi is not None else None,
        "constants": {
            "p": scalar(B.p, prov), "p_prime": scalar(B.p_prime, prov), "a": scalar(B.a, prov),
            "alpha": scalar(B.alpha, prov), "mu_total_mass": scalar(B.mu_total_mass, prov),
        },
        "notes": list(B.notes),
    }
    nm = normalize_mu(B, tol=_solver_tol(opts.tol))
    doc["mu_normalized"] = table(nm.distribution, prov) if nm.finite else None
    return doc, True


def verification_residuals(spec: WalkSpec, window: int, tol: float = 1e-10,
                           method: str = "wiener-hopf") -> dict:
    """Every invariance and balance residual of a lattice spec.

    Returns ``{name: residual}``; the names are stable report keys.
    """
    L = spec.ladders(tol=_solver_tol(tol), method=method)
    B = stationary_bundle(spec.x1, spec.x1p, spec.alpha, window, _solver_tol(tol), ladders=L)
    res = {}
    res["nu_invariance"] = apply_PH(B.nu, L).residual_sup
    res["mu_invariance"] = apply_P(B.mu, spec).residual_sup
    res["wiener_hopf_X1"] = wiener_hopf_residual(spec.x1, L.A_strict, L.D)
    res["wiener_hopf_X1p"] = wiener_hopf_residual(spec.x1p, L.A_strict_prime, L.D_prime)
    Q = dual_kernel_Q(L, B.nu)
    res["dual_row_sums"] = Q.row_sum_residual
    res["dual_balance"] = Q.balance_residual
    up, down = lift_parts(B.nu, B.U_plus, B.U_minus_prime, spec.alpha)
    rt = [Fraction(0) if L.backend == EXACT else 0.0]
    if up is not None:
        rt.append(distance(renewal_deconvolve(up, L.A_strict), plus(B.nu, spec.alpha), "sup").value)
    if down is not None:
        rt.append(distance(renewal_deconvolve(down, L.D_strict_prime), minus(B.nu, spec.alpha), "sup").value)
    res["renewal_roundtrip"] = max(rt)
    if B.pi is not None:
        o = overshoot_residuals(spec, L, B.pi)
        res["pi_crossing"] = max(o.values())
    if spec.is_random_walk:
        vals = B.mu.interior_values()
        res["rw_mu_equals_p"] = max(abs(v - L.p) for v in vals)
        res["rw_p_equals_p_prime"] = abs(L.p - L.p_prime)
        if spec.alpha == 1 and B.pi is not None:
            res["rw_pi_form"] = distance(B.pi, pi_rw(spec.x1, L.p), "sup").value
    return res


def cmd_verify(spec: WalkSpec, opts, tasks) -> tuple:
    _lattice_only(spec, "verify")
    W = _window(spec, opts, tasks)
    tol = opts.tol
    res = verification_residuals(spec, W, tol, opts.method)
    L = _ladders(spec, opts)
    prov = _prov(L.backend)
    checks = {n: {"residual": scalar(v, prov), "tol": num(tol), "pass": bool(abs(v) <= tol)}
              for n, v in res.items()}
    failed = sorted(n for n, c in checks.items() if not c["pass"])
    doc = {"spec": _spec_doc(spec), "window": W, "checks": checks, "failed": failed,
           "passed": not failed,
           "constants": {"p": scalar(L.p, prov), "p_prime": scalar(L.p_prime, prov)}}
    return doc, not failed


def cmd_simulate(spec: WalkSpec, opts, tasks) -> tuple:
    from . import montecarlo as mc

    seed = opts.seed if opts.seed is not None else int(tasks.get("seed", 0))
    steps = opts.steps if opts.steps is not None else int(tasks.get("steps", 10 ** 5))
    replicas = opts.replicas if opts.replicas is not None else int(tasks.get("replicas", 4))
    y0 = tasks.get("y0", 0)
    head = int(tasks.get("head", 50))
    tr = mc.simulate(spec, y0, steps, seed)
    T, H = mc.extract_ladder_chain(tr)
    cr = mc.extract_crossings(tr)
    mcp = "monte-carlo"
    doc = {
        "spec": _spec_doc(spec),
        "backend": mc.BACKEND,
        "trajectory": {"seed": tr.seed, "steps": steps, "y0": num(y0), "digest": tr.digest(),
                       "positions_head": [num(v) for v in tr.positions[:head]],
                       "bits_head": [int(b) for b in tr.bits[:head]]},
        "ladder_chain": {"count": len(T), "T_head": [int(t) for t in T[:head]],
                         "H_head": [num(h) for h in H[:head]]},
        "crossings": {"count": len(cr), "alternate": cr.alternates(),
                      "index_head": [int(k) for k in cr.index[:head]],
                      "value_head": [num(v) for v in cr.value[:head]]},
        "tests": {},
        "provenance": mcp,
    }
    if spec.is_lattice:
        doc["occupation"] = {"kind": "counts", "span": str(spec.span), "backend": "counts",
                             "window": [int(tr.positions.min()), int(tr.positions.max())],
                             "interior": [int(tr.positions.min()), int(tr.positions.max())],
                             "provenance": mcp,
                             "entries": [[k, v] for k, v in sorted(mc.occupation(tr).items())]}
    tv_tol = tasks.get("tv_tol")
    tests = {}
    if spec.is_lattice:
        L = _ladders(spec, opts)
        B = stationary_bundle(spec.x1, spec.x1p, spec.alpha, _window(spec, opts, tasks),
                              _solver_tol(opts.tol), ladders=L)
        refs = {"ladder": B.nu}
        nm = normalize_mu(B, tol=_solver_tol(opts.tol))
        if nm.finite:
            refs["occupation"] = nm
        if B.pi is not None:
            refs["overshoot"] = B.pi
        for chain, ref in refs.items():
            tests[chain] = mc.stationarity_test(spec, ref, chain, replicas, steps, seed,
                                                tolerance=tv_tol, bootstrap=int(tasks.get("bootstrap", 200)))
    elif spec.is_random_walk:
        ref = pi_rw(spec.x1, 1.0)
        tests["overshoot"] = mc.stationarity_test(
            spec, ref, "overshoot", replicas, seed=seed, samples=int(tasks.get("samples", 10 ** 4)),
            max_steps=int(tasks.get("max_steps", 10 ** 5)), bootstrap=int(tasks.get("bootstrap", 200)))
    passed = True
    for chain, rep in tests.items():
        d = rep.to_dict(head=0)
        doc["tests"][chain] = {
            "distances": {k: scalar(v, mcp) for k, v in d["distances"].items()},
            "thresholds": {k: scalar(v, mcp) for k, v in d["thresholds"].items()},
            "verdicts": d["verdicts"], "passed": d["passed"], "n_samples": d["n_samples"],
            "censored": d["censored"], "replica_count": d["replica_count"], "seeds": d["seeds"],
            "notes": d["notes"]}
        passed = passed and rep.passed
    doc["passed"] = passed
    return doc, passed


def cmd_report(opts) -> tuple:
    if opts.out is None:
        raise SpecError("`report` needs --out DIR holding earlier outputs")
    out = Path(opts.out)
    parts = {}
    for name in COMMANDS[:-1]:
        f = out / f"{name}.json"
        if f.exists():
            parts[name] = json.loads(f.read_text())
    if not parts:
        raise SpecError(f"no earlier outputs found in {out}")
    ok = all(p.get("passed", True) for p in parts.values())
    return {"sections": parts, "passed": ok}, ok


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="switchwalk", description="Switching random walk toolkit")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--spec", help="JSON spec file")
    ap.add_argument("--window", type=int, help="half-width of the mu window (default 50 x max jump)")
    ap.add_argument("--tol", type=float, default=1e-10, help="verification tolerance")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--steps", type=int)
    ap.add_argument("--replicas", type=int)
    ap.add_argument("--out", help="directory for report files (default: stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--method", choices=("wiener-hopf", "truncated"), default="wiener-hopf",
                    help="ladder-law solver")
    return ap


def _emit(command: str, doc: dict, opts, stdout) -> None:
    text = dumps(doc) if opts.format == "json" else to_csv(doc)
    if opts.out is None:
        stdout.write(text)
        return
    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)
    # the json document is always kept so `report` can merge it
    (out / f"{command}.json").write_text(dumps(doc))
    if opts.format == "csv":
        (out / f"{command}.csv").write_text(text)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    opts = build_parser().parse_args(argv)
    try:
        if opts.tol < 0:
            raise SpecError("--tol must be non-negative")
        if opts.command == "report":
            doc, ok = cmd_report(opts)
        else:
            if opts.spec is None:
                raise SpecError("--spec is required")
            spec, tasks = load_spec(opts.spec)
            spec.validate()
            handler = {"ladder": lambda: cmd_ladder(spec, opts),
                       "stationary": lambda: cmd_stationary(spec, opts, tasks),
                       "verify": lambda: cmd_verify(spec, opts, tasks),
                       "simulate": lambda: cmd_simulate(spec, opts, tasks)}[opts.command]
            doc, ok = handler()
    except AssumptionError as exc:
        stderr.write(f"assumption violated: {exc}\n")
        return EXIT_BAD_SPEC
    except SpecError as exc:
        stderr.write(f"malformed spec: {exc}\n")
        return EXIT_BAD_SPEC
    _emit(opts.command, doc, opts, stdout)
    if not ok:
        failed = doc.get("failed") or [k for k, t in doc.get("tests", {}).items() if not t["passed"]]
        stderr.write(f"verification failed: {', '.join(failed) or 'see report'}\n")
        return EXIT_FAIL
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
