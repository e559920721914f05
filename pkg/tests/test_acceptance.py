"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line; the lines are also
collected into a summary section at the end of the pytest run. Run alone with

    python3 -m pytest tests/test_acceptance.py -v

The time-dependent runs are cached per module, so the whole file takes a few
minutes (the N = 4..8 convergence study dominates).
"""
from __future__ import annotations

import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from frsbp.basis import NodalBasis, correction_derivative
from frsbp.diagnostics import asymptotic_error, global_norm
from frsbp.experiment import ExperimentConfig, run, verify
from frsbp.operators import SbpOperators, kappa_value
from frsbp.scheme import FluxConfig, Mesh, SolutionState, TestCase, nodal_interpolant, rhs

import oracles

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

REPORT: dict[int, str] = {}

# default step for figure runs; criterion 15 checks this is converged in time
CFL = 0.025
# finer step for the N = 4..8 study, where the spatial error reaches 1e-9
CFL_CONVERGENCE = 0.01
COMBOS = [(b, s) for b in ("lobatto", "legendre") for s in (0.0, 1.0)]


def report(num: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title}" + (f" | {detail}" if detail else "")
    REPORT[num] = line
    print(line)
    assert ok, line


def best_time(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


@lru_cache(maxsize=None)
def sine_run(basis, sigma, N=4, K=50, cfl=CFL, t_final=20.0):
    cfg = ExperimentConfig(case="sine", basis=basis, N=N, K=K, sigma=sigma, t_final=t_final, cfl=cfl)
    return run(cfg)


def window_max(res, lo, hi):
    t, e = res.column("t"), res.column("err_E_M")
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    return float(np.max(e[sel]))


def asym(res):
    return asymptotic_error(res.records)


def test_c01_operator_identities():
    entries, secs = best_time(lambda: verify(range(1, 9), inject_below_bound=True))
    normal = [e for e in entries if e.label != "1.01*kappa_min"]
    injected = [e for e in entries if e.label == "1.01*kappa_min"]
    worst = {
        "sbp": max(e.report.sbp for e in normal),
        "ext": max(e.report.extended_sbp for e in normal),
        "KD": max(e.report.ktilde_D for e in normal),
    }
    ok = (
        len(normal) == 48
        and worst["sbp"] <= 1e-12
        and worst["ext"] <= 1e-12
        and worst["KD"] <= 1e-11
        and all(e.report.positive_definite for e in normal)
        and len(injected) == 16
        and not any(e.report.positive_definite for e in injected)
        and secs < 1.0
    )
    report(1, "operator identity suite", ok,
           f"sbp {worst['sbp']:.1e}, ext {worst['ext']:.1e}, KD {worst['KD']:.1e}, "
           f"16/16 injected indefinite, {secs * 1e3:.0f} ms")


TABLE = {
    2: (Fraction(4, 135), Fraction(1, 15)),
    3: (Fraction(1, 1050), Fraction(8, 4725)),
    4: (Fraction(8, 496125), Fraction(1, 39690)),
    5: (Fraction(1, 5893965), Fraction(12, 49116375)),
}


def test_c02_kappa_table():
    def values():
        return [(N, s, kappa_value(s, N)) for N in range(2, 6) for s in ("sd", "huynh", "dg")]

    got, secs = best_time(values, repeat=5)
    worst = 0.0
    for N, s, v in got:
        ref = {"sd": TABLE[N][0], "huynh": TABLE[N][1], "dg": Fraction(0)}[s]
        worst = max(worst, abs(v - float(ref)) / float(ref) if ref else abs(v))
    ok = len(got) == 12 and worst <= 1e-15 and secs < 1e-3
    report(2, "kappa table values", ok, f"max rel err {worst:.1e}, {secs * 1e6:.0f} us")


def test_c03_freestream_and_linearity():
    def check():
        rng = np.random.default_rng(3)
        fs, lin = 0.0, 0.0
        for kind in ("lobatto", "legendre"):
            for scheme in ("dg", "sd", "huynh"):
                for N in (1, 4, 8):
                    ops = SbpOperators.build(NodalBasis.create(kind, N), kappa_value(scheme, N))
                    for sigma in (0.0, 0.5, 1.0):
                        m, f = Mesh(10), FluxConfig(sigma)
                        c = TestCase.constant(-0.8)
                        r = rhs(SolutionState(m, np.full((10, N + 1), -0.8)), 0.0, ops, f, c)
                        fs = max(fs, float(np.max(np.abs(r))))
                        zero = TestCase.constant(0.0)
                        u, v = rng.standard_normal((2, 10, N + 1))
                        a, b = rng.uniform(-2, 2, 2)
                        lhs = rhs(SolutionState(m, a * u + b * v), 0.0, ops, f, zero)
                        ru = rhs(SolutionState(m, u), 0.0, ops, f, zero)
                        rv = rhs(SolutionState(m, v), 0.0, ops, f, zero)
                        scale = max(1.0, float(np.max(np.abs(lhs))))
                        lin = max(lin, float(np.max(np.abs(lhs - a * ru - b * rv))) / scale)
        return fs, lin

    (fs, lin), secs = best_time(check, repeat=1)
    report(3, "freestream and linearity", fs <= 1e-13 and lin <= 1e-12 and secs < 1.0,
           f"freestream {fs:.1e}, linearity {lin:.1e}, {secs * 1e3:.0f} ms")


def test_c04_dg_equivalence():
    def check():
        rng = np.random.default_rng(4)
        worst = 0.0
        for kind in ("lobatto", "legendre"):
            for N in range(1, 7):
                ops = SbpOperators.build(NodalBasis.create(kind, N), 0.0)
                for sigma in (0.0, 1.0):
                    K = 8
                    m = Mesh(K, 2.0, edges=np.cumsum(np.r_[0.0, rng.uniform(0.1, 0.5, K)]))
                    u = rng.standard_normal((K, N + 1))
                    g = float(rng.standard_normal())
                    got = rhs(SolutionState(m, u), 0.0, ops, FluxConfig(sigma), TestCase.constant(g))
                    ref = oracles.dgsem_rhs(u, g, sigma, kind, N, m.dx)
                    worst = max(worst, float(np.max(np.abs(got - ref))) / max(1.0, float(np.max(np.abs(ref)))))
        return worst

    worst, secs = best_time(check, repeat=1)
    report(4, "DG equivalence with strong-form DGSEM", worst <= 1e-13 and secs < 1.0,
           f"max scaled diff {worst:.1e}, {secs * 1e3:.0f} ms")


def test_c05_radau_lift():
    worst_plus, worst_signed = 0.0, 0.0
    for N in range(1, 5):
        b = NodalBasis.create("legendre", N)
        ops = SbpOperators.build(b, 0.0)
        dl = correction_derivative(N, 0.0, "left", b.nodes)
        dr = correction_derivative(N, 0.0, "right", b.nodes)
        worst_plus = max(worst_plus, np.max(np.abs(ops.C[:, 0] - dl)), np.max(np.abs(ops.C[:, 1] - dr)))
        # the signed lift (C B) carries the boundary orientation
        CB = ops.C @ ops.B
        worst_signed = max(worst_signed, np.max(np.abs(CB[:, 0] + dl)), np.max(np.abs(CB[:, 1] - dr)))
    ok = worst_plus <= 1e-10 and worst_signed <= 1e-10
    report(5, "Radau lift equivalence (Gauss-Legendre)", ok,
           f"C vs (g_L', g_R') {worst_plus:.1e}; C B vs (-g_L', g_R') {worst_signed:.1e}")


FIG1 = [(b, s, K) for K in (30, 50) for b, s in COMBOS]


def test_c06_stability_budget():
    worst = np.inf
    t0 = time.perf_counter()
    for b, s, K in FIG1:
        res = sine_run(b, s, K=K)
        e0 = res.records[0].energy
        worst = min(worst, float(np.min(res.column("budget_slack"))) / e0)
    secs = time.perf_counter() - t0
    report(6, "stability budget non-negative", worst >= -1e-9,
           f"min slack/|U0|^2 {worst:.2e} over 8 runs, {secs:.0f} s")


def test_c07_plateau():
    parts, ok = [], True
    for b, s in COMBOS:
        res = sine_run(b, s)
        late, mid = window_max(res, 15, 20), window_max(res, 10, 15)
        ok &= late <= 1.05 * mid
        parts.append(f"{b[:3]} s{s:g} {late / mid:.3f}")
    report(7, "bounded error plateau (late/mid max)", ok, ", ".join(parts))


def test_c08_upwind_below_central_lobatto():
    c, u = asym(sine_run("lobatto", 0.0)), asym(sine_run("lobatto", 1.0))
    report(8, "Lobatto: upwind error below central", u < c, f"central {c:.4e}, upwind {u:.4e}")


def test_c09_legendre_below_lobatto():
    parts, ok = [], True
    for s in (0.0, 1.0):
        lob, leg = asym(sine_run("lobatto", s)), asym(sine_run("legendre", s))
        ok &= leg < lob
        parts.append(f"s{s:g}: leg {leg:.3e} < lob {lob:.3e}")
    report(9, "Legendre error below Lobatto", ok, "; ".join(parts))


def test_c10_legendre_flux_insensitive():
    ratio = {b: asym(sine_run(b, 0.0)) / asym(sine_run(b, 1.0)) for b in ("lobatto", "legendre")}
    report(10, "central/upwind ratio smaller for Legendre", ratio["legendre"] < ratio["lobatto"],
           f"legendre {ratio['legendre']:.3f}, lobatto {ratio['lobatto']:.3f}")


def conv_run(b, s, N):
    return sine_run(b, s, N=N, cfl=CFL_CONVERGENCE)


def test_c11_resolution_closes_gap():
    r = {N: asym(conv_run("lobatto", 0.0, N)) / asym(conv_run("lobatto", 1.0, N)) for N in (4, 8)}
    report(11, "Lobatto central/upwind ratio shrinks with N", r[8] < r[4], f"N=4 {r[4]:.3f}, N=8 {r[8]:.3f}")


def test_c12_spectral_convergence():
    ok, parts = True, []
    for b, s in COMBOS:
        errs = [conv_run(b, s, N).records[-1].err_E_M for N in range(4, 9)]
        factors = [a / c for a, c in zip(errs, errs[1:])]
        ok &= min(factors) > 3
        parts.append(f"{b[:3]} s{s:g} min factor {min(factors):.1f}")
    report(12, "spectral convergence N=4..8", ok, ", ".join(parts))


def test_c13_theta2_structure():
    lob = max(float(np.max(np.abs(sine_run("lobatto", s, K=K).column("theta2")))) for s in (0.0, 1.0) for K in (30, 50))
    parts, ok = [f"lobatto max|theta2| {lob:.1e}"], lob <= 1e-14
    for s in (0.0, 1.0):
        res = sine_run("legendre", s, K=30)
        th, err = float(np.max(np.abs(res.column("theta2")))), asym(res)
        ok &= 10 * th <= err
        parts.append(f"legendre s{s:g} {th:.1e} vs err {err:.1e}")
    report(13, "theta2 structure", ok, "; ".join(parts))


def test_c14_polynomial_counterexample():
    cfg = ExperimentConfig(case="poly8", basis="lobatto", N=4, K=50, sigma=1.0, t_final=40.0, cfl=CFL)
    res = run(cfg)
    case = TestCase.poly8()
    basis = NodalBasis.create("lobatto", 4)
    ops = SbpOperators.build(basis)
    mesh = Mesh(50)
    t, err = res.column("t"), res.column("err_E_M")

    def at(time_):
        i = int(np.argmin(np.abs(t - time_)))
        exact_norm = global_norm(nodal_interpolant(case, mesh, basis, t[i]), mesh, ops, extended=False)
        return err[i], err[i] / exact_norm

    e4, _ = at(4.0)
    e20, rel20 = at(20.0)
    e40, rel40 = at(40.0)
    ok = e40 > 10 * e4 and rel40 < 2 * rel20
    report(14, "polynomial counterexample", ok,
           f"err(40)/err(4) {e40 / e4:.1f}, rel(40)/rel(20) {rel40 / rel20:.2f}")


def test_c15_time_error_negligible():
    parts, ok = [], True
    for b, s in COMBOS:
        a, h = asym(sine_run(b, s)), asym(sine_run(b, s, cfl=CFL / 2))
        change = abs(a - h) / h
        ok &= change < 1e-3
        parts.append(f"{b[:3]} s{s:g} {100 * change:.3f}%")
    report(15, f"halving dt (cfl {CFL:g}) changes asymptotic error", ok, ", ".join(parts))


def test_c16_lobatto_n3_ordering_recorded():
    c, u = asym(sine_run("lobatto", 0.0, N=3)), asym(sine_run("lobatto", 1.0, N=3))
    order = "upwind < central" if u < c else "central <= upwind"
    # observational: the N = 3 ordering is recorded, not asserted
    report(16, "Lobatto N=3 flux ordering (recorded only)", True, f"{order}: central {c:.4e}, upwind {u:.4e}")
