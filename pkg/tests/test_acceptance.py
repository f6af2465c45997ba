"""Acceptance criteria 1-9, one PASS/FAIL line each.

Each test records its line in ``conftest.ACCEPTANCE_LINES`` (printed in the
terminal summary) and also prints it, then asserts.  Pinned targets and
tolerances are module constants below.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

import conftest
from cuspidal.arith import DirichletCharacter, IntMatrix2
from cuspidal.cusps import Cusp, cusp_datum, enumerate_cusps, transport_equivalent, width_gamma0
from cuspidal.expand import expand_direct, expand_eigen
from cuspidal.modform import dilate, eta_series, hecke_extend, level1_newforms, p_stabilize, primes_up_to, root_pair, twist
from cuspidal.numeric import bessel_k, lstsq_solve
from cuspidal.petersson import (
    ExpansionEngine,
    LocalFactorSpec,
    adjoint_constant,
    ichino_constant,
    petersson_pair,
    petersson_ratio,
    petersson_triple,
    ratio_check,
)

# criterion 1
C1_TARGET = np.array([1, -2, -3, 4, 6, 6])
C1_TOL = 1e-12  # times e^n
C1_SECONDS = 30
# criterion 2
C2_B1 = 0.9396926207858713 - 0.3420201433255586j
C2_TOL = 1e-10
# criterion 3: c_l on f x mu1, mu1^2, mu1^4, mu1^5
_Z = 0.469846310392954 - 0.171010071662834j
C3_PATTERN = {Fraction(1, 6): _Z, Fraction(1, 3): _Z.conjugate(), Fraction(2, 3): _Z, Fraction(5, 6): -_Z.conjugate()}
C3_TOL = 1e-10
C3_E0 = 13
# criterion 4
C4_XI = [
    -0.809016994374947 + 1.11351636441161j,
    0.309016994374947 - 0.100405707943114j,
    0.309016994374947 + 0.100405707943114j,
    -0.809016994374947 - 1.11351636441161j,
]
C4_TOL = 1e-10
# criterion 5: (value, relative tolerance)
C5 = {
    "delta": (9.8869793538e-7, 1e-8),
    "f2": (1.372666446e-5, 1e-7),
    "f2_twist9": (1.220147952e-5, 1e-7),
    "f3": (7.84759013e-5, 1e-7),
    "f4": (8.2275074570e-6, 1e-7),
}
C5_SECONDS = 300
# criterion 6
C6_HECKE = 534612 / (11**11 * 12)
C6_HECKE_TOL = 1e-5
C6_FLAT_TOL = 1e-6
C6_SHARP = 1.4991267095 - 0.7221075096j
C6_SHARP_TOL = 1e-6
# criterion 7
C7_DD24 = 1.2769689139e-16
C7_DD24_TOL = 1e-6
C7_L24 = 1.1302460925
C7_L24_TOL = 1e-5
C7_F2D18 = 4.7335974505e-23
C7_F2D18_TOL = 1e-5
C7_L18 = 1.3684877005
# criterion 8
C8_ADJOINT = [639015.136088, 71972.2648922, 80968.7980038, 10254.8180648, 202953.652096]
C8_ADJOINT_TOL = 1e-6
C8_ICHINO_TOL = 1e-10


def _record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _rel(a, b):
    return abs(a / b - 1)


def test_criterion_1_squarefree_expansion(level6):
    t0 = time.perf_counter()
    d = cusp_datum(6, level6.character, Cusp(1, 3))
    ex = expand_direct(level6, d, E=15, K0=35, C0=1.0)
    secs = time.perf_counter() - t0
    n = np.arange(1, 7)
    ratio = np.abs(ex.coefficients[1:7] - C1_TARGET) / (C1_TOL * np.exp(n))
    ok = ex.K == 35 and bool(np.all(ratio <= 1)) and secs <= C1_SECONDS
    _record(1, ok, f"max err/(1e-12 e^n) = {ratio.max():.3f}, K={ex.K}, C={ex.C:.4f}, {secs:.2f}s")
    assert ok


def _level27(f27):
    return cusp_datum(27, f27.character, Cusp(1, 3), alpha1=IntMatrix2(1, -1, 3, -2))


@pytest.mark.fixture_dependent
def test_criterion_2_root_of_unity_expansion(f27):
    ex = expand_direct(f27, _level27(f27), E=15, K0=35, C0=1.0)
    b = ex.coefficients
    e1, e3, e6 = abs(b[1] - C2_B1), abs(b[3]), abs(b[6])
    ok = max(e1, e3, e6) <= C2_TOL
    _record(2, ok, f"|b1 - target| = {e1:.2e}, |b3| = {e3:.2e}, |b6| = {e6:.2e}")
    assert ok


@pytest.mark.fixture_dependent
def test_criterion_3_eigen_coefficients(f27):
    d = _level27(f27)
    # the eigen Gram matrix here has condition ~2e4, so E0 = 13 is what double precision delivers
    coef, ev = expand_eigen(f27, d, E0=C3_E0, K=35)
    worst_pattern, worst_other, flags = 0.0, 0.0, []
    for c, el, small in zip(coef, ev.basis, ev.negligible):
        key = el.mu.exponent_vector()[0] if el.m == 1 else None
        if key in C3_PATTERN:
            worst_pattern = max(worst_pattern, abs(c - C3_PATTERN[key]))
        else:
            worst_other = max(worst_other, abs(c))
            flags.append(bool(small))
    direct = expand_direct(f27, d, E=15, K0=35, C0=1.0)
    n = np.arange(1, 36)
    budget = 3 * (10.0**-15 * np.exp(n * direct.C) + 10.0**-C3_E0 * np.exp(n * ev.C))
    agree = np.abs(direct.coefficients[1:36] - ev.coefficients[1:36]) / budget
    ok = worst_pattern <= C3_TOL and worst_other <= C3_TOL and bool(np.all(agree <= 1))
    _record(
        3,
        ok,
        f"pattern err {worst_pattern:.2e}, other |c_l| <= {worst_other:.2e} "
        f"(negligible flags {sum(flags)}/{len(flags)}), direct/eigen diff/budget {agree.max():.3f}",
    )
    assert ok


@pytest.mark.fixture_dependent
def test_criterion_4_level25_xi(f25):
    d = cusp_datum(25, f25.character, Cusp(1, 5), alpha1=IntMatrix2(1, -1, 5, -4))
    assert d.h == 1
    _, ev = expand_eigen(f25, d, E0=13, K=20)
    a = f25.coefficients
    xi = [ev.coefficients[n] / a[n] for n in range(1, 5)]
    err = max(abs(x - t) for x, t in zip(xi, C4_XI))
    # periodic modulo 5 on the remaining nonzero coefficients
    per = max(abs(ev.coefficients[n] / a[n] - xi[n % 5 - 1]) for n in range(6, 20) if n % 5 and abs(a[n]) > 0.5)
    ok = err <= C4_TOL and per <= 1e-9
    _record(4, ok, f"max |xi(n) - target| = {err:.2e} (n=1..4), periodicity err {per:.2e}")
    assert ok


@pytest.mark.fixture_dependent
def test_criterion_5_petersson_norms(delta, f2, f3, f4):
    chi3 = DirichletCharacter.from_generator_values(3, {3: [Fraction(1, 2)]})
    forms = {"delta": delta, "f2": f2, "f2_twist9": twist(f2, chi3), "f3": f3, "f4": f4}
    assert forms["f2_twist9"].level == 9 and f3.level == 8 and f4.level == 9
    parts, ok = [], True
    for name, f in forms.items():
        target, tol = C5[name]
        t0 = time.perf_counter()
        val = petersson_pair(f, f, E=13).value
        secs = time.perf_counter() - t0
        rel = _rel(val.real, target)
        good = rel <= tol and abs(val.imag) <= 1e-11 * val.real and secs <= C5_SECONDS
        ok &= good
        parts.append(f"{name} rel {rel:.1e} ({secs:.1f}s)")
    _record(5, ok, ", ".join(parts))
    assert ok


def test_criterion_6_ratios(delta):
    a11 = delta.coefficients[11].real
    alpha, beta = root_pair(a11, 1, 11, 12)
    if alpha.imag < beta.imag:
        alpha, beta = beta, alpha
    sharp = p_stabilize(delta, 11, beta, "sharp")
    flat = p_stabilize(delta, 11, alpha, "flat")
    natural = p_stabilize(delta, 11, beta, "natural")
    eng = ExpansionEngine(E=13)
    norm = petersson_pair(delta, delta, E=13, engine=eng).value
    q1, _, _ = petersson_ratio(dilate(delta, 11), delta, delta, delta, E=13)
    q2 = petersson_pair(flat, natural, E=13, engine=eng).value / norm
    q3 = petersson_pair(sharp, natural, E=13, engine=eng).value / norm
    r1, r2, r3 = _rel(q1, C6_HECKE), abs(q2), abs(q3 - C6_SHARP)
    ok = r1 <= C6_HECKE_TOL and r2 <= C6_FLAT_TOL and r3 <= C6_SHARP_TOL
    _record(6, ok, f"Hecke ratio rel {r1:.1e}, |flat/natural| {r2:.1e}, sharp/natural err {r3:.1e} (value {q3:.10f})")
    assert ok


def test_criterion_7_triple_products(delta, f2, h24, h18):
    assert abs(h24.coefficients[2].real - (540 - 12 * math.sqrt(144169))) < 1e-9
    v1 = abs(petersson_triple(delta, delta, h24, E=13).value) ** 2
    chk1 = ratio_check(v1, C7_L24, ichino_constant(12, 24), C7_L24_TOL)
    v2 = abs(petersson_triple(f2, dilate(delta, 3), h18, E=13).value) ** 2
    spec = LocalFactorSpec(3, "one-special-two-unramified")
    const2 = ichino_constant(6, 18, 1, 3, 1, [spec])
    assert abs(const2 / ichino_constant(6, 18, 1, 3, 1) - (1 / 3) * (1 + 1 / 3) ** -2) < 1e-15
    chk2 = ratio_check(v2, C7_L18, const2, C7_F2D18_TOL)
    r1, r2 = _rel(v1, C7_DD24), _rel(v2, C7_F2D18)
    ok = r1 <= C7_DD24_TOL and chk1.passed and r2 <= C7_F2D18_TOL and chk2.passed
    _record(
        7,
        ok,
        f"|<DD,h24>|^2 rel {r1:.1e}, Ichino dev {chk1.deviation:.1e}; "
        f"|<f2 D(3z),h18>|^2 rel {r2:.1e}, Ichino dev {chk2.deviation:.1e}",
    )
    assert ok


def test_criterion_8_constants():
    adj = [
        adjoint_constant(12),
        adjoint_constant(6, [LocalFactorSpec(3, "special-c1")]),
        adjoint_constant(6, [LocalFactorSpec(3, "special-nonminimal")]),
        adjoint_constant(4, [LocalFactorSpec(2, "supercuspidal-not-eta-invariant")]),
        adjoint_constant(8, [LocalFactorSpec(3, "supercuspidal-eta-invariant")]),
    ]
    adj_err = max(_rel(a, t) for a, t in zip(adj, C8_ADJOINT))
    pi, f = math.pi, math.factorial
    base = lambda p, c: p**-c * (1 + 1 / p) ** -2  # noqa: E731
    a16 = level1_newforms(16, 5)[0].coefficients[3].real
    assert a16 == -3348
    pairs = [
        (ichino_constant(12, 24), 9 * f(22) * f(11) ** 2 / (pi**50 * 2.0**94)),
        (
            ichino_constant(6, 18, 1, 3, 1, [LocalFactorSpec(3, "one-special-two-unramified")]),
            9 * f(16) * f(5) * f(11) / (pi**38 * 2.0**70 * 3.0**12) * base(3, 1),
        ),
        (
            ichino_constant(8, 16, specs=[LocalFactorSpec(3, "nps-type1", c=2, a_p=a16, weight=16)]),
            9 * f(14) * f(7) ** 2 / (pi**34 * 2.0**62) * base(3, 2) * 3348**2 / 3.0**15,
        ),
        (
            ichino_constant(6, 12, specs=[LocalFactorSpec(3, "nps-type1", c=4, a_p=252, weight=12)]),
            9 * f(10) * f(5) ** 2 / (pi**26 * 2.0**46) * base(3, 4) * (252**2 / 3.0**11 - 1 - 1 / 3) ** 2,
        ),
    ]
    ich_err = max(_rel(a, b) for a, b in pairs)
    ok = adj_err <= C8_ADJOINT_TOL and ich_err <= C8_ICHINO_TOL
    _record(8, ok, f"adjoint max rel {adj_err:.1e}, Ichino max rel {ich_err:.1e}")
    assert ok


def test_criterion_9_property_suites(delta, f2):
    results = {}
    # hermitian and bilinearity
    chi3 = DirichletCharacter.from_generator_values(3, {3: [Fraction(1, 2)]})
    g = dilate(f2, 3)
    eng = ExpansionEngine(E=12)
    fg = petersson_pair(f2, g, E=12, engine=eng).value
    gf = petersson_pair(g, f2, E=12, engine=eng).value
    ff = petersson_pair(f2, f2, E=12, engine=eng).value
    results["hermitian"] = abs(fg - np.conj(gf)) <= 1e-12 * abs(ff)
    from cuspidal.modform import linear_combination

    s = linear_combination([(2.0, f2, 1), (1.0, g, 1)])
    results["bilinear"] = abs(petersson_pair(s, f2, E=12, engine=eng).value - 2 * ff - gf) <= 1e-10 * abs(ff)
    # E-scaling
    results["E-scaling"] = _rel(petersson_pair(delta, delta, E=8).value, petersson_pair(delta, delta, E=11).value) <= 1e-8
    # transport round trip
    chi27 = DirichletCharacter.from_generator_values(27, {3: [Fraction(1, 3)]})
    beta = cusp_datum(27, chi27, Cusp(1, 3)).alpha1
    beta2 = IntMatrix2(28, 1, 27, 1) @ beta @ IntMatrix2(1, 2, 0, 1)
    b = np.exp(1j * np.arange(10)) * np.arange(10)
    there, _, _ = transport_equivalent(b, beta, beta2, chi27, 27, 3)
    back, _, _ = transport_equivalent(there, beta2, beta, chi27, 27, 3)
    results["transport"] = np.allclose(back, b, rtol=1e-14, atol=1e-14)
    # Bessel recurrence
    x = np.array([0.3, 3.0, 30.0])
    results["bessel"] = bool(np.all(np.abs(bessel_k(5, x) - bessel_k(3, x) - 8 / x * bessel_k(4, x)) <= 1e-13 * bessel_k(5, x)))
    # least-squares optimality probe
    rng = np.random.default_rng(0)
    A = rng.normal(size=(40, 20)) + 1j * rng.normal(size=(40, 20))
    rhs = rng.normal(size=40) + 1j * rng.normal(size=40)
    sol = lstsq_solve(A, rhs)
    best = np.linalg.norm(A @ sol - rhs)
    P = 1e-3 * (rng.normal(size=(20, 2000)) + 1j * rng.normal(size=(20, 2000)))
    results["lstsq"] = np.min(np.linalg.norm(A @ (sol[:, None] + P) - rhs[:, None], axis=0)) >= best
    # twist round trip (self-twist of a CM form)
    wt3 = conftest.eta_quotient([(1, 3), (7, 3)], 400).replace(**conftest.NEWFORM)
    nu = wt3.character.primitive()
    results["twist"] = np.allclose(twist(twist(wt3, nu).replace(twist_minimal=True), nu).coefficients, wt3.coefficients, atol=1e-9)
    tw = twist(f2, chi3)
    results["twist-level"] = tw.level == 9
    # Delta: eta product equals Hecke recursion exactly
    tau = eta_series([(1, 24)], 2000)
    results["eta-vs-Hecke"] = hecke_extend({p: tau[p] for p in primes_up_to(2000)}, 12, DirichletCharacter.trivial(1), 2000, as_int=True) == tau
    # widths partition the index
    def index(N):
        out = N
        for p in {p for p in range(2, N + 1) if N % p == 0 and all(p % q for q in range(2, p))}:
            out = out // p * (p + 1)
        return out

    results["widths"] = all(sum(width_gamma0(N, c.c) for c in enumerate_cusps(N)) == index(N) for N in range(1, 201))
    ok = all(bool(v) for v in results.values())
    _record(9, ok, ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in results.items()))
    assert ok
