import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from oracles import k_quad

from cuspidal.arith import DirichletCharacter
from cuspidal.modform import FormInput, dilate, linear_combination, twist
from cuspidal.petersson import (
    ExpansionEngine,
    LocalFactorSpec,
    _kernel_terms,
    adjoint_constant,
    bessel_weight_sum,
    ichino_constant,
    ichino_factor,
    nps_factor_direct,
    petersson_pair,
    petersson_ratio,
    petersson_triple,
    ratio_check,
    volume,
)


def _coset_index(N):
    # |P^1(Z/N)| counted directly
    pts = set()
    for c in range(N):
        for d in range(N):
            if math.gcd(math.gcd(c, d), N) != 1:
                continue
            pts.add(min(((u * c) % N, (u * d) % N) for u in range(1, N + 1) if math.gcd(u, N) == 1))
    return max(len(pts), 1)


@pytest.mark.parametrize("N", [1, 2, 6, 11, 12, 25, 27])
def test_volume(N):
    assert volume(N) == pytest.approx(math.pi / 3 * _coset_index(N), rel=1e-15)


def test_volume_examples():
    assert volume(1) == pytest.approx(math.pi / 3)
    assert volume(6) == pytest.approx(4 * math.pi)
    assert volume(11) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("k", [2, 4, 12, 24])
def test_kernel_terms_decrease_past_k(k):
    step = 4 * math.pi * math.sqrt(1 / 7)
    m = np.arange(1, 400)
    x = step * m
    t = _kernel_terms(k, x)
    live = (x > k) & (t > 0)
    tail = t[live]
    assert len(tail) > 5
    assert np.all(np.diff(tail) < 0)


@pytest.mark.parametrize("k", [2, 4, 12])
@pytest.mark.parametrize("h", [1, 3])
def test_large_n_is_negligible(k, h):
    E = 13
    n = math.ceil(((math.log(10) * E + 50) / (4 * math.pi)) ** 2 * h) + 1
    ref = bessel_weight_sum(k, 1, 1)[0]
    # the working cutoff sits a factor 10^3 (and another for the m-sum) below 10^-E relative
    assert abs(bessel_weight_sum(k, n, h)[0]) < 10.0**-E / 1e6 * ref


def test_weight_sum_against_quadrature_oracle():
    k = 12
    x0 = 4 * mpmath.pi
    total = mpmath.mpf(0)
    m = 1
    while True:
        x = x0 * m
        term = (x / (8 * mpmath.pi)) ** (k - 1) * (x * k_quad(k - 2, x) - k_quad(k - 1, x))
        total += term
        if abs(term) < mpmath.mpf(10) ** -40:
            break
        m += 1
    S, used = bessel_weight_sum(k, 1, 1)
    assert used >= m - 1
    assert abs(S / float(total) - 1) <= 1e-12


def test_weight_sum_errors():
    with pytest.raises(ValueError):
        bessel_weight_sum(1, 1, 1)
    with pytest.raises(ValueError):
        bessel_weight_sum(12, 0, 1)


def test_hermitian(f2, f27):
    a = petersson_pair(f2, dilate(f2, 3), E=12).value
    b = petersson_pair(dilate(f2, 3), f2, E=12).value
    assert abs(a - np.conj(b)) <= 1e-12 * abs(a)
    chi = DirichletCharacter.from_generator_values(3, {3: [Fraction(1, 2)]})
    g = twist(f27, chi)
    u = petersson_pair(f27, g, E=11).value
    v = petersson_pair(g, f27, E=11).value
    scale = petersson_pair(f27, f27, E=11).value.real
    assert abs(u - np.conj(v)) <= 1e-10 * scale


def test_bilinearity(f2):
    chi = DirichletCharacter.from_generator_values(3, {3: [Fraction(1, 2)]})
    tw = twist(f2, chi)
    eng = ExpansionEngine(E=12)
    ff = petersson_pair(f2, f2, E=12, engine=eng).value
    tf = petersson_pair(tw, f2, E=12, engine=eng).value
    s = linear_combination([(1.0, f2, 1), (1.0, tw, 1)])
    sf = petersson_pair(s, f2, E=12, engine=eng).value
    assert abs(sf - ff - tf) <= 1e-10 * abs(ff)
    two = linear_combination([(2.0, f2, 1)])
    assert abs(petersson_pair(two, f2, E=12, engine=eng).value - 2 * ff) <= 1e-10 * abs(ff)


def test_e_scaling(delta):
    lo = petersson_pair(delta, delta, E=8).value
    hi = petersson_pair(delta, delta, E=11).value
    assert abs(lo / hi - 1) <= 1e-8


@pytest.mark.parametrize("name", ["delta", "level6", "f2", "f3", "f27", "f25"])
def test_norm_is_real_positive(name, request):
    f = request.getfixturevalue(name)
    E = 11
    r = petersson_pair(f, f, E=E)
    assert r.value.real > 0
    assert abs(r.value.imag) <= 10.0 ** (-E + 2) * r.value.real
    assert all(row["n_s"] >= 1 for row in r.per_cusp)


def test_report_sums_per_cusp(level6):
    r = petersson_pair(level6, level6, E=10)
    total = sum(complex(*row["contribution"]) if isinstance(row["contribution"], list) else row["contribution"] for row in r.per_cusp)
    assert abs(4 / volume(6) * total - r.value) <= 1e-14 * abs(r.value)
    assert r.bessel_evaluations > 0
    assert r.to_json()["N"] == 6


def test_pair_rejects_mismatch(delta, level6, level7_wt3):
    with pytest.raises(ValueError):
        petersson_pair(delta, level6)
    fake = FormInput(3, 7, None, level7_wt3.coefficients.copy())
    with pytest.raises(ValueError):
        petersson_pair(level7_wt3, fake)


def test_triple_character_mismatch_is_zero(level7_wt3, delta):
    rng = np.random.default_rng(0)
    a = np.zeros(200, dtype=complex)
    a[1:] = rng.normal(size=199)
    h = FormInput(15, 7, None, a)
    r = petersson_triple(level7_wt3, delta, h, E=8)
    assert r.value == 0 and "mismatch" in r.note


def test_ratio_level1_dilation(delta):
    q, num, den = petersson_ratio(dilate(delta, 11), delta, delta, delta, E=12)
    assert abs(q / (534612 / (11**11 * 12)) - 1) <= 1e-10
    assert num.N == 11 and den.N == 1


def test_ichino_level1_constant():
    c = ichino_constant(12, 24)
    ref = 9 * math.factorial(22) * math.factorial(11) ** 2 / (math.pi**50 * 2.0**94)
    assert c == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("seed", range(100))
def test_nps_reductions(seed):
    rng = np.random.default_rng(seed)
    alpha = cmath.exp(1j * rng.uniform(0.05, math.pi - 0.05))
    s1 = (alpha + 1 / alpha).real
    p = int(rng.choice([2, 3, 5, 7]))
    base = lambda c: p**-c * (1 + 1 / p) ** -2  # noqa: E731
    f2 = ichino_factor(LocalFactorSpec(p, "nps-type1", c=2, s1=s1))
    f4 = ichino_factor(LocalFactorSpec(p, "nps-type1", c=4, alpha=alpha))
    assert abs(f2 - base(2) * s1**2) <= 1e-12 * base(2) * max(1, s1**2)
    assert abs(f4 - base(4) * (s1**2 - 1 - 1 / p) ** 2) <= 1e-12 * base(4) * max(1, (s1**2 - 1 - 1 / p) ** 2)
    for c, val in ((2, f2), (4, f4)):
        direct = nps_factor_direct(alpha, c, p)
        assert abs(direct.imag) <= 1e-12 * max(1, abs(direct))
        assert abs(val - base(c) * direct.real) <= 1e-12 * base(c) * max(1, abs(direct))


def test_local_factor_aliases_and_errors():
    assert LocalFactorSpec(3, "special-c1").case == "special-minimal"
    assert LocalFactorSpec(3, "NPS-type1", c=2, s1=1.0).case == "nps-type1"
    with pytest.raises(ValueError):
        adjoint_constant(12, [LocalFactorSpec(3, "unramified-after-twist")])
    with pytest.raises(ValueError):
        ichino_factor(LocalFactorSpec(3, "nps-type1", c=2))
    with pytest.raises(ValueError):
        ichino_factor(LocalFactorSpec(3, "nps-type1", c=3, s1=1.0))
    spec = LocalFactorSpec.from_json({"p": 3, "case": "nps-type1", "c": 2, "alpha": [0.6, 0.8]})
    assert spec.alpha == complex(0.6, 0.8)


def test_ratio_check_trivial():
    r = ratio_check(2.5 * 7.0, 7.0, 2.5)
    assert r.deviation == 0 and r.passed
    bad = ratio_check(1.0, 1.0, 2.0, tol=1e-3)
    assert not bad.passed and bad.deviation == pytest.approx(0.5)
