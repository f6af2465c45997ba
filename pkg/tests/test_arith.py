import math
import cmath
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspidal.arith import (
    DirichletCharacter,
    IntMatrix2,
    char_conductor,
    char_eval,
    char_restrict,
    characters_mod,
    divisors,
    ext_gcd,
    factorize,
    is_prime,
)


def _trial_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _brute_conductor(chi):
    # smallest d | N with chi trivial on units congruent to 1 mod d
    N = chi.modulus
    for d in sorted(divisors(N)):
        if all(chi.angle(n) == 0 for n in range(1, N) if math.gcd(n, N) == 1 and n % d == 1 % d):
            return d
    return N


def _mu1():
    return DirichletCharacter.from_generator_values(9, {3: [Fraction(1, 6)]})


@pytest.mark.parametrize("n, expected", [(1, []), (12, [(2, 2), (3, 1)]), (144169, [(144169, 1)])])
def test_factorize_examples(n, expected):
    assert list(factorize(n)) == expected


@given(st.integers(min_value=1, max_value=10**12))
@settings(max_examples=200, deadline=None)
def test_factorize_round_trip(n):
    fac = list(factorize(n))
    assert math.prod(p**e for p, e in fac) == n
    assert [p for p, _ in fac] == sorted({p for p, _ in fac})
    for p, e in fac:
        assert e >= 1
        assert sympy.isprime(p)


def test_factorize_large_semiprime():
    p, q = 2147483647, 4294967291
    assert list(factorize(p * q)) == [(p, 1), (q, 1)]


@given(st.integers(min_value=0, max_value=10**5))
def test_is_prime_matches_trial_division(n):
    assert is_prime(n) == _trial_prime(n)


@pytest.mark.parametrize("a, b, expected", [(3, 5, (1, 2, -1)), (0, 7, (7, 0, 1)), (1071, 462, (21, -3, 7))])
def test_ext_gcd_examples(a, b, expected):
    assert ext_gcd(a, b) == expected


@given(st.integers(-(10**9), 10**9), st.integers(-(10**9), 10**9))
@settings(max_examples=10**4, deadline=None)
def test_ext_gcd_bezout(a, b):
    if a == 0 and b == 0:
        with pytest.raises(ValueError):
            ext_gcd(a, b)
        return
    g, x, y = ext_gcd(a, b)
    assert g == math.gcd(a, b) > 0
    assert a * x + b * y == g


def test_char_eval_examples():
    assert char_eval(DirichletCharacter.trivial(6), 5) == 1
    mu1 = _mu1()
    assert abs(mu1(2) - cmath.exp(2j * math.pi / 6)) < 1e-15
    assert abs(char_eval(mu1, 4) - cmath.exp(2j * math.pi / 3)) < 1e-15
    assert mu1(3) == 0 and mu1(6) == 0


def test_conductor_examples():
    assert char_conductor(DirichletCharacter.trivial(12)) == 1
    q8 = DirichletCharacter.from_generator_values(8, {2: [0, Fraction(1, 2)]})
    assert q8(5) == -1 and q8(7) == 1
    assert char_conductor(q8) == _brute_conductor(q8) == 8
    assert char_conductor(_mu1()) == _brute_conductor(_mu1()) == 9


@pytest.mark.parametrize("N", [8, 9, 12, 15, 16, 20, 27, 45])
def test_conductor_matches_brute_force(N):
    for chi in characters_mod(N):
        assert chi.conductor() == _brute_conductor(chi)


@pytest.mark.parametrize("N", [1, 7, 8, 9, 24, 25, 27])
def test_characters_mod_is_the_dual_group(N):
    chars = characters_mod(N)
    phi = sum(1 for n in range(1, N + 1) if math.gcd(n, N) == 1)
    assert len(chars) == phi == len(set(chars))
    units = [n for n in range(1, N + 1) if math.gcd(n, N) == 1]
    for chi in chars:
        s = sum(chi(n) for n in units)
        assert abs(s - (phi if chi.is_trivial() else 0)) < 1e-9


def test_restrict():
    chi9 = _mu1()
    chi5 = DirichletCharacter.from_generator_values(5, {5: [Fraction(1, 4)]})
    chi45 = chi9.extend(45) * chi5.extend(45)
    assert char_restrict(chi45, 9) == chi9
    assert char_restrict(chi45, 5) == chi5
    assert char_restrict(chi45, 1).is_trivial()
    assert char_restrict(DirichletCharacter.trivial(45), 9).is_trivial()
    assert chi9.restrict(9) == chi9
    with pytest.raises(ValueError):
        char_restrict(chi45, 3)


@given(st.integers(1, 10**6), st.integers(1, 10**6), st.sampled_from([8, 9, 20, 27, 45, 63]), st.data())
def test_multiplicative_exactly(n1, n2, N, data):
    chars = characters_mod(N)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    a1, a2, a12 = chi.angle(n1), chi.angle(n2), chi.angle(n1 * n2)
    if a1 is None or a2 is None:
        assert a12 is None
    else:
        assert (a1 + a2) % 1 == a12


def test_json_round_trip():
    for chi in characters_mod(24) + characters_mod(27):
        assert DirichletCharacter.from_json(chi.to_json()) == chi


def test_matrix_basics():
    m = IntMatrix2(1, -1, 3, -2)
    assert m.det == 1
    assert (m @ m.inverse_sl2()).as_tuple() == (1, 0, 0, 1)
    assert abs(m.act(1j) - (1j - 1) / (3j - 2)) < 1e-15
