"""Integer and Dirichlet-character arithmetic.

Characters are stored exactly: each prime-power component records the
rational exponent ``t`` of ``chi(g) = exp(2 pi i t)`` on the canonical
generator(s) of ``(Z/p^e Z)^x``.  The generator convention is

* odd ``p^e``: the least positive integer that generates ``(Z/p^e Z)^x``;
* ``2^2``: ``-1``;
* ``2^e`` with ``e >= 3``: the pair ``(-1, 5)``;
* ``2^1`` and ``1``: no generators.

Values are converted to complex numbers only at evaluation time.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

__all__ = [
    "Factorization",
    "factorize",
    "is_prime",
    "divisors",
    "ext_gcd",
    "IntMatrix2",
    "CharComponent",
    "DirichletCharacter",
    "char_eval",
    "char_conductor",
    "char_restrict",
    "characters_mod",
]

Factorization = list[tuple[int, int]]

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for ``n < 3.3e24``."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> Factorization:
    """Prime factorization of ``1 <= n < 2**63`` as sorted ``(p, e)`` pairs."""
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    counts: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            counts[p] = counts.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m < 17 * 17 or is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            continue
        d = _pollard_brent(m)
        stack.extend((d, m // d))
    return sorted(counts.items())


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n):
        out = [d * p**i for d in out for i in range(e + 1)]
    return sorted(out)


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``g = gcd(a, b) > 0`` and ``a*x + b*y = g``."""
    if a == 0 and b == 0:
        raise ValueError("ext_gcd(0, 0) is undefined")
    x0, y0, x1, y1 = 1, 0, 0, 1
    r0, r1 = a, b
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if r0 < 0:
        r0, x0, y0 = -r0, -x0, -y0
    return r0, x0, y0


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class IntMatrix2:
    """Integer 2x2 matrix ``[[a, b], [c, d]]`` acting by Moebius transformations."""

    a: int
    b: int
    c: int
    d: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse_sl2(self) -> "IntMatrix2":
        if self.det != 1:
            raise ValueError(f"{self} is not in SL2(Z)")
        return IntMatrix2(self.d, -self.b, -self.c, self.a)

    def act(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __repr__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


@lru_cache(maxsize=None)
def _unit_group(p: int, e: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Canonical generators of ``(Z/p^e)^x`` and their orders."""
    q = p**e
    if p == 2:
        if e <= 1:
            return (), ()
        if e == 2:
            return (q - 1,), (2,)
        return (q - 1, 5), (2, 2 ** (e - 2))
    order = q - q // p
    factors = [r for r, _ in factorize(order)]
    for g in range(2, q):
        if g % p and all(pow(g, order // r, q) != 1 for r in factors):
            return (g,), (order,)
    raise ArithmeticError(f"no primitive root mod {q}")  # pragma: no cover


@lru_cache(maxsize=None)
def _dlog_table(p: int, e: int) -> dict[int, tuple[int, ...]]:
    """Map each unit mod ``p^e`` to its exponent vector on the canonical generators."""
    q = p**e
    gens, orders = _unit_group(p, e)
    table: dict[int, tuple[int, ...]] = {}
    for exps in product(*(range(o) for o in orders)):
        x = 1
        for g, k in zip(gens, exps):
            x = x * pow(g, k, q) % q
        table[x] = exps
    if not gens:
        table[1 % q] = ()
    return table


@dataclass(frozen=True)
class CharComponent:
    """Character of ``(Z/p^e)^x`` given by exponents on the canonical generators."""

    p: int
    e: int
    exponents: tuple[Fraction, ...]

    def __post_init__(self):
        _, orders = _unit_group(self.p, self.e)
        if len(self.exponents) != len(orders):
            raise ValueError(f"component mod {self.p}^{self.e} needs {len(orders)} exponents")
        norm = tuple(Fraction(t) % 1 for t in self.exponents)
        for t, o in zip(norm, orders):
            if (t * o).denominator != 1:
                raise ValueError(f"exponent {t} incompatible with generator order {o}")
        object.__setattr__(self, "exponents", norm)

    @property
    def modulus(self) -> int:
        return self.p**self.e

    def angle(self, n: int) -> Fraction | None:
        n %= self.modulus
        if n % self.p == 0 and self.modulus > 1:
            return None
        exps = _dlog_table(self.p, self.e)[n]
        return sum((k * t for k, t in zip(exps, self.exponents)), Fraction(0)) % 1

    def is_trivial(self) -> bool:
        return all(t == 0 for t in self.exponents)

    def conductor_exponent(self) -> int:
        for f in range(self.e + 1):
            step = self.p**f
            if all(self.angle(1 + step * t) == 0 for t in range(self.modulus // step) if (1 + step * t) % self.p):
                return f
        return self.e  # pragma: no cover

    @classmethod
    def from_function(cls, p: int, e: int, angle_of) -> "CharComponent":
        gens, _ = _unit_group(p, e)
        return cls(p, e, tuple(Fraction(angle_of(g)) for g in gens))


@dataclass(frozen=True)
class DirichletCharacter:
    """Dirichlet character modulo ``modulus``, stored component-wise and exactly."""

    modulus: int
    components: tuple[CharComponent, ...] = field(default=())

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        fac = dict(factorize(self.modulus))
        given = {c.p: c for c in self.components}
        for p, comp in given.items():
            if fac.get(p) != comp.e:
                raise ValueError(f"component {p}^{comp.e} does not match modulus {self.modulus}")
        comps = []
        for p, e in sorted(fac.items()):
            if p in given:
                comps.append(given[p])
            else:
                comps.append(CharComponent(p, e, (Fraction(0),) * len(_unit_group(p, e)[0])))
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus)

    @classmethod
    def from_generator_values(cls, modulus: int, values: dict[int, Sequence]) -> "DirichletCharacter":
        """Build from ``{prime: [exponent per canonical generator]}``; omitted primes are trivial."""
        fac = dict(factorize(modulus))
        comps = [CharComponent(p, fac[p], tuple(Fraction(t) for t in ts)) for p, ts in values.items()]
        return cls(modulus, tuple(comps))

    @classmethod
    def from_angles(cls, modulus: int, angle_of) -> "DirichletCharacter":
        """Build from a function ``n -> Fraction`` giving ``chi(n) = e(angle)`` on units."""
        comps = []
        for p, e in factorize(modulus):
            q = p**e
            rest = modulus // q

            def lift(g, q=q, rest=rest):
                # unit congruent to g mod q and to 1 mod the rest
                _, u, _ = ext_gcd(rest, q)
                return (1 + (g - 1) * rest * u) % modulus

            comps.append(CharComponent.from_function(p, e, lambda g, lift=lift: angle_of(lift(g))))
        return cls(modulus, tuple(comps))

    # -- evaluation -------------------------------------------------------
    def angle(self, n: int) -> Fraction | None:
        """Exact argument ``t`` with ``chi(n) = exp(2 pi i t)``, or ``None`` when ``gcd(n, N) > 1``."""
        if math.gcd(n, self.modulus) != 1:
            return None
        total = Fraction(0)
        for comp in self.components:
            total += comp.angle(n)
        return total % 1

    def __call__(self, n: int) -> complex:
        t = self.angle(n)
        if t is None:
            return 0j
        return _root_of_unity(t)

    # -- structure --------------------------------------------------------
    def is_trivial(self) -> bool:
        return all(c.is_trivial() for c in self.components)

    def order(self) -> int:
        return math.lcm(1, *(t.denominator for c in self.components for t in c.exponents))

    def is_even(self) -> bool:
        return self.angle(-1) == 0

    def conductor(self) -> int:
        return math.prod(c.p ** c.conductor_exponent() for c in self.components)

    def component(self, p: int) -> CharComponent | None:
        for c in self.components:
            if c.p == p:
                return c
        return None

    def restrict(self, d: int) -> "DirichletCharacter":
        """Component of the character on the unitary divisor ``d`` of the modulus."""
        if self.modulus % d or math.gcd(d, self.modulus // d) != 1:
            raise ValueError(f"{d} is not a unitary divisor of {self.modulus}")
        return DirichletCharacter(d, tuple(c for c in self.components if d % c.p == 0))

    def primitive(self) -> "DirichletCharacter":
        return self.induce(self.conductor()) if self.conductor() != self.modulus else self

    def induce(self, modulus: int) -> "DirichletCharacter":
        """Same character viewed modulo ``modulus``.

        ``modulus`` must be a multiple of the conductor; values at units of
        the new modulus agree with the original primitive character.
        """
        cond = self.conductor()
        if modulus % cond:
            raise ValueError(f"conductor {cond} does not divide {modulus}")
        comps = []
        for p, e in factorize(modulus):
            own = self.component(p)
            if own is None or own.conductor_exponent() == 0:
                comps.append(CharComponent(p, e, (Fraction(0),) * len(_unit_group(p, e)[0])))
                continue
            src = own

            def angle_of(g, src=src):
                # generators are integers prime to p; src only sees g mod its conductor
                return src.angle(g)

            comps.append(CharComponent.from_function(p, e, angle_of))
        return DirichletCharacter(modulus, tuple(comps))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        m = math.lcm(self.modulus, other.modulus)
        a, b = self.extend(m), other.extend(m)
        comps = tuple(
            CharComponent(ca.p, ca.e, tuple(x + y for x, y in zip(ca.exponents, cb.exponents)))
            for ca, cb in zip(a.components, b.components)
        )
        return DirichletCharacter(m, comps)

    def __pow__(self, n: int) -> "DirichletCharacter":
        comps = tuple(CharComponent(c.p, c.e, tuple(n * t for t in c.exponents)) for c in self.components)
        return DirichletCharacter(self.modulus, comps)

    def conj(self) -> "DirichletCharacter":
        return self ** -1

    def extend(self, modulus: int) -> "DirichletCharacter":
        """View modulo a multiple of the current modulus (same values on common units)."""
        if modulus % self.modulus:
            raise ValueError(f"{modulus} is not a multiple of {self.modulus}")
        if modulus == self.modulus:
            return self
        return self.induce(modulus)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.modulus == other.modulus and self.components == other.components

    def __hash__(self) -> int:
        return hash((self.modulus, self.components))

    def exponent_vector(self) -> tuple[Fraction, ...]:
        return tuple(t for c in self.components for t in c.exponents)

    def __repr__(self) -> str:
        parts = ", ".join(f"{c.p}^{c.e}:{[str(t) for t in c.exponents]}" for c in self.components if c.exponents)
        return f"DirichletCharacter({self.modulus}; {parts})"

    # -- JSON -------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "components": [
                {"prime_power": c.modulus, "exponents": [[t.numerator, t.denominator] for t in c.exponents]}
                for c in self.components
                if not c.is_trivial()
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DirichletCharacter":
        modulus = int(doc["modulus"])
        comps = []
        for item in doc.get("components", []):
            (p, e), = factorize(int(item["prime_power"]))
            comps.append(CharComponent(p, e, tuple(Fraction(n, d) for n, d in item["exponents"])))
        return cls(modulus, tuple(comps))


@lru_cache(maxsize=4096)
def _root_of_unity(t: Fraction) -> complex:
    if t == 0:
        return 1 + 0j
    if t == Fraction(1, 2):
        return -1 + 0j
    if t == Fraction(1, 4):
        return 1j
    if t == Fraction(3, 4):
        return -1j
    return cmath.exp(2j * math.pi * t)


def char_eval(chi: DirichletCharacter, n: int) -> complex:
    return chi(n)


def char_conductor(chi: DirichletCharacter) -> int:
    return chi.conductor()


def char_restrict(chi: DirichletCharacter, d: int) -> DirichletCharacter:
    return chi.restrict(d)


def characters_mod(modulus: int) -> list[DirichletCharacter]:
    """All characters modulo ``modulus``, ordered by conductor then exponent vector."""
    per_prime = []
    for p, e in factorize(modulus):
        _, orders = _unit_group(p, e)
        per_prime.append(
            [CharComponent(p, e, tuple(Fraction(k, o) for k, o in zip(ks, orders))) for ks in product(*(range(o) for o in orders))]
        )
    chars = [DirichletCharacter(modulus, tuple(combo)) for combo in product(*per_prime)]
    chars.sort(key=lambda c: (c.conductor(), c.exponent_vector()))
    return chars


def iter_units(modulus: int) -> Iterable[int]:
    return (n for n in range(1, modulus + 1) if math.gcd(n, modulus) == 1)
