"""Cusp forms given by q-expansions at infinity.

Coefficient generators (Hecke recursion, eta quotients, Eisenstein series,
level-one newforms) work in exact integer arithmetic and cast to complex at
the end.  Evaluation truncates the q-series with a tail bound derived from
the coefficient growth model ``|a_n| <= C_f n^gamma``.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass, field
from decimal import Decimal, getcontext
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .arith import DirichletCharacter, IntMatrix2, factorize, valuation

__all__ = [
    "InsufficientCoefficients",
    "TailModel",
    "FormInput",
    "primes_up_to",
    "hecke_extend",
    "eta_series",
    "eta_quotient",
    "eisenstein",
    "level1_newforms",
    "evaluate",
    "evaluate_slash",
    "naive_twist",
    "true_twist",
    "twist",
    "dilate",
    "root_pair",
    "p_stabilize",
    "linear_combination",
]


class InsufficientCoefficients(ValueError):
    """Raised when a truncation cannot be certified with the stored coefficients."""

    def __init__(self, required: int, available: int):
        super().__init__(f"need about {required} coefficients, only {available} available")
        self.required = required
        self.available = available


@dataclass(frozen=True)
class TailModel:
    """Growth model ``|a_n| <= C_f n^gamma`` with ``gamma = (k-1)/2 + 0.6``."""

    C_f: float
    gamma: float

    @classmethod
    def fit(cls, coefficients: np.ndarray, weight: int) -> "TailModel":
        gamma = (weight - 1) / 2 + 0.6
        a = np.abs(np.asarray(coefficients)[1:])
        n = np.arange(1, len(a) + 1, dtype=float)
        ratio = float(np.max(a / n**gamma)) if len(a) else 0.0
        return cls(2.0 * max(ratio, 1e-300), gamma)

    def log_tail(self, T: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Log of a bound on ``sum_{n > T} C_f n^gamma r^n``.

        Consecutive term ratios are at most ``rho = r ((T+2)/(T+1))^gamma`` past
        ``T``, so the tail is below ``C_f (T+1)^gamma r^(T+1) / (1 - rho)``.
        """
        T = np.asarray(T, dtype=float)
        lr = np.log(r)
        lrho = lr + self.gamma * np.log1p(1.0 / (T + 1))
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (
                math.log(self.C_f)
                + self.gamma * np.log(T + 1)
                + (T + 1) * lr
                - np.log(-np.expm1(np.minimum(lrho, 0.0)))
            )
        return np.where(lrho < 0, out, np.inf)

    def terms_needed(self, r, eps) -> np.ndarray:
        """Smallest ``T`` with tail bound ``<= eps`` for each ``r = |q| < 1``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        eps = np.broadcast_to(np.asarray(eps, dtype=float), r.shape)
        leps = np.log(eps)
        # past T0 the bound decreases monotonically; bisect above it
        lo = np.maximum(np.ceil(self.gamma / -np.log(r)), 1.0)
        hi = lo.copy()
        while True:
            bad = self.log_tail(hi, r) > leps
            if not bad.any():
                break
            hi = np.where(bad, hi * 2, hi)
            if np.any(hi > 1e9):
                raise InsufficientCoefficients(int(1e9), 0)
        ok = self.log_tail(lo, r) <= leps
        while True:
            active = (hi - lo > 1) & ~ok
            if not active.any():
                break
            mid = np.floor((lo + hi) / 2)
            good = self.log_tail(mid, r) <= leps
            hi = np.where(active & good, mid, hi)
            lo = np.where(active & ~good, mid, lo)
        return np.where(ok, lo, hi).astype(int)


def _as_char(chi: DirichletCharacter | None, N: int) -> DirichletCharacter:
    if chi is None:
        return DirichletCharacter.trivial(N)
    if chi.modulus == N:
        return chi
    if N % chi.modulus:
        raise ValueError(f"character modulus {chi.modulus} does not divide level {N}")
    return chi.extend(N)


@dataclass(frozen=True, eq=False)
class FormInput:
    """A cusp form of weight ``k`` on ``Gamma0(N)`` with character, given at infinity.

    ``coefficients[n]`` holds ``a_n`` for ``n = 0 .. n_max`` (``a_0 = 0``).
    ``components`` optionally records the form as ``sum coef * base(m z)``;
    the cusp machinery uses it to reduce expansions to the bases' own levels.
    """

    weight: int
    level: int
    character: DirichletCharacter
    coefficients: np.ndarray
    is_newform: bool = False
    prime_to_N_eigenform: bool = False
    twist_minimal: bool = False
    minimal_twist: tuple["FormInput", DirichletCharacter] | None = None
    dilation: int = 1
    components: tuple[tuple[complex, "FormInput", int], ...] | None = None
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=complex)
        if a.ndim != 1 or len(a) < 2:
            raise ValueError("coefficients must be a 1-d array a_0..a_nmax")
        if a[0] != 0:
            raise ValueError("cusp forms need a_0 = 0")
        a.setflags(write=False)
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "character", _as_char(self.character, self.level))
        if self.is_newform and abs(a[1] - 1) > 1e-12:
            raise ValueError("newforms are normalized with a_1 = 1")
        if self.dilation > 1:
            n = np.arange(len(a))
            if np.any(a[n % self.dilation != 0] != 0):
                raise ValueError("dilated form has coefficients off multiples of m")

    @property
    def n_max(self) -> int:
        return len(self.coefficients) - 1

    @cached_property
    def tail(self) -> TailModel:
        return TailModel.fit(self.coefficients, self.weight)

    def replace(self, **kw) -> "FormInput":
        return dataclasses.replace(self, **kw)

    def constituents(self) -> tuple[tuple[complex, "FormInput", int], ...]:
        """``(coef, base, m)`` triples with ``self = sum coef * base(m z)``."""
        return self.components if self.components else ((1.0, self, 1),)

    def truncate(self, n_max: int) -> "FormInput":
        return self.replace(coefficients=self.coefficients[: n_max + 1], components=None)


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def _smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if spf[p] == 0:
            spf[p :: p] = np.where(spf[p :: p] == 0, p, spf[p :: p])
    return spf


def hecke_extend(prime_coeffs: dict, k: int, chi: DirichletCharacter, n_max: int, as_int: bool = False):
    """All ``a_n``, ``n <= n_max``, of a normalized newform from its ``a_p``.

    Uses multiplicativity and ``a_{p^{r+1}} = a_p a_{p^r} - chi(p) p^{k-1} a_{p^{r-1}}``.
    Integer inputs with a real-valued character are handled exactly; pass
    ``as_int=True`` to get the exact integers instead of a complex array.
    """
    needed = primes_up_to(n_max)
    missing = [p for p in needed if p not in prime_coeffs]
    if missing:
        raise ValueError(f"missing prime coefficients, first missing p = {missing[0]}")
    exact = all(isinstance(prime_coeffs[p], (int, np.integer)) for p in needed) and all(
        chi.angle(p) in (None, 0) for p in needed
    )
    spf = _smallest_prime_factor(n_max)
    a: list = [0] * (n_max + 1)
    if n_max >= 1:
        a[1] = 1
    for n in range(2, n_max + 1):
        p = int(spf[n])
        pe, m = p, n // p
        while m % p == 0:
            m //= p
            pe *= p
        if m > 1:
            a[n] = a[pe] * a[m]
            continue
        ap = int(prime_coeffs[p]) if exact else complex(prime_coeffs[p])
        if n == p:
            a[n] = ap
        else:
            chip = (1 if chi.angle(p) == 0 else 0) if exact else chi(p)
            a[n] = ap * a[n // p] - chip * p ** (k - 1) * a[n // (p * p)]
    if as_int:
        if not exact:
            raise ValueError("exact output needs integer a_p and a real character")
        return a
    return np.array([complex(x) for x in a], dtype=complex)


def _sigma(power: int, n_max: int) -> list[int]:
    s = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dp = d**power
        for m in range(d, n_max + 1, d):
            s[m] += dp
    return s


def eta_series(spec: Sequence[tuple[int, int]], n_max: int) -> list[int]:
    """Exact integer coefficients of ``prod_d eta(d z)^{r_d}`` up to ``q^n_max``.

    The product ``prod_d prod_n (1 - q^{dn})^{r_d}`` is built from its
    logarithmic derivative, ``n c_n = sum_j L_j c_{n-j}``, and shifted by the
    leading exponent ``sum d r_d / 24``.
    """
    shift24 = sum(d * r for d, r in spec)
    if shift24 % 24:
        raise ValueError(f"fractional leading exponent {shift24}/24")
    shift = shift24 // 24
    n = max(n_max - shift, 0)
    L = [0] * (n + 1)
    for d, r in spec:
        for j in range(d, n + 1, d):
            L[j] -= r * d * _divisor_sum(j // d)
    c = [0] * (n + 1)
    c[0] = 1
    Lo = np.array(L, dtype=object)
    co = np.array(c, dtype=object)
    for m in range(1, n + 1):
        s = np.dot(Lo[1 : m + 1], co[m - 1 :: -1])
        q, rem = divmod(s, m)
        assert rem == 0
        co[m] = q
    out = [0] * (n_max + 1)
    for i in range(n + 1):
        if shift + i <= n_max:
            out[shift + i] = int(co[i])
    return out


def _divisor_sum(n: int) -> int:
    s = 1
    for p, e in factorize(n):
        s *= (p ** (e + 1) - 1) // (p - 1)
    return s


def _kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a / n)`` for ``n >= 1``."""
    if n == 1:
        return 1
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def eta_quotient(spec: Sequence[tuple[int, int]], n_max: int, level: int | None = None, label: str = "") -> FormInput:
    """Eta quotient ``prod eta(d z)^{r_d}`` as a :class:`FormInput`.

    The level defaults to the least multiple of every ``d`` satisfying Newman's
    congruence ``sum (N/d) r_d = 0 mod 24``; the character is the Kronecker
    symbol of ``(-1)^k prod d^{r_d}``.
    """
    spec = [(int(d), int(r)) for d, r in spec]
    total = sum(r for _, r in spec)
    if total % 2:
        raise ValueError("odd total exponent gives half-integral weight")
    k = total // 2
    coeffs = eta_series(spec, n_max)
    if level is None:
        base = math.lcm(1, *(d for d, _ in spec))
        level = base
        while sum((level // d) * r for d, r in spec) % 24:
            level += base
    num, den = 1, 1
    for d, r in spec:
        if r > 0:
            num *= d**r
        else:
            den *= d ** (-r)
    disc = (-1) ** k * num * den  # same square class as num / den
    root = math.isqrt(abs(disc))
    if disc > 0 and root * root == disc:
        chi = DirichletCharacter.trivial(level)
    else:
        chi = DirichletCharacter.from_angles(level, lambda n: Fraction(0 if _kronecker(disc, n) == 1 else 1, 2))
    return FormInput(k, level, chi, np.array(coeffs, dtype=complex), label=label or f"eta{spec}")


def eisenstein(k: int, n_max: int) -> list[int]:
    """Exact coefficients of ``E_4`` or ``E_6`` (constant term 1)."""
    if k == 4:
        c, power = 240, 3
    elif k == 6:
        c, power = -504, 5
    else:
        raise ValueError("only E_4 and E_6 are provided")
    s = _sigma(power, n_max)
    return [1] + [c * s[n] for n in range(1, n_max + 1)]


def _mul(a: list[int], b: list[int], n_max: int) -> list[int]:
    out = np.convolve(np.array(a[: n_max + 1], dtype=object), np.array(b[: n_max + 1], dtype=object))
    return [int(x) for x in out[: n_max + 1]]


_LEVEL1_WEIGHTS = (12, 16, 18, 20, 22, 24, 26)


def _level1_basis(m: int, n_max: int) -> list[list[int]]:
    delta = eta_series([(1, 24)], n_max)
    e4, e6 = eisenstein(4, n_max), eisenstein(6, n_max)
    one = [1] + [0] * n_max
    basis = []
    j = 1
    while 12 * j <= m:
        w = m - 12 * j
        if w == 2:
            j += 1
            continue
        b = next(b for b in range(0, w // 6 + 1) if (w - 6 * b) % 4 == 0)
        a = (w - 6 * b) // 4
        f = one
        for _ in range(j):
            f = _mul(f, delta, n_max)
        for _ in range(a):
            f = _mul(f, e4, n_max)
        for _ in range(b):
            f = _mul(f, e6, n_max)
        basis.append(f)
        j += 1
    # echelon form: basis[i] = q^{i+1} + O(q^{d+1})
    d = len(basis)
    for i in range(d - 1, -1, -1):
        for j2 in range(i + 1, d):
            c = basis[i][j2 + 1]
            basis[i] = [x - c * y for x, y in zip(basis[i], basis[j2])]
    return basis


def level1_newforms(m: int, n_max: int) -> list[FormInput]:
    """Normalized Hecke eigenforms of weight ``m`` and level one.

    For a two-dimensional space the eigenforms are ``b_1 + lambda b_2`` in the
    echelon basis with ``lambda`` a root of the ``T_2`` characteristic
    polynomial; coefficients are formed exactly as ``x + y sqrt(D)`` and
    rounded once.
    """
    if m not in _LEVEL1_WEIGHTS:
        raise ValueError(f"weight {m} not in supported set {_LEVEL1_WEIGHTS}")
    need = max(n_max, 4)
    basis = _level1_basis(m, need)
    d = len(basis)
    triv = DirichletCharacter.trivial(1)
    flags = dict(is_newform=True, prime_to_N_eigenform=True, twist_minimal=True)
    if d == 1:
        return [FormInput(m, 1, triv, np.array(basis[0][: n_max + 1], dtype=complex), label=f"level1_wt{m}", **flags)]
    if d != 2:  # pragma: no cover
        raise NotImplementedError
    b1, b2 = basis

    def t2(g, n):
        return g[2 * n] + (2 ** (m - 1) * g[n // 2] if n % 2 == 0 else 0)

    # T2 b_i = T[0][i] b1 + T[1][i] b2
    T = [[t2(b1, 1), t2(b2, 1)], [t2(b1, 2), t2(b2, 2)]]
    tr = T[0][0] + T[1][1]
    det = T[0][0] * T[1][1] - T[0][1] * T[1][0]
    disc = tr * tr - 4 * det
    getcontext().prec = 60
    sq = Decimal(disc).sqrt()
    forms = []
    for sign, tag in ((-1, "a"), (1, "b")):
        # eigenvector (1, t) in (b1, b2) coordinates: T[1][0] + T[1][1] t = lambda t
        lam2 = Decimal(tr) + sign * sq  # 2 * lambda
        t2x = lam2 - 2 * Decimal(T[1][1])  # 2 * (lambda - T11)
        t = 2 * Decimal(T[1][0]) / t2x if T[1][0] else (lam2 / 2)
        coeffs = [float(Decimal(x) + t * Decimal(y)) for x, y in zip(b1[: n_max + 1], b2[: n_max + 1])]
        forms.append(FormInput(m, 1, triv, np.array(coeffs, dtype=complex), label=f"level1_wt{m}{tag}", **flags))
    return forms


def evaluate(f: FormInput, z, eps: float | np.ndarray = 1e-15):
    """``sum_{n >= 1} a_n e^{2 pi i n z}`` truncated so the certified tail is below ``eps``.

    Raises
    ------
    InsufficientCoefficients
        If more coefficients than stored are needed.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("evaluate needs Im z > 0")
    q = np.exp(2j * np.pi * z)
    r = np.abs(q)
    T = f.tail.terms_needed(r.ravel(), np.broadcast_to(eps, z.shape).ravel())
    Tmax = int(T.max()) if T.size else 1
    if Tmax > f.n_max:
        raise InsufficientCoefficients(Tmax, f.n_max)
    val = np.polynomial.polynomial.polyval(q, f.coefficients[: Tmax + 1])
    return complex(val) if val.ndim == 0 else val


def evaluate_slash(f: FormInput, M: IntMatrix2, z, eps: float = 1e-15, k: int | None = None):
    """``det(M)^{k/2} (c z + d)^{-k} f(M z)``."""
    k = f.weight if k is None else k
    det = M.det
    if det <= 0:
        raise ValueError("slash needs det > 0")
    z = np.asarray(z, dtype=complex)
    j = M.c * z + M.d
    w = (M.a * z + M.b) / j
    scale = det ** (k / 2) * j ** (-k)
    inner_eps = eps / np.abs(scale)
    val = scale * evaluate(f, w, inner_eps)
    return complex(val) if np.ndim(val) == 0 else val


# -- twists ------------------------------------------------------------------


def naive_twist(f: FormInput, mu: DirichletCharacter) -> np.ndarray:
    """Coefficients ``mu(n) a_n``."""
    n = np.arange(f.n_max + 1)
    vals = np.array([mu(int(i)) for i in n], dtype=complex)
    return vals * f.coefficients


def _twist_prime(g: FormInput, nu: DirichletCharacter, p: int) -> FormInput:
    """Twist by a primitive character of conductor ``p^u`` (four-case level rule)."""
    u = valuation(nu.modulus, p) if nu.modulus > 1 else 0
    if u == 0:
        return g
    Ng = g.level
    chig = g.character
    r_g = valuation(Ng, p)
    comp = chig.primitive().component(p)
    r_chi = comp.e if comp is not None else 0
    new_char_mod = None
    b = g.coefficients
    n = np.arange(g.n_max + 1)
    nu_vals = np.array([nu(int(i)) for i in n], dtype=complex)
    prod = (chig * nu).primitive()
    pc = prod.component(p)
    r_prime = pc.e if pc is not None else 0
    pu = p**u
    if not (r_g == r_chi and r_g > 0):
        level = math.lcm(Ng, pu * pu)
        coeffs = nu_vals * b
    elif u != r_chi:
        level = math.lcm(Ng, p ** (u + r_chi), pu * pu)
        coeffs = nu_vals * b
    elif r_prime > 0:
        level = math.lcm(Ng, p ** (u + r_prime))
        coeffs = nu_vals * b
    else:
        level = Ng
        # (chi_g nu)(p): the prime-to-p part evaluated at p
        rest = prod.modulus // p ** valuation(prod.modulus, p) if prod.modulus % p == 0 else prod.modulus
        eps_p = prod.restrict(rest)(p) if rest > 1 else 1.0
        lam_bar = np.conj(b[p]) if p <= g.n_max else 0.0
        coeffs = np.zeros_like(b)
        for i in range(1, g.n_max + 1):
            e = 0
            m = i
            while m % p == 0:
                m //= p
                e += 1
            coeffs[i] = (eps_p * lam_bar) ** e * nu(m) * b[m]
    char = chig.extend(math.lcm(chig.modulus, nu.modulus)) * nu * nu
    char = char.primitive().induce(level) if level % char.conductor() == 0 else char
    return FormInput(
        g.weight,
        level,
        char,
        coeffs,
        is_newform=g.is_newform,
        prime_to_N_eigenform=g.prime_to_N_eigenform,
        label=f"{g.label}x{nu.modulus}",
    )


def true_twist(g: FormInput, nu: DirichletCharacter) -> FormInput:
    """Newform attached to ``g (x) nu`` for a twist-minimal newform ``g``.

    ``nu`` is reduced to its primitive character and the twist is done one
    prime component at a time; at each prime the level and the coefficients
    at powers of ``p`` follow the four-case rule for twist-minimal forms.
    """
    if not g.twist_minimal:
        raise ValueError("true_twist needs a form flagged twist-minimal")
    return twist(g, nu)


def twist(g: FormInput, nu: DirichletCharacter) -> FormInput:
    prim = nu.primitive()
    out = g
    for comp in prim.components:
        if comp.is_trivial() or comp.conductor_exponent() == 0:
            continue
        local = prim.restrict(comp.modulus)
        out = _twist_prime(out, local, comp.p)
    if out is g:
        return g
    return out.replace(minimal_twist=(g, prim) if g.twist_minimal else None)


# -- dilations and stabilizations ---------------------------------------------


def dilate(f: FormInput, m: int) -> FormInput:
    """``f(m z)`` as a form of level ``N m``."""
    if m == 1:
        return f
    n_max = f.n_max * m
    coeffs = np.zeros(n_max + 1, dtype=complex)
    coeffs[::m] = f.coefficients
    return FormInput(
        f.weight,
        f.level * m,
        f.character.extend(f.level * m),
        coeffs,
        dilation=m,
        components=((1.0, f, m),),
        label=f"{f.label}({m}z)",
    )


def linear_combination(terms: Sequence[tuple[complex, FormInput, int]], label: str = "") -> FormInput:
    """``sum coef * base(m z)`` on the least common level, truncated to common length."""
    k = terms[0][1].weight
    level = math.lcm(*(b.level * m for _, b, m in terms))
    n_max = min(b.n_max * m for _, b, m in terms)
    coeffs = np.zeros(n_max + 1, dtype=complex)
    flat = []
    for coef, base, m in terms:
        if base.weight != k:
            raise ValueError("weights differ")
        for c2, b2, m2 in base.constituents():
            flat.append((coef * c2, b2, m * m2))
        coeffs[::m] += coef * base.coefficients[: n_max // m + 1]
    chi = terms[0][1].character
    chi = chi.extend(level) if chi.modulus != level else chi
    return FormInput(k, level, chi, coeffs, components=tuple(flat), label=label)


def root_pair(a_p: complex, chi_p: complex, p: int, k: int) -> tuple[complex, complex]:
    """Roots ``(alpha, beta)`` of ``X^2 - a_p X + chi(p) p^{k-1}``.

    ``alpha`` takes the principal square root of the discriminant; the second
    root is recovered from the product to avoid cancellation.
    """
    prod = chi_p * p ** (k - 1)
    s = cmath.sqrt(a_p * a_p - 4 * prod)
    alpha = (a_p + s) / 2
    beta = (a_p - s) / 2
    if abs(alpha) >= abs(beta) and alpha != 0:
        beta = prod / alpha
    elif beta != 0:
        alpha = prod / beta
    return complex(alpha), complex(beta)


def p_stabilize(h: FormInput, p: int, root: complex, variant: str) -> FormInput:
    """Level-``Np`` combinations ``h(z) - root h(pz)`` (sharp, flat) or ``h(z) - p root h(pz)`` (natural)."""
    if h.level % p == 0:
        raise ValueError("p must not divide the level")
    k = h.weight
    a_p = h.coefficients[p]
    chi_p = h.character(p)
    scale = p ** (k - 1)
    if abs(root * root - a_p * root + chi_p * scale) > 1e-6 * scale:
        raise ValueError("root is not a root of the Hecke polynomial at p")
    if variant in ("sharp", "flat"):
        coef = root
    elif variant == "natural":
        coef = p * root
    else:
        raise ValueError(f"unknown variant {variant!r}")
    form = linear_combination([(1.0, h, 1), (-coef, h, p)], label=f"{h.label}_{variant}{p}")
    return form
