"""Cusps of Gamma0(N), their widths, and matrices sending infinity to them.

A cusp is stored as ``a/c`` with ``c | N``; the class of infinity is the
representative with ``c = N``.  Expansions at a cusp are expansions of
``f|alpha_h`` where ``alpha_h = alpha_1 * diag(h, 1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .arith import DirichletCharacter, IntMatrix2, divisors, ext_gcd, factorize, iter_units

__all__ = [
    "Cusp",
    "CuspDatum",
    "enumerate_cusps",
    "cusp_count",
    "width_gamma0",
    "form_width",
    "choose_matrix",
    "cusp_datum",
    "split_level",
    "transport_equivalent",
    "find_equivalence",
    "canonical_cusp",
    "DegeneracyData",
    "transport_degeneracy",
]


@dataclass(frozen=True)
class Cusp:
    a: int
    c: int

    def __post_init__(self):
        if self.c < 0 or math.gcd(self.a, self.c) != 1:
            raise ValueError(f"invalid cusp {self.a}/{self.c}")

    def __str__(self) -> str:
        return f"{self.a}/{self.c}"

    @classmethod
    def parse(cls, text: str) -> "Cusp":
        a, c = text.split("/")
        return cls(int(a), int(c))


def split_level(N: int, c: int) -> tuple[int, int]:
    """``(c0, d0)``: the parts of ``N`` supported on primes dividing / not dividing ``c``."""
    c0 = 1
    for p, e in factorize(N):
        if c % p == 0:
            c0 *= p**e
    return c0, N // c0


def _phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def enumerate_cusps(N: int) -> list[Cusp]:
    """One representative ``a/c`` per cusp class, ordered by ``c`` then ``a``.

    For each ``c | N`` the numerators run over units mod ``g = gcd(c, N/c)``;
    each residue is lifted to the least ``a >= 0`` coprime to ``c`` (``a = 1``
    for the infinity class ``c = N``).
    """
    if N < 1:
        raise ValueError("N must be positive")
    out = []
    for c in divisors(N):
        g = math.gcd(c, N // c)
        for r in iter_units(g):
            a = r % g if c != N else 1
            while math.gcd(a, c) != 1:
                a += g
            out.append(Cusp(a, c))
    return out


def cusp_count(N: int) -> int:
    return sum(_phi(math.gcd(c, N // c)) for c in divisors(N))


def width_gamma0(N: int, c: int) -> int:
    if c <= 0 or N % c:
        raise ValueError(f"c={c} does not divide N={N}")
    return N // math.gcd(c * c, N)


def form_width(N: int, chi: DirichletCharacter | None, c: int) -> int:
    """Least ``h | N/c`` with ``N | c^2 h`` and ``chi`` trivial on ``1 + chZ``."""
    if c <= 0 or N % c:
        raise ValueError(f"c={c} does not divide N={N}")
    for h in divisors(N // c):
        if (c * c * h) % N:
            continue
        if chi is None or chi.is_trivial():
            return h
        chi_n = chi.extend(N) if chi.modulus != N else chi
        step = c * h
        if all(chi_n.angle(1 + step * t) == 0 for t in range(N // math.gcd(step, N))):
            return h
    return N // c  # pragma: no cover


def choose_matrix(cusp: Cusp, N: int) -> IntMatrix2:
    """SL2 matrix with first column ``(a, c)`` and ``d`` divisible by the prime-to-c part of ``N``.

    Among valid ``d`` the one of least absolute value is chosen, ties going to
    the positive value.
    """
    a, c = cusp.a, cusp.c
    _, d0 = split_level(N, c)
    # CRT: d = a^{-1} mod c and d = 0 mod d0
    L = c * d0
    t = pow(a, -1, c) * pow(d0, -1, c) % c
    d = (d0 * t) % L
    if d > L - d:
        d -= L
    b = (a * d - 1) // c
    M = IntMatrix2(a, b, c, d)
    assert M.det == 1
    return M


@dataclass(frozen=True)
class CuspDatum:
    cusp: Cusp
    N: int
    h0: int
    h: int
    alpha1: IntMatrix2
    hc: int
    hd: int
    canonical: bool = True

    @property
    def alphah(self) -> IntMatrix2:
        return self.alpha1 @ IntMatrix2(self.h, 0, 0, 1)

    @property
    def c0(self) -> int:
        return split_level(self.N, self.cusp.c)[0]

    @property
    def d0(self) -> int:
        return split_level(self.N, self.cusp.c)[1]

    @property
    def is_infinity(self) -> bool:
        return self.cusp.c % self.N == 0

    def pruning_applies(self) -> bool:
        return self.alpha1.d % self.d0 == 0


def cusp_datum(
    N: int,
    chi: DirichletCharacter | None,
    cusp: Cusp,
    alpha1: IntMatrix2 | None = None,
    h: int | None = None,
) -> CuspDatum:
    """Assemble widths and matrices for ``cusp``.

    ``alpha1`` may override the canonical choice with any SL2(Z) matrix sending
    infinity into the same Gamma0(N) class.
    """
    c = math.gcd(cusp.c, N)
    canonical = alpha1 is None
    if alpha1 is None:
        alpha1 = choose_matrix(cusp, N)
    if alpha1.det != 1:
        raise ValueError(f"{alpha1} is not in SL2(Z)")
    if (alpha1.a, alpha1.c) != (cusp.a, cusp.c) and find_equivalence(choose_matrix(cusp, N), alpha1, N) is None:
        raise ValueError(f"{alpha1} does not send infinity to the class of {cusp}")
    h0 = width_gamma0(N, c)
    if h is None:
        h = form_width(N, chi, c)
    hc = 1
    for p, _ in factorize(h):
        if c % p == 0:
            while h % (hc * p) == 0:
                hc *= p
    return CuspDatum(cusp, N, h0, h, alpha1, hc, h // hc, canonical)


def _gamma0_element(beta_new: IntMatrix2, beta_old: IntMatrix2, x: int) -> IntMatrix2:
    # gamma with beta_new = gamma * beta_old * [[1, x], [0, 1]]
    shifted = beta_new @ IntMatrix2(1, -x, 0, 1)
    return shifted @ beta_old.inverse_sl2()


def find_equivalence(beta_old: IntMatrix2, beta_new: IntMatrix2, N: int, h: int = 1) -> tuple[int, IntMatrix2] | None:
    """Find ``x`` and ``gamma in Gamma0(N)`` with ``beta_new = gamma beta_old T^x``.

    Scans ``x = 0 .. N*h - 1`` and verifies membership directly.
    """
    for x in range(N * h):
        g = _gamma0_element(beta_new, beta_old, x)
        if g.c % N == 0:
            return x, g
    return None


def transport_equivalent(
    coeffs: np.ndarray,
    beta_old: IntMatrix2,
    beta_new: IntMatrix2,
    chi: DirichletCharacter | None,
    N: int,
    h: int,
) -> tuple[np.ndarray, int, complex]:
    """Move an expansion of ``f|beta_old tau_h`` to ``f|beta_new tau_h``.

    With ``beta_new = gamma beta_old T^x`` one has
    ``f|beta_new tau_h = chi(d_gamma) sum b_n e(n x / h) q^n``.

    Returns
    -------
    coeffs_new, x, factor
        New coefficients ``b_0 .. b_K``, the shift ``x`` and the character factor.
    """
    found = find_equivalence(beta_old, beta_new, N, h)
    if found is None:
        raise ValueError(f"{beta_old} and {beta_new} do not reach the same Gamma0({N}) cusp")
    x, gamma = found
    factor = 1 + 0j if chi is None else chi.extend(N)(gamma.d) if chi.modulus != N else chi(gamma.d)
    n = np.arange(len(coeffs))
    frac = (n * x) % h
    phase = np.exp(2j * np.pi * frac / h)
    return factor * phase * np.asarray(coeffs, dtype=complex), x, factor


def canonical_cusp(beta: IntMatrix2, N: int) -> Cusp:
    """The enumerated representative equivalent to ``beta(infinity)``."""
    for cusp in enumerate_cusps(N):
        if find_equivalence(choose_matrix(cusp, N), beta, N) is not None:
            return cusp
    raise ValueError(f"no cusp of Gamma0({N}) matches {beta}")  # pragma: no cover


@dataclass(frozen=True)
class DegeneracyData:
    """Decomposition ``[[m,0],[0,1]] alpha1 = beta [[m1, y], [0, m2]]`` with ``beta`` in SL2(Z)."""

    beta: IntMatrix2
    y: int
    m1: int
    m2: int
    m: int

    @property
    def upper(self) -> IntMatrix2:
        return IntMatrix2(self.m1, self.y, 0, self.m2)

    def scale(self, k: int, h: int, h_inner: int) -> float:
        """Constant relating the two expansions, ``(h / (m2^2 h_inner))^(k/2)``."""
        return (h / (self.m2 * self.m2 * h_inner)) ** (k / 2)

    def apply(self, inner: np.ndarray, k: int, h: int, h_inner: int, K: int) -> np.ndarray:
        """Coefficients of ``f(mz)|alpha1 tau_h`` from those of ``f|beta tau_{h_inner}``.

        ``f(m z)|alpha_h = scale * sum_n b_n e(n y / (m2 h')) q^(n m1 h / (m2 h'))``.
        """
        num, den = self.m1 * h, self.m2 * h_inner
        out = np.zeros(K + 1, dtype=complex)
        inner = np.asarray(inner, dtype=complex)
        s = self.scale(k, h, h_inner)
        for n in range(len(inner)):
            if n * num % den:
                if inner[n] != 0 and n > 0:
                    raise ValueError(f"non-integral exponent {n}*{num}/{den} with nonzero coefficient")
                continue
            j = n * num // den
            if j > K:
                break
            out[j] += s * inner[n] * cmath.exp(2j * math.pi * ((n * self.y) % den) / den)
        return out

    def inner_terms_needed(self, K: int, h: int, h_inner: int) -> int:
        return (K * self.m2 * h_inner) // (self.m1 * h)


def transport_degeneracy(m: int, alpha1: IntMatrix2) -> DegeneracyData:
    """Split ``[[m,0],[0,1]] alpha1`` as an SL2 matrix times an upper-triangular one.

    The inner matrix sends infinity to ``(a m2)/(c/m1)`` where ``m1 = gcd(c, m)``.
    """
    a, b, c, d = alpha1.as_tuple()
    m1 = math.gcd(c, m)
    m2 = m // m1
    cc = c // m1
    if m2 == 1:
        y = 0
    else:
        g, inv, _ = ext_gcd(cc % m2, m2)
        assert g == 1
        y = (d * inv) % m2
    assert (d - cc * y) % m2 == 0
    beta = IntMatrix2(a * m2, b * m1 - y * a, cc, (d - y * cc) // m2)
    data = DegeneracyData(beta, y, m1, m2, m)
    assert beta.det == 1
    assert beta @ data.upper == IntMatrix2(m, 0, 0, 1) @ alpha1
    return data
