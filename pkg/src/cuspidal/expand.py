"""Expansions of cusp forms at other cusps by least-squares interpolation.

Two solvers are provided.  :func:`expand_direct` fits ``b_0 .. b_K`` of
``f|alpha_h = sum b_n q^n`` to values sampled on a horizontal segment.
:func:`expand_eigen` fits the coefficients of ``f|alpha_h`` in a basis of
twists ``(g0 (x) mu)(m z)`` of a twist-minimal newform ``g0``; its solve size
does not depend on how many ``b_n`` are wanted afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .arith import DirichletCharacter, characters_mod, divisors, factorize, valuation
from .cusps import CuspDatum
from .modform import FormInput, evaluate, evaluate_slash, twist
from .numeric import SampleSpec, lstsq_solve, sample_points

__all__ = [
    "CuspExpansion",
    "TwistBasisElement",
    "expand_direct",
    "enumerate_twist_basis",
    "expand_eigen",
    "fourier_oracle",
    "OracleError",
]

LN10 = math.log(10.0)
# double precision floor for the relative accuracy requested from evaluate()
_REL_FLOOR = 1e-17


@dataclass
class CuspExpansion:
    """Coefficients ``b_0 .. b_K`` of ``f|alpha_h`` with error model ``10^-E e^(n C)``."""

    datum: CuspDatum
    coefficients: np.ndarray
    E: float
    C: float
    method: str
    K0: int = 0
    diagnostics: dict = field(default_factory=dict)
    basis: list | None = None
    c: np.ndarray | None = None
    negligible: np.ndarray | None = None

    @property
    def K(self) -> int:
        return len(self.coefficients) - 1

    def error_bound(self, n) -> np.ndarray:
        return 10.0 ** (-self.E) * np.exp(np.asarray(n) * self.C)


@dataclass(frozen=True, eq=False)
class TwistBasisElement:
    """One candidate ``(g0 (x) mu)(m z)``; ``form`` holds the undilated twist."""

    base: FormInput
    mu: DirichletCharacter
    m: int
    level: int
    form: FormInput

    def coefficient(self, n: int) -> complex:
        if n % self.m:
            return 0j
        j = n // self.m
        return self.form.coefficients[j] if j <= self.form.n_max else np.nan

    def coefficients(self, K: int) -> np.ndarray:
        out = np.zeros(K + 1, dtype=complex)
        j = min(K // self.m, self.form.n_max)
        out[: j * self.m + 1 : self.m] = self.form.coefficients[: j + 1]
        if K // self.m > self.form.n_max:
            out[(self.form.n_max + 1) * self.m :: self.m] = np.nan
        return out

    def label(self) -> str:
        return f"({self.base.label} x mu[{self.mu.modulus}:{[str(t) for t in self.mu.exponent_vector()]}])({self.m}z)"


def _budget(E: float, K0: int, C0: float) -> tuple[int, float]:
    if K0 * C0 < LN10 * E:
        return math.ceil(LN10 * E / C0), C0
    return K0, LN10 * E / K0


def expand_direct(
    f: FormInput,
    datum: CuspDatum,
    E: float = 13,
    K0: int = 20,
    C0: float = 1.0,
    seed: int = 0,
) -> CuspExpansion:
    """Least-squares fit of ``b_0 .. b_K`` from ``M = 2K`` samples on ``Im z = C/2pi``.

    ``K`` and ``C`` are set so that ``K C ~ E ln 10``.  The fit itself carries
    ``K_fit >= K`` unknowns, enough that the growth-aware tail bound of the
    omitted terms is below ``10^-E``; only ``b_0 .. b_K`` are returned.  The values
    ``f|alpha_h (z_j)`` are computed to ``10^-(E+1)`` absolute accuracy.
    """
    K, C = _budget(E, K0, C0)
    # unknowns past K soak up the part of the tail that K C ~ E ln 10 ignores
    # (the polynomial growth of b_n); the form's own growth bound is the proxy
    K_fit = max(K, int(f.tail.terms_needed(np.array([math.exp(-C)]), 10.0**-E)[0]))
    M = max(2 * K, (3 * (K_fit + 1) + 1) // 2)
    ah = datum.alphah
    pts = sample_points(SampleSpec("direct", M, seed, datum.alpha1.c, datum.alpha1.d, datum.h, C))
    eps = max(10.0 ** -(E + 1), _REL_FLOOR * math.exp(-C))
    values = evaluate_slash(f, ah, pts, eps)
    q = np.exp(2j * np.pi * pts)
    A = q[:, None] ** np.arange(K_fit + 1)[None, :]
    b = lstsq_solve(A, values)
    resid = A @ b - values
    b = b[: K + 1]
    w = ah.act(pts)
    terms_used = int(f.tail.terms_needed(np.abs(np.exp(2j * np.pi * w)), eps).max())
    diag = {
        "b0_abs": float(abs(b[0])),
        "residual_norm": float(np.linalg.norm(resid)),
        "coefficients_used": terms_used,
        "M": M,
        "K0": K0,
        "K": K,
        "K_fit": K_fit,
        "min_im_image": float(w.imag.min()),
    }
    return CuspExpansion(datum, b, float(E), float(C), "direct", K0=K0, diagnostics=diag)


# -- twist bases ---------------------------------------------------------------


def _minimal_twist(f: FormInput) -> FormInput:
    if f.twist_minimal:
        return f
    if f.minimal_twist is not None:
        return f.minimal_twist[0]
    raise ValueError(f"form {f.label!r} carries no twist-minimality metadata")


def _local_conductor_exp(chi: DirichletCharacter, p: int) -> int:
    comp = chi.component(p)
    return comp.conductor_exponent() if comp is not None else 0


def _passes_pruning(psi: DirichletCharacter, chi: DirichletCharacter, datum: CuspDatum) -> bool:
    """Local character conditions for the twist's nebentypus ``psi`` at the cusp."""
    N, c = datum.N, datum.cusp.c
    mod = math.lcm(psi.modulus, chi.modulus)
    psi_e, chi_e = psi.extend(mod), chi.extend(mod)
    prod = psi_e * chi_e  # psi_p = chi_p^{-1}  <=>  (psi chi)_p unramified
    quot = psi_e * chi_e.conj()
    c0 = datum.c0
    for p, _ in factorize(mod):
        if N % p:
            if _local_conductor_exp(psi_e, p):
                return False
        elif c % p:
            if _local_conductor_exp(prod, p):
                return False
        else:
            m_prime = valuation(c0 // c, p) if (c0 // c) % p == 0 else 0
            if _local_conductor_exp(quot, p) > m_prime:
                return False
    return True


def enumerate_twist_basis(
    f: FormInput,
    datum: CuspDatum,
    g0: FormInput | None = None,
    prune: bool | None = None,
) -> list[TwistBasisElement]:
    """Candidate forms ``(g0 (x) mu)(m z)`` of level dividing ``N h`` (or ``N h_c``).

    ``mu`` runs over characters modulo ``N``.  When the cusp matrix has its
    ``d`` entry divisible by the prime-to-``c`` part of ``N`` the level bound
    drops to ``N h_c`` and the nebentypus ``psi`` of each candidate must satisfy
    the local conditions: ``psi_p = chi_p^{-1}`` for ``p`` not dividing ``c``,
    and ``psi_p = chi_p`` on ``1 + p^{m'} Z`` for ``p | c`` with
    ``p^{m'} || c0/c``.

    Returns
    -------
    list of TwistBasisElement
        Deduplicated, ordered by conductor of ``mu``, exponent vector, then ``m``.
    """
    g0 = _minimal_twist(f) if g0 is None else g0
    N, h = datum.N, datum.h
    if prune is None:
        prune = datum.pruning_applies()
    bound = N * datum.hc if prune else N * h
    chi = f.character
    out: list[TwistBasisElement] = []
    seen: list[tuple[int, np.ndarray]] = []
    for mu in characters_mod(N):
        tw = twist(g0, mu)
        L = tw.level
        if bound % L:
            continue
        if prune and not _passes_pruning(tw.character, chi, datum):
            continue
        probe = tw.coefficients[: min(60, tw.n_max + 1)]
        for m in divisors(bound // L):
            dup = any(m == m2 and np.allclose(probe, p2, rtol=1e-9, atol=1e-9) for m2, p2 in seen)
            if dup:
                continue
            seen.append((m, probe))
            out.append(TwistBasisElement(g0, mu, m, L, tw))
    return out


def expand_eigen(
    f: FormInput,
    datum: CuspDatum,
    basis: list[TwistBasisElement] | None = None,
    E0: float = 13,
    K: int | None = None,
    C: float | None = None,
    seed: int = 0,
) -> tuple[np.ndarray, CuspExpansion]:
    """Fit ``f|alpha_h = sum_l c_l g_l`` on ``M = 2L`` points of the eigen rectangle.

    The working accuracy is deepened to
    ``E = E0 + (m0 - 1)/ln 10 * (2 pi sqrt(h)/c - C)`` where ``m0`` is the
    largest dilation in the basis; double precision caps what is reachable.
    The synthesized expansion has ``K`` coefficients (default: as many as the
    basis coefficients allow, at most 1000).
    """
    if basis is None:
        basis = enumerate_twist_basis(f, datum)
    if not basis:
        raise ValueError("empty twist basis")
    L = len(basis)
    M = 2 * L
    a1 = datum.alpha1
    c = max(a1.c, 1)
    h = datum.h
    if K is None:
        K = min(1000, min(el.form.n_max * el.m for el in basis))
    if C is None:
        C = E0 * LN10 / max(K, 1)
    m0 = max((el.m for el in basis if el.m <= K), default=1)
    gain = 2 * math.pi * math.sqrt(h) / c - C
    E = E0 + (m0 - 1) / LN10 * gain if gain > 0 else E0
    pts = sample_points(SampleSpec("eigen", M, seed, a1.c, a1.d, h))
    q = np.exp(2j * np.pi * pts)
    eps = np.maximum(10.0 ** (-E), _REL_FLOOR) * np.abs(q)
    A = np.empty((M, L), dtype=complex)
    for l, el in enumerate(basis):
        A[:, l] = evaluate(el.form, el.m * pts, eps) / q
    rhs = evaluate_slash(f, datum.alphah, pts, eps) / q
    coef = lstsq_solve(A, rhs)
    resid = A @ coef - rhs
    negligible = np.abs(coef) < 10 * 10.0 ** (-E0)
    synth = np.zeros(K + 1, dtype=complex)
    for cl, el in zip(coef, basis):
        synth += cl * el.coefficients(K)
    diag = {
        "residual_norm": float(np.linalg.norm(resid)),
        "E_target": float(E),
        "m0": m0,
        "M": M,
        "L": L,
    }
    exp = CuspExpansion(
        datum, synth, float(E0), float(C), "eigen", K0=K, diagnostics=diag, basis=basis, c=coef, negligible=negligible
    )
    return coef, exp


class OracleError(RuntimeError):
    pass


def fourier_oracle(
    f: FormInput,
    datum: CuspDatum,
    m: int,
    y: float,
    Q: int = 24,
    panels: int | None = None,
    eps: float = 1e-14,
    tol: float = 1e-6,
) -> tuple[complex, float]:
    """``b_m = e^{2 pi m y} int_0^1 f|alpha_h(x + i y) e^{-2 pi i m x} dx`` by Gauss-Legendre.

    The integral is split into ``panels`` pieces with ``Q`` nodes each and
    compared with a rule on twice as many panels; the reported error adds the
    truncation error ``e^{2 pi m y} eps`` of the point evaluations.

    Raises
    ------
    OracleError
        When the error estimate exceeds ``tol``.
    """
    if y <= 0:
        raise ValueError("y must be positive")
    if 2 * math.pi * m * y > 700:
        raise OracleError(f"b_{m} out of reach at y = {y}: growth factor overflows")
    grow = math.exp(2 * math.pi * m * y)
    if panels is None:
        n_eff = (math.log(1 / eps) + math.log(grow)) / (2 * math.pi * y)
        panels = max(2, math.ceil(4 * n_eff / Q))
    x0 = -datum.alpha1.d / (max(datum.alpha1.c, 1) * datum.h) - 0.5 if datum.alpha1.c else 0.0
    nodes, weights = leggauss(Q)

    def rule(P: int) -> complex:
        edges = x0 + np.arange(P) / P
        xs = (edges[:, None] + (nodes[None, :] + 1) / (2 * P)).ravel()
        ws = np.tile(weights / (2 * P), P)
        vals = evaluate_slash(f, datum.alphah, xs + 1j * y, eps)
        return complex(np.sum(ws * vals * np.exp(-2j * np.pi * m * xs)))

    coarse, fine = rule(panels), rule(2 * panels)
    value = grow * fine
    err = grow * (abs(fine - coarse) + eps)
    if not np.isfinite(err) or err > tol:
        raise OracleError(f"b_{m} not resolved: error estimate {err:.3e} > {tol:.1e}")
    return value, err
