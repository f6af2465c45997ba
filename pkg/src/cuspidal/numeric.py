"""K-Bessel values, complex least squares and deterministic sample points."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import special

__all__ = [
    "bessel_k",
    "SingularGramError",
    "lstsq_solve",
    "SplitMix64",
    "SampleSpec",
    "sample_points",
]


def bessel_k(n, x):
    """Modified Bessel function of the second kind ``K_n(x)`` for integer ``n >= 0``.

    ``K_0`` and ``K_1`` come from ``scipy.special.k0``/``k1``; higher orders use
    the upward recurrence ``K_{j+1} = K_{j-1} + (2j/x) K_j``, which is stable
    for this family.  Arrays of ``x`` are accepted.

    Parameters
    ----------
    n : int
        Order, ``0 <= n <= 64``.
    x : float or array_like
        Positive argument(s).  Values past the exponent range give 0.
    """
    if not (0 <= n <= 64):
        raise ValueError("order must lie in [0, 64]")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k needs x > 0")
    # scaled functions avoid underflow in the recurrence; rescale at the end
    km, k = special.k0e(x), special.k1e(x)
    if n == 0:
        out = km
    else:
        for j in range(1, n):
            km, k = k, km + (2.0 * j / x) * k
        out = k
    with np.errstate(under="ignore", over="ignore"):
        res = out * np.exp(-x)
    return float(res) if np.ndim(res) == 0 else res


class SingularGramError(np.linalg.LinAlgError):
    def __init__(self, cond: float):
        super().__init__(f"Gram matrix numerically singular (condition estimate {cond:.3e})")
        self.cond = cond


def lstsq_solve(A: np.ndarray, b: np.ndarray, refine: int = 3) -> np.ndarray:
    """Least-squares solution of ``A x = b`` through the normal equations.

    Columns are scaled to unit 2-norm before forming ``A* A``; the Hermitian
    system is solved by Cholesky with a partial-pivot LU fallback, followed by
    up to ``refine`` rounds of iterative refinement on the normal equations
    (reusing the factorization).

    Raises
    ------
    SingularGramError
        If the scaled Gram matrix is numerically singular.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    M, K = A.shape
    if M < K or K < 1:
        raise ValueError(f"need M >= K >= 1, got {M}x{K}")
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ValueError("zero column in least-squares matrix")
    As = A / norms
    G = As.conj().T @ As
    rhs = As.conj().T @ b
    try:
        factor = sla.cho_factor(G, lower=False, check_finite=True)
        solve = lambda v: sla.cho_solve(factor, v)  # noqa: E731
    except np.linalg.LinAlgError:
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > 1e15:
            raise SingularGramError(cond)
        lu = sla.lu_factor(G)
        solve = lambda v: sla.lu_solve(lu, v)  # noqa: E731
    y = solve(rhs)
    # refinement against the true residual recovers the digits lost to cond(A)^2
    for _ in range(refine):
        r = b - As @ y
        dy = solve(As.conj().T @ r)
        y = y + dy
        if np.linalg.norm(dy) <= 1e-16 * np.linalg.norm(y):
            break
    return y / norms


class SplitMix64:
    """SplitMix64 generator; doubles use the top 53 bits times ``2**-53``."""

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int = 0):
        self.state = seed & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])


@dataclass(frozen=True)
class SampleSpec:
    """Geometry of the sample set.

    ``direct`` puts all points on ``Im z = C / 2 pi`` with real parts in a unit
    interval centred at ``-d/(c h)``.  ``eigen`` fills the rectangle
    ``Im z in [1/(2c sqrt h), 1/(c sqrt h)]``,
    ``Re z in [(-d - sqrt(h/2))/(c h), (-d + sqrt(h/2))/(c h)]``.
    """

    mode: str
    count: int
    seed: int
    c: int
    d: int
    h: int
    C: float = 1.0


def _centre(c: int, d: int, h: int) -> float:
    return -d / (c * h) if c else 0.0


def sample_points(spec: SampleSpec) -> np.ndarray:
    rng = SplitMix64(spec.seed)
    centre = _centre(spec.c, spec.d, spec.h)
    if spec.mode == "direct":
        y = spec.C / (2 * math.pi)
        xs = centre - 0.5 + rng.uniforms(spec.count)
        return xs + 1j * y
    if spec.mode == "eigen":
        c = max(spec.c, 1)
        sh = math.sqrt(spec.h)
        half = math.sqrt(spec.h / 2) / (c * spec.h)
        lo, hi = 1 / (2 * c * sh), 1 / (c * sh)
        pts = np.empty(spec.count, dtype=complex)
        for j in range(spec.count):
            u, v = rng.uniform(), rng.uniform()
            pts[j] = complex(centre - half + 2 * half * u, lo + (hi - lo) * v)
        return pts
    raise ValueError(f"unknown sampling mode {spec.mode!r}")
