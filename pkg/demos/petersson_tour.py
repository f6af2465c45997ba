"""Petersson norms of five newforms next to their adjoint L-value constants.

Run with ``python3 demos/petersson_tour.py``.  Prints <f, f>, the
constant c_f, and the product c_f <f, f>, which is L(1, ad f).
"""

import time
from fractions import Fraction

from cuspidal.arith import DirichletCharacter
from cuspidal.io import load_fixture
from cuspidal.modform import eta_quotient, twist
from cuspidal.petersson import LocalFactorSpec, adjoint_constant, petersson_pair

NEW = dict(is_newform=True, prime_to_N_eigenform=True, twist_minimal=True)


def main():
    f2 = eta_quotient([(1, 6), (3, 6)], 3000, label="f2").replace(**NEW)
    chi3 = DirichletCharacter.from_generator_values(3, {3: [Fraction(1, 2)]})
    cases = [
        ("Delta", eta_quotient([(1, 24)], 3000, label="Delta").replace(**NEW), []),
        ("f2 (level 3)", f2, [LocalFactorSpec(3, "special-c1")]),
        ("f2 x chi_3 (level 9)", twist(f2, chi3), [LocalFactorSpec(3, "special-nonminimal")]),
        ("f3 (level 8)", eta_quotient([(2, 4), (4, 4)], 3000, label="f3").replace(**NEW),
         [LocalFactorSpec(2, "supercuspidal-not-eta-invariant")]),
        ("f4 (level 9)", load_fixture("level9_wt8"), [LocalFactorSpec(3, "supercuspidal-eta-invariant")]),
    ]
    print(f"{'form':24s} {'<f,f>':>22s} {'c_f':>16s} {'L(1, ad f)':>14s} {'secs':>6s}")
    for name, f, specs in cases:
        t0 = time.perf_counter()
        val = petersson_pair(f, f, E=13).value.real
        c = adjoint_constant(f.weight, specs)
        print(f"{name:24s} {val:22.13e} {c:16.7f} {val * c:14.10f} {time.perf_counter() - t0:6.1f}")


if __name__ == "__main__":
    main()
