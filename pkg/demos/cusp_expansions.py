"""Expansions at non-infinity cusps for levels 27 and 25.

At level 27 the expansion at 1/3 is a combination of four twists of f; at
level 25 the ratio b_n / a_n at 1/5 depends only on n mod 5.
"""

from cuspidal.arith import IntMatrix2
from cuspidal.cusps import Cusp, cusp_datum
from cuspidal.expand import expand_direct, expand_eigen
from cuspidal.io import load_fixture


def main():
    f27 = load_fixture("level27_wt4")
    d = cusp_datum(27, f27.character, Cusp(1, 3), alpha1=IntMatrix2(1, -1, 3, -2))
    coef, ev = expand_eigen(f27, d, E0=13, K=35)
    print("level 27, cusp 1/3: coefficients on the twist basis")
    for c, el in zip(coef, ev.basis):
        print(f"  mu exponent {str(el.mu.exponent_vector()[0]):>4s}  m={el.m}  level {el.level:3d}  c = {c:.12f}")
    direct = expand_direct(f27, d, E=15, K0=35, C0=1.0)
    print(f"  b_1 direct = {direct.coefficients[1]:.13f}, eigen = {ev.coefficients[1]:.13f}")

    f25 = load_fixture("level25_wt4")
    d = cusp_datum(25, f25.character, Cusp(1, 5), alpha1=IntMatrix2(1, -1, 5, -4))
    _, ev = expand_eigen(f25, d, E0=13, K=20)
    a = f25.coefficients
    print("level 25, cusp 1/5: b_n / a_n")
    for n in range(1, 13):
        if abs(a[n]) > 0.5:
            r = ev.coefficients[n] / a[n]
            print(f"  n={n:2d} (n mod 5 = {n % 5})  {r.real:+.12f} {r.imag:+.12f}i")


if __name__ == "__main__":
    main()
