"""Ratios of Petersson products between 11-stabilizations of Delta.

The flat and natural stabilizations are orthogonal, while the sharp one
pairs with the natural one to a nonzero complex ratio.
"""

from cuspidal.modform import dilate, eta_quotient, p_stabilize, root_pair
from cuspidal.petersson import ExpansionEngine, petersson_pair, petersson_ratio

NEW = dict(is_newform=True, prime_to_N_eigenform=True, twist_minimal=True)


def main():
    delta = eta_quotient([(1, 24)], 3000, label="Delta").replace(**NEW)
    alpha, beta = root_pair(delta.coefficients[11].real, 1, 11, 12)
    if alpha.imag < beta.imag:
        alpha, beta = beta, alpha
    print(f"Satake roots at 11: alpha = {alpha:.6f}, beta = {beta:.6f}")

    q, _, _ = petersson_ratio(dilate(delta, 11), delta, delta, delta, E=13)
    print(f"<Delta(11z), Delta> / <Delta, Delta> = {q.real:.12e}  (tau(11)/(11^11 * 12) = {534612 / (11**11 * 12):.12e})")

    eng = ExpansionEngine(E=13)
    norm = petersson_pair(delta, delta, E=13, engine=eng).value
    variants = {v: p_stabilize(delta, 11, alpha if v == "flat" else beta, v) for v in ("sharp", "flat", "natural")}
    for v in ("sharp", "flat"):
        r = petersson_pair(variants[v], variants["natural"], E=13, engine=eng).value / norm
        print(f"<{v}, natural> / <Delta, Delta> = {r:.10f}")


if __name__ == "__main__":
    main()
