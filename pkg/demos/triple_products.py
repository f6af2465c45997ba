"""Triple products |<f g, h>|^2 compared against Ichino-type constants.

The last case uses a newform of level 9 whose local factor at 3 involves
the Satake parameter of a level-one form of weight 16.
"""

import time

from cuspidal.io import load_fixture
from cuspidal.modform import dilate, eta_quotient, level1_newforms
from cuspidal.petersson import LocalFactorSpec, ichino_constant, petersson_triple

NEW = dict(is_newform=True, prime_to_N_eigenform=True, twist_minimal=True)


def show(label, f, g, h, const):
    t0 = time.perf_counter()
    v = abs(petersson_triple(f, g, h, E=13).value) ** 2
    print(f"{label:26s} |<fg,h>|^2 = {v:.13e}   / constant = {v / const:.10f}   ({time.perf_counter() - t0:.1f}s)")


def main():
    delta = eta_quotient([(1, 24)], 3000, label="Delta").replace(**NEW)
    f2 = eta_quotient([(1, 6), (3, 6)], 3000, label="f2").replace(**NEW)
    h24 = level1_newforms(24, 3000)[0]
    h18 = level1_newforms(18, 3000)[0]
    h16 = level1_newforms(16, 3000)[0]
    f4 = load_fixture("level9_wt8")
    print("the last column is the central L-value L(1/2, f x g x h)")
    show("Delta Delta h24", delta, delta, h24, ichino_constant(12, 24))
    show("f2 Delta(3z) h18", f2, dilate(delta, 3), h18,
         ichino_constant(6, 18, 1, 3, 1, [LocalFactorSpec(3, "one-special-two-unramified")]))
    spec = LocalFactorSpec(3, "nps-type1", c=2, a_p=h16.coefficients[3].real, weight=16)
    show("f4 f4 h16", f4, f4, h16, ichino_constant(8, 16, specs=[spec]))


if __name__ == "__main__":
    main()
