"""Regenerate the newform fixtures in ``src/cuspidal/data`` with PARI/GP.

Only needed by maintainers; the package itself never imports PARI.  Run with
an environment providing ``cypari2`` (for example ``pip install
passagemath-pari``)::

    python tools/make_fixtures.py
"""

import json
from pathlib import Path

import cypari2

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)
pari.set_real_precision(40)

DATA = Path(__file__).resolve().parents[1] / "src" / "cuspidal" / "data"
PRIME_BOUND = 30000

# name, level, weight, target (a_2 as a float, selects the newform/embedding),
# human-readable description, twist-minimal flag
FORMS = [
    ("level27_wt4", 27, 4, -3.0, "q - 3q^2 + q^4 - 15q^5 - 25q^7 + ...", True),
    ("level25_wt4", 25, 4, -1.0, "q - q^2 - 7q^3 - 7q^4 + 7q^6 + ...", True),
    ("level9_wt8", 9, 8, 6 * 10**0.5, "q + 6 sqrt(10) q^2 + 232 q^4 - 96 sqrt(10) q^5 + ...", True),
    ("level81_wt6", 81, 6, -(3 + 129**0.5) / 2, "q - (3 + sqrt(129))/2 q^2 + ...", True),
]


def embeddings(coeff, field):
    """All complex values of ``coeff`` (a polmod or rational) under the embeddings of ``field``."""
    if field.poldegree() <= 1:
        return [complex(pari.real(coeff)), ]
    roots = pari.polroots(field)
    lifted = pari.lift(coeff)
    return [complex(pari.substpol(lifted, pari("y"), r)) for r in roots]


def newform_primes(level, weight, target):
    mf = pari.mfinit([level, weight], 0)
    fields = pari.mffields(mf)
    for form, field in zip(pari.mfeigenbasis(mf), fields):
        a2_values = embeddings(pari.mfcoef(form, 2), field)
        for idx, a2 in enumerate(a2_values):
            if abs(a2 - target) > 1e-9:
                continue
            coeffs = pari.mfcoefs(form, PRIME_BOUND)
            primes = [int(p) for p in pari.primes([2, PRIME_BOUND])]
            values = [embeddings(coeffs[p], field)[idx] for p in primes]
            return primes, values, str(field)
    raise LookupError(f"no newform with a_2 = {target} in S_{weight}({level})")


def main():
    manifest = {"schema": "cuspidal/1", "source": f"PARI/GP {pari.version()} mfeigenbasis", "forms": {}}
    for name, level, weight, target, desc, minimal in FORMS:
        primes, values, field = newform_primes(level, weight, target)
        doc = {
            "schema": "cuspidal/1",
            "weight": weight,
            "level": level,
            "character": {"modulus": level, "components": []},
            "prime_coefficients": {"bound": PRIME_BOUND, "values": [[v.real, v.imag] for v in values]},
            "flags": {"is_newform": True, "prime_to_N_eigenform": True, "twist_minimal": minimal},
            "description": desc,
        }
        (DATA / f"{name}.json").write_text(json.dumps(doc))
        manifest["forms"][name] = {"level": level, "weight": weight, "coefficient_field": field,
                                   "prime_bound": PRIME_BOUND, "description": desc}
        print(name, len(primes), values[:3])
    (DATA / "MANIFEST.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
