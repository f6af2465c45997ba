"""JSON reading and writing for forms, characters and reports (schema ``cuspidal/1``)."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .arith import DirichletCharacter
from .modform import (
    FormInput,
    dilate,
    eta_quotient,
    hecke_extend,
    level1_newforms,
    p_stabilize,
    primes_up_to,
    root_pair,
    twist,
)

__all__ = ["SCHEMA", "SchemaError", "form_from_json", "form_to_json", "load_form", "load_fixture", "dump_json", "fmt"]

SCHEMA = "cuspidal/1"
DEFAULT_NMAX = 4000


class SchemaError(ValueError):
    pass


def fmt(x):
    """Round-trippable JSON value with 17 significant digits; complex as ``[re, im]``."""
    if isinstance(x, (complex, np.complexfloating)):
        return [float(f"{x.real:.17g}"), float(f"{x.imag:.17g}")]
    if isinstance(x, (float, np.floating)):
        return float(f"{x:.17g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [fmt(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


def dump_json(doc: dict, path: str | Path | None = None) -> str:
    text = json.dumps(fmt(doc), indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _complex_list(values) -> list:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            re, im = v
            if im == 0 and float(re).is_integer():
                out.append(int(re))
            else:
                out.append(complex(re, im))
        else:
            out.append(int(v) if float(v).is_integer() else float(v))
    return out


def form_from_json(doc: dict, n_max: int | None = None, base_dir: Path | None = None) -> FormInput:
    """Build a form from a document holding coefficients or a generator spec.

    Accepted sources: ``coefficients``, ``prime_coefficients``, ``eta``,
    ``level1``; optional wrappers ``dilate`` and ``twist`` act on a nested
    ``base`` document.
    """
    if not isinstance(doc, dict):
        raise SchemaError("form document must be an object")
    n_max = n_max or int(doc.get("n_max", DEFAULT_NMAX))
    flags = doc.get("flags", {})
    flag_kw = dict(
        is_newform=bool(flags.get("is_newform", False)),
        prime_to_N_eigenform=bool(flags.get("prime_to_N_eigenform", False)),
        twist_minimal=bool(flags.get("twist_minimal", False)),
    )
    label = doc.get("label", doc.get("description", ""))
    try:
        if "base" in doc:
            base = form_from_json(_resolve(doc["base"], base_dir), n_max, base_dir)
            if "dilate" in doc:
                return dilate(base, int(doc["dilate"]))
            if "twist" in doc:
                return twist(base, DirichletCharacter.from_json(doc["twist"]))
            if "stabilize" in doc:
                return _stabilize(base, doc["stabilize"])
            raise SchemaError("'base' needs 'dilate', 'twist' or 'stabilize'")
        if "eta" in doc:
            f = eta_quotient([tuple(x) for x in doc["eta"]], n_max, level=doc.get("level"), label=label)
            return f.replace(**flag_kw)
        if "level1" in doc:
            spec = doc["level1"]
            forms = level1_newforms(int(spec["weight"]), n_max)
            return forms[int(spec.get("index", 0))]
        k, N = int(doc["weight"]), int(doc["level"])
        chi = DirichletCharacter.from_json(doc.get("character", {"modulus": N, "components": []}))
        if "coefficients" in doc:
            a = np.array([complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in doc["coefficients"]])
            coeffs = np.concatenate([[0j], a])
        elif "prime_coefficients" in doc:
            pc = doc["prime_coefficients"]
            primes = primes_up_to(int(pc["bound"]))
            vals = _complex_list(pc["values"])
            if len(vals) != len(primes):
                raise SchemaError("prime coefficient list does not match the bound")
            top = min(n_max, int(pc["bound"]))
            coeffs = hecke_extend(dict(zip(primes, vals)), k, chi, top)
        else:
            raise SchemaError("form document has no coefficient source")
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed form document: {exc}") from exc
    return FormInput(k, N, chi, coeffs, label=label, **flag_kw)


_DEFAULT_ROOT = {"sharp": "beta", "flat": "alpha", "natural": "beta"}


def _stabilize(base: FormInput, spec: dict) -> FormInput:
    """``{"p": 11, "variant": "sharp"}``; ``alpha`` is the root with non-negative imaginary part.

    Defaults: sharp and natural use ``beta``, flat uses ``alpha``.
    """
    p = int(spec["p"])
    variant = spec["variant"]
    if variant not in _DEFAULT_ROOT:
        raise SchemaError(f"unknown stabilization {variant!r}")
    alpha, beta = root_pair(base.coefficients[p], base.character(p), p, base.weight)
    if alpha.imag < beta.imag or (alpha.imag == beta.imag and abs(alpha) < abs(beta)):
        alpha, beta = beta, alpha
    which = spec.get("root", _DEFAULT_ROOT[variant])
    if isinstance(which, list):
        root = complex(*which)
    elif which in ("alpha", "beta"):
        root = alpha if which == "alpha" else beta
    else:
        raise SchemaError(f"root must be 'alpha', 'beta' or [re, im], got {which!r}")
    return p_stabilize(base, p, root, variant)


def _resolve(ref, base_dir: Path | None):
    if isinstance(ref, str):
        if ref.startswith("fixture:"):
            name = ref.split(":", 1)[1]
            return json.loads(resources.files("cuspidal").joinpath("data", f"{name}.json").read_text())
        path = Path(ref)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return json.loads(path.read_text())
    return ref


def load_form(path: str | Path, n_max: int | None = None) -> FormInput:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return form_from_json(doc, n_max, path.parent)


def load_fixture(name: str, n_max: int | None = None) -> FormInput:
    """Load one of the bundled coefficient fixtures, e.g. ``"level27_wt4"``."""
    text = resources.files("cuspidal").joinpath("data", f"{name}.json").read_text()
    f = form_from_json(json.loads(text), n_max)
    return f.replace(label=name)


def form_to_json(f: FormInput) -> dict:
    return {
        "schema": SCHEMA,
        "label": f.label,
        "weight": f.weight,
        "level": f.level,
        "character": f.character.to_json(),
        "coefficients": [[float(c.real), float(c.imag)] for c in f.coefficients[1:]],
        "flags": {
            "is_newform": f.is_newform,
            "prime_to_N_eigenform": f.prime_to_N_eigenform,
            "twist_minimal": f.twist_minimal,
        },
    }
