"""Command-line entry point: ``cuspidal {expand,petersson,triple,ratio,check,generate}``.

Reports are JSON (schema ``cuspidal/1``) on stdout or ``--out``; a short
human-readable summary goes to stderr.  Exit codes: 0 success, 2 bad input,
3 numerical failure (a diagnostic JSON document is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .arith import DirichletCharacter
from .cusps import Cusp, cusp_datum, enumerate_cusps
from .expand import OracleError, expand_direct, expand_eigen
from .io import SCHEMA, SchemaError, dump_json, form_from_json, form_to_json, load_fixture, load_form
from .modform import (
    FormInput,
    InsufficientCoefficients,
    dilate,
    eta_quotient,
    level1_newforms,
    twist,
)
from .numeric import SingularGramError
from .petersson import (
    LocalFactorSpec,
    adjoint_constant,
    ichino_constant,
    petersson_pair,
    petersson_ratio,
    petersson_triple,
    ratio_check,
)

MAX_DIGITS = 13


class InputError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    forms: dict = field(default_factory=dict)
    cusp: str = "all"
    E: float = 13
    K0: int = 20
    C0: float = 1.0
    seed: int = 0
    method: str = "auto"
    threads: int = 1
    out: str | None = None
    lvalue: float | None = None
    local_spec: str | None = None

    def validate(self):
        if self.E > MAX_DIGITS:
            raise InputError(f"--digits is capped at {MAX_DIGITS} (double precision)")
        if self.E <= 0:
            raise InputError("--digits must be positive")
        if self.threads < 1:
            raise InputError("--threads must be >= 1")
        if self.K0 < 1 or self.C0 <= 0:
            raise InputError("--coeffs and --decay must be positive")


def read_form(ref: str) -> FormInput:
    """``path.json`` or ``fixture:NAME`` for the bundled coefficient files."""
    if ref.startswith("fixture:"):
        return load_fixture(ref.split(":", 1)[1])
    path = Path(ref)
    if not path.exists():
        raise InputError(f"no such form file: {ref}")
    return load_form(path)


def _cusps_for(N: int, selector: str) -> list[Cusp]:
    if selector == "all":
        return enumerate_cusps(N)
    try:
        want = Cusp.parse(selector)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad cusp {selector!r}") from exc
    if N % want.c:
        raise InputError(f"cusp denominator {want.c} does not divide the level {N}")
    return [want]


def _method(f: FormInput, method: str) -> str:
    if method != "auto":
        return method
    return "eigen" if f.twist_minimal else "direct"


def cmd_expand(cfg: JobConfig) -> tuple[dict, str]:
    f = cfg.forms["form"]
    rows = []
    for cusp in _cusps_for(f.level, cfg.cusp):
        datum = cusp_datum(f.level, f.character, cusp)
        row = {
            "cusp": str(cusp),
            "h0": datum.h0,
            "h": datum.h,
            "alpha1": list(datum.alpha1.as_tuple()),
        }
        if datum.is_infinity:
            K = min(cfg.K0, f.n_max)
            row.update(method="input", K=K, coefficients=np.asarray(f.coefficients[: K + 1]))
        elif _method(f, cfg.method) == "eigen":
            coef, exp = expand_eigen(f, datum, E0=cfg.E, K=cfg.K0, seed=cfg.seed)
            row.update(
                method="eigen",
                K=exp.K,
                C=exp.C,
                coefficients=exp.coefficients,
                c=coef,
                basis=[el.label() for el in exp.basis],
                negligible=[bool(x) for x in exp.negligible],
                diagnostics=exp.diagnostics,
            )
        else:
            exp = expand_direct(f, datum, E=cfg.E, K0=cfg.K0, C0=cfg.C0, seed=cfg.seed)
            row.update(
                method="direct",
                K=exp.K,
                C=exp.C,
                coefficients=exp.coefficients,
                error_bound=exp.error_bound(np.arange(exp.K + 1)),
                diagnostics=exp.diagnostics,
            )
        rows.append(row)
    summary = "; ".join(f"{r['cusp']}: {r['method']} K={r['K']}" for r in rows)
    return {"form": _form_meta(f), "expansions": rows}, summary


def _form_meta(f: FormInput) -> dict:
    return {"label": f.label, "weight": f.weight, "level": f.level, "character": f.character.to_json()}


def cmd_petersson(cfg: JobConfig) -> tuple[dict, str]:
    f = cfg.forms["f"]
    g = cfg.forms.get("g", f)
    rep = petersson_pair(f, g, cfg.E, cfg.method, cfg.seed, threads=cfg.threads)
    return {"f": _form_meta(f), "g": _form_meta(g), **rep.to_json()}, f"<f,g> = {rep.value:.12g}"


def cmd_triple(cfg: JobConfig) -> tuple[dict, str]:
    f, g, h = cfg.forms["f"], cfg.forms["g"], cfg.forms["h"]
    rep = petersson_triple(f, g, h, cfg.E, cfg.method, cfg.seed, threads=cfg.threads)
    doc = {"f": _form_meta(f), "g": _form_meta(g), "h": _form_meta(h), **rep.to_json()}
    doc["abs_squared"] = abs(rep.value) ** 2
    return doc, f"<fg,h> = {rep.value:.12g}  |.|^2 = {abs(rep.value) ** 2:.12g}"


def cmd_ratio(cfg: JobConfig) -> tuple[dict, str]:
    fA, gA = cfg.forms["f"], cfg.forms["g"]
    extra = cfg.forms.get("form_list", [])
    if len(extra) > 2:
        raise InputError("ratio takes at most two --form denominators")
    fB = extra[0] if extra else gA
    gB = extra[1] if len(extra) > 1 else fB
    q, num, den = petersson_ratio(fA, gA, fB, gB, cfg.E, cfg.method, cfg.seed, threads=cfg.threads)
    doc = {"ratio": q, "numerator": num.to_json(), "denominator": den.to_json()}
    return doc, f"ratio = {q:.12g}"


def _read_local_spec(path: str | None) -> dict:
    if path is None:
        return {"specs": []}
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such local-spec file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if isinstance(doc, list):
        doc = {"specs": doc}
    try:
        doc["specs"] = [LocalFactorSpec.from_json(s) for s in doc.get("specs", [])]
    except TypeError as exc:
        raise SchemaError(f"bad local factor entry: {exc}") from exc
    return doc


def _dilation_of(f: FormInput) -> tuple[FormInput, int]:
    parts = f.constituents()
    if len(parts) == 1 and parts[0][0] == 1:
        return parts[0][1], parts[0][2]
    return f, 1


def cmd_check(cfg: JobConfig) -> tuple[dict, str]:
    if cfg.lvalue is None:
        raise InputError("check needs --lvalue")
    local = _read_local_spec(cfg.local_spec)
    tol = float(local.get("tol", 1e-5))
    if "h" in cfg.forms:
        f, g, h = cfg.forms["f"], cfg.forms["g"], cfg.forms["h"]
        rep = petersson_triple(f, g, h, cfg.E, cfg.method, cfg.seed, threads=cfg.threads)
        lhs = abs(rep.value) ** 2
        M = [local.get(k) or _dilation_of(x)[1] for k, x in (("M_f", f), ("M_g", g), ("M_h", h))]
        const = ichino_constant(f.weight, h.weight, *M, specs=local["specs"])
        kind = "ichino"
    else:
        f = cfg.forms.get("f") or cfg.forms.get("form")
        if f is None:
            raise InputError("check needs --form/--f (adjoint) or --f --g --h (triple)")
        rep = petersson_pair(f, f, cfg.E, cfg.method, cfg.seed, threads=cfg.threads)
        const = adjoint_constant(f.weight, local["specs"])
        kind = "adjoint"
    if kind == "adjoint":
        # L(ad f, 1) = constant * <f, f>
        chk = ratio_check(cfg.lvalue, rep.value.real, const, tol)
    else:
        chk = ratio_check(lhs, cfg.lvalue, const, tol)
    status = "PASS" if chk.passed else "FAIL"
    doc = {
        "kind": kind,
        "inner_product": rep.value,
        "constant": const,
        "L_value": cfg.lvalue,
        "deviation": chk.deviation,
        "tol": tol,
        "status": status,
        "local_factors": [asdict(s) for s in local["specs"]],
    }
    return doc, f"{kind}: deviation {chk.deviation:.3e} (tol {tol:g}) {status}"


def _parse_eta(text: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(x) for x in part.split(":")) for part in text.split(",") if part]
    except ValueError as exc:
        raise InputError(f"bad eta spec {text!r}; expected d:r[,d:r...]") from exc


def cmd_generate(args) -> tuple[dict, str]:
    n = args.n
    if args.eta:
        forms = [eta_quotient(_parse_eta(args.eta), n, label=f"eta_{args.eta}")]
    elif args.level1:
        forms = level1_newforms(args.level1, n)
    elif args.twist:
        if not args.char:
            raise InputError("--twist needs --char")
        base = read_form(args.twist)
        chi = DirichletCharacter.from_json(json.loads(Path(args.char).read_text()))
        forms = [twist(base, chi)]
    elif args.stabilize or args.dilate:
        # kept symbolic so that reloading preserves the oldform structure
        ref = args.stabilize or args.dilate
        base = read_form(ref)
        if args.stabilize:
            if not args.p:
                raise InputError("--stabilize needs --p")
            op = {"stabilize": {"p": args.p, "variant": args.variant}}
            form = form_from_json({"base": form_to_json(base), **op})
        else:
            op = {"dilate": args.m}
            form = dilate(base, args.m)
        ref = ref if ref.startswith("fixture:") else str(Path(ref).resolve())
        doc = {"schema": SCHEMA, "label": form.label, "base": ref, **op}
        return doc, f"{form.label}: weight {form.weight} level {form.level}"
    else:
        raise InputError("generate needs one of --eta, --level1, --twist, --stabilize, --dilate")
    if args.index is not None:
        forms = [forms[args.index]]
    docs = [form_to_json(f) for f in forms]
    doc = docs[0] if len(docs) == 1 else {"forms": docs}
    return doc, ", ".join(f"{f.label}: weight {f.weight} level {f.level}" for f in forms)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuspidal", description="Cusp expansions and Petersson inner products.")
    p.add_argument("--version", action="version", version=f"cuspidal {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, forms=()):
        for name in forms:
            if name == "form":
                sp.add_argument("--form", action="append", default=None)
            else:
                sp.add_argument(f"--{name}")
        sp.add_argument("--cusp", default="all")
        sp.add_argument("--digits", type=float, default=13, help="target digits E (at most 13)")
        sp.add_argument("--coeffs", type=int, default=20, help="K0, coefficients requested")
        sp.add_argument("--decay", type=float, default=1.0, help="C0, decay rate of the sample line")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--method", choices=["direct", "eigen", "auto"], default="auto")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out")
        sp.add_argument("--lvalue", type=float)
        sp.add_argument("--local-spec", dest="local_spec")

    common(sub.add_parser("expand", help="Fourier expansions at cusps"), ["form"])
    common(sub.add_parser("petersson", help="<f, g>"), ["f", "g"])
    common(sub.add_parser("triple", help="<f g, h>"), ["f", "g", "h"])
    common(sub.add_parser("ratio", help="<f, g> / <form1, form2>"), ["f", "g", "form"])
    common(sub.add_parser("check", help="compare with L-values via closed-form constants"), ["form", "f", "g", "h"])

    gen = sub.add_parser("generate", help="write a form JSON file")
    gen.add_argument("--eta", help="eta quotient, e.g. 1:24 or 1:2,2:2,3:2,6:2")
    gen.add_argument("--level1", type=int, help="weight of level-one newforms")
    gen.add_argument("--twist", help="base form to twist")
    gen.add_argument("--char", help="character JSON for --twist")
    gen.add_argument("--stabilize", help="base form to p-stabilize")
    gen.add_argument("--p", type=int)
    gen.add_argument("--variant", choices=["sharp", "flat", "natural"], default="sharp")
    gen.add_argument("--dilate", help="base form for f(mz)")
    gen.add_argument("--m", type=int, default=1)
    gen.add_argument("--index", type=int)
    gen.add_argument("--n", type=int, default=1000, help="number of coefficients")
    gen.add_argument("--out")
    return p


def _config(args) -> JobConfig:
    forms = {}
    form_list = [read_form(x) for x in (getattr(args, "form", None) or [])]
    if args.command == "ratio":
        forms["form_list"] = form_list
    elif form_list:
        forms["form"] = form_list[0]
    for name in ("f", "g", "h"):
        ref = getattr(args, name, None)
        if ref:
            forms[name] = read_form(ref)
    needed = {"expand": ["form"], "petersson": ["f"], "triple": ["f", "g", "h"], "ratio": ["f", "g"]}
    missing = [x for x in needed.get(args.command, []) if x not in forms]
    if missing:
        raise InputError(f"{args.command} needs --{', --'.join(missing)}")
    cfg = JobConfig(
        args.command,
        forms,
        args.cusp,
        args.digits,
        args.coeffs,
        args.decay,
        args.seed,
        args.method,
        args.threads,
        args.out,
        args.lvalue,
        args.local_spec,
    )
    cfg.validate()
    return cfg


COMMANDS = {
    "expand": cmd_expand,
    "petersson": cmd_petersson,
    "triple": cmd_triple,
    "ratio": cmd_ratio,
    "check": cmd_check,
}


def _emit(doc: dict, out: str | None) -> None:
    text = dump_json(doc)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    head = {"schema": SCHEMA, "command": args.command, "version": __version__}
    try:
        if args.command == "generate":
            body, summary = cmd_generate(args)
            head = {}
        else:
            cfg = _config(args)
            head["config"] = {
                "cusp": cfg.cusp,
                "E": cfg.E,
                "K0": cfg.K0,
                "C0": cfg.C0,
                "seed": cfg.seed,
                "method": cfg.method,
                "threads": cfg.threads,
            }
            body, summary = COMMANDS[args.command](cfg)
    except (InsufficientCoefficients, SingularGramError, OracleError, ArithmeticError, RuntimeError) as exc:
        _emit({**head, "error": {"type": type(exc).__name__, "message": str(exc)}}, args.out)
        print(f"cuspidal: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (InputError, SchemaError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"cuspidal: input error: {exc}", file=sys.stderr)
        return 2
    body = {**head, **body}
    if head:
        body["timing"] = {"seconds": time.perf_counter() - t0}
    _emit(body, args.out)
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
