"""Command line front end.

Every run prints one JSON envelope on stdout:
    {"command": ..., "config": {...}, "ok": true, "result": ...}
or, on failure, "ok": false with an "error" record carrying a stable code.
Exit status: 0 success, 1 domain error, 2 malformed input or usage.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import checks
from .digits import DigitRational
from .errors import BadInput, NotAMorphism, PhiModError
from .extensions import (ExtDecomposition, FactorSystem, build_extension,
                         build_from_decomposition, decompose_extension, normalize)
from .field import get_field
from .objects import (ModuleMorphism, cokernel, etale_split, fl_normalize, fl_to_module,
                      is_connected, is_crystalline, is_etale, is_multiplicative, is_unipotent,
                      kernel, morphism_defects, special_basis, splitting_section, unipotent_split, validate)
from .serialize import (field_from_json, fl_from_json, frac_str, matrix_from_json,
                        matrix_to_json, module_from_json)
from .series import SeriesRing
from .simples import (ExtContext, admissible_pairs, build_simple, character_of_simple,
                      check_pair_constants, ramification_bounds)
from .unitfilter import filtrate, load_units


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit({"command": None, "config": {"argv": sys.argv[1:]}, "ok": False,
               "error": {"code": "usage", "message": message}})
        raise SystemExit(2)


def _emit(obj, out=None):
    text = json.dumps(obj, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _rational(text, p):
    if isinstance(text, dict):
        r = DigitRational.from_json(text)
        if r.p != p:
            raise BadInput("digit rational uses a different base", p=p, base=r.p)
        return r
    try:
        return DigitRational.from_value(text, p)
    except ValueError as exc:
        raise BadInput(f"cannot parse rational {text!r}") from exc


def _load(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise BadInput(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise BadInput(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _field(p, degree):
    if degree is not None and degree < 1:
        raise BadInput("--fq-degree must be positive")
    return get_field(p, degree or 1)


def _module_summary(L):
    rep = validate(L)
    out = {"rank": L.rank, "valid": rep.to_json()}
    if rep.ok:
        out.update(crystalline=is_crystalline(L), etale=is_etale(L), connected=is_connected(L),
                   multiplicative=is_multiplicative(L), unipotent=is_unipotent(L))
    return out


def _split_json(sp):
    return {"sub": sp.sub.to_json(), "quotient": sp.quotient.to_json(),
            "embedding": matrix_to_json(sp.embedding.matrix),
            "projection": matrix_to_json(sp.projection.matrix)}


# ---------------------------------------------------------------- commands


def cmd_simple(a):
    F = _field(a.p, a.fq_degree)
    r = _rational(a.r, a.p)
    a.prec = a.prec or 3 * a.p
    ring = SeriesRing(F, a.prec)
    L = build_simple(r, ring)
    es, us = etale_split(L), unipotent_split(L)
    return {"r": frac_str(r.value), "digits": list(r.digits), "period": r.period,
            "module": L.to_json(), "summary": _module_summary(L),
            "character": character_of_simple(r),
            "splits": {"etale_rank": es.sub.rank, "connected_rank": es.quotient.rank,
                       "unipotent_rank": us.sub.rank, "multiplicative_rank": us.quotient.rank}}


def _context(a, F=None):
    r1, r2 = _rational(a.r1, a.p), _rational(a.r2, a.p)
    ctx = ExtContext(a.p, r1, r2, s=a.s, field=F or _field(a.p, a.fq_degree), prec=a.prec)
    a.prec, a.s = ctx.prec, ctx.s
    return ctx


def cmd_admissible(a):
    ctx = _context(a)
    adm = admissible_pairs(ctx)
    out = {"s": ctx.s, "q": ctx.q, "cr": [], "st": [], "sp": []}
    for kind in ("cr", "st"):
        for i, j, m0 in adm[kind]:
            rec = check_pair_constants(ctx, kind, i, j, strict=False).to_json()
            rec["m0"] = m0
            out[kind].append(rec)
    for j in adm["sp"]:
        out["sp"].append(check_pair_constants(ctx, "sp", 0, j, strict=False).to_json())
    return out


def _system_file(a):
    """Context, factor system and N-residues from a factor-system file."""
    d = _load(a.input)
    try:
        c = d["context"]
        F = field_from_json(c["field"], a.fq_degree) if "field" in c else _field(int(c["p"]), a.fq_degree)
        p = int(c["p"])
        ctx = ExtContext(p, _rational(c["r1"], p), _rational(c["r2"], p), s=c.get("s"), field=F,
                         prec=a.prec or c.get("prec"))
        fs = FactorSystem.from_json(ctx, d.get("terms", []))
        kappa = {}
        for rec in d.get("kappa", []):
            g = rec["gamma"]
            kappa[(int(rec["i"]), int(rec["j"]))] = F.from_coords(g) if isinstance(g, list) else int(g)
        dec = ExtDecomposition.from_json(d, F) if any(k in d for k in ("cr_terms", "st_terms", "sp_terms")) else None
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"malformed factor-system file: {exc}") from exc
    a.prec, a.fq_degree = ctx.prec, F.m
    return ctx, fs, kappa, dec


def _transcript_json(ctx, transcript):
    F = ctx.field
    out = []
    for step in transcript:
        w = {str(j): [{"i": i, "t": t, "c": F.to_coords(c)} for (i, t), c in sorted(comps.items())]
             for j, comps in sorted(step["w"].items())}
        out.append({"rule": step["rule"], "at": list(step["at"]), "w": w})
    return out


def cmd_normalize(a):
    ctx, fs, _, _ = _system_file(a)
    cur, transcript = normalize(fs)
    return {"context": ctx.to_json(), "normalized": cur.to_json()["terms"],
            "C1": cur.satisfies_C1(), "C2": cur.satisfies_C2(),
            "transcript": _transcript_json(ctx, transcript)}


def cmd_decompose(a):
    ctx, fs, kappa, dec = _system_file(a)
    if dec is not None:
        # a decomposition record: rebuild the object and decompose it again
        E = build_from_decomposition(ctx, dec)
        got, _ = decompose_extension(E, ctx)
    else:
        # building the object first rejects N-residues inconsistent with the terms
        E = build_extension(ctx, fs, kappa)
        got, _ = decompose_extension(E, ctx)
    return {"context": ctx.to_json(), **got.to_json(ctx.field)}


def _morphism_file(d, a):
    try:
        L1 = module_from_json(d["source"], a.prec, a.fq_degree)
        L2 = module_from_json(d["target"], a.prec, a.fq_degree)
        M = matrix_from_json(L1.ring, d["matrix"], (L2.rank, L1.rank))
    except KeyError as exc:
        raise BadInput(f"morphism file lacks {exc}") from exc
    f = ModuleMorphism(L1, L2, M)
    bad = morphism_defects(f)
    if bad:
        raise NotAMorphism("matrix does not commute with the structure", defects=bad)
    return f


def cmd_object(a):
    d = _load(a.input)
    op = a.op
    if op in ("kernel", "cokernel"):
        f = _morphism_file(d, a)
        obj, arrow = kernel(f) if op == "kernel" else cokernel(f)
        return {"op": op, "object": obj.to_json(), "summary": _module_summary(obj),
                "arrow": matrix_to_json(arrow.matrix)}
    L = module_from_json(d, a.prec, a.fq_degree)
    if op == "validate":
        return {"op": op, **_module_summary(L)}
    if op == "etale-split":
        return {"op": op, **_split_json(etale_split(L))}
    if op == "unipotent-split":
        return {"op": op, **_split_json(unipotent_split(L))}
    if op == "section":
        sec = splitting_section(L)
        return {"op": op, "n0": sec.n0, "S": [[x.to_json() for x in v] for v in sec.S],
                "g": [[x.to_json() for x in v] for v in sec.g],
                "g_in_u_Lu": all(x.valuation() >= 1 for v in sec.g for x in v)}
    if op == "special-basis":
        P, c = special_basis(L)
        return {"op": op, "P": matrix_to_json(P), "exponents": c}
    if op == "decompose":
        c = d.get("context") or {}
        p = L.p
        if not {"r1", "r2"} <= set(c):
            raise BadInput("decompose needs a context with r1 and r2 in the module file")
        ctx = ExtContext(p, _rational(c["r1"], p), _rational(c["r2"], p), s=c.get("s"),
                         field=L.field, prec=L.ring.prec)
        got, _ = decompose_extension(L, ctx)
        return {"op": op, **got.to_json(L.field)}
    raise BadInput(f"unknown object operation {op!r}")


def cmd_fl(a):
    d = _load(a.input)
    if a.direction == "to-module":
        M = fl_from_json(d, a.fq_degree)
        ring = SeriesRing(M.field, a.prec or 3 * M.field.p)
        L = fl_to_module(M, ring)
        return {"direction": a.direction, "module": L.to_json(), "summary": _module_summary(L)}
    L = module_from_json(d, a.prec, a.fq_degree)
    res = fl_normalize(L)
    return {"direction": a.direction, "fl_module": res.module.to_json(),
            "witness": matrix_to_json(res.witness.matrix),
            "residual_zero": all(x.is_zero() for v in res.residual for x in (v if isinstance(v, list) else [v]))}


def cmd_bounds(a):
    b = ramification_bounds(a.p)
    return {"upper_v": frac_str(b["upper_v"]), "different": frac_str(b["different_bound"]),
            "disc": str(b["disc_bound"])}


def cmd_filtrate(a):
    d = _load(a.input)
    K, units, p = load_units(d)
    res = filtrate(units, p)
    return {"p": p, "degree": K.degree, **res.to_json()}


def cmd_selftest(a):
    suite = checks.full_suite if a.full else checks.quick_suite
    kw = {"k1_path": a.units} if a.full else {"seed": a.seed, "k1_path": a.units}
    results = suite(**kw)
    return {"suite": "full" if a.full else "quick",
            "checks": [r.to_json() for r in results],
            "passed": sum(r.ok is True for r in results),
            "failed": sum(r.ok is False for r in results)}


COMMANDS = {"simple": cmd_simple, "admissible": cmd_admissible, "normalize": cmd_normalize,
            "decompose": cmd_decompose, "object": cmd_object, "fl": cmd_fl,
            "bounds": cmd_bounds, "filtrate": cmd_filtrate, "selftest": cmd_selftest}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, help="working precision PREC")
    common.add_argument("--fq-degree", type=int, default=None, help="coefficient field F_{p^m}")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")

    ap = _Parser(prog="phimod", description="Computations with filtered (phi, N)-modules.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simple", parents=[common], help="build L(r)")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--r", required=True, help='rational "num/den" in [0, 1]')

    s = sub.add_parser("admissible", parents=[common], help="admissible pairs and constants")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--r1", required=True)
    s.add_argument("--r2", required=True)
    s.add_argument("--s", type=int, default=None)

    for name in ("normalize", "decompose"):
        s = sub.add_parser(name, parents=[common], help=f"{name} a factor-system file")
        s.add_argument("input")

    s = sub.add_parser("object", parents=[common], help="operations on module files")
    s.add_argument("op", choices=["validate", "kernel", "cokernel", "etale-split",
                                  "unipotent-split", "section", "special-basis", "decompose"])
    s.add_argument("input")

    s = sub.add_parser("fl", parents=[common], help="Fontaine-Laffaille functor")
    s.add_argument("direction", choices=["to-module", "normalize"])
    s.add_argument("input")

    s = sub.add_parser("bounds", parents=[common], help="ramification constants")
    s.add_argument("--p", type=int, required=True)

    s = sub.add_parser("filtrate", parents=[common], help="greedy unit filtration")
    s.add_argument("input")

    s = sub.add_parser("selftest", parents=[common], help="bundled verification suites")
    s.add_argument("--full", action="store_true", help="run at acceptance size")
    s.add_argument("--units", default=None, help="optional unit file for the degree 18 field")
    return ap


def _config(a):
    cfg = {k: v for k, v in sorted(vars(a).items()) if k != "output"}
    cfg["fq_degree"] = cfg.get("fq_degree") or 1
    return cfg


def run(argv=None):
    ap = build_parser()
    a = ap.parse_args(argv)
    random.seed(a.seed)
    env = {"command": a.command}
    try:
        if getattr(a, "p", None) is not None and a.p < 3:
            raise BadInput("p must be an odd prime")
        result = COMMANDS[a.command](a)
        env.update(ok=True, result=result)
        status = 0
        if a.command == "selftest" and result["failed"]:
            status = 1
    except PhiModError as exc:
        env.update(ok=False, error=exc.to_json())
        status = exc.exit_status
    # after the command ran, so defaults it resolved are echoed
    env["config"] = _config(a)
    _emit(env, a.output)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
