"""Command-line interface: `sigmaschur <subcommand> ...`.

Exit codes: 0 success, 1 a comparison or check failed, 2 usage or config
error, 3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from . import classgroups as cg
from .fp import c_finite, c_infinity, check_odd_prime, witt_graded_dims
from .freesub import CyclicKernelBasis, character_check, character_identity, index_formula_check, structure_checks
from .group import (
    GroupError,
    generator_rank,
    is_totally_odd,
    quotient,
    relation_rank,
    relation_subgroup,
    zassenhaus_type,
)
from .iso import DEFAULT_AUT_CAP, fingerprint, sigma_aut_order
from .magnus import DEFAULT_SIZE_CAP, CapExceeded, FreeWord, enumerate_group

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# ---- parsing helpers ----------------------------------------------------------------

def parse_relations(text: str, n: int | None = None) -> list[FreeWord]:
    """Semicolon-separated words, each a space-separated list of signed generator indices."""
    words = []
    for chunk in text.split(";"):
        if not chunk.strip():
            raise ValueError(f"empty relation in {text!r}")
        w = FreeWord.parse(chunk)
        if n is not None:
            w.check_rank(n)
        words.append(w)
    return words


def read_config(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment; keys use the long-flag names."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _truthy(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def _apply_config(sub: argparse.ArgumentParser, cfg: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        act = actions.get(k)
        if act is None or k in ("help", "config"):
            raise UsageError(f"unknown config key {k!r} for this subcommand")
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[k] = _truthy(v)
        elif act.type is not None:
            try:
                defaults[k] = act.type(v)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {k}: {exc}") from None
        else:
            defaults[k] = v
        if act.choices is not None and defaults[k] not in act.choices:
            raise UsageError(f"config key {k}: {v!r} not in {list(act.choices)}")
    sub.set_defaults(**defaults)


def _need(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, default=_json_default))
    else:
        print(text)


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, tuple):
        return list(o)
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _fmt_part(part) -> str:
    return "(" + ",".join("⊤" if x is None else str(x) for x in part) + ")"


# ---- subcommands ------------------------------------------------------------------

def cmd_witt(args) -> int:
    _need(args, "p", "n", "i")
    w = witt_graded_dims(args.p, args.n, args.i)
    payload = {"p": args.p, "n": args.n, "i": args.i, "dims": list(w.dims), "order": w.order,
               "odd_order": w.odd_order, "even_order": w.order // w.odd_order,
               "log_order": w.log_order, "log_odd_order": w.log_odd_order}
    _emit(args, payload, f"dims {_fmt_part(w.dims)}\norder {w.order}\n|G+| {w.order // w.odd_order}\n"
                         f"|G-| {w.odd_order}")
    return EXIT_OK


def _build(args):
    _need(args, "p", "n", "i")
    return enumerate_group(args.p, args.n, args.i, args.size_cap)


def cmd_group(args) -> int:
    G = _build(args)
    fp = fingerprint(G)
    payload = {"p": G.p, "n": args.n, "i": args.i, "order": G.order, "even_order": fp.even_order,
               "odd_order": fp.odd_order, "generator_rank": generator_rank(G),
               "lower_central_series": [s.order for s in G.lower_central_series],
               "dimension_series": [s.order for s in G.dimension_series],
               "abelianization_even": list(fp.ab_even), "abelianization_odd": list(fp.ab_odd),
               "fingerprint": fp.serialize()}
    text = "\n".join(f"{k} {v}" for k, v in payload.items())
    _emit(args, payload, text)
    return EXIT_OK


def _quotient_of(args):
    G = _build(args)
    _need(args, "relations")
    words = parse_relations(args.relations, args.n)
    rels = []
    for w in words:
        r = G.magnus.word_index(w)
        if not G.odd_mask[r]:
            raise GroupError(f"relation {' '.join(map(str, w.letters))!r} is not odd in F_{args.n},{args.i}")
        rels.append(r)
    N = relation_subgroup(G, rels)
    Q, _ = quotient(G, N)
    return G, N, Q, words


def cmd_quotient(args) -> int:
    G, N, Q, words = _quotient_of(args)
    fp = fingerprint(Q)
    FQ, _ = quotient(Q, Q.frattini, check=False)
    payload = {"p": G.p, "n": args.n, "i": args.i, "relations": [list(w.letters) for w in words],
               "order": Q.order, "even_order": fp.even_order, "odd_order": fp.odd_order,
               "d": generator_rank(Q), "m": relation_rank(G, N),
               "frattini_quotient_totally_odd": is_totally_odd(FQ),
               "abelianization_even": list(fp.ab_even), "abelianization_odd": list(fp.ab_odd),
               "fingerprint": fp.serialize()}
    if args.aut:
        payload["aut_order"] = sigma_aut_order(Q, args.aut_cap)
    _emit(args, payload, "\n".join(f"{k} {v}" for k, v in payload.items()))
    return EXIT_OK


def cmd_aut(args) -> int:
    if args.relations:
        G, _, Q, _ = _quotient_of(args)
    else:
        Q = G = _build(args)
    a = sigma_aut_order(Q, args.aut_cap)
    payload = {"p": G.p, "n": args.n, "i": args.i, "relations": args.relations, "order": Q.order,
               "aut_order": a}
    lemma = None
    if not args.relations:
        lemma = c_finite(G.p, args.n) * int(G.odd_mask.sum()) ** args.n
        payload["count_formula"] = str(lemma)
    _emit(args, payload, f"|G| {Q.order}\n|Aut_sigma| {a}" + (f"\nC_n |G-|^n {lemma}" if lemma is not None else ""))
    return EXIT_OK if lemma is None or lemma == a else EXIT_FAIL


def cmd_zassenhaus(args) -> int:
    _need(args, "p", "n", "depth", "relations")
    words = parse_relations(args.relations, args.n)
    t = zassenhaus_type(args.p, args.n, words, args.depth, args.size_cap)
    payload = {"p": args.p, "n": args.n, "max_depth": args.depth, "type": list(t),
               "unresolved_means": f">= {args.depth}"}
    _emit(args, payload, f"type {_fmt_part(t)}  (⊤ = not resolved by depth {args.depth})")
    return EXIT_OK


MEASURE_OPS = ("mu-inf-schn", "mu-inf-udg", "mu-n-count", "restriction-factor", "mu-inf-abelianization",
               "c-finite", "c-inf", "cyclic-class", "zp-class")


def cmd_measure(args) -> int:
    from . import measure as ms
    _need(args, "p")
    check_odd_prime(args.p)
    op, p = args.op, args.p
    if op == "mu-inf-schn":
        _need(args, "n")
        val = ms.mu_inf_sch_n(p, args.n)
    elif op == "mu-inf-udg":
        _need(args, "n", "m", "aut")
        val = ms.mu_inf_udg(p, args.n, args.m, args.aut)
    elif op == "mu-n-count":
        _need(args, "n", "m", "aut", "odd_size")
        val = ms.mu_n_class_count(p, args.n, args.odd_size, args.m, args.aut)
    elif op == "restriction-factor":
        _need(args, "n", "m")
        val = ms.mu_n_restriction_factor(p, args.n, args.m)
    elif op == "mu-inf-abelianization":
        if args.partition:
            aut = cg.aut_order_abelian(p, [int(x) for x in args.partition.split(",") if x.strip()])
        else:
            _need(args, "aut")
            aut = args.aut
        val = ms.mu_inf_abelianization(p, aut)
    elif op == "c-finite":
        _need(args, "n")
        val = c_finite(p, args.n)
    elif op == "c-inf":
        v, err = c_infinity(p, args.tolerance)
        _emit(args, {"op": op, "p": p, "value": v, "error_bound": err}, f"C_inf ≈ {v:.12f} (± {err:.1e})")
        return EXIT_OK
    elif op == "cyclic-class":
        _need(args, "j")
        val = ms.cyclic_class_measure(p, args.j)
    else:
        val = ms.zp_class_measure(p)
    if isinstance(val, ms.MeasureExpr):
        v, err = val.evaluate(args.tolerance)
        payload = {"op": op, "p": p, "coeff": str(val.coeff), "cinf_power": val.cinf_power,
                   "value": v, "error_bound": err, "rendered": val.render()}
        text = val.render()
    else:
        payload = {"op": op, "p": p, "value": str(val)}
        text = str(val)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_classify(args) -> int:
    from .experiments import ExperimentSpec, compare, run_experiment
    _need(args, "p", "n", "i")
    seed_generated = False
    if args.exhaustive:
        mode, seed = "exhaustive", args.seed
    else:
        if args.samples is None:
            raise UsageError("give --exhaustive or --samples N")
        mode, seed = "monte-carlo", args.seed
        if seed is None:
            seed, seed_generated = secrets.randbits(32), True
    spec = ExperimentSpec(args.p, args.n, args.i, mode=mode, samples=args.samples or 0, seed=seed,
                          sampler=args.sampler, workers=args.workers, size_cap=args.size_cap,
                          aut_cap=args.aut_cap)
    rep = run_experiment(spec)
    verdict = compare(rep, args.tolerance_sigma)
    if args.format == "json":
        obj = rep.to_json()
        obj["verdict"] = "PASS" if verdict.passed else "FAIL"
        obj["failures"] = verdict.failures
        obj["seed_generated"] = seed_generated
        print(json.dumps(obj, indent=2))
    else:
        print(rep.to_text())
        if seed_generated:
            print(f"seed {seed} (generated)")
        print("verdict " + ("PASS" if verdict.passed else "FAIL"))
        for f in verdict.failures:
            print("  failed: " + f)
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_character(args) -> int:
    _need(args, "p", "n", "r")
    b = CyclicKernelBasis(args.p, args.n, args.r)
    rows = character_check(b)
    idx = index_formula_check(b)
    ident = character_identity(b)
    struct = structure_checks(b)
    rank_ok = idx.rank == 1 + args.p ** args.r * (args.n - 1)
    ok = all(r.status != "fail" for r in rows) and idx.ok and ident and rank_ok and all(struct.values())
    payload = {"p": args.p, "n": args.n, "r": args.r, "rank": idx.rank,
               "rows": [{"element": r.element, "computed": r.computed, "predicted": r.predicted,
                         "status": r.status} for r in rows],
               "index": {"i_N": idx.i_n, "predicted": idx.predicted, "ok": idx.ok},
               "character_identity": ident, "structure": struct, "verdict": "PASS" if ok else "FAIL"}
    lines = [f"rank N_ab {idx.rank}"]
    for r in rows:
        lines.append(f"{r.element:<28} computed {r.computed!s:>5} table {r.predicted!s:>5}  {r.status}")
    lines.append(f"i_N {idx.i_n} (predicted {idx.predicted})")
    lines.append(f"character identity {'holds' if ident else 'FAILS'}")
    bad = [k for k, v in struct.items() if not v]
    lines.append("structure checks " + ("pass" if not bad else "fail: " + ", ".join(bad)))
    lines.append("verdict " + ("PASS" if ok else "FAIL"))
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_classgroup(args) -> int:
    _need(args, "D")
    D = args.D
    if D >= 0 or D % 4 not in (0, 1):
        raise UsageError("D must be a negative discriminant (0 or 1 mod 4)")
    forms = cg.reduced_forms(D)
    G = cg.FormClassGroup(D)
    laws = G.check_laws()
    payload = {"D": D, "fundamental": cg.is_fundamental(D), "h": len(forms),
               "forms": [[f.a, f.b, f.c] for f in forms], "group_laws": laws}
    lines = [f"D {D}", f"h {len(forms)}", "forms " + " ".join(str(f) for f in forms),
             f"group laws {'hold' if laws else 'FAIL'}"]
    if args.p is not None:
        check_odd_prime(args.p)
        part = cg.p_sylow_type(G, args.p)
        payload["sylow"] = {"p": args.p, "partition": list(part),
                            "aut_order": cg.aut_order_abelian(args.p, part)}
        lines.append(f"{args.p}-part {_fmt_part(part)}  |Aut| {payload['sylow']['aut_order']}")
    if args.format == "csv":
        print("a,b,c")
        for f in forms:
            print(f"{f.a},{f.b},{f.c}")
    else:
        _emit(args, payload, "\n".join(lines))
    return EXIT_OK if laws else EXIT_FAIL


def cmd_survey(args) -> int:
    _need(args, "p", "X")
    residue = None
    if args.residue:
        try:
            r, M = (int(s) for s in args.residue.split(":"))
        except ValueError:
            raise UsageError("--residue expects r:M") from None
        residue = (r, M)
    rep = cg.survey(args.p, args.X, exclude_p_divides_D=args.exclude_p_divides_D, residue_filter=residue,
                    workers=args.workers)
    if args.format == "csv":
        print("\n".join(rep.csv_lines()))
    elif args.format == "json":
        print(json.dumps(rep.to_json(), indent=2))
    else:
        total = sum(t.count for t in rep.types)
        lines = [f"p {rep.p}  |D| <= {rep.X}  discriminants {total}  filters {rep.filters}",
                 f"{'type':<12}{'count':>9}{'observed':>11}{'predicted':>11}{'obs-pred':>10}"]
        for t in rep.types:
            lines.append(f"{_fmt_part(t.partition):<12}{t.count:>9}{t.frequency:>11.5f}{t.prediction:>11.5f}"
                         f"{t.frequency - t.prediction:>+10.5f}")
        print("\n".join(lines))
    return EXIT_OK


def cmd_verify_all(args) -> int:
    from .acceptance import run_all
    selected = [int(x) for x in args.only.split(",")] if args.only else None
    overrides = {7: {"samples": args.samples, "seed": args.seed}, 10: {"X": args.survey_x}}
    results = run_all(selected, progress=lambda r: print(r.line(), flush=True) if args.format == "text" else None,
                      overrides=overrides)
    ok = all(r.passed for r in results)
    if args.format == "json":
        print(json.dumps([{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
                           "seconds": round(r.seconds, 3)} for r in results], indent=2))
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if ok else EXIT_FAIL


# ---- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")

    group_args = argparse.ArgumentParser(add_help=False)
    group_args.add_argument("-p", type=int, help="odd prime")
    group_args.add_argument("-n", type=int, help="number of generators")
    group_args.add_argument("-i", type=int, help="truncation depth (group is F_n / D_i)")
    group_args.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP)

    parser = argparse.ArgumentParser(prog="sigmaschur", description="Finite sigma-p-group experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("witt", parents=[common], help="graded dimensions and orders of F_n/D_i")
    s.add_argument("-p", type=int)
    s.add_argument("-n", type=int)
    s.add_argument("-i", type=int)
    s.set_defaults(func=cmd_witt)

    s = sub.add_parser("group", parents=[common, group_args], help="build F_{n,i} and print statistics")
    s.set_defaults(func=cmd_group)

    s = sub.add_parser("quotient", parents=[common, group_args], help="class invariants of F_{n,i}/N_r")
    s.add_argument("--relations", help='e.g. "1 1 1; 2 2 2"')
    s.add_argument("--aut", action="store_true", help="also compute |Aut_sigma| of the quotient")
    s.add_argument("--aut-cap", type=int, default=DEFAULT_AUT_CAP)
    s.set_defaults(func=cmd_quotient)

    s = sub.add_parser("aut", parents=[common, group_args], help="order of the sigma-automorphism group")
    s.add_argument("--relations", help="optional relations; default is F_{n,i} itself")
    s.add_argument("--aut-cap", type=int, default=DEFAULT_AUT_CAP)
    s.set_defaults(func=cmd_aut)

    s = sub.add_parser("zassenhaus", parents=[common], help="Zassenhaus type of a relation tuple")
    s.add_argument("-p", type=int)
    s.add_argument("-n", type=int)
    s.add_argument("--depth", type=int, help="largest truncation depth examined")
    s.add_argument("--relations")
    s.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP)
    s.set_defaults(func=cmd_zassenhaus)

    s = sub.add_parser("measure", parents=[common], help="evaluate a measure or constant")
    s.add_argument("op", choices=MEASURE_OPS)
    s.add_argument("-p", type=int)
    s.add_argument("-n", type=int)
    s.add_argument("-m", type=int)
    s.add_argument("-j", type=int)
    s.add_argument("--aut", type=int, help="|Aut_sigma| (or |Aut(A)|)")
    s.add_argument("--odd-size", type=int, help="|F_{n,D}^-|")
    s.add_argument("--partition", help="abelian p-group type, e.g. 2,1")
    s.add_argument("--tolerance", type=float, default=1e-12)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("classify", parents=[common, group_args], help="run an experiment and compare")
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--sampler", choices=("odd-list", "twisted"), default="odd-list")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--aut-cap", type=int, default=DEFAULT_AUT_CAP)
    s.add_argument("--tolerance-sigma", type=float, default=4.0)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("character", parents=[common], help="character checks on a cyclic-quotient kernel")
    s.add_argument("-p", type=int)
    s.add_argument("-n", type=int)
    s.add_argument("-r", type=int)
    s.set_defaults(func=cmd_character)

    s = sub.add_parser("classgroup", parents=[common], help="form class group of discriminant D")
    s.add_argument("-D", type=int)
    s.add_argument("-p", type=int, help="also report the p-Sylow type")
    s.set_defaults(func=cmd_classgroup)

    s = sub.add_parser("survey", parents=[common], help="p-parts of class groups for |D| <= X")
    s.add_argument("-p", type=int)
    s.add_argument("-X", type=int)
    s.add_argument("--exclude-p-divides-D", action="store_true")
    s.add_argument("--residue", help="keep D = r mod M, given as r:M")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_survey)

    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--survey-x", type=int, default=10 ** 6)
    s.set_defaults(func=cmd_verify_all)
    parser.subcommands = sub
    return parser


def _config_path(argv: Sequence[str]) -> str | None:
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        path = _config_path(argv)
        if path is not None:
            subs = parser.subcommands.choices
            cmd = next((t for t in argv if t in subs), None)
            if cmd is None:
                raise UsageError("--config needs a subcommand")
            _apply_config(subs[cmd], read_config(path))
    except UsageError as exc:
        print(f"sigmaschur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"sigmaschur: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except MemoryError:
        print("sigmaschur: cap exceeded: out of memory (lower the depth or size cap)", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, GroupError, ValueError) as exc:
        print(f"sigmaschur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
