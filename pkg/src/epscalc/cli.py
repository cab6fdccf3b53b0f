"""Command-line front end for the proof pipeline.

One subcommand per stage: validate files, translate a formula, embed a
proof, run the elimination to a certified disjunction, rebuild a
quantified proof from a certificate, and exercise the lower-bound family.
All file outputs are written atomically; --json switches every command to
a single machine-readable line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .syntax import ExprClass, NameSupply, Signature, all_names, classify_report
from .parser import (
    ParseError, format_fml, format_hbd, format_proof, parse_fml, parse_hbd,
    parse_proof, print_expr,
)
from .proofs import check, is_tautology, match_vars, metrics
from .embedding import embed_proof, eps_translate
from .elimination import EliminationError, Expansion, extract_herbrand, hyperexp
from .herbrand import herbrand_to_pc, prenex_parts, second_epsilon
from .lowerbound import build_Ek_proof, check_lower_bound, lb_signature, make_Ek


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(args, payload, lines):
    if args.json:
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        for line in lines:
            print(line)


def _metrics_payload(m):
    return {
        "size": m.size,
        "cc": m.cc,
        "rank": m.rank,
        "orders": {str(r): v for r, v in sorted(m.o.items())},
        "degrees": {str(r): v for r, v in sorted(m.deg.items())},
        "widths": {str(r): v for r, v in sorted(m.w.items())},
    }


def _metrics_lines(m):
    per_rank = ", ".join(
        f"rank {r}: order {m.o[r]} degree {m.deg[r]} width {m.w[r]}"
        for r in sorted(m.o)) or "no critical terms"
    return [f"steps {m.size}, critical count {m.cc}, rank {m.rank}",
            f"  {per_rank}"]


# ---------------------------------------------------------------------------
# subcommands

def _cmd_check(args):
    path = args.file
    if path.endswith(".prf"):
        proof = parse_proof(_read(path))
        report = check(proof)
        if not report.ok:
            _emit(args, {"command": "check", "file": path, "ok": False,
                         "problems": list(report.problems)},
                  [f"FAIL {path}"] + [f"  {p}" for p in report.problems])
            return 1
        m = metrics(proof)
        _emit(args, {"command": "check", "file": path, "ok": True,
                     "calculus": proof.calculus, "end": print_expr(proof.end_formula),
                     "metrics": _metrics_payload(m)},
              [f"OK {path} ({proof.calculus}, ends in {print_expr(proof.end_formula)})"]
              + _metrics_lines(m))
        return 0
    if path.endswith(".hbd"):
        h = parse_hbd(_read(path))
        problems = []
        if h.length != len(h.rows):
            problems.append(f"recorded length {h.length}, found {len(h.rows)} rows")
        taut = is_tautology(h.formula())
        if taut != h.tautology_ok:
            problems.append(f"recorded tautology {h.tautology_ok}, recomputed {taut}")
        if h.bound <= h.length:
            problems.append(f"length {h.length} violates the bound {h.bound}")
        ok = not problems
        _emit(args, {"command": "check", "file": path, "ok": ok,
                     "length": h.length, "bound": str(h.bound),
                     "tautology": taut, "problems": problems},
              [("OK" if ok else "FAIL") + f" {path} (length {h.length}, "
               f"bound {h.bound}, tautology {taut})"]
              + [f"  {p}" for p in problems])
        return 0 if ok else 1
    sig, f = parse_fml(_read(path))
    cls, problems = classify_report(f)
    ok = cls is ExprClass.FORMULA
    _emit(args, {"command": "check", "file": path, "ok": ok,
                 "class": cls.value, "problems": list(problems)},
          [("OK" if ok else "FAIL") + f" {path} ({cls.value})"]
          + [f"  {p}" for p in problems])
    return 0 if ok else 1


def _cmd_translate(args):
    sig, f = parse_fml(_read(args.file))
    t = eps_translate(f)
    text = format_fml(Signature.collect(t), t)
    if args.out:
        _write(args.out, text)
    _emit(args, {"command": "translate", "file": args.file,
                 "formula": print_expr(t), "out": args.out},
          [print_expr(t)] if not args.out else [f"wrote {args.out}"])
    return 0


def _cmd_embed(args):
    proof = parse_proof(_read(args.file))
    embedded = embed_proof(proof)
    report = check(embedded)
    if not report.ok:
        raise RuntimeError("embedded proof failed validation: "
                           + "; ".join(report.problems[:3]))
    text = format_proof(embedded)
    if args.out:
        _write(args.out, text)
    m = metrics(embedded)
    _emit(args, {"command": "embed", "file": args.file, "out": args.out,
                 "end": print_expr(embedded.end_formula),
                 "metrics": _metrics_payload(m)},
          ([f"wrote {args.out}"] if args.out else [text.rstrip("\n")])
          + _metrics_lines(m))
    return 0


def _trace_lines(trace):
    out = [f"{trace.sweeps} rank sweep(s), {len(trace.rounds)} round(s)"]
    for i, r in enumerate(trace.rounds, start=1):
        out.append(
            f"  round {i}: target {r.target} (rank {r.rank}, degree {r.degree}, "
            f"{r.n} instances) size {r.size_before}->{r.size_after} "
            f"cc {r.cc_before}->{r.cc_after} rows {r.rows_before}->{r.rows_after} "
            f"order {r.o_before}->{r.o_after}")
    return out


def _cmd_eliminate(args):
    proof = parse_proof(_read(args.proof))
    seed = parse_hbd(_read(args.matrix))
    expansion = Expansion(seed.matrix, seed.vars, seed.rows)
    h, ec = extract_herbrand(proof, expansion)
    if args.cert:
        _write(args.cert, format_hbd(h))
    if args.proof_out:
        _write(args.proof_out, format_proof(ec))
    lines = [f"herbrand disjunction: {h.length} row(s), critical count {h.cc}, "
             f"bound {h.bound}, tautology {h.tautology_ok}"]
    if args.trace:
        lines += _trace_lines(h.trace)
    if args.cert:
        lines.append(f"wrote {args.cert}")
    if args.proof_out:
        lines.append(f"wrote {args.proof_out}")
    _emit(args, {"command": "eliminate", "proof": args.proof,
                 "length": h.length, "cc": h.cc, "bound": str(h.bound),
                 "sweeps": h.trace.sweeps, "rounds": len(h.trace.rounds),
                 "cert": args.cert, "proof_out": args.proof_out},
          lines)
    return 0


def _cmd_second_eps(args):
    proof = parse_proof(_read(args.file))
    pc, h = second_epsilon(proof)
    if args.out:
        _write(args.out, format_proof(pc))
    if args.cert:
        _write(args.cert, format_hbd(h))
    m = metrics(pc)
    lines = [f"herbrand disjunction: {h.length} row(s), bound {h.bound}",
             f"rebuilt proof ends in {print_expr(pc.end_formula)}"] + _metrics_lines(m)
    for name, written in (("out", args.out), ("cert", args.cert)):
        if written:
            lines.append(f"wrote {written}")
    _emit(args, {"command": "second-eps", "file": args.file,
                 "length": h.length, "bound": str(h.bound),
                 "end": print_expr(pc.end_formula), "out": args.out,
                 "cert": args.cert, "metrics": _metrics_payload(m)},
          lines)
    return 0


def _cmd_reconstruct(args):
    h = parse_hbd(_read(args.cert))
    sig, goal = parse_fml(_read(args.goal))
    pc = herbrand_to_pc(h, goal)
    report = check(pc)
    if not report.ok:
        raise RuntimeError("reconstructed proof failed validation: "
                           + "; ".join(report.problems[:3]))
    text = format_proof(pc)
    if args.out:
        _write(args.out, text)
    m = metrics(pc)
    _emit(args, {"command": "reconstruct", "cert": args.cert,
                 "goal": print_expr(goal), "out": args.out,
                 "metrics": _metrics_payload(m)},
          ([f"wrote {args.out}"] if args.out else [text.rstrip("\n")])
          + _metrics_lines(m))
    return 0


def _cmd_lowerbound(args):
    bound = check_lower_bound(args.k)
    ek = make_Ek(args.k)
    if args.out:
        _write(args.out, format_fml(lb_signature, ek))
    _emit(args, {"command": "lowerbound", "k": args.k, "bound": bound,
                 "out": args.out},
          [f"k={args.k}: every herbrand disjunction needs at least {bound} "
           f"instance(s); certified by chaining and drop-one countermodels"]
          + ([f"wrote {args.out}"] if args.out else []))
    return 0


def _cmd_demo_ek(args):
    k = args.k
    ek = make_Ek(k)
    proof = build_Ek_proof(k)
    report = check(proof)
    if not report.ok:
        raise RuntimeError("generated proof failed validation: "
                           + "; ".join(report.problems[:3]))
    m = metrics(proof)
    embedded = embed_proof(proof)

    parts, _ = prenex_parts(ek)
    names = [v for _, v in parts]
    body = ek
    for _ in names:
        body = body.body
    got = match_vars(body, set(names), embedded.end_formula)
    if got is None or set(got) != set(names):
        raise RuntimeError("embedded end formula does not instantiate the matrix")
    row = tuple(got[v] for v in names)
    supply = NameSupply(all_names(ek) | all_names(embedded.end_formula))
    fresh = [supply.fresh(v) for v in names]
    pattern = body
    from .syntax import FreeVar, instantiate
    for v, nv in zip(names, fresh):
        pattern = instantiate(pattern, v, FreeVar(nv))
    h, ec = extract_herbrand(embedded, Expansion(pattern, tuple(fresh), (row,)))

    certified = check_lower_bound(k) if k <= 3 else None
    expected = hyperexp(k, 1)
    lines = [f"k={k}: proof has {m.size} steps, critical count {m.cc} "
             f"(expected {13 * k + 10})",
             f"herbrand disjunction: {h.length} row(s), bound {h.bound}, "
             f"{h.trace.sweeps} sweep(s), {len(h.trace.rounds)} round(s)",
             f"tower value {expected}"
             + (f", certified minimum {certified}" if certified is not None else "")]
    if certified is not None:
        lines.append("length >= certified minimum: "
                     + ("yes" if h.length >= certified else "NO"))
    payload = {"command": "demo-ek", "k": k, "steps": m.size, "cc": m.cc,
               "cc_expected": 13 * k + 10, "length": h.length,
               "bound": str(h.bound), "sweeps": h.trace.sweeps,
               "rounds": len(h.trace.rounds), "certified": certified,
               "tower": str(expected)}
    if args.reconstruct:
        pc = herbrand_to_pc(h, ek)
        rep2 = check(pc)
        if not rep2.ok:
            raise RuntimeError("reconstructed proof failed validation: "
                               + "; ".join(rep2.problems[:3]))
        lines.append(f"reconstructed quantified proof: {len(pc.steps)} steps")
        payload["reconstructed_steps"] = len(pc.steps)
    if args.dir:
        os.makedirs(args.dir, exist_ok=True)
        _write(os.path.join(args.dir, f"e{k}.fml"), format_fml(lb_signature, ek))
        _write(os.path.join(args.dir, f"e{k}.prf"), format_proof(proof))
        _write(os.path.join(args.dir, f"e{k}_embedded.prf"), format_proof(embedded))
        _write(os.path.join(args.dir, f"e{k}.hbd"), format_hbd(h))
        _write(os.path.join(args.dir, f"e{k}_propositional.prf"), format_proof(ec))
        lines.append(f"wrote artifacts under {args.dir}")
        payload["dir"] = args.dir
    _emit(args, payload, lines)
    return 0


# ---------------------------------------------------------------------------

def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="epscalc",
        description="proof transformations in the epsilon calculus")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true",
                       help="one machine-readable JSON line")
        return p

    p = add("check", _cmd_check, "validate a .fml, .prf, or .hbd file")
    p.add_argument("file")

    p = add("translate", _cmd_translate, "eps-translate a formula")
    p.add_argument("file")
    p.add_argument("--out", help="write a .fml file instead of printing")

    p = add("embed", _cmd_embed, "embed a quantified proof into EC_eps")
    p.add_argument("file")
    p.add_argument("--out", help="write the embedded .prf here")

    p = add("eliminate", _cmd_eliminate,
            "eliminate critical formulas down to a herbrand disjunction")
    p.add_argument("--proof", required=True, help="EC_eps .prf file")
    p.add_argument("--matrix", required=True,
                   help=".hbd file seeding matrix, vars, and initial rows")
    p.add_argument("--cert", help="write the certified .hbd here")
    p.add_argument("--proof-out", dest="proof_out",
                   help="write the eps-free propositional .prf here")
    p.add_argument("--trace", action="store_true", help="print per-round accounting")

    p = add("second-eps", _cmd_second_eps,
            "prove the end formula again through the eps detour")
    p.add_argument("file", help="PC .prf file with a prenex end formula")
    p.add_argument("--out", help="write the rebuilt PC .prf here")
    p.add_argument("--cert", help="write the intermediate .hbd here")

    p = add("reconstruct", _cmd_reconstruct,
            "rebuild a quantified proof from a herbrand certificate")
    p.add_argument("--cert", required=True, help=".hbd file")
    p.add_argument("--goal", required=True, help=".fml file with the prenex goal")
    p.add_argument("--out", help="write the PC .prf here")

    p = add("lowerbound", _cmd_lowerbound,
            "certify the herbrand length bound for the chain sentence")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", help="write the sentence as .fml here")

    p = add("demo-ek", _cmd_demo_ek,
            "run the chain sentence through the whole pipeline")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--dir", help="write all intermediate artifacts here")
    p.add_argument("--reconstruct", action="store_true",
                   help="also rebuild a quantified proof from the certificate")

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, EliminationError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
