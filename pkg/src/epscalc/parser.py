"""Concrete syntax: tokenizer, recursive-descent parser, printer, file formats.

Grammar sketch::

    formula  :=  or-chain [ '->' formula ]            right-associative
    or-chain :=  and-chain { '|' and-chain }          left-associative
    and-chain:=  unary { '&' unary }                  left-associative
    unary    :=  '~' unary | '(' formula ')' | binder | atom
    binder   :=  ('forall' | 'exists') name '.' formula
    atom     :=  name [ '(' term {',' term} ')' ]
    term     :=  'eps' name '.' formula | name [ '(' term {',' term} ')' ]

Binder bodies extend as far right as possible.  Identifiers are
[A-Za-z0-9_][A-Za-z0-9_']*, so numeral-style constants like 0 are plain
identifiers.  A bare name inside a matching binder scope is a bound
variable; otherwise it is a declared constant or a free variable.  "$" is
reserved for canonical bound names and never tokenizes.
"""

from __future__ import annotations

import re

from .syntax import (
    And, BoundVar, Eps, Exists, Forall, FreeVar, FuncApp, Imp, Neg, Or,
    PredApp, Signature, is_term_node,
)

KEYWORDS = ("forall", "exists", "eps")

_TOKEN = re.compile(r"->|[()~&|,.]|[A-Za-z0-9_][A-Za-z0-9_']*")
_WS = re.compile(r"\s*")


class ParseError(Exception):
    pass


class PrintError(Exception):
    pass


def _tokenize(text):
    out = []
    pos = 0
    while True:
        pos = _WS.match(text, pos).end()
        if pos == len(text):
            out.append(("eof", "", pos))
            return out
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"bad character {text[pos]!r} at offset {pos}")
        out.append((m.group(), m.group(), pos))
        pos = m.end()


class _Parser:
    def __init__(self, text, sig):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.scope = []

    def peek(self):
        return self.toks[self.i][0]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r} "
                             f"at offset {tok[2]}")
        return tok

    def ident(self):
        tok = self.next()
        if not re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_']*", tok[0]) or tok[0] in KEYWORDS:
            raise ParseError(f"expected a name at offset {tok[2]}")
        return tok[0]

    # --- formulas ---

    def formula(self):
        left = self.or_chain()
        if self.peek() == "->":
            self.next()
            return Imp(left, self.formula())
        return left

    def or_chain(self):
        e = self.and_chain()
        while self.peek() == "|":
            self.next()
            e = Or(e, self.and_chain())
        return e

    def and_chain(self):
        e = self.unary()
        while self.peek() == "&":
            self.next()
            e = And(e, self.unary())
        return e

    def unary(self):
        t = self.peek()
        if t == "~":
            self.next()
            return Neg(self.unary())
        if t == "(":
            self.next()
            e = self.formula()
            self.expect(")")
            return e
        if t in ("forall", "exists"):
            self.next()
            var = self.ident()
            self.expect(".")
            self.scope.append(var)
            body = self.formula()
            self.scope.pop()
            return (Forall if t == "forall" else Exists)(var, body)
        if t == "eps":
            raise ParseError(f"eps-term in formula position at offset "
                             f"{self.toks[self.i][2]}")
        return self.atom()

    def atom(self):
        pos = self.toks[self.i][2]
        name = self.ident()
        args = self.arglist()
        if self.sig is not None:
            declared = self.sig.preds.get(name)
            if declared is None:
                raise ParseError(f"undeclared predicate {name!r} at offset {pos}")
            if declared != len(args):
                raise ParseError(f"predicate {name!r} expects {declared} arguments, "
                                 f"got {len(args)} at offset {pos}")
        return PredApp(name, args)

    def arglist(self):
        if self.peek() != "(":
            return ()
        self.next()
        args = [self.term()]
        while self.peek() == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    # --- terms ---

    def term(self):
        if self.peek() == "eps":
            self.next()
            var = self.ident()
            self.expect(".")
            self.scope.append(var)
            body = self.formula()
            self.scope.pop()
            return Eps(var, body)
        pos = self.toks[self.i][2]
        name = self.ident()
        if self.peek() == "(":
            args = self.arglist()
            if self.sig is not None:
                declared = self.sig.funcs.get(name)
                if declared is None:
                    raise ParseError(f"undeclared function {name!r} at offset {pos}")
                if declared != len(args):
                    raise ParseError(f"function {name!r} expects {declared} arguments, "
                                     f"got {len(args)} at offset {pos}")
            return FuncApp(name, args)
        if name in self.scope:
            return BoundVar(name)
        if self.sig is not None and self.sig.funcs.get(name) == 0:
            return FuncApp(name, ())
        return FreeVar(name)


def parse_formula(text, sig=None):
    p = _Parser(text, sig)
    e = p.formula()
    p.expect("eof")
    return e


def parse_term(text, sig=None):
    p = _Parser(text, sig)
    e = p.term()
    p.expect("eof")
    return e


# ---------------------------------------------------------------------------
# printing

_LEVEL_IMP = 1
_LEVEL_OR = 2
_LEVEL_AND = 3
_LEVEL_NEG = 4
_LEVEL_ATOM = 5


def print_expr(e):
    """Minimal-parenthesis concrete syntax; parse(print(e)) == e for
    well-formed input.  Raises PrintError if a free variable is shadowed
    by an enclosing binder of the same name, since the printed form would
    read back bound."""
    parts = []
    _pp(e, _LEVEL_IMP, [], parts)
    return "".join(parts)


def _pp(e, req, scope, out):
    if isinstance(e, FreeVar):
        if e.name in scope:
            raise PrintError(f"free variable {e.name!r} shadowed by a binder")
        out.append(e.name)
        return
    if isinstance(e, BoundVar):
        out.append(e.name)
        return
    if isinstance(e, (FuncApp, PredApp)):
        if e.symbol in KEYWORDS:
            raise PrintError(f"symbol {e.symbol!r} collides with a keyword")
        out.append(e.symbol)
        if e.args:
            out.append("(")
            for k, a in enumerate(e.args):
                if k:
                    out.append(", ")
                _pp(a, _LEVEL_IMP, scope, out)
            out.append(")")
        return
    if isinstance(e, Neg):
        wrap = _LEVEL_NEG < req
        if wrap:
            out.append("(")
        out.append("~")
        _pp(e.body, _LEVEL_NEG, scope, out)
        if wrap:
            out.append(")")
        return
    if isinstance(e, (And, Or)):
        level, sep, childreq = ((_LEVEL_AND, " & ", _LEVEL_NEG) if isinstance(e, And)
                                else (_LEVEL_OR, " | ", _LEVEL_AND))
        wrap = level < req
        if wrap:
            out.append("(")
        _pp(e.left, level, scope, out)
        out.append(sep)
        _pp(e.right, childreq, scope, out)
        if wrap:
            out.append(")")
        return
    if isinstance(e, Imp):
        wrap = _LEVEL_IMP < req
        if wrap:
            out.append("(")
        _pp(e.left, _LEVEL_OR, scope, out)
        out.append(" -> ")
        _pp(e.right, _LEVEL_IMP, scope, out)
        if wrap:
            out.append(")")
        return
    if isinstance(e, (Forall, Exists, Eps)):
        if e.var in KEYWORDS:
            raise PrintError(f"binder name {e.var!r} collides with a keyword")
        word = "forall" if isinstance(e, Forall) else \
               "exists" if isinstance(e, Exists) else "eps"
        wrap = _LEVEL_IMP < req
        if wrap:
            out.append("(")
        out.append(f"{word} {e.var}. ")
        scope.append(e.var)
        _pp(e.body, _LEVEL_IMP, scope, out)
        scope.pop()
        if wrap:
            out.append(")")
        return
    raise PrintError(f"cannot print {type(e).__name__}")


# ---------------------------------------------------------------------------
# file formats

def _sig_lines(sig):
    out = []
    for name in sorted(sig.funcs):
        out.append(f"sig func {name} {sig.funcs[name]}")
    for name in sorted(sig.preds):
        out.append(f"sig pred {name} {sig.preds[name]}")
    return out


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_sig_line(line, sig, lineno):
    fields = line.split()
    if len(fields) != 4 or fields[1] not in ("func", "pred") or not fields[3].isdigit():
        raise ParseError(f"line {lineno}: expected 'sig func|pred <name> <arity>'")
    table = sig.funcs if fields[1] == "func" else sig.preds
    other = sig.preds if fields[1] == "func" else sig.funcs
    if fields[2] in other or table.get(fields[2], int(fields[3])) != int(fields[3]):
        raise ParseError(f"line {lineno}: conflicting declaration of {fields[2]!r}")
    table[fields[2]] = int(fields[3])


def format_fml(sig, formula):
    return "\n".join(_sig_lines(sig) + [f"formula {print_expr(formula)}"]) + "\n"


def parse_fml(text):
    sig = Signature()
    formula = None
    for lineno, line in _content_lines(text):
        if line.startswith("sig "):
            _parse_sig_line(line, sig, lineno)
        elif line.startswith("formula "):
            if formula is not None:
                raise ParseError(f"line {lineno}: second formula line")
            formula = parse_formula(line[len("formula "):], sig)
        else:
            raise ParseError(f"line {lineno}: unrecognized line {line!r}")
    if formula is None:
        raise ParseError("no formula line")
    return sig, formula


def format_proof(proof):
    from .proofs import Crit, ExAx, ForallAx, GenExists, GenForall, Hyp, MP, Taut

    sig = proof.signature()
    lines = [f"calculus {proof.calculus}"]
    lines += _sig_lines(sig)
    for label, f in proof.hypotheses:
        lines.append(f"hyp {label} {print_expr(f)}")
    for idx, step in enumerate(proof.steps, start=1):
        j = step.just
        if isinstance(j, Taut):
            tail = "taut"
        elif isinstance(j, Crit):
            tail = f"crit {print_expr(j.term)}"
        elif isinstance(j, ExAx):
            tail = f"exax {print_expr(j.term)}"
        elif isinstance(j, ForallAx):
            tail = f"forallax {print_expr(j.term)}"
        elif isinstance(j, MP):
            tail = f"mp {j.premise + 1} {j.implication + 1}"
        elif isinstance(j, GenForall):
            tail = f"genforall {j.premise + 1} {j.eigen}"
        elif isinstance(j, GenExists):
            tail = f"genexists {j.premise + 1} {j.eigen}"
        elif isinstance(j, Hyp):
            tail = f"hyp {j.label}"
        else:
            raise PrintError(f"cannot format justification {j!r}")
        lines.append(f"{idx} {print_expr(step.formula)} :: {tail}")
    return "\n".join(lines) + "\n"


def parse_proof(text):
    from .proofs import (
        Crit, ExAx, ForallAx, GenExists, GenForall, Hyp, MP, Proof, Step, Taut,
    )

    calculus = None
    sig = Signature()
    hyps = []
    steps = []
    for lineno, line in _content_lines(text):
        if line.startswith("calculus "):
            calculus = line.split(None, 1)[1]
            if calculus not in ("EC", "EC_eps", "PC", "PC_eps"):
                raise ParseError(f"line {lineno}: unknown calculus {calculus!r}")
        elif line.startswith("sig "):
            _parse_sig_line(line, sig, lineno)
        elif line.startswith("hyp "):
            fields = line.split(None, 2)
            if len(fields) != 3:
                raise ParseError(f"line {lineno}: expected 'hyp <label> <formula>'")
            hyps.append((fields[1], parse_formula(fields[2], sig)))
        else:
            m = re.match(r"(\d+)\s+(.*?)\s*::\s*(\S+)\s*(.*)$", line)
            if not m:
                raise ParseError(f"line {lineno}: expected '<n> <formula> :: <rule>'")
            idx, ftext, rule, rest = m.groups()
            if int(idx) != len(steps) + 1:
                raise ParseError(f"line {lineno}: step numbered {idx}, "
                                 f"expected {len(steps) + 1}")
            formula = parse_formula(ftext, sig)
            rest = rest.strip()
            if rule == "taut":
                if rest:
                    raise ParseError(f"line {lineno}: taut takes no arguments")
                just = Taut()
            elif rule in ("crit", "exax", "forallax"):
                term = parse_term(rest, sig)
                just = {"crit": Crit, "exax": ExAx, "forallax": ForallAx}[rule](term)
            elif rule == "mp":
                fields = rest.split()
                if len(fields) != 2 or not all(f.isdigit() for f in fields):
                    raise ParseError(f"line {lineno}: expected 'mp <premise> <implication>'")
                just = MP(int(fields[0]) - 1, int(fields[1]) - 1)
            elif rule in ("genforall", "genexists"):
                fields = rest.split()
                if len(fields) != 2 or not fields[0].isdigit():
                    raise ParseError(f"line {lineno}: expected '{rule} <premise> <eigenvar>'")
                cls = GenForall if rule == "genforall" else GenExists
                just = cls(int(fields[0]) - 1, fields[1])
            elif rule == "hyp":
                just = Hyp(rest)
            else:
                raise ParseError(f"line {lineno}: unknown rule {rule!r}")
            steps.append(Step(formula, just))
    if calculus is None:
        raise ParseError("no calculus line")
    return Proof(calculus=calculus, hypotheses=tuple(hyps), steps=tuple(steps))


def format_hbd(h):
    lines = _sig_lines(Signature.collect(h.matrix, *[t for row in h.rows for t in row]))
    lines.append(f"matrix {print_expr(h.matrix)}")
    for v in h.vars:
        lines.append(f"var {v}")
    for row in h.rows:
        lines.append("row " + " ; ".join(print_expr(t) for t in row))
    lines.append(f"length {h.length}")
    lines.append(f"cc {h.cc}")
    lines.append(f"bound {h.bound}")
    lines.append(f"tautology {'true' if h.tautology_ok else 'false'}")
    return "\n".join(lines) + "\n"


def parse_hbd(text):
    from .elimination import HerbrandDisjunction, hyperexp

    sig = Signature()
    matrix = None
    vars_ = []
    rows = []
    fields = {}
    for lineno, line in _content_lines(text):
        if line.startswith("sig "):
            _parse_sig_line(line, sig, lineno)
        elif line.startswith("matrix "):
            matrix = parse_formula(line[len("matrix "):], sig)
        elif line.startswith("var "):
            vars_.append(line.split(None, 1)[1])
        elif line.startswith("row "):
            cells = line[len("row "):].split(";")
            rows.append(tuple(parse_term(c.strip(), sig) for c in cells))
        else:
            key, _, value = line.partition(" ")
            if key not in ("length", "cc", "bound", "tautology"):
                raise ParseError(f"line {lineno}: unrecognized line {line!r}")
            fields[key] = value.strip()
    if matrix is None:
        raise ParseError("no matrix line")
    bound_text = fields.get("bound", "0")
    m = re.fullmatch(r"tower\((\d+),\s*(\d+)\)", bound_text)
    bound = hyperexp(int(m.group(1)), int(m.group(2))) if m else int(bound_text)
    return HerbrandDisjunction(
        matrix=matrix,
        vars=tuple(vars_),
        rows=tuple(rows),
        length=int(fields.get("length", len(rows))),
        cc=int(fields.get("cc", 0)),
        bound=bound,
        tautology_ok=fields.get("tautology", "false") == "true",
        trace=(),
    )
