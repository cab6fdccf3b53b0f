"""Expression trees for epsilon-calculus syntax.

Two disjoint variable categories: free variables stand for themselves and
are never captured; bound variables are placeholders that belong to the
innermost enclosing binder with the same name.  Binders (forall, exists,
eps) store the bound name directly.  Well-formed expressions never rebind
a name an enclosing binder already binds, and never bind vacuously; a
term or formula containing bound-variable leaves that no binder covers is
only a semiterm or semiformula.

Expressions are immutable.  Every node computes its structural hash and
node count eagerly from its children, so equality gets a cheap negative
path and memo tables keyed on whole expressions stay fast.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum


class Expr:
    __slots__ = ()

    def __repr__(self):
        try:
            from .parser import print_expr
            return print_expr(self)
        except Exception:
            return object.__repr__(self)

    def __hash__(self):
        return self._h

    def __ne__(self, other):
        return not self.__eq__(other)


class FreeVar(Expr):
    __slots__ = ("name", "_h", "_size")

    def __init__(self, name):
        self.name = name
        self._h = hash((1, name))
        self._size = 1

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is FreeVar and self._h == other._h and self.name == other.name

    __hash__ = Expr.__hash__


class BoundVar(Expr):
    __slots__ = ("name", "_h", "_size")

    def __init__(self, name):
        self.name = name
        self._h = hash((2, name))
        self._size = 1

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is BoundVar and self._h == other._h and self.name == other.name

    __hash__ = Expr.__hash__


class _App(Expr):
    __slots__ = ("symbol", "args", "_h", "_size")
    _tag = None

    def __init__(self, symbol, args=()):
        self.symbol = symbol
        self.args = tuple(args)
        self._h = hash((self._tag, symbol) + tuple(a._h for a in self.args))
        self._size = 1 + sum(a._size for a in self.args)

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is type(self) and self._h == other._h
                and self.symbol == other.symbol and self.args == other.args)

    __hash__ = Expr.__hash__


class FuncApp(_App):
    __slots__ = ()
    _tag = 3


class PredApp(_App):
    __slots__ = ()
    _tag = 4


class Neg(Expr):
    __slots__ = ("body", "_h", "_size")

    def __init__(self, body):
        self.body = body
        self._h = hash((5, body._h))
        self._size = 1 + body._size

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is Neg and self._h == other._h and self.body == other.body

    __hash__ = Expr.__hash__


class _Binary(Expr):
    __slots__ = ("left", "right", "_h", "_size")
    _tag = None

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._h = hash((self._tag, left._h, right._h))
        self._size = 1 + left._size + right._size

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is type(self) and self._h == other._h
                and self.left == other.left and self.right == other.right)

    __hash__ = Expr.__hash__


class And(_Binary):
    __slots__ = ()
    _tag = 6


class Or(_Binary):
    __slots__ = ()
    _tag = 7


class Imp(_Binary):
    __slots__ = ()
    _tag = 8


class _Binder(Expr):
    __slots__ = ("var", "body", "_h", "_size")
    _tag = None

    def __init__(self, var, body):
        self.var = var
        self.body = body
        self._h = hash((self._tag, var, body._h))
        self._size = 1 + body._size

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is type(self) and self._h == other._h
                and self.var == other.var and self.body == other.body)

    __hash__ = Expr.__hash__


class Forall(_Binder):
    __slots__ = ()
    _tag = 9


class Exists(_Binder):
    __slots__ = ()
    _tag = 10


class Eps(_Binder):
    __slots__ = ()
    _tag = 11


_TERM_NODES = (FreeVar, BoundVar, FuncApp, Eps)
_FORMULA_NODES = (PredApp, Neg, And, Or, Imp, Forall, Exists)
_QUANTIFIERS = (Forall, Exists)


def is_term_node(e):
    return isinstance(e, _TERM_NODES)


def is_formula_node(e):
    return isinstance(e, _FORMULA_NODES)


def size(e):
    return e._size


def iter_nodes(e):
    """Pre-order traversal of every node, binder bodies included."""
    yield e
    if isinstance(e, _App):
        for a in e.args:
            yield from iter_nodes(a)
    elif isinstance(e, Neg):
        yield from iter_nodes(e.body)
    elif isinstance(e, _Binary):
        yield from iter_nodes(e.left)
        yield from iter_nodes(e.right)
    elif isinstance(e, _Binder):
        yield from iter_nodes(e.body)


def children(e):
    if isinstance(e, _App):
        return e.args
    if isinstance(e, Neg):
        return (e.body,)
    if isinstance(e, _Binary):
        return (e.left, e.right)
    if isinstance(e, _Binder):
        return (e.body,)
    return ()


def has_quantifier(e):
    return any(isinstance(n, _QUANTIFIERS) for n in iter_nodes(e))


def has_eps(e):
    return any(isinstance(n, Eps) for n in iter_nodes(e))


def free_var_names(e):
    return frozenset(n.name for n in iter_nodes(e) if isinstance(n, FreeVar))


def all_names(e):
    """Every identifier occurring in e: variables, binder names, symbols."""
    names = set()
    for n in iter_nodes(e):
        if isinstance(n, (FreeVar, BoundVar)):
            names.add(n.name)
        elif isinstance(n, _App):
            names.add(n.symbol)
        elif isinstance(n, _Binder):
            names.add(n.var)
    return names


_UNBOUND = {}


def unbound_bvar_names(e):
    """Names of bound-variable leaves not covered by any binder inside e."""
    got = _UNBOUND.get(e)
    if got is not None:
        return got
    if isinstance(e, BoundVar):
        got = frozenset((e.name,))
    elif isinstance(e, FreeVar):
        got = frozenset()
    elif isinstance(e, _Binder):
        got = unbound_bvar_names(e.body) - {e.var}
    else:
        got = frozenset()
        for c in children(e):
            got |= unbound_bvar_names(c)
    _UNBOUND[e] = got
    return got


def is_closed(e):
    return not unbound_bvar_names(e)


class ExprClass(Enum):
    TERM = "term"
    SEMITERM = "semiterm"
    FORMULA = "formula"
    SEMIFORMULA = "semiformula"
    ILLFORMED = "illformed"


@dataclass
class Signature:
    """Declared function and predicate symbols with arities."""
    funcs: dict = field(default_factory=dict)
    preds: dict = field(default_factory=dict)

    def merged(self, other):
        out = Signature(dict(self.funcs), dict(self.preds))
        for name, ar in other.funcs.items():
            if out.funcs.get(name, ar) != ar or name in out.preds:
                raise ValueError(f"signature conflict on symbol {name!r}")
            out.funcs[name] = ar
        for name, ar in other.preds.items():
            if out.preds.get(name, ar) != ar or name in out.funcs:
                raise ValueError(f"signature conflict on symbol {name!r}")
            out.preds[name] = ar
        return out

    @classmethod
    def collect(cls, *exprs):
        sig = cls()
        for e in exprs:
            for n in iter_nodes(e):
                if isinstance(n, FuncApp):
                    ar = sig.funcs.get(n.symbol)
                    if (ar is not None and ar != len(n.args)) or n.symbol in sig.preds:
                        raise ValueError(f"signature conflict on symbol {n.symbol!r}")
                    sig.funcs[n.symbol] = len(n.args)
                elif isinstance(n, PredApp):
                    ar = sig.preds.get(n.symbol)
                    if (ar is not None and ar != len(n.args)) or n.symbol in sig.funcs:
                        raise ValueError(f"signature conflict on symbol {n.symbol!r}")
                    sig.preds[n.symbol] = len(n.args)
        return sig


def classify_report(e, sig=None):
    """Classify e and report every well-formedness violation found.

    Violations: argument/child positions holding the wrong syntactic kind,
    inconsistent arities, one symbol used as both function and predicate,
    a binder nested inside another binder for the same name, binders whose
    variable never occurs in their body, variable names clashing with
    symbol names, and (with a signature) undeclared or misdeclared symbols.
    """
    problems = []
    funcs = {}
    preds = {}
    var_names = set()
    semi = False
    # stack entries: [name, seen_occurrence]
    stack = []

    def note(msg):
        if msg not in problems:
            problems.append(msg)

    def walk(n):
        nonlocal semi
        if isinstance(n, FreeVar):
            var_names.add(n.name)
        elif isinstance(n, BoundVar):
            var_names.add(n.name)
            for entry in reversed(stack):
                if entry[0] == n.name:
                    entry[1] = True
                    break
            else:
                semi = True
        elif isinstance(n, _App):
            table, other, kind = (funcs, preds, "function") if isinstance(n, FuncApp) \
                else (preds, funcs, "predicate")
            ar = table.get(n.symbol)
            if ar is not None and ar != len(n.args):
                note(f"symbol {n.symbol!r} used with arities {ar} and {len(n.args)}")
            table.setdefault(n.symbol, len(n.args))
            if n.symbol in other:
                note(f"symbol {n.symbol!r} used as both function and predicate")
            if sig is not None:
                declared = (sig.funcs if isinstance(n, FuncApp) else sig.preds).get(n.symbol)
                if declared is None:
                    note(f"undeclared {kind} symbol {n.symbol!r}")
                elif declared != len(n.args):
                    note(f"{kind} symbol {n.symbol!r} declared with arity {declared}, "
                         f"used with {len(n.args)}")
            for a in n.args:
                if not is_term_node(a):
                    note(f"non-term argument under {n.symbol!r}")
                walk(a)
        elif isinstance(n, Neg):
            if not is_formula_node(n.body):
                note("negation of a non-formula")
            walk(n.body)
        elif isinstance(n, _Binary):
            for c in (n.left, n.right):
                if not is_formula_node(c):
                    note("connective applied to a non-formula")
                walk(c)
        elif isinstance(n, _Binder):
            var_names.add(n.var)
            if any(entry[0] == n.var for entry in stack):
                note(f"binder for {n.var!r} nested inside another binder for {n.var!r}")
            if not is_formula_node(n.body):
                note("binder over a non-formula")
            stack.append([n.var, False])
            walk(n.body)
            entry = stack.pop()
            if not entry[1]:
                note(f"binder for {n.var!r} never uses its variable")
        else:
            note(f"unknown node {type(n).__name__}")

    walk(e)
    clash = var_names & (set(funcs) | set(preds))
    if sig is not None:
        clash |= var_names & (set(sig.funcs) | set(sig.preds))
    for name in sorted(clash):
        note(f"name {name!r} used both as a variable and as a symbol")

    if problems:
        return ExprClass.ILLFORMED, problems
    if is_term_node(e):
        return (ExprClass.SEMITERM if semi else ExprClass.TERM), []
    return (ExprClass.SEMIFORMULA if semi else ExprClass.FORMULA), []


def classify(e, sig=None):
    return classify_report(e, sig)[0]


# ---------------------------------------------------------------------------
# alpha-canonical forms

_CANON = {}


def canon(e):
    """Alpha-canonical form: binder names become $1, $2, ... in pre-order.

    Bound-variable leaves that no binder covers keep their names, so
    semiterms canonicalize without losing their open ends.  "$" never
    occurs in parsed identifiers, so canonical names cannot collide.
    """
    got = _CANON.get(e)
    if got is None:
        got = _canon(e, {}, itertools.count(1))
        _CANON[e] = got
    return got


def _canon(e, env, counter):
    if isinstance(e, FreeVar):
        return e
    if isinstance(e, BoundVar):
        new = env.get(e.name)
        return e if new is None else BoundVar(new)
    if isinstance(e, _App):
        return type(e)(e.symbol, tuple(_canon(a, env, counter) for a in e.args))
    if isinstance(e, Neg):
        return Neg(_canon(e.body, env, counter))
    if isinstance(e, _Binary):
        return type(e)(_canon(e.left, env, counter), _canon(e.right, env, counter))
    new = f"${next(counter)}"
    inner = dict(env)
    inner[e.var] = new
    return type(e)(new, _canon(e.body, inner, counter))


def alpha_eq(a, b):
    if a is b:
        return True
    if a._h == b._h and a == b:
        return True
    return canon(a) == canon(b)


# ---------------------------------------------------------------------------
# substitution

def _fresh(base, used):
    stem = base.rstrip("0123456789") or base
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in used:
            return cand


class NameSupply:
    """Deterministic source of fresh identifiers for one construction run."""

    def __init__(self, reserved=()):
        self._used = set(reserved)

    def reserve(self, names):
        self._used.update(names)

    def seen(self, *exprs):
        for e in exprs:
            self._used.update(all_names(e))

    def fresh(self, base):
        name = _fresh(base, self._used)
        self._used.add(name)
        return name


def _rename_binders(e, mapping, env=None):
    # renames binder occurrences listed in mapping together with the
    # bound-variable leaves they cover; open leaves stay untouched
    if env is None:
        env = {}
    if isinstance(e, FreeVar):
        return e
    if isinstance(e, BoundVar):
        new = env.get(e.name)
        return e if new is None else BoundVar(new)
    if isinstance(e, _App):
        return type(e)(e.symbol, tuple(_rename_binders(a, mapping, env) for a in e.args))
    if isinstance(e, Neg):
        return Neg(_rename_binders(e.body, mapping, env))
    if isinstance(e, _Binary):
        return type(e)(_rename_binders(e.left, mapping, env),
                       _rename_binders(e.right, mapping, env))
    new = mapping.get(e.var)
    if new is None:
        if e.var in env:
            env = dict(env)
            del env[e.var]
        return type(e)(e.var, _rename_binders(e.body, mapping, env))
    env = dict(env)
    env[e.var] = new
    return type(e)(new, _rename_binders(e.body, mapping, env))


def _binder_names(e):
    return {n.var for n in iter_nodes(e) if isinstance(n, _Binder)}


def _splice(host, hit, t, stop_name=None):
    """Replace the outermost nodes satisfying hit with t.

    Collision handling: binders of t that would end up nested under a
    same-named binder on some replacement path are renamed first, with
    deterministic fresh names.  If t has open bound-variable leaves that a
    binder above a replacement site would silently capture, this raises;
    capture is only ever legitimate when a later splice installs the
    binder itself.  Descent stops below binders named stop_name and below
    replaced nodes.
    """
    path = []
    above = set()
    captured = set()
    t_open = unbound_bvar_names(t)
    found = False

    def scan(n):
        nonlocal found
        if hit(n):
            found = True
            above.update(path)
            captured.update(t_open & set(path))
            return
        if isinstance(n, _Binder):
            if n.var == stop_name:
                return
            path.append(n.var)
            scan(n.body)
            path.pop()
        else:
            for c in children(n):
                scan(c)

    scan(host)
    if not found:
        return host
    if captured:
        raise ValueError(
            f"substitution would capture open variables {sorted(captured)}")
    clashes = _binder_names(t) & above
    if clashes:
        used = all_names(host) | all_names(t)
        mapping = {}
        for name in sorted(clashes):
            mapping[name] = _fresh(name, used)
            used.add(mapping[name])
        t = _rename_binders(t, mapping)

    def build(n):
        if hit(n):
            return t
        if isinstance(n, (FreeVar, BoundVar)):
            return n
        if isinstance(n, _App):
            args = tuple(build(a) for a in n.args)
            if all(a2 is a for a2, a in zip(args, n.args)):
                return n
            return type(n)(n.symbol, args)
        if isinstance(n, Neg):
            b = build(n.body)
            return n if b is n.body else Neg(b)
        if isinstance(n, _Binary):
            le, ri = build(n.left), build(n.right)
            if le is n.left and ri is n.right:
                return n
            return type(n)(le, ri)
        if n.var == stop_name:
            return n
        b = build(n.body)
        return n if b is n.body else type(n)(n.var, b)

    return build(host)


def substitute(e, name, t):
    """Replace every free-variable leaf called name with the closed term t."""
    if not is_term_node(t) or not is_closed(t):
        raise ValueError("substitute requires a closed term")
    return _splice(e, lambda n: isinstance(n, FreeVar) and n.name == name, t)


def instantiate(body, bvar, t):
    """Replace the open bound-variable leaves called bvar with the term t.

    This is the binder-removal step: body is the scope of a stripped
    binder for bvar.  t may itself contain open bound-variable leaves;
    those stay open and are meant to be closed by binders installed
    later, so they are not renamed here.
    """
    if not is_term_node(t):
        raise ValueError("instantiate requires a term or semiterm")
    return _splice(body, lambda n: isinstance(n, BoundVar) and n.name == bvar, t,
                   stop_name=bvar)


def abstract(e, free_name, bvar):
    """Turn free-variable leaves called free_name into bound leaves for bvar.

    Inverse of instantiate for the simple case: the caller is about to wrap
    the result in a binder for bvar.  bvar must be unused in e, otherwise
    the new leaves would blur into existing material.
    """
    if bvar in all_names(e):
        raise ValueError(f"abstraction variable {bvar!r} already occurs")
    return _splice(e, lambda n: isinstance(n, FreeVar) and n.name == free_name,
                   BoundVar(bvar))


def replace_eps(host, target, t):
    """Replace outermost subterms alpha-equal to the eps-term target with t.

    Replaced positions are not descended into, so nested copies inside a
    replaced occurrence are left to the inserted t.
    """
    if not isinstance(target, Eps):
        raise ValueError("replacement target must be an eps-term")
    if not is_term_node(t) or not is_closed(t):
        raise ValueError("replace_eps requires a closed replacement term")
    ct = canon(target)
    n_target = target._size

    def hit(n):
        return isinstance(n, Eps) and n._size == n_target and canon(n) == ct

    return _splice(host, hit, t)


# ---------------------------------------------------------------------------
# subterm structure, degree, rank

def immediate_subterms(e):
    """The maximal terms sitting at argument positions of e.

    For a compound term these are its arguments; for an eps-term, the
    argument terms of its matrix; for a formula, the argument terms of its
    atoms, gathered through connectives and binders.
    """
    if isinstance(e, (FreeVar, BoundVar)):
        return ()
    if isinstance(e, FuncApp):
        return e.args
    out = []
    seen = set()
    def add(ts):
        for s in ts:
            if s not in seen:
                seen.add(s)
                out.append(s)
    if isinstance(e, Eps):
        add(immediate_subterms(e.body))
    elif isinstance(e, PredApp):
        add(e.args)
    else:
        for c in children(e):
            add(immediate_subterms(c))
    return tuple(out)


def subterms(e):
    """All subterms of e.  A term counts itself; a formula contributes the
    subterms of the terms at its argument positions."""
    out = []
    seen = set()

    def walk(n, as_term):
        if as_term:
            if n in seen:
                return
            seen.add(n)
            out.append(n)
        for s in immediate_subterms(n):
            walk(s, True)

    walk(e, is_term_node(e))
    return tuple(out)


def maximal_closed_eps(e):
    """Outermost closed eps-subterms of e, in pre-order."""
    out = []
    seen = set()

    def walk(n):
        if isinstance(n, Eps) and not unbound_bvar_names(n):
            if n not in seen:
                seen.add(n)
                out.append(n)
            return
        for c in children(n):
            walk(c)

    walk(e)
    return tuple(out)


def _all_eps(e):
    return [n for n in iter_nodes(e) if isinstance(n, Eps)]


_DEGREE = {}
_RANK = {}


def degree(e):
    """Nesting depth of closed eps-terms: 1 plus the maximal degree of the
    outermost closed eps-subterms of the matrix, or 1 if there are none.
    Eps-subterms still containing the matrix variable are not closed and
    contribute nothing here; rank accounts for them."""
    if not isinstance(e, Eps) or unbound_bvar_names(e):
        raise ValueError("degree is defined for closed eps-terms")
    key = canon(e)
    got = _DEGREE.get(key)
    if got is None:
        inner = maximal_closed_eps(e.body)
        got = 1 + max((degree(s) for s in inner), default=0)
        _DEGREE[key] = got
    return got


def subordinate(e):
    """Eps-subterms of the matrix, at any depth, that still contain the
    variable e binds.  These block elimination of e until they are gone."""
    if not isinstance(e, Eps):
        raise ValueError("subordination is defined for eps-terms")
    return tuple(s for s in _all_eps(e.body) if e.var in unbound_bvar_names(s))


def rank(e):
    """1 plus the maximal rank of the subordinate eps-subterms, or 1."""
    if not isinstance(e, Eps):
        raise ValueError("rank is defined for eps-terms")
    key = canon(e)
    got = _RANK.get(key)
    if got is None:
        subs = subordinate(e)
        got = 1 + max((rank(s) for s in subs), default=0)
        _RANK[key] = got
    return got


def clear_caches():
    _CANON.clear()
    _UNBOUND.clear()
    _DEGREE.clear()
    _RANK.clear()


# ---------------------------------------------------------------------------
# small constructors used throughout

def or_chain(parts):
    parts = list(parts)
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def and_chain(parts):
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def or_parts(e):
    out = []
    while isinstance(e, Or):
        out.append(e.left)
        e = e.right
    out.append(e)
    return out


def and_parts(e):
    out = []
    while isinstance(e, And):
        out.append(e.left)
        e = e.right
    out.append(e)
    return out
