"""Between prenex theorems and their Herbrand disjunctions.

Forward: a proof of a closed prenex sentence becomes a proof of its pure
existential form, every universally quantified position witnessed by a fresh
function of the existential variables before it.  That feeds the embedding
and elimination pipeline, which ends in a disjunction of matrix instances.

Backward: from such a disjunction the original sentence is rederived in the
quantifier calculus.  Witness-function terms turn back into eigenvariables,
and a scheduler rebinds quantifier positions disjunct by disjunct, right to
left, existentials whenever due and universals once their eigenvariable has
disappeared from the rest of the disjunction.  Lockstep binding deadlocks on
formulas whose instances share witness terms, so the scheduler is greedy and
merges duplicate disjuncts as they appear.
"""

from __future__ import annotations

from .syntax import (
    BoundVar, Exists, Forall, FreeVar, FuncApp, Imp, Neg, NameSupply,
    abstract, all_names, alpha_eq, canon, free_var_names, has_quantifier,
    instantiate, or_chain,
)
from .proofs import (
    ProofBuilder, check, is_tautology, match_vars, normalize,
)
from .parser import print_expr
from .embedding import embed_proof
from .elimination import Expansion, extract_herbrand


def prenex_parts(f):
    """Leading quantifier prefix as (kind, var) pairs plus the scope left
    under it.  The scope is quantifier-free exactly when f is prenex."""
    prefix = []
    while isinstance(f, (Forall, Exists)):
        prefix.append(("forall" if isinstance(f, Forall) else "exists", f.var))
        f = f.body
    return tuple(prefix), f


def herbrand_normal_form(f):
    """The pure existential form of a closed prenex formula.

    Every universal variable becomes a fresh function applied to the
    existential variables standing before it.  Returns the formula and the
    witness table, rows (universal var, function name, preceding existential
    vars).  Deterministic: same input, same names.
    """
    prefix, matrix = prenex_parts(f)
    if has_quantifier(matrix):
        raise ValueError("herbrand normal form needs a prenex formula")
    supply = NameSupply(all_names(f))
    exist = []
    table = []
    m = matrix
    for kind, var in prefix:
        if kind == "exists":
            exist.append(var)
        else:
            fname = supply.fresh("f_" + var)
            m = instantiate(m, var, FuncApp(fname, tuple(BoundVar(x) for x in exist)))
            table.append((var, fname, tuple(exist)))
    out = m
    for var in reversed(exist):
        out = Exists(var, out)
    return out, tuple(table)


def hnf_proof(p):
    """Turn a proof of a closed prenex sentence into a proof of its pure
    existential form.  Input without universal quantifiers comes back as is."""
    goal = p.end_formula
    hnf, table = herbrand_normal_form(goal)
    if not table:
        return p

    b = ProofBuilder(p.calculus, p.hypotheses)
    for st in p.steps:
        b.add(st.formula, st.just)
    k_end = len(b.steps) - 1

    reserved = set(all_names(goal)) | {fname for _, fname, _ in table}
    for st in p.steps:
        reserved |= all_names(st.formula)
    for _, f in p.hypotheses:
        reserved |= all_names(f)
    supply = NameSupply(reserved)
    tbl = {var: (fname, pre) for var, fname, pre in table}

    def rec(f, ctx):
        # index of a step proving f -> (its pure existential form)
        if isinstance(f, Exists):
            a = supply.fresh(f.var)
            g_a = instantiate(f.body, f.var, FreeVar(a))
            k_sub = rec(g_a, {**ctx, f.var: a})
            h_a = b.formula(k_sub).right
            target = Exists(f.var, abstract(h_a, a, f.var))
            k_ax = b.exax(target, FreeVar(a))
            k_chain = b.by_taut(Imp(g_a, target), k_sub, k_ax)
            return b.gen_exists(k_chain, a, f.var, target=Imp(f, target))
        if isinstance(f, Forall):
            fname, pre = tbl[f.var]
            t = FuncApp(fname, tuple(FreeVar(ctx[x]) for x in pre))
            k_ax = b.forallax(f, t)
            k_sub = rec(b.formula(k_ax).right, ctx)
            return b.by_taut(Imp(f, b.formula(k_sub).right), k_ax, k_sub)
        return b.taut(Imp(f, f))

    k_imp = rec(goal, {})
    b.mp(k_end, k_imp)
    out = normalize(b.build())
    if not alpha_eq(out.end_formula, hnf):
        raise RuntimeError("witnessed form drifted from the normal form")
    return out


# ---------------------------------------------------------------------------
# reconstruction

def _sub_term(t, u, v):
    # ground witness terms contain no binders, so plain structural rewriting
    if t == u:
        return v
    if isinstance(t, FuncApp):
        args = tuple(_sub_term(a, u, v) for a in t.args)
        if all(a is b for a, b in zip(args, t.args)):
            return t
        return FuncApp(t.symbol, args)
    return t


def _collect_headed(t, fnames, seen, order):
    if isinstance(t, FuncApp):
        if t.symbol in fnames:
            key = canon(t)
            if key not in seen:
                seen.add(key)
                order.append(t)
        for a in t.args:
            _collect_headed(a, fnames, seen, order)


class _Disjunct:
    __slots__ = ("vec", "bound_from", "formula")

    def __init__(self, vec, bound_from, formula):
        self.vec = vec
        self.bound_from = bound_from
        self.formula = formula


def herbrand_to_pc(h, goal, prune_rows=True):
    """Rebuild a quantifier-calculus proof of the closed prenex goal from a
    Herbrand disjunction of its pure existential form."""
    prefix, matrix = prenex_parts(goal)
    if has_quantifier(matrix):
        raise ValueError("goal must be prenex")
    _, table = herbrand_normal_form(goal)
    tbl = {var: (fname, pre) for var, fname, pre in table}
    fnames = {fname for _, fname, _ in table}
    n_exist = sum(1 for kind, _ in prefix if kind == "exists")
    if any(len(row) != n_exist for row in h.rows):
        raise ValueError("row width does not match the existential prefix")

    # full prefix vectors: existential slots from the row, universal slots
    # the witness function at the preceding existential terms
    vectors = []
    for row in h.rows:
        vec = []
        ex_so_far = []
        it = iter(row)
        for kind, var in prefix:
            if kind == "exists":
                t = next(it)
                vec.append(t)
                ex_so_far.append(t)
            else:
                vec.append(FuncApp(tbl[var][0], tuple(ex_so_far)))
        vectors.append(vec)

    # witness terms back to eigenvariables, outermost first so a term
    # disappears before its proper subterms are considered
    reserved = set(all_names(goal)) | fnames
    for vec in vectors:
        for t in vec:
            reserved |= all_names(t)
    supply = NameSupply(reserved)
    seen = set()
    order = []
    for vec in vectors:
        for t in vec:
            _collect_headed(t, fnames, seen, order)
    order.sort(key=lambda t: (-t._size, print_expr(canon(t))))
    for u in order:
        v = FreeVar(supply.fresh("a"))
        vectors = [[_sub_term(t, u, v) for t in vec] for vec in vectors]

    for vec in vectors:
        for (kind, _), t in zip(prefix, vec):
            if kind == "forall" and not isinstance(t, FreeVar):
                raise RuntimeError(f"universal slot still holds {t!r}")

    def partial(vec, bound_from):
        f = matrix
        for k in range(bound_from):
            f = instantiate(f, prefix[k][1], vec[k])
        for k in range(len(prefix) - 1, bound_from - 1, -1):
            kind, var = prefix[k]
            f = (Forall if kind == "forall" else Exists)(var, f)
        return f

    m = len(prefix)
    uniq = []
    keys = set()
    for vec in vectors:
        key = tuple(canon(t) for t in vec)
        if key not in keys:
            keys.add(key)
            uniq.append(vec)
    vectors = uniq
    if prune_rows and len(vectors) > 1:
        i = 0
        while i < len(vectors) and len(vectors) > 1:
            rest = vectors[:i] + vectors[i + 1:]
            if is_tautology(or_chain([partial(v, m) for v in rest])):
                vectors = rest
            else:
                i += 1

    b = ProofBuilder("PC")
    ds = [_Disjunct(vec, m, partial(vec, m)) for vec in vectors]
    cur = b.taut(or_chain([d.formula for d in ds]))

    def refresh(*extra):
        nonlocal cur
        cur = b.by_taut(or_chain([d.formula for d in ds]), cur, *extra)

    while True:
        # merge duplicate disjuncts so a shared eigenvariable can be bound
        merged = True
        while merged:
            merged = False
            seen_f = {}
            for i, d in enumerate(ds):
                key = canon(d.formula)
                if key in seen_f:
                    del ds[i]
                    refresh()
                    merged = True
                    break
                seen_f[key] = i
        if all(d.bound_from == 0 for d in ds):
            break
        progressed = False
        for d in ds:
            if d.bound_from == 0:
                continue
            k = d.bound_from - 1
            kind, var = prefix[k]
            new_f = partial(d.vec, k)
            if kind == "exists":
                k_ax = b.exax(new_f, d.vec[k])
                d.bound_from, d.formula = k, new_f
                refresh(k_ax)
                progressed = True
                break
            a = d.vec[k].name
            others = [e.formula for e in ds if e is not d]
            if any(a in free_var_names(f) for f in others):
                continue
            if others:
                ctx = Neg(or_chain(others))
                k1 = b.by_taut(Imp(ctx, d.formula), cur)
                k2 = b.gen_forall(k1, a, var, target=Imp(ctx, new_f))
                d.bound_from, d.formula = k, new_f
                refresh(k2)
            else:
                k2 = b.s_trick_gen(cur, a, var, target=new_f)
                d.bound_from, d.formula = k, new_f
                cur = k2
            progressed = True
            break
        if not progressed:
            raise RuntimeError(
                "no disjunct can be bound next; witness terms are mutually "
                "embedded in an order the scheduler cannot untangle")

    if len(ds) != 1:
        raise RuntimeError("disjuncts failed to merge into the goal")
    b.by_taut(goal, cur)
    return normalize(b.build())


# ---------------------------------------------------------------------------
# the round trip

def second_epsilon(p):
    """From a quantifier-calculus proof of a closed prenex sentence, extract
    a Herbrand disjunction and rederive the sentence from it.

    Returns (quantifier proof of the goal, the disjunction).  The pipeline
    runs: witness the universals away, translate into the eps-calculus,
    eliminate every critical formula, rebind the quantifiers.
    """
    if p.calculus != "PC":
        raise ValueError("second_epsilon expects a PC proof")
    if p.hypotheses:
        raise ValueError("second_epsilon needs a hypothesis-free proof")
    goal = p.end_formula
    prefix, matrix = prenex_parts(goal)
    if has_quantifier(matrix):
        raise ValueError("end formula must be prenex")

    hnf, table = herbrand_normal_form(goal)
    hp = hnf_proof(p) if table else p
    ep = embed_proof(hp)

    ex_prefix, hnf_matrix = prenex_parts(hnf)
    ex_vars = [var for _, var in ex_prefix]
    got = match_vars(hnf_matrix, set(ex_vars), ep.end_formula)
    if got is None or set(got) != set(ex_vars):
        raise RuntimeError("translated end formula does not instantiate the matrix")
    row = tuple(got[v] for v in ex_vars)

    supply = NameSupply(all_names(hnf) | all_names(ep.end_formula))
    names = tuple(supply.fresh(v) for v in ex_vars)
    pattern = hnf_matrix
    for v, n in zip(ex_vars, names):
        pattern = instantiate(pattern, v, FreeVar(n))
    h, _ = extract_herbrand(ep, Expansion(pattern, names, (row,)))

    pc = herbrand_to_pc(h, goal)
    report = check(pc)
    if not report:
        raise RuntimeError("reconstructed proof failed its check: "
                           + "; ".join(report.problems[:3]))
    if not alpha_eq(pc.end_formula, goal):
        raise RuntimeError("reconstruction missed the goal formula")
    return pc, h
