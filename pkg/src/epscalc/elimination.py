"""Critical-formula elimination and Herbrand disjunction extraction.

One round removes one critical eps-term e of maximal degree among those of
maximal rank.  For each of the n distinct critical formulas A(t_i) -> A(e)
a branch proof substitutes t_i for e throughout, turns the former critical
formulas into consequences of the case hypothesis A(t_i), and discharges
that hypothesis; a final branch assumes every ~A(t_i), under which the
original critical formulas hold vacuously.  Case distinction reassembles a
proof of the disjunction of all branch end formulas.  The end formula is
tracked as an or-expansion: a matrix over named slots plus rows of closed
witness terms, one disjunct per row.

Every round checks the contracted accounting: the order at the target rank
drops by exactly one, rank and degree never grow, and critical count,
width, and expansion length grow at most (n+1)-fold.  Repeating rounds
until no critical formulas remain and renaming the residual closed
eps-terms to fresh free variables yields a Herbrand disjunction together
with an eps-free propositional proof of it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import syntax
from .syntax import (
    Eps, FreeVar, Imp, Neg, alpha_eq, and_chain, canon, degree, instantiate,
    maximal_closed_eps, or_chain, rank, replace_eps, substitute, NameSupply,
    all_names,
)
from .proofs import (
    Crit, MP, Proof, ProofBuilder, Step, Taut, case_combine, clear_taut_cache,
    deduction, is_tautology, match_instance, metrics, normalize, prune,
)


class EliminationError(Exception):
    pass


# ---------------------------------------------------------------------------
# bound arithmetic

_DEFAULT_CEILING = 1 << 16


def _ceiling_bits():
    raw = os.environ.get("EPSCALC_HYPEREXP_CEILING")
    if raw is None:
        return _DEFAULT_CEILING
    try:
        return max(int(raw), 1)
    except ValueError:
        return _DEFAULT_CEILING


@dataclass(frozen=True, eq=False)
class HyperExp:
    """An iterated power 2^2^...^2^x (height copies of 2) too large to
    evaluate.  Compares above every int; among symbolic values, taller or
    wider is larger."""
    height: int
    x: int

    def __str__(self):
        return f"tower({self.height}, {self.x})"

    __repr__ = __str__

    def _key(self):
        return (self.height, self.x)

    def __eq__(self, other):
        return isinstance(other, HyperExp) and self._key() == other._key()

    def __hash__(self):
        return hash(("HyperExp",) + self._key())

    def __lt__(self, other):
        if isinstance(other, HyperExp):
            return self._key() < other._key()
        return False

    def __le__(self, other):
        if isinstance(other, HyperExp):
            return self._key() <= other._key()
        return False

    def __gt__(self, other):
        if isinstance(other, HyperExp):
            return self._key() > other._key()
        return True

    def __ge__(self, other):
        if isinstance(other, HyperExp):
            return self._key() >= other._key()
        return True


def hyperexp(height, x):
    """2 iterated height times on top of x, exactly when it fits below the
    configured bit ceiling (EPSCALC_HYPEREXP_CEILING), else symbolic."""
    ceiling = _ceiling_bits()
    while height > 0:
        if x > ceiling:
            return HyperExp(height, x)
        x = 1 << x
        height -= 1
    return x


# ---------------------------------------------------------------------------
# or-expansions

@dataclass(frozen=True)
class Expansion:
    """End formula shape: a disjunction of matrix instances, one per row."""
    matrix: object
    vars: tuple
    rows: tuple

    def instance(self, row):
        f = self.matrix
        for name, t in zip(self.vars, row):
            f = substitute(f, name, t)
        return f

    def instances(self):
        return [self.instance(row) for row in self.rows]

    def formula(self):
        return or_chain(self.instances())

    def replaced(self, e, t):
        rows = tuple(tuple(replace_eps(s, e, t) for s in row) for row in self.rows)
        return Expansion(self.matrix, self.vars, rows)


def _dedupe_rows(rows):
    seen = set()
    out = []
    for row in rows:
        key = tuple(canon(t) for t in row)
        if key not in seen:
            seen.add(key)
            out.append(row)
    return tuple(out)


# ---------------------------------------------------------------------------
# target selection

def _critical_owners(p):
    """canon(term) -> (term, first step index, distinct formula canons)."""
    owners = {}
    for i, st in enumerate(p.steps):
        if isinstance(st.just, Crit):
            key = canon(st.just.term)
            if key not in owners:
                owners[key] = (st.just.term, i, set())
            owners[key][2].add(canon(st.formula))
    return owners


def select_target(p):
    """The critical eps-term to eliminate next: maximal rank, then maximal
    degree, then earliest first occurrence.  None if no critical formulas."""
    best = None
    best_key = None
    for term, first, _forms in _critical_owners(p).values():
        key = (rank(term), degree(term), -first)
        if best_key is None or key > best_key:
            best, best_key = term, key
    return best


# ---------------------------------------------------------------------------
# one elimination round

@dataclass(frozen=True)
class TraceRow:
    target: str
    rank: int
    degree: int
    n: int
    size_before: int
    size_after: int
    cc_before: int
    cc_after: int
    rows_before: int
    rows_after: int
    o_before: int
    o_after: int
    deg_before: int
    deg_after: int
    w_before: int
    w_after: int


@dataclass(frozen=True)
class EliminationTrace:
    rounds: tuple = ()
    sweeps: int = 0

    def __iter__(self):
        return iter(self.rounds)


def _validate_crit(formula, term, where):
    ok = (isinstance(formula, Imp) and isinstance(term, Eps)
          and alpha_eq(formula.right, instantiate(term.body, term.var, term))
          and match_instance(term.body, term.var, formula.left) is not None)
    if not ok:
        raise EliminationError(
            f"{where}: replacement degenerated a critical formula; the target "
            f"was not of maximal rank and degree")


def _rebuild(p, e_key, on_crit_for_e, transform_formula, transform_term, hyp_pair):
    """Copy p, rewriting formulas and critical payloads; critical steps for
    the eliminated term are rederived from the case hypothesis instead."""
    b = ProofBuilder("EC_eps", (hyp_pair,))
    hyp_idx = None
    imap = {}
    for k, st in enumerate(p.steps):
        j = st.just
        if isinstance(j, Crit) and canon(j.term) == e_key:
            if hyp_idx is None:
                hyp_idx = b.hyp(hyp_pair[0])
            imap[k] = on_crit_for_e(b, st, hyp_idx)
        elif isinstance(j, Crit):
            f2 = transform_formula(st.formula)
            t2 = transform_term(j.term)
            if f2 is not st.formula or t2 is not j.term:
                _validate_crit(f2, t2, f"step {k + 1}")
            imap[k] = b.add(f2, Crit(t2))
        elif isinstance(j, MP):
            imap[k] = b.mp(imap[j.premise], imap[j.implication])
        elif isinstance(j, Taut):
            imap[k] = b.add(transform_formula(st.formula), Taut())
        else:
            raise EliminationError(
                f"step {k + 1}: justification {type(j).__name__} has no place in "
                f"a hypothesis-free EC_eps proof")
    return b.build()


def eliminate_term(p, expansion, target=None, validate=True):
    """One round: remove every critical formula belonging to one eps-term.

    Returns (proof, expansion, trace row); the proof derives the widened
    disjunction recorded in the new expansion.  With no critical formulas
    the input comes back unchanged with trace None.
    """
    if p.calculus != "EC_eps":
        raise EliminationError("elimination works on EC_eps proofs")
    if p.hypotheses:
        raise EliminationError("elimination needs a hypothesis-free proof")
    syntax.clear_caches()
    clear_taut_cache()

    if target is None:
        target = select_target(p)
    if target is None:
        return p, expansion, None
    e = target
    e_key = canon(e)
    before = metrics(p)
    r = rank(e)
    d = degree(e)

    crit_formulas = []
    seen = set()
    for st in p.steps:
        if isinstance(st.just, Crit) and canon(st.just.term) == e_key:
            key = canon(st.formula)
            if key not in seen:
                seen.add(key)
                crit_formulas.append(st.formula)
    n = len(crit_formulas)
    if n == 0:
        return p, expansion, None

    ts = []
    for f in crit_formulas:
        t = match_instance(e.body, e.var, f.left)
        if t is None:
            raise EliminationError("critical formula does not match its eps-term")
        ts.append(t)

    # branch i: substitute t_i for e; former critical formulas for e follow
    # from the case hypothesis A(t_i), which the substituted conclusion is
    # alpha-equal to because e cannot occur in its own matrix
    branches = []
    branch_rows = []
    for i in range(n):
        t_i = ts[i]
        h_i = crit_formulas[i].left

        def for_e(b, st, hyp_idx, _t=t_i):
            return b.by_taut(replace_eps(st.formula, e, _t), hyp_idx)

        bp = _rebuild(
            p, e_key,
            on_crit_for_e=for_e,
            transform_formula=lambda f, _t=t_i: replace_eps(f, e, _t),
            transform_term=lambda s, _t=t_i: replace_eps(s, e, _t),
            hyp_pair=("case", h_i),
        )
        ded = normalize(deduction(prune(bp), "case"))
        branches.append((h_i, ded))
        branch_rows.extend(expansion.replaced(e, t_i).rows)

    # final branch: under every ~A(t_i) the original critical formulas for e
    # hold vacuously
    negs = and_chain([Neg(f.left) for f in crit_formulas])
    bp = _rebuild(
        p, e_key,
        on_crit_for_e=lambda b, st, hyp_idx: b.by_taut(st.formula, hyp_idx),
        transform_formula=lambda f: f,
        transform_term=lambda s: s,
        hyp_pair=("cases", negs),
    )
    ded_last = normalize(deduction(prune(bp), "cases"))

    rows = _dedupe_rows(tuple(branch_rows) + expansion.rows)
    new_exp = Expansion(expansion.matrix, expansion.vars, rows)
    combined = case_combine(branches, ded_last, new_exp.formula())
    combined = normalize(combined)

    after = metrics(combined)
    row = TraceRow(
        target=repr(e), rank=r, degree=d, n=n,
        size_before=before.size, size_after=after.size,
        cc_before=before.cc, cc_after=after.cc,
        rows_before=len(expansion.rows), rows_after=len(rows),
        o_before=before.o.get(r, 0), o_after=after.o.get(r, 0),
        deg_before=before.deg.get(r, 0), deg_after=after.deg.get(r, 0),
        w_before=before.w.get(r, 1), w_after=after.w.get(r, 1),
    )
    if validate:
        _check_round(row, after, r)
    return combined, new_exp, row


def _check_round(row, after, r):
    # pruning may drop further unused owners, so the order falls by at least 1
    fails = []
    if row.o_after > row.o_before - 1:
        fails.append(f"order at rank {r} went {row.o_before} -> {row.o_after}")
    if after.rank > r:
        fails.append(f"rank rose to {after.rank}")
    if row.deg_after > row.deg_before:
        fails.append(f"degree at rank {r} rose to {row.deg_after}")
    if row.cc_after > row.cc_before * (row.n + 1):
        fails.append(f"critical count {row.cc_after} exceeds "
                     f"{row.cc_before}*(n+1)")
    if row.w_after > row.w_before * (row.n + 1):
        fails.append(f"width {row.w_after} exceeds {row.w_before}*(n+1)")
    if row.rows_after > row.rows_before * (row.n + 1):
        fails.append(f"expansion length {row.rows_after} exceeds "
                     f"{row.rows_before}*(n+1)")
    if fails:
        raise EliminationError("elimination round broke its contract: "
                               + "; ".join(fails))


def eliminate_rank(p, expansion, r=None):
    """Eliminate every critical eps-term of rank r (default: the proof's
    rank).  Afterwards the proof's rank is strictly below r."""
    rows = []
    if r is None:
        r = metrics(p).rank
    while True:
        m = metrics(p)
        if m.o.get(r, 0) == 0:
            break
        target = select_target(p)
        if rank(target) != r:
            raise EliminationError(
                f"rank {rank(target)} critical term appeared above the sweep "
                f"rank {r}")
        p, expansion, row = eliminate_term(p, expansion, target)
        rows.append(row)
    return p, expansion, tuple(rows)


# ---------------------------------------------------------------------------
# Herbrand disjunctions

@dataclass(frozen=True)
class HerbrandDisjunction:
    matrix: object
    vars: tuple
    rows: tuple
    length: int
    cc: int
    bound: object
    tautology_ok: bool
    trace: tuple = field(default=(), repr=False)

    def formula(self):
        exp = Expansion(self.matrix, self.vars, self.rows)
        return exp.formula()


def extract_herbrand(p, expansion):
    """Run elimination to completion and name the leftover eps-terms.

    Returns (herbrand disjunction, eps-free propositional proof of it).
    The bound field is the a-priori hyperexponential bound in the critical
    count of the input proof; the recorded length must stay below it.
    """
    if not alpha_eq(p.end_formula, expansion.formula()):
        raise EliminationError("expansion does not describe the end formula")
    m0 = metrics(p)
    cc0 = m0.cc
    initial_ranks = {rank(t) for t, _, _ in _critical_owners(p).values()}

    rounds = []
    sweeps = 0
    while True:
        m = metrics(p)
        if m.rank == 0:
            break
        sweeps += 1
        if sweeps > len(initial_ranks):
            raise EliminationError(
                f"needed more rank sweeps than the {len(initial_ranks)} initial "
                f"ranks")
        p, expansion, rows = eliminate_rank(p, expansion, m.rank)
        rounds.extend(rows)

    # name the residual closed eps-terms: one fresh variable per alpha-class,
    # largest first so nested copies disappear with their hosts
    used = set(all_names(expansion.matrix))
    for st in p.steps:
        used |= all_names(st.formula)
    supply = NameSupply(used)
    eps_terms = {}
    order = []
    for row in expansion.rows:
        for t in row:
            for sub in maximal_closed_eps(t):
                key = canon(sub)
                if key not in eps_terms:
                    eps_terms[key] = sub
                    order.append(sub)
    for st in p.steps:
        for sub in maximal_closed_eps(st.formula):
            key = canon(sub)
            if key not in eps_terms:
                eps_terms[key] = sub
                order.append(sub)
    order.sort(key=lambda s: -s._size)
    renaming = [(sub, FreeVar(supply.fresh(sub.var))) for sub in order]

    def strip(expr):
        for sub, v in renaming:
            expr = replace_eps(expr, sub, v)
        return expr

    rows = tuple(tuple(strip(t) for t in row) for row in expansion.rows)
    final_exp = Expansion(expansion.matrix, expansion.vars, rows)
    steps = tuple(Step(strip(st.formula), st.just) for st in p.steps)
    ec_proof = Proof("EC", (), steps)

    disjunction = final_exp.formula()
    if not alpha_eq(ec_proof.end_formula, disjunction):
        raise EliminationError("stripped proof no longer ends in the disjunction")
    if not is_tautology(disjunction):
        raise EliminationError("herbrand disjunction failed the tautology check")

    h = HerbrandDisjunction(
        matrix=final_exp.matrix,
        vars=final_exp.vars,
        rows=rows,
        length=len(rows),
        cc=cc0,
        bound=hyperexp(2 * cc0, 3 * cc0),
        tautology_ok=True,
        trace=EliminationTrace(tuple(rounds), sweeps),
    )
    if h.bound <= h.length:
        raise EliminationError(
            f"herbrand length {h.length} violates the bound {h.bound}")
    return h, ec_proof
