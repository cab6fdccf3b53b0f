"""A family of sentences with hyperexponential Herbrand complexity.

The k-th sentence asserts, under two hypotheses about a ternary relation --
a unit base case and a doubling step -- the existence of a chain of values
v_k, ..., v_0 with each v_{j-1} reached from 0 at exponent v_j.  In the
least model the chain forces v_0 to be a tower of k twos, and every unit
base fact below that tower participates in the derivation, so no correct
disjunction of instances can be shorter than the tower.

Two artifacts per k: a semantic certificate (forward chaining over the
least model, plus a drop-one-fact necessity check for each base instance)
and a short eps-calculus proof whose critical count grows linearly in k,
built from a quantifier-free hypothesis that names counterexamples by
eps-terms and from a relativized reachability hierarchy, since plain
totality of the relation is not derivable from the two hypotheses.
"""

from __future__ import annotations

from .syntax import (
    And, BoundVar, Eps, Exists, Forall, FreeVar, FuncApp, Imp, Neg, PredApp,
    Signature, alpha_eq, and_chain, instantiate,
)
from .proofs import ProofBuilder, deduction

lb_signature = Signature(funcs={"0": 0, "S": 1}, preds={"R": 3})

_ZERO = FuncApp("0", ())


def _s(t):
    return FuncApp("S", (t,))


def _r(a, b, c):
    return PredApp("R", (a, b, c))


def numeral(n):
    t = _ZERO
    for _ in range(n):
        t = _s(t)
    return t


def make_Ek(k):
    """The k-th chain sentence: existentially quantified implication from
    the base and doubling hypotheses to a chain of k+1 relation facts."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    u = [BoundVar(f"u{i}") for i in range(1, 6)]
    v = {j: BoundVar(f"v{j}") for j in range(k + 1)}
    hyp1 = _r(u[0], _ZERO, _s(u[0]))
    hyp2 = Imp(And(_r(u[1], u[2], u[3]), _r(u[3], u[2], u[4])),
               _r(u[1], _s(u[2]), u[4]))
    chain = [_r(_ZERO, _ZERO, v[k])]
    for j in range(k, 0, -1):
        chain.append(_r(_ZERO, v[j], v[j - 1]))
    f = Imp(And(hyp1, hyp2), and_chain(chain))
    names = [f"u{i}" for i in range(1, 6)] + [f"v{j}" for j in range(k, -1, -1)]
    for name in reversed(names):
        f = Exists(name, f)
    return f


# ---------------------------------------------------------------------------
# semantic certification

def _close(base_pairs, max_level):
    # level l holds (a, c) iff c is reachable from a in 2^l unit steps all
    # of which are present in the base
    levels = {0: set(base_pairs)}
    for l in range(1, max_level + 1):
        prev = levels[l - 1]
        by_left = {}
        for a, c in prev:
            by_left.setdefault(a, set()).add(c)
        cur = set()
        for a, mid in prev:
            for c in by_left.get(mid, ()):
                cur.add((a, c))
        levels[l] = cur
    return levels


def least_model(max_value, max_level):
    """Ground facts (a, level, c) true in the least model over the numerals
    0..max_value, chaining from all unit base facts."""
    if max_value < 0 or max_level < 0:
        raise ValueError("bounds must be nonnegative")
    base = {(a, a + 1) for a in range(max_value)}
    levels = _close(base, max_level)
    return {(a, l, c) for l, pairs in levels.items() for a, c in pairs}


def chain_values(k):
    """v_k, ..., v_0 in the least model: 1, 2, 4, 16, ... (k+1 values)."""
    vals = [1]
    for _ in range(k):
        vals.append(2 ** vals[-1])
    return vals


def check_lower_bound(k):
    """Certify the Herbrand length bound for the k-th sentence empirically.

    The chain facts are derivable from exactly the unit base facts below
    the tower value, and dropping any single one makes them underivable.
    So every correct disjunction must exhibit that many distinct base
    instances.  Returns the certified bound, tower(k, 1).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    vals = chain_values(k)
    n = vals[k]
    top_level = vals[k - 1] if k else 0
    base = frozenset((i, i + 1) for i in range(n))
    needed = [(0, 0, 1)] + [(0, vals[i], vals[i + 1]) for i in range(k)]

    def holds(levels, fact):
        a, l, c = fact
        return (a, c) in levels.get(l, ())

    levels = _close(base, top_level)
    for fact in needed:
        if not holds(levels, fact):
            raise RuntimeError(f"chain fact {fact} is not derivable; the "
                               f"sentence would be unsound")
    for i in range(n):
        reduced = _close(base - {(i, i + 1)}, top_level)
        if all(holds(reduced, fact) for fact in needed):
            raise RuntimeError(f"unit fact at {i} is not necessary; the "
                               f"bound claim fails")
    return n


# ---------------------------------------------------------------------------
# the short eps-proof

def _p(j, t):
    # relativized reachability: level -1 is the unit base fact, level j says
    # the relation at exponent t is total on level j-1 and preserves it
    if j < 0:
        return _r(t, _ZERO, _s(t))
    yn, zn = f"y{j}", f"z{j}"
    inner = And(_r(BoundVar(yn), t, BoundVar(zn)), _p(j - 1, BoundVar(zn)))
    return Forall(yn, Imp(_p(j - 1, BoundVar(yn)), Exists(zn, inner)))


def _step(j):
    xn = f"x{j + 1}"
    return Forall(xn, Imp(_p(j, BoundVar(xn)), _p(j, _s(BoundVar(xn)))))


def build_Ek_proof(k):
    """A proof of make_Ek(k) with critical count exactly 13*k + 10.

    The hypotheses of the sentence enter as one quantifier-free conjunction
    whose eps-terms name would-be counterexamples; it is discharged before
    the existential closure, so the result has no open hypotheses.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    ek = make_Ek(k)

    # counterexample to the base hypothesis
    r1 = _r(BoundVar("cx"), _ZERO, _s(BoundVar("cx")))
    u1s = Eps("cx", Neg(r1))
    qh1 = instantiate(r1, "cx", u1s)

    # nested counterexample tuple for the doubling hypothesis
    cvars = ("c1", "c2", "c3", "c4")
    cb = [BoundVar(n) for n in cvars]
    mat2 = Imp(And(_r(cb[0], cb[1], cb[2]), _r(cb[2], cb[1], cb[3])),
               _r(cb[0], _s(cb[1]), cb[3]))
    levels = [None] * 4
    g = mat2
    for i in (3, 2, 1, 0):
        levels[i] = g
        g = instantiate(g, cvars[i], Eps(cvars[i], Neg(g)))
    qh2 = g
    ustars = []
    for i in range(4):
        t = Eps(cvars[i], Neg(levels[i]))
        for name, val in zip(cvars, ustars):
            t = instantiate(t, name, val)
        ustars.append(t)

    h = And(qh1, qh2)
    b = ProofBuilder("PC_eps", (("H", h),))
    k_hyp = b.hyp("H")
    k_qh1 = b.by_taut(qh1, k_hyp)
    k_qh2 = b.by_taut(qh2, k_hyp)

    def inst1(t):
        # the base fact at any term, one critical formula
        kc = b.crit(u1s, t)
        return b.by_taut(instantiate(r1, "cx", t), k_qh1, kc)

    def inst2(ts):
        # the doubling rule at any four terms, one critical formula per
        # quantifier layer of the closed hypothesis
        cur = k_qh2
        pre = []
        for i in range(4):
            g = levels[i]
            for name, val in pre:
                g = instantiate(g, name, val)
            e = Eps(cvars[i], Neg(g))
            kc = b.crit(e, ts[i])
            cur = b.by_taut(instantiate(g, cvars[i], ts[i]), cur, kc)
            pre.append((cvars[i], ts[i]))
        return cur

    # step lemma at level -1
    am = FreeVar("am1")
    k_i = inst1(_s(am))
    k_imp = b.by_taut(Imp(_p(-1, am), _p(-1, _s(am))), k_i)
    step_at = {-1: b.s_trick_gen(k_imp, "am1", "x0", target=_step(-1))}

    zero_at = {-1: inst1(_ZERO)}

    for j in range(k):
        yn, zn = f"y{j}", f"z{j}"
        # level j at zero: witness by successor, climb one step of level j-1
        mn = FreeVar(f"m{j}")
        k1 = inst1(mn)
        k_fa = b.forallax(_step(j - 1), mn)
        k_mp = b.mp(step_at[j - 1], k_fa)
        ex_b = Exists(zn, And(_r(mn, _ZERO, BoundVar(zn)), _p(j - 1, BoundVar(zn))))
        k_ex = b.exax(ex_b, _s(mn))
        k_t = b.by_taut(Imp(_p(j - 1, mn), ex_b), k1, k_mp, k_ex)
        zero_at[j] = b.s_trick_gen(k_t, f"m{j}", yn, target=_p(j, _ZERO))

        # step lemma at level j: compose two level j-1 moves at exponent a
        # into one at S(a), eliminating both existentials by generalization
        an, bn, cn, dn = (FreeVar(f"a{j}"), FreeVar(f"b{j}"),
                          FreeVar(f"c{j}"), FreeVar(f"d{j}"))
        big = _p(j, an)
        i1 = b.forallax(big, bn)
        i2 = b.forallax(big, cn)
        i3 = inst2((bn, an, cn, dn))
        ez = Exists(zn, And(_r(bn, _s(an), BoundVar(zn)), _p(j - 1, BoundVar(zn))))
        i4 = b.exax(ez, dn)
        phi_c = And(_r(bn, an, cn), _p(j - 1, cn))
        phi_d = And(_r(cn, an, dn), _p(j - 1, dn))
        t5 = b.by_taut(Imp(phi_d, Imp(phi_c, ez)), i3, i4)
        ex_d = Exists(zn, And(_r(cn, an, BoundVar(zn)), _p(j - 1, BoundVar(zn))))
        g6 = b.gen_exists(t5, f"d{j}", zn, target=Imp(ex_d, Imp(phi_c, ez)))
        t7 = b.by_taut(Imp(phi_c, Imp(big, ez)), i2, g6)
        ex_c = Exists(zn, And(_r(bn, an, BoundVar(zn)), _p(j - 1, BoundVar(zn))))
        g8 = b.gen_exists(t7, f"c{j}", zn, target=Imp(ex_c, Imp(big, ez)))
        t9 = b.by_taut(Imp(big, Imp(_p(j - 1, bn), ez)), i1, g8)
        g10 = b.gen_forall(t9, f"b{j}", yn, target=Imp(big, _p(j, _s(an))))
        step_at[j] = b.s_trick_gen(g10, f"a{j}", f"x{j + 1}", target=_step(j))

    # the chain: start at v_k = S(0), extract one value per level
    vterms = [_s(_ZERO)]
    fact_idx = [zero_at[-1]]
    k_fa0 = b.forallax(_step(k - 1), _ZERO)
    k_m1 = b.mp(step_at[k - 1], k_fa0)
    cur = b.mp(zero_at[k - 1], k_m1)
    for lvl in range(k - 1, -1, -1):
        k_fa = b.forallax(b.formula(cur), _ZERO)
        k_m = b.mp(cur, k_fa)
        k_e = b.mp(zero_at[lvl - 1], k_m)
        k_w = b.witness_eps(k_e, f"g{lvl}")
        conj = b.formula(k_w)
        fact_idx.append(b.by_taut(conj.left, k_w))
        cur = b.by_taut(conj.right, k_w)
        vterms.append(conj.left.args[2])
    c_inst = and_chain([b.formula(i) for i in fact_idx])
    b.by_taut(c_inst, *fact_idx)

    ded = deduction(b.build(), "H")

    # existential closure, innermost first
    b2 = ProofBuilder("PC_eps")
    for st in ded.steps:
        b2.add(st.formula, st.just)
    cur2 = len(b2.steps) - 1
    names = [f"u{i}" for i in range(1, 6)] + [f"v{j}" for j in range(k, -1, -1)]
    vec = [u1s] + ustars + vterms
    body = ek
    for _ in names:
        body = body.body

    def partial(pos):
        f = body
        for i in range(pos):
            f = instantiate(f, names[i], vec[i])
        for i in range(len(names) - 1, pos - 1, -1):
            f = Exists(names[i], f)
        return f

    for pos in range(len(names) - 1, -1, -1):
        cur2 = b2.exists_intro(cur2, partial(pos), vec[pos])

    proof = b2.build()
    if not alpha_eq(proof.end_formula, ek):
        raise RuntimeError("proof ends in the wrong sentence")
    return proof
