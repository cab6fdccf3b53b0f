"""Quantifier elimination into choice terms, for formulas and whole proofs.

The formula translation rewrites every quantified subformula as an instance
of its own matrix: an existential at the eps-term that picks a witness, a
universal at the eps-term that picks a counterexample.  Quantifier-free
formulas come back as the same object.

The proof embedding maps each step of a quantified proof onto eps-calculus
material: existence axioms become single critical formulas, instantiation
axioms a critical formula for the counterexample term plus a contraposition,
and generalization steps vanish entirely.  A generalization's eigenvariable
names an arbitrary object; the embedded proof commits it to the eps-term
the translated conclusion is about, by substitution into every step
accumulated so far.  That is sound because the checker's eigenvariable
conditions put the variable nowhere else.
"""

from __future__ import annotations

from .syntax import (
    And, BoundVar, Eps, Exists, Forall, FreeVar, FuncApp, Imp, Neg, Or,
    PredApp, alpha_eq, instantiate, substitute,
)
from .proofs import (
    Crit, ExAx, ForallAx, GenExists, GenForall, Hyp, MP, Proof, Step, Taut,
)

_MEMO = {}


def eps_translate(f):
    """The eps form of f.  Quantifier-free input is returned unchanged, as
    the identical object."""
    got = _MEMO.get(f)
    if got is not None:
        return got
    if isinstance(f, (FreeVar, BoundVar)):
        res = f
    elif isinstance(f, (FuncApp, PredApp)):
        args = tuple(eps_translate(a) for a in f.args)
        res = f if all(a is b for a, b in zip(args, f.args)) else type(f)(f.symbol, args)
    elif isinstance(f, Neg):
        body = eps_translate(f.body)
        res = f if body is f.body else Neg(body)
    elif isinstance(f, (And, Or, Imp)):
        left = eps_translate(f.left)
        right = eps_translate(f.right)
        res = f if left is f.left and right is f.right else type(f)(left, right)
    elif isinstance(f, Eps):
        body = eps_translate(f.body)
        res = f if body is f.body else Eps(f.var, body)
    elif isinstance(f, Exists):
        m = eps_translate(f.body)
        res = instantiate(m, f.var, Eps(f.var, m))
    elif isinstance(f, Forall):
        m = eps_translate(f.body)
        res = instantiate(m, f.var, Eps(f.var, Neg(m)))
    else:
        raise ValueError(f"cannot translate {type(f).__name__}")
    _MEMO[f] = res
    return res


def _witness_term(f):
    # the eps-term the translation of f commits its quantifier to
    if isinstance(f, Exists):
        return Eps(f.var, eps_translate(f.body))
    if isinstance(f, Forall):
        return Eps(f.var, Neg(eps_translate(f.body)))
    raise ValueError("not a quantified formula")


def _substitute_steps(steps, eigen, term):
    for k, st in enumerate(steps):
        f2 = substitute(st.formula, eigen, term)
        j = st.just
        if isinstance(j, Crit):
            t2 = substitute(j.term, eigen, term)
            if t2 is not j.term:
                j = Crit(t2)
        if f2 is not st.formula or j is not st.just:
            steps[k] = Step(f2, j)


def embed_proof(p):
    """Map a proof in any calculus onto EC_eps.

    Output size is at most three times the input's step count, and the
    critical count never grows: each quantifier axiom contributes one
    critical formula, generalizations contribute nothing.
    """
    out = []
    imap = {}
    for i, st in enumerate(p.steps):
        f = st.formula
        j = st.just
        if isinstance(j, Taut):
            out.append(Step(eps_translate(f), Taut()))
            imap[i] = len(out) - 1
        elif isinstance(j, Hyp):
            out.append(Step(eps_translate(f), j))
            imap[i] = len(out) - 1
        elif isinstance(j, Crit):
            out.append(Step(eps_translate(f), Crit(eps_translate(j.term))))
            imap[i] = len(out) - 1
        elif isinstance(j, ExAx):
            # instance -> existential turns into the critical formula of the
            # witnessing eps-term at the translated instance
            e = _witness_term(f.right)
            out.append(Step(eps_translate(f), Crit(e)))
            imap[i] = len(out) - 1
        elif isinstance(j, ForallAx):
            # universal -> instance contraposes the critical formula of the
            # counterexample eps-term
            e = _witness_term(f.left)
            m = eps_translate(f.left.body)
            t = eps_translate(j.term)
            c = Imp(instantiate(Neg(m), f.left.var, t),
                    instantiate(Neg(m), f.left.var, e))
            f2 = eps_translate(f)
            out.append(Step(c, Crit(e)))
            out.append(Step(Imp(c, f2), Taut()))
            out.append(Step(f2, MP(len(out) - 2, len(out) - 1)))
            imap[i] = len(out) - 1
        elif isinstance(j, MP):
            imp = out[imap[j.implication]].formula
            out.append(Step(imp.right, MP(imap[j.premise], imap[j.implication])))
            imap[i] = len(out) - 1
        elif isinstance(j, (GenForall, GenExists)):
            e = _witness_term(f.right if isinstance(j, GenForall) else f.left)
            _substitute_steps(out, j.eigen, e)
            imap[i] = imap[j.premise]
        else:
            raise ValueError(f"cannot embed {type(j).__name__}")

    q = Proof("EC_eps", p.hypotheses, tuple(out))
    want = eps_translate(p.end_formula)
    if not alpha_eq(q.end_formula, want):
        raise ValueError("embedding lost the end formula")
    return q
