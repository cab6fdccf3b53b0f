"""Linear Hilbert-style proofs and their checker.

A proof is a tuple of steps, each a formula with a justification: a
propositional tautology, a critical formula for an eps-term, a quantifier
axiom, modus ponens, a generalization inference, or a labeled hypothesis.
Four calculi gate the language: EC (no quantifiers, no eps), EC_eps (no
quantifiers), PC (no eps), PC_eps (everything).  Hypotheses are always
quantifier-free.

The checker validates every step and reports all violations instead of
stopping at the first.  Complexity accounting counts steps, critical and
quantifier axioms up to alpha-equality, and the rank/degree structure of
the critical eps-terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    And, BoundVar, Eps, Exists, Forall, FreeVar, Imp, Neg, Or, PredApp,
    Signature, alpha_eq, canon, classify, classify_report, ExprClass,
    abstract, free_var_names, has_eps, has_quantifier, instantiate,
    is_term_node, unbound_bvar_names, children,
)


# ---------------------------------------------------------------------------
# justifications

@dataclass(frozen=True)
class Taut:
    pass


@dataclass(frozen=True)
class Crit:
    term: object  # the eps-term this critical formula belongs to


@dataclass(frozen=True)
class ExAx:
    term: object  # witness: instance -> existential


@dataclass(frozen=True)
class ForallAx:
    term: object  # instance: universal -> instance


@dataclass(frozen=True)
class MP:
    premise: int
    implication: int


@dataclass(frozen=True)
class GenForall:
    premise: int
    eigen: str


@dataclass(frozen=True)
class GenExists:
    premise: int
    eigen: str


@dataclass(frozen=True)
class Hyp:
    label: str


@dataclass(frozen=True)
class Step:
    formula: object
    just: object


@dataclass(frozen=True)
class Proof:
    calculus: str
    hypotheses: tuple = ()
    steps: tuple = ()

    @property
    def end_formula(self):
        if not self.steps:
            raise ValueError("empty proof")
        return self.steps[-1].formula

    def hypothesis(self, label):
        for lab, f in self.hypotheses:
            if lab == label:
                return f
        raise KeyError(label)

    def signature(self):
        exprs = [f for _, f in self.hypotheses]
        for st in self.steps:
            exprs.append(st.formula)
            if isinstance(st.just, (Crit, ExAx, ForallAx)):
                exprs.append(st.just.term)
        return Signature.collect(*exprs)

    def __repr__(self):
        return (f"<Proof {self.calculus}: {len(self.steps)} steps, "
                f"{len(self.hypotheses)} hypotheses>")


_EPS_CALCULI = ("EC_eps", "PC_eps")
_QUANT_CALCULI = ("PC", "PC_eps")
_CALCULI = ("EC", "EC_eps", "PC", "PC_eps")


# ---------------------------------------------------------------------------
# propositional reasoning

_TABLE_LIMIT = 13

_TAUT_CACHE = {}        # (canon(formula), skeleton) -> bool


def clear_taut_cache():
    _TAUT_CACHE.clear()


def _ordered_atoms(f, skel):
    # first-occurrence pre-order; returns (canon keys, representatives)
    keys = []
    reps = []
    seen = set()

    def walk(n):
        if isinstance(n, PredApp) or (skel and isinstance(n, (Forall, Exists))):
            key = canon(n)
            if key not in seen:
                seen.add(key)
                keys.append(key)
                reps.append(n)
            return
        for c in children(n):
            walk(c)

    walk(f)
    return keys, reps


def _eval_mask(f, skel, var_of, masks, full, memo):
    got = memo.get(f)
    if got is not None:
        return got
    if isinstance(f, PredApp) or (skel and isinstance(f, (Forall, Exists))):
        got = masks[var_of[canon(f)]]
    elif isinstance(f, Neg):
        got = full ^ _eval_mask(f.body, skel, var_of, masks, full, memo)
    elif isinstance(f, And):
        got = (_eval_mask(f.left, skel, var_of, masks, full, memo)
               & _eval_mask(f.right, skel, var_of, masks, full, memo))
    elif isinstance(f, Or):
        got = (_eval_mask(f.left, skel, var_of, masks, full, memo)
               | _eval_mask(f.right, skel, var_of, masks, full, memo))
    elif isinstance(f, Imp):
        got = ((full ^ _eval_mask(f.left, skel, var_of, masks, full, memo))
               | _eval_mask(f.right, skel, var_of, masks, full, memo))
    else:
        raise ValueError(f"not a formula: {type(f).__name__}")
    memo[f] = got
    return got


def _table_countermodel(f, skel, keys, reps):
    n = len(keys)
    full = (1 << (1 << n)) - 1
    masks = []
    for i in range(n):
        run = (1 << (1 << i)) - 1
        unit = run << (1 << i)
        period = (1 << (1 << (i + 1))) - 1
        masks.append(unit * (full // period) if period <= full else unit)
    var_of = {k: i for i, k in enumerate(keys)}
    value = _eval_mask(f, skel, var_of, masks, full, {})
    if value == full:
        return None
    miss = (value ^ full)
    b = (miss & -miss).bit_length() - 1
    return {reps[i]: bool((b >> i) & 1) for i in range(n)}


def _tseitin_countermodel(f, skel, keys, reps):
    var_of = {k: i + 1 for i, k in enumerate(keys)}
    nvars = len(keys)
    clauses = []
    node_var = {}

    def visit(n):
        nonlocal nvars
        key = canon(n)
        if isinstance(n, PredApp) or (skel and isinstance(n, (Forall, Exists))):
            return var_of[key]
        got = node_var.get(key)
        if got is not None:
            return got
        if isinstance(n, Neg):
            a = visit(n.body)
            nvars += 1
            v = nvars
            clauses.append((-v, -a))
            clauses.append((v, a))
        elif isinstance(n, And):
            a, b2 = visit(n.left), visit(n.right)
            nvars += 1
            v = nvars
            clauses.append((-v, a))
            clauses.append((-v, b2))
            clauses.append((v, -a, -b2))
        elif isinstance(n, Or):
            a, b2 = visit(n.left), visit(n.right)
            nvars += 1
            v = nvars
            clauses.append((-v, a, b2))
            clauses.append((v, -a))
            clauses.append((v, -b2))
        elif isinstance(n, Imp):
            a, b2 = visit(n.left), visit(n.right)
            nvars += 1
            v = nvars
            clauses.append((-v, -a, b2))
            clauses.append((v, a))
            clauses.append((v, -b2))
        else:
            raise ValueError(f"not a formula: {type(n).__name__}")
        node_var[key] = v
        return v

    root = visit(f)
    clauses.append((-root,))
    model = _dpll(clauses)
    if model is None:
        return None
    return {reps[i]: model.get(i + 1, False) for i in range(len(keys))}


def _dpll(clauses):
    assign = {}

    def propagate():
        changed = True
        while changed:
            changed = False
            for cl in clauses:
                unassigned = None
                count = 0
                sat = False
                for lit in cl:
                    v = assign.get(abs(lit))
                    if v is None:
                        unassigned = lit
                        count += 1
                    elif v == (lit > 0):
                        sat = True
                        break
                if sat:
                    continue
                if count == 0:
                    return False
                if count == 1:
                    assign[abs(unassigned)] = unassigned > 0
                    changed = True
        return True

    def pick():
        best = None
        best_n = None
        for cl in clauses:
            open_lits = []
            sat = False
            for lit in cl:
                v = assign.get(abs(lit))
                if v is None:
                    open_lits.append(lit)
                elif v == (lit > 0):
                    sat = True
                    break
            if sat or not open_lits:
                continue
            if best_n is None or len(open_lits) < best_n:
                best, best_n = open_lits[0], len(open_lits)
                if best_n == 2:
                    break
        return best

    def search():
        saved = dict(assign)
        if not propagate():
            assign.clear()
            assign.update(saved)
            return False
        lit = pick()
        if lit is None:
            return True
        for val in (lit > 0, lit < 0):
            saved2 = dict(assign)
            assign[abs(lit)] = val
            if search():
                return True
            assign.clear()
            assign.update(saved2)
        assign.clear()
        assign.update(saved)
        return False

    return dict(assign) if search() else None


def _countermodel(f, skel):
    keys, reps = _ordered_atoms(f, skel)
    if len(keys) <= _TABLE_LIMIT:
        return _table_countermodel(f, skel, keys, reps)
    return _tseitin_countermodel(f, skel, keys, reps)


def _taut_skel(f):
    key = (canon(f), True)
    got = _TAUT_CACHE.get(key)
    if got is None:
        got = _countermodel(f, True) is None
        _TAUT_CACHE[key] = got
    return got


def is_tautology(f):
    """Propositional validity; atoms are predicate applications compared up
    to alpha-equality.  Quantified input is rejected, eps-terms are fine."""
    if has_quantifier(f):
        raise ValueError("is_tautology expects a quantifier-free formula")
    key = (canon(f), False)
    got = _TAUT_CACHE.get(key)
    if got is None:
        got = _countermodel(f, False) is None
        _TAUT_CACHE[key] = got
    return got


def find_countermodel(f):
    """A falsifying assignment on the atoms of f, or None if f is valid."""
    if has_quantifier(f):
        raise ValueError("find_countermodel expects a quantifier-free formula")
    return _countermodel(f, False)


# ---------------------------------------------------------------------------
# matching a critical formula's premise against its matrix

def match_instance(matrix, var, inst):
    """The closed term t with instantiate(matrix, var, t) alpha-equal to
    inst, or None.  Every position where matrix has the open leaf var must
    hold the same closed term in inst, modulo bound renaming elsewhere."""
    cands = []

    def walk(m, l, env_ml, env_lm):
        if isinstance(m, BoundVar) and m.name == var and var not in env_ml:
            if not is_term_node(l) or unbound_bvar_names(l):
                return False
            cands.append(l)
            return True
        if isinstance(m, BoundVar):
            if not isinstance(l, BoundVar):
                return False
            if m.name in env_ml or l.name in env_lm:
                return env_ml.get(m.name) == l.name and env_lm.get(l.name) == m.name
            return m.name == l.name
        if type(m) is not type(l):
            return False
        if isinstance(m, FreeVar):
            return m.name == l.name
        if isinstance(m, (Forall, Exists, Eps)):
            e1 = dict(env_ml)
            e2 = dict(env_lm)
            e1[m.var] = l.var
            e2[l.var] = m.var
            return walk(m.body, l.body, e1, e2)
        if isinstance(m, PredApp) or hasattr(m, "symbol"):
            if m.symbol != l.symbol or len(m.args) != len(l.args):
                return False
            return all(walk(a, b, env_ml, env_lm) for a, b in zip(m.args, l.args))
        kids_m = children(m)
        kids_l = children(l)
        if len(kids_m) != len(kids_l):
            return False
        return all(walk(a, b, env_ml, env_lm) for a, b in zip(kids_m, kids_l))

    if not walk(matrix, inst, {}, {}) or not cands:
        return None
    first = canon(cands[0])
    if any(canon(c) != first for c in cands[1:]):
        return None
    return cands[0]


def match_vars(matrix, names, inst):
    """match_instance for several open variables at once: a dict mapping each
    name to the closed term filling its leaves, or None.  Names without any
    open leaf in matrix stay absent from the result."""
    cands = {name: [] for name in names}

    def walk(m, l, env_ml, env_lm):
        if isinstance(m, BoundVar) and m.name in cands and m.name not in env_ml:
            if not is_term_node(l) or unbound_bvar_names(l):
                return False
            cands[m.name].append(l)
            return True
        if isinstance(m, BoundVar):
            if not isinstance(l, BoundVar):
                return False
            if m.name in env_ml or l.name in env_lm:
                return env_ml.get(m.name) == l.name and env_lm.get(l.name) == m.name
            return m.name == l.name
        if type(m) is not type(l):
            return False
        if isinstance(m, FreeVar):
            return m.name == l.name
        if isinstance(m, (Forall, Exists, Eps)):
            e1 = dict(env_ml)
            e2 = dict(env_lm)
            e1[m.var] = l.var
            e2[l.var] = m.var
            return walk(m.body, l.body, e1, e2)
        if hasattr(m, "symbol"):
            if m.symbol != l.symbol or len(m.args) != len(l.args):
                return False
            return all(walk(a, b, env_ml, env_lm) for a, b in zip(m.args, l.args))
        kids_m = children(m)
        kids_l = children(l)
        if len(kids_m) != len(kids_l):
            return False
        return all(walk(a, b, env_ml, env_lm) for a, b in zip(kids_m, kids_l))

    if not walk(matrix, inst, {}, {}):
        return None
    out = {}
    for name, found in cands.items():
        if not found:
            continue
        first = canon(found[0])
        if any(canon(c) != first for c in found[1:]):
            return None
        out[name] = found[0]
    return out


# ---------------------------------------------------------------------------
# checking

@dataclass(frozen=True)
class CheckReport:
    ok: bool
    problems: tuple = ()

    def __bool__(self):
        return self.ok


def _language_problems(f, calculus, where):
    out = []
    cls, probs = classify_report(f)
    if cls is not ExprClass.FORMULA:
        reason = "; ".join(probs) if probs else f"classified as {cls.value}"
        out.append(f"{where}: not a well-formed closed formula ({reason})")
        return out
    if calculus in ("EC", "EC_eps") and has_quantifier(f):
        out.append(f"{where}: quantifier not allowed in {calculus}")
    if calculus in ("EC", "PC") and has_eps(f):
        out.append(f"{where}: eps-term not allowed in {calculus}")
    return out


def check(p):
    """Validate every step of p; collects all violations."""
    problems = []
    if p.calculus not in _CALCULI:
        problems.append(f"unknown calculus {p.calculus!r}")
        return CheckReport(False, tuple(problems))

    labels = {}
    for lab, f in p.hypotheses:
        if lab in labels:
            problems.append(f"hypothesis label {lab!r} declared twice")
        labels[lab] = f
        problems += _language_problems(f, p.calculus, f"hypothesis {lab}")
        if has_quantifier(f):
            problems.append(f"hypothesis {lab}: hypotheses must be quantifier-free")

    try:
        p.signature()
    except ValueError as exc:
        problems.append(str(exc))

    n = len(p.steps)
    free_sets = [free_var_names(st.formula) for st in p.steps]
    suffix = [frozenset()] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] | free_sets[i]

    eigen_steps = {}

    for i, st in enumerate(p.steps):
        where = f"step {i + 1}"
        F = st.formula
        j = st.just
        problems += _language_problems(F, p.calculus, where)

        def need(cond, msg):
            if not cond:
                problems.append(f"{where}: {msg}")
            return cond

        if isinstance(j, Taut):
            try:
                if not _taut_skel(F):
                    problems.append(f"{where}: not a tautology")
            except ValueError as exc:
                problems.append(f"{where}: {exc}")
        elif isinstance(j, Crit):
            if not need(p.calculus in _EPS_CALCULI,
                        f"critical formula not allowed in {p.calculus}"):
                continue
            e = j.term
            if not need(isinstance(e, Eps) and classify(e) is ExprClass.TERM,
                        "critical term must be a closed eps-term"):
                continue
            if not need(isinstance(F, Imp), "critical formula must be an implication"):
                continue
            try:
                want = instantiate(e.body, e.var, e)
            except ValueError as exc:
                problems.append(f"{where}: {exc}")
                continue
            need(alpha_eq(F.right, want),
                 "conclusion is not the matrix applied to the eps-term")
            t = match_instance(e.body, e.var, F.left)
            need(t is not None,
                 "premise is not an instance of the matrix at a closed term")
        elif isinstance(j, (ExAx, ForallAx)):
            if not need(p.calculus in _QUANT_CALCULI,
                        f"quantifier axiom not allowed in {p.calculus}"):
                continue
            t = j.term
            if not need(is_term_node(t) and classify(t) is ExprClass.TERM,
                        "axiom term must be a closed term"):
                continue
            if not need(isinstance(F, Imp), "quantifier axiom must be an implication"):
                continue
            if isinstance(j, ExAx):
                if not need(isinstance(F.right, Exists),
                            "conclusion of an existence axiom must be existential"):
                    continue
                try:
                    want = instantiate(F.right.body, F.right.var, t)
                except ValueError as exc:
                    problems.append(f"{where}: {exc}")
                    continue
                need(alpha_eq(F.left, want),
                     "premise is not the given instance of the existential")
            else:
                if not need(isinstance(F.left, Forall),
                            "premise of an instantiation axiom must be universal"):
                    continue
                try:
                    want = instantiate(F.left.body, F.left.var, t)
                except ValueError as exc:
                    problems.append(f"{where}: {exc}")
                    continue
                need(alpha_eq(F.right, want),
                     "conclusion is not the given instance of the universal")
        elif isinstance(j, MP):
            if not need(0 <= j.premise < i and 0 <= j.implication < i,
                        "modus ponens must reference earlier steps"):
                continue
            imp = p.steps[j.implication].formula
            if not need(isinstance(imp, Imp), "second reference is not an implication"):
                continue
            need(alpha_eq(imp.left, p.steps[j.premise].formula),
                 "premise does not match the implication")
            need(alpha_eq(imp.right, F), "conclusion does not match the implication")
        elif isinstance(j, (GenForall, GenExists)):
            if not need(p.calculus in _QUANT_CALCULI,
                        f"generalization not allowed in {p.calculus}"):
                continue
            if not need(0 <= j.premise < i, "generalization must reference an earlier step"):
                continue
            if j.eigen in eigen_steps:
                problems.append(f"{where}: eigenvariable {j.eigen!r} already used "
                                f"at step {eigen_steps[j.eigen] + 1}")
            eigen_steps.setdefault(j.eigen, i)
            P = p.steps[j.premise].formula
            if not need(isinstance(F, Imp), "generalization must conclude an implication"):
                continue
            a = FreeVar(j.eigen)
            if isinstance(j, GenForall):
                if not need(isinstance(F.right, Forall),
                            "conclusion must end in a universal formula"):
                    continue
                try:
                    want = Imp(F.left, instantiate(F.right.body, F.right.var, a))
                except ValueError as exc:
                    problems.append(f"{where}: {exc}")
                    continue
            else:
                if not need(isinstance(F.left, Exists),
                            "conclusion must start from an existential formula"):
                    continue
                try:
                    want = Imp(instantiate(F.left.body, F.left.var, a), F.right)
                except ValueError as exc:
                    problems.append(f"{where}: {exc}")
                    continue
            need(alpha_eq(P, want), "premise does not match the generalization")
            if j.eigen in suffix[i]:
                problems.append(f"{where}: eigenvariable {j.eigen!r} occurs in this "
                                f"or a later step")
            for lab, h in p.hypotheses:
                if j.eigen in free_var_names(h):
                    problems.append(f"{where}: eigenvariable {j.eigen!r} occurs in "
                                    f"hypothesis {lab}")
        elif isinstance(j, Hyp):
            if not need(j.label in labels, f"unknown hypothesis label {j.label!r}"):
                continue
            need(alpha_eq(F, labels[j.label]), "formula differs from the hypothesis")
        else:
            problems.append(f"{where}: unknown justification {type(j).__name__}")

    if not p.steps:
        problems.append("proof has no steps")
    return CheckReport(not problems, tuple(problems))


# ---------------------------------------------------------------------------
# complexity accounting

@dataclass(frozen=True)
class ProofMetrics:
    size: int
    cc: int
    rank: int
    o: dict = field(default_factory=dict)
    deg: dict = field(default_factory=dict)
    w: dict = field(default_factory=dict)


def metrics(p):
    """Step count, critical count, and the per-rank elimination measures.

    cc counts alpha-distinct critical formulas plus alpha-distinct
    quantifier axioms plus one; hypotheses and inferences are free.  For
    each rank r: o is the number of distinct critical eps-terms of that
    rank, deg the maximal degree among them, w one more than the largest
    number of distinct critical formulas any one of them carries.
    """
    from .syntax import degree, rank as term_rank

    crit_formulas = set()
    qax_formulas = set()
    owners = {}
    for st in p.steps:
        if isinstance(st.just, Crit):
            key = canon(st.just.term)
            owners.setdefault(key, (st.just.term, set()))[1].add(canon(st.formula))
            crit_formulas.add(canon(st.formula))
        elif isinstance(st.just, (ExAx, ForallAx)):
            qax_formulas.add(canon(st.formula))

    o = {}
    deg = {}
    per_owner = {}
    for term, formulas in owners.values():
        r = term_rank(term)
        o[r] = o.get(r, 0) + 1
        deg[r] = max(deg.get(r, 0), degree(term))
        per_owner[r] = max(per_owner.get(r, 0), len(formulas))
    w = {r: count + 1 for r, count in per_owner.items()}
    return ProofMetrics(
        size=len(p.steps),
        cc=len(crit_formulas) + len(qax_formulas) + 1,
        rank=max(o, default=0),
        o=o,
        deg=deg,
        w=w,
    )


# ---------------------------------------------------------------------------
# building proofs

class ProofBuilder:
    """Accumulates steps; structural shortcuts validate as they go."""

    def __init__(self, calculus, hypotheses=(), check_tauts=True):
        self.calculus = calculus
        self.hypotheses = tuple(hypotheses)
        self.steps = []
        self.check_tauts = check_tauts

    def add(self, formula, just):
        self.steps.append(Step(formula, just))
        return len(self.steps) - 1

    def formula(self, idx):
        return self.steps[idx].formula

    def taut(self, f):
        if self.check_tauts and not _taut_skel(f):
            raise ValueError(f"not a tautology: {f!r}")
        return self.add(f, Taut())

    def mp(self, premise, implication):
        imp = self.steps[implication].formula
        if not isinstance(imp, Imp) or not alpha_eq(imp.left, self.steps[premise].formula):
            raise ValueError("modus ponens premise mismatch")
        return self.add(imp.right, MP(premise, implication))

    def by_taut(self, target, *premises):
        """target via one curried tautology over the given steps plus chained
        modus ponens."""
        f = target
        for idx in reversed(premises):
            f = Imp(self.steps[idx].formula, f)
        k = self.taut(f)
        for idx in premises:
            k = self.mp(idx, k)
        return k

    def hyp(self, label):
        for lab, f in self.hypotheses:
            if lab == label:
                return self.add(f, Hyp(label))
        raise KeyError(label)

    def crit(self, eps_term, instance):
        f = Imp(instantiate(eps_term.body, eps_term.var, instance),
                instantiate(eps_term.body, eps_term.var, eps_term))
        return self.add(f, Crit(eps_term))

    def exax(self, target, t):
        if not isinstance(target, Exists):
            raise ValueError("existence axiom needs an existential target")
        f = Imp(instantiate(target.body, target.var, t), target)
        return self.add(f, ExAx(t))

    def forallax(self, source, t):
        if not isinstance(source, Forall):
            raise ValueError("instantiation axiom needs a universal source")
        f = Imp(source, instantiate(source.body, source.var, t))
        return self.add(f, ForallAx(t))

    def exists_intro(self, premise, target, t):
        k = self.exax(target, t)
        return self.mp(premise, k)

    def gen_forall(self, premise, eigen, var, target=None):
        P = self.steps[premise].formula
        if target is None:
            target = Imp(P.left, Forall(var, abstract(P.right, eigen, var)))
        return self.add(target, GenForall(premise, eigen))

    def gen_exists(self, premise, eigen, var, target=None):
        P = self.steps[premise].formula
        if target is None:
            target = Imp(Exists(var, abstract(P.left, eigen, var)), P.right)
        return self.add(target, GenExists(premise, eigen))

    def s_trick_gen(self, premise, eigen, var, target=None):
        """From F(a) conclude the universal closure over a, without any
        axiom: thread an a-free tautology S through the generalization."""
        P = self.steps[premise].formula
        if target is None:
            target = Forall(var, abstract(P, eigen, var))
        S = Imp(target, target)
        i_s = self.taut(S)
        i_w = self.taut(Imp(P, Imp(S, P)))
        i_sp = self.mp(premise, i_w)
        i_g = self.gen_forall(i_sp, eigen, var, target=Imp(S, target))
        return self.mp(i_s, i_g)

    def witness_eps(self, premise, eigen):
        """From an existential theorem, conclude its matrix at the eps-term.
        One critical formula, one generalization."""
        ex = self.steps[premise].formula
        if not isinstance(ex, Exists):
            raise ValueError("witness_eps needs an existential premise")
        e = Eps(ex.var, ex.body)
        i_c = self.crit(e, FreeVar(eigen))
        i_g = self.gen_exists(i_c, eigen, ex.var, target=Imp(ex, self.steps[i_c].formula.right))
        return self.mp(premise, i_g)

    def build(self):
        return Proof(self.calculus, self.hypotheses, tuple(self.steps))


# ---------------------------------------------------------------------------
# proof surgery

def _remap_just(j, remap):
    if isinstance(j, MP):
        return MP(remap[j.premise], remap[j.implication])
    if isinstance(j, GenForall):
        return GenForall(remap[j.premise], j.eigen)
    if isinstance(j, GenExists):
        return GenExists(remap[j.premise], j.eigen)
    return j


def _just_refs(j):
    if isinstance(j, MP):
        return (j.premise, j.implication)
    if isinstance(j, (GenForall, GenExists)):
        return (j.premise,)
    return ()


def prune(p):
    """Drop steps outside the dependency cone of the final step."""
    if not p.steps:
        return p
    needed = set()
    stack = [len(p.steps) - 1]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        stack.extend(_just_refs(p.steps[i].just))
    order = sorted(needed)
    remap = {old: new for new, old in enumerate(order)}
    steps = tuple(Step(p.steps[i].formula, _remap_just(p.steps[i].just, remap))
                  for i in order)
    return Proof(p.calculus, p.hypotheses, steps)


def compress(p):
    """Merge later steps whose formulas repeat an earlier step.  References
    move to the first occurrence; the final step always survives."""
    first = {}
    remap = {}
    steps = []
    last = len(p.steps) - 1
    for i, st in enumerate(p.steps):
        key = canon(st.formula)
        if key in first and i != last:
            remap[i] = first[key]
            continue
        remap[i] = len(steps)
        steps.append(Step(st.formula, _remap_just(st.just, remap)))
        first.setdefault(key, remap[i])
    return Proof(p.calculus, p.hypotheses, tuple(steps))


def normalize(p):
    return prune(compress(p))


# ---------------------------------------------------------------------------
# deduction theorem

def deduction(p, label):
    """Discharge the hypothesis with the given label: every step formula A
    becomes (hypothesis -> A).  Generalization steps survive because the
    hypothesis is closed against their eigenvariables; that is checked."""
    H = p.hypothesis(label)
    new_hyps = tuple((lab, f) for lab, f in p.hypotheses if lab != label)
    h_free = free_var_names(H)

    for i, st in enumerate(p.steps):
        if isinstance(st.just, (GenForall, GenExists)):
            if st.just.eigen in h_free:
                raise ValueError(
                    f"step {i + 1}: eigenvariable {st.just.eigen!r} occurs in the "
                    f"discharged hypothesis")
            # the rewrite quotes referenced formulas at the point of use, so a
            # later reference to a formula mentioning the eigenvariable would
            # break the linear eigenvariable discipline
            for k in range(i + 1, len(p.steps)):
                for ref in _just_refs(p.steps[k].just):
                    if st.just.eigen in free_var_names(p.steps[ref].formula):
                        raise ValueError(
                            f"step {k + 1}: references a formula mentioning the "
                            f"eigenvariable of step {i + 1}; discharge would "
                            f"reorder it past the generalization")

    b = ProofBuilder(p.calculus, new_hyps)
    imap = {}
    for i, st in enumerate(p.steps):
        F = st.formula
        j = st.just
        if isinstance(j, Hyp) and j.label == label:
            imap[i] = b.taut(Imp(H, F))
        elif isinstance(j, MP):
            A = p.steps[j.premise].formula
            t = b.taut(Imp(Imp(H, A), Imp(Imp(H, Imp(A, F)), Imp(H, F))))
            m = b.mp(imap[j.premise], t)
            imap[i] = b.mp(imap[j.implication], m)
        elif isinstance(j, GenForall):
            S, q = F.left, F.right
            C_a = p.steps[j.premise].formula.right
            HS = And(H, S)
            t1 = b.taut(Imp(Imp(H, Imp(S, C_a)), Imp(HS, C_a)))
            m1 = b.mp(imap[j.premise], t1)
            g = b.add(Imp(HS, q), GenForall(m1, j.eigen))
            t2 = b.taut(Imp(Imp(HS, q), Imp(H, F)))
            imap[i] = b.mp(g, t2)
        elif isinstance(j, GenExists):
            exq, S = F.left, F.right
            B_a = p.steps[j.premise].formula.left
            t1 = b.taut(Imp(Imp(H, Imp(B_a, S)), Imp(B_a, Imp(H, S))))
            m1 = b.mp(imap[j.premise], t1)
            g = b.add(Imp(exq, Imp(H, S)), GenExists(m1, j.eigen))
            t2 = b.taut(Imp(Imp(exq, Imp(H, S)), Imp(H, F)))
            imap[i] = b.mp(g, t2)
        else:
            k = b.add(F, j)
            t = b.taut(Imp(F, Imp(H, F)))
            imap[i] = b.mp(k, t)
    return b.build()


# ---------------------------------------------------------------------------
# combining case proofs

def _merge_hypotheses(proofs):
    merged = []
    seen = {}
    for p in proofs:
        for lab, f in p.hypotheses:
            if lab in seen:
                if not alpha_eq(seen[lab], f):
                    raise ValueError(f"hypothesis label {lab!r} bound to two formulas")
            else:
                seen[lab] = f
                merged.append((lab, f))
    return tuple(merged)


def case_combine(branches, last, target):
    """Combine per-case implications into the target disjunction.

    branches are pairs (A_i, proof of A_i -> D_i); last proves
    (~A_1 & ... & ~A_n) -> D_last.  Every D_i -> target and D_last ->
    target must be tautologous; the cases are exhaustive, so target follows
    by one curried case distinction.
    """
    from .syntax import and_chain

    proofs = [p for _, p in branches] + [last]
    b = ProofBuilder(proofs[0].calculus, _merge_hypotheses(proofs))
    ends = []
    for p in proofs:
        offset = len(b.steps)
        remap = {i: i + offset for i in range(len(p.steps))}
        for st in p.steps:
            b.add(st.formula, _remap_just(st.just, remap))
        ends.append(len(b.steps) - 1)

    weakened = []
    for (A, _), end in zip(branches, ends[:-1]):
        f = b.formula(end)
        k = b.by_taut(Imp(A, target), end)
        weakened.append(k)
    neg = and_chain([Neg(A) for A, _ in branches]) if branches else None
    if neg is None:
        return b.build() if alpha_eq(b.formula(ends[-1]), target) else None
    k_last = b.by_taut(Imp(neg, target), ends[-1])
    b.by_taut(target, *weakened, k_last)
    return b.build()


def compile_witness(crits, goal, calculus="EC_eps", hypotheses=()):
    """Check that the critical formulas for the given (eps-term, instance)
    pairs propositionally entail goal; if so, return a checked proof, else
    the falsifying assignment."""
    b = ProofBuilder(calculus, hypotheses, check_tauts=False)
    idxs = [b.crit(e, t) for e, t in crits]
    f = goal
    for idx in reversed(idxs):
        f = Imp(b.formula(idx), f)
    model = _countermodel(f, True)
    if model is not None:
        return None, model
    b.by_taut(goal, *idxs)
    return b.build(), None
