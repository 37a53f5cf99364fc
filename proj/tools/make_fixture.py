#!/usr/bin/env python3
"""Generate the pinned Metamath fixture database used by the test suites.

The header is the opening of set.mm's propositional calculus (ax-mp, ax-1,
ax-2, ax-3, mp2b, a1i, ...) plus a few predicate-calculus constructors and
axioms using the older "set" typecode. After the header come generated
propositions. Each one is built top-down from a random instance of an
existing theorem; every open subgoal either becomes an essential hypothesis
or is discharged by applying an earlier theorem with a random completion of
its unconstrained variables. Roughly half of the proofs are written in the
compressed format, with Z back-references for repeated subproofs.

Usage: make_fixture.py [--count N] [--seed S] > fixture.mm
"""

import argparse
import random
import sys

HEADER = r"""$( Fixture database in set.mm notation.  Generated by tools/make_fixture.py;
   do not edit by hand. $)

  $c ( $.  $c ) $.  $c -> $.  $c -. $.  $c wff $.  $c |- $.
  $c /\ $.  $c <-> $.

  $v ph $.  $v ps $.  $v ch $.  $v th $.  $v ta $.  $v et $.
  wph $f wff ph $.
  wps $f wff ps $.
  wch $f wff ch $.
  wth $f wff th $.
  wta $f wff ta $.
  wet $f wff et $.

  wn $a wff -. ph $.
  wi $a wff ( ph -> ps ) $.

  ${
    min $e |- ph $.
    maj $e |- ( ph -> ps ) $.
    ax-mp $a |- ps $.
  $}

  ax-1 $a |- ( ph -> ( ps -> ph ) ) $.
  ax-2 $a |- ( ( ph -> ( ps -> ch ) ) -> ( ( ph -> ps ) -> ( ph -> ch ) ) ) $.
  ax-3 $a |- ( ( -. ph -> -. ps ) -> ( ps -> ph ) ) $.

  wb $a wff ( ph <-> ps ) $.
  wa $a wff ( ph /\ ps ) $.

  ${
    bi1.1 $e |- ( ph <-> ps ) $.
    ax-bi1 $a |- ( ph -> ps ) $.
  $}
  ${
    bi2.1 $e |- ( ph <-> ps ) $.
    ax-bi2 $a |- ( ps -> ph ) $.
  $}
  ${
    bii.1 $e |- ( ph -> ps ) $.
    bii.2 $e |- ( ps -> ph ) $.
    ax-bii $a |- ( ph <-> ps ) $.
  $}
  ax-an1 $a |- ( ( ph /\ ps ) -> ph ) $.
  ax-an2 $a |- ( ( ph /\ ps ) -> ps ) $.
  ax-ani $a |- ( ph -> ( ps -> ( ph /\ ps ) ) ) $.

  $c A. $.  $c set $.  $c class $.  $c = $.  $c e. $.
  $v x $.  $v y $.  $v z $.  $v w $.
  vx $f set x $.
  vy $f set y $.
  vz $f set z $.
  vw $f set w $.
  $v A $.  $v B $.  $v C $.
  cA $f class A $.
  cB $f class B $.
  cC $f class C $.

  wal $a wff A. x ph $.
  cv $a class x $.
  wceq $a wff A = B $.
  wcel $a wff A e. B $.

  ${
    ax-g.1 $e |- ph $.
    ax-gen $a |- A. x ph $.
  $}
  ax-4 $a |- ( A. x ph -> ph ) $.
  ax-5 $a |- ( A. x ( ph -> ps ) -> ( A. x ph -> A. x ps ) ) $.
  ${
    $d x ph $.
    ax-17 $a |- ( ph -> A. x ph ) $.
  $}
  ax-ceq $a |- ( A = B -> ( A = C -> B = C ) ) $.
  ax-cel $a |- ( A = B -> ( A e. C -> B e. C ) ) $.
  ${
    $d x A $.
    ax-cvd $a |- ( A. x A = B -> A = B ) $.
  $}

  ${
    idi.1 $e |- ph $.
    idi $p |- ph $=
      idi.1 $.
  $}
"""

VAR_TYPES = {}
VAR_ORDER = {}
FLABEL = {}
for i, (lab, t, v) in enumerate([
        ("wph", "wff", "ph"), ("wps", "wff", "ps"), ("wch", "wff", "ch"),
        ("wth", "wff", "th"), ("wta", "wff", "ta"), ("wet", "wff", "et"),
        ("vx", "set", "x"), ("vy", "set", "y"), ("vz", "set", "z"),
        ("vw", "set", "w"), ("cA", "class", "A"), ("cB", "class", "B"),
        ("cC", "class", "C")]):
    VAR_TYPES[v] = t
    VAR_ORDER[v] = i
    FLABEL[v] = lab

CONSTRUCTORS = {
    "wn": ("wff", ["-.", "ph"]),
    "wi": ("wff", ["(", "ph", "->", "ps", ")"]),
    "wb": ("wff", ["(", "ph", "<->", "ps", ")"]),
    "wa": ("wff", ["(", "ph", "/\\", "ps", ")"]),
    "wal": ("wff", ["A.", "x", "ph"]),
    "cv": ("class", ["x"]),
    "wceq": ("wff", ["A", "=", "B"]),
    "wcel": ("wff", ["A", "e.", "B"]),
}


def ctor_slots(label):
    return [s for s in CONSTRUCTORS[label][1] if s in VAR_TYPES]


def ctor_mand(label):
    return sorted(ctor_slots(label), key=lambda v: VAR_ORDER[v])


# Trees: ('V', name) or ('C', label, (children in body-slot order)).
def V(name):
    return ('V', name)


def C(label, *kids):
    return ('C', label, tuple(kids))


def tree_type(t):
    return VAR_TYPES[t[1]] if t[0] == 'V' else CONSTRUCTORS[t[1]][0]


def render(t):
    if t[0] == 'V':
        return [t[1]]
    out = []
    slots = ctor_slots(t[1])
    for s in CONSTRUCTORS[t[1]][1]:
        if s in VAR_TYPES:
            out.extend(render(t[2][slots.index(s)]))
        else:
            out.append(s)
    return out


def tree_vars(t, acc=None):
    if acc is None:
        acc = set()
    if t[0] == 'V':
        acc.add(t[1])
    else:
        for k in t[2]:
            tree_vars(k, acc)
    return acc


def tree_size(t):
    if t[0] == 'V':
        return 1
    return 1 + sum(tree_size(k) for k in t[2])


def subst(t, phi):
    if t[0] == 'V':
        return phi.get(t[1], t)
    return ('C', t[1], tuple(subst(k, phi) for k in t[2]))


def match(pat, tgt, phi):
    if pat[0] == 'V':
        if tree_type(tgt) != VAR_TYPES[pat[1]]:
            return False
        if pat[1] in phi:
            return phi[pat[1]] == tgt
        phi[pat[1]] = tgt
        return True
    if tgt[0] != 'C' or tgt[1] != pat[1]:
        return False
    return all(match(p, q, phi) for p, q in zip(pat[2], tgt[2]))


def tag(t, mark, names):
    if t[0] == 'V':
        return ('V', mark + t[1]) if t[1] in names else t
    return ('C', t[1], tuple(tag(k, mark, names) for k in t[2]))


def is_meta(t):
    return t[0] == 'V' and t[1][0] in "?#"


def resolve(t, s):
    while is_meta(t) and t[1] in s:
        t = s[t[1]]
    if t[0] == 'V':
        return t
    return ('C', t[1], tuple(resolve(k, s) for k in t[2]))


def occurs(name, t, s):
    t = resolve(t, s)
    if t[0] == 'V':
        return t[1] == name
    return any(occurs(name, k, s) for k in t[2])


def meta_type(t):
    return VAR_TYPES[t[1][1:]] if is_meta(t) else tree_type(t)


def unify(a, b, s):
    while is_meta(a) and a[1] in s:
        a = s[a[1]]
    while is_meta(b) and b[1] in s:
        b = s[b[1]]
    if a == b:
        return True
    if is_meta(a) or is_meta(b):
        if not is_meta(a):
            a, b = b, a
        if meta_type(a) != meta_type(b) or occurs(a[1], b, s):
            return False
        s[a[1]] = b
        return True
    if a[0] != 'C' or b[0] != 'C' or a[1] != b[1]:
        return False
    return all(unify(x, y, s) for x, y in zip(a[2], b[2]))


def syntax_rpn(t):
    if t[0] == 'V':
        return [FLABEL[t[1]]]
    slots = ctor_slots(t[1])
    out = []
    for v in ctor_mand(t[1]):
        out.extend(syntax_rpn(t[2][slots.index(v)]))
    out.append(t[1])
    return out


def parse_wff(text):
    """Parse a symbol string of the fixture grammar (prefix-decidable)."""
    toks = text.split()
    pos = [0]

    def expect(s):
        assert toks[pos[0]] == s, (text, pos[0], s)
        pos[0] += 1

    def cls():
        s = toks[pos[0]]
        if VAR_TYPES.get(s) == "class":
            pos[0] += 1
            return V(s)
        if VAR_TYPES.get(s) == "set":
            pos[0] += 1
            return C("cv", V(s))
        raise ValueError(text)

    def wff():
        s = toks[pos[0]]
        if VAR_TYPES.get(s) == "wff":
            pos[0] += 1
            return V(s)
        if s == "-.":
            pos[0] += 1
            return C("wn", wff())
        if s == "A.":
            pos[0] += 1
            x = toks[pos[0]]
            pos[0] += 1
            return C("wal", V(x), wff())
        if s == "(":
            pos[0] += 1
            a = wff()
            op = toks[pos[0]]
            pos[0] += 1
            b = wff()
            expect(")")
            return C({"->": "wi", "<->": "wb", "/\\": "wa"}[op], a, b)
        a = cls()
        op = toks[pos[0]]
        pos[0] += 1
        b = cls()
        return C({"=": "wceq", "e.": "wcel"}[op], a, b)

    t = wff()
    assert pos[0] == len(toks), text
    return t


class Theorem:
    def __init__(self, label, hyps, assertion, dv=(), hyp_labels=None):
        self.label = label
        self.hyps = list(hyps)
        self.assertion = assertion
        self.all_dv = set(frozenset(p) for p in dv)
        self.hyp_labels = hyp_labels
        vs = set()
        for h in self.hyps:
            tree_vars(h, vs)
        tree_vars(assertion, vs)
        self.vars = sorted(vs, key=lambda v: VAR_ORDER[v])
        self.dv = set(p for p in self.all_dv if p <= vs)
        self.constrained = tree_vars(assertion)
        self.unconstrained = [v for v in self.vars if v not in self.constrained]


def T(label, hyps, assertion, dv=()):
    return Theorem(label, [parse_wff(h) for h in hyps], parse_wff(assertion), dv)


BASE_THEOREMS = [
    T("ax-mp", ["ph", "( ph -> ps )"], "ps"),
    T("ax-1", [], "( ph -> ( ps -> ph ) )"),
    T("ax-2", [], "( ( ph -> ( ps -> ch ) ) -> ( ( ph -> ps ) -> ( ph -> ch ) ) )"),
    T("ax-3", [], "( ( -. ph -> -. ps ) -> ( ps -> ph ) )"),
    T("ax-bi1", ["( ph <-> ps )"], "( ph -> ps )"),
    T("ax-bi2", ["( ph <-> ps )"], "( ps -> ph )"),
    T("ax-bii", ["( ph -> ps )", "( ps -> ph )"], "( ph <-> ps )"),
    T("ax-an1", [], "( ( ph /\\ ps ) -> ph )"),
    T("ax-an2", [], "( ( ph /\\ ps ) -> ps )"),
    T("ax-ani", [], "( ph -> ( ps -> ( ph /\\ ps ) ) )"),
    T("ax-gen", ["ph"], "A. x ph"),
    T("ax-4", [], "( A. x ph -> ph )"),
    T("ax-5", [], "( A. x ( ph -> ps ) -> ( A. x ph -> A. x ps ) )"),
    T("ax-17", [], "( ph -> A. x ph )", dv=[("x", "ph")]),
    T("ax-ceq", [], "( A = B -> ( A = C -> B = C ) )"),
    T("ax-cel", [], "( A = B -> ( A e. C -> B e. C ) )"),
    T("ax-cvd", [], "( A. x A = B -> A = B )", dv=[("x", "A")]),
    T("idi", ["ph"], "ph"),
]


class Gen:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.theorems = {t.label: t for t in BASE_THEOREMS}
        self.order = [t.label for t in BASE_THEOREMS]

    # -- random expressions ------------------------------------------------
    def rand_var(self, typ, pool=None):
        names = [v for v in VAR_TYPES if VAR_TYPES[v] == typ]
        if typ == "wff":
            names = pool or ["ph", "ps", "ch", "th"]
        return V(self.rng.choice(names))

    def rand_tree(self, typ, depth):
        r = self.rng
        if typ == "set":
            return self.rand_var("set")
        if typ == "class":
            if r.random() < 0.5:
                return self.rand_var("class")
            return C("cv", self.rand_var("set"))
        if depth <= 0 or r.random() < 0.45:
            return self.rand_var("wff")
        k = r.random()
        if k < 0.2:
            return C("wn", self.rand_tree("wff", depth - 1))
        if k < 0.6:
            return C("wi", self.rand_tree("wff", depth - 1), self.rand_tree("wff", depth - 1))
        if k < 0.7:
            return C("wa", self.rand_tree("wff", depth - 1), self.rand_tree("wff", depth - 1))
        if k < 0.78:
            return C("wb", self.rand_tree("wff", depth - 1), self.rand_tree("wff", depth - 1))
        if k < 0.88:
            return C("wal", self.rand_var("set"), self.rand_tree("wff", depth - 1))
        if k < 0.94:
            return C("wceq", self.rand_tree("class", 0), self.rand_tree("class", 0))
        return C("wcel", self.rand_tree("class", 0), self.rand_tree("class", 0))

    def complete(self, thm, phi, pool):
        """Fill unassigned variables of thm with random images."""
        for v in thm.vars:
            if v in phi:
                continue
            typ = VAR_TYPES[v]
            if typ == "wff" and pool and self.rng.random() < 0.6:
                phi[v] = self.rng.choice(pool)
            else:
                phi[v] = self.rand_tree(typ, 1)
        return phi

    # -- proof construction -----------------------------------------------
    def dv_needs(self, thm, phi):
        needs = set()
        for pair in thm.dv:
            x, y = tuple(pair)
            for a in tree_vars(phi[x]):
                for b in tree_vars(phi[y]):
                    if a == b:
                        return None
                    needs.add(frozenset((a, b)))
        return needs

    def build(self, expr, depth, state):
        """Return a proof node for expr, or None on failure."""
        r = self.rng
        if state["nodes"] > 40:
            return None
        p_leaf = [0.0, 0.2, 0.35, 0.5, 0.65, 0.8, 1.0][min(depth, 6)]
        cands = []
        for lab in self.order:
            th = self.theorems[lab]
            phi = {}
            if match(th.assertion, expr, phi):
                cands.append((th, phi))
        closers = [c for c in cands if not c[0].hyps]
        if closers and r.random() < 0.9:
            th, phi = r.choice(closers)
        elif depth > 0 and r.random() < p_leaf:
            return self.hyp(expr, state)
        elif not cands:
            return self.hyp(expr, state)
        else:
            th, phi = r.choice(cands)
        pool = self.subterms(expr, "wff") + state["hyp_pool"]
        if th.unconstrained and r.random() < 0.75:
            phi = self.aim(th, phi) or phi
        phi = self.complete(th, dict(phi), pool)
        needs = self.dv_needs(th, phi)
        if needs is None:
            return self.hyp(expr, state)
        saved = (state["nodes"], list(state["hyps"]), set(state["dv"]))
        state["nodes"] += 1
        kids = []
        for h in th.hyps:
            sub = subst(h, phi)
            k = None
            if tree_size(sub) <= 25:
                k = self.build(sub, depth + 1, state)
            if k is None:
                state["nodes"], state["hyps"], state["dv"] = saved
                return self.hyp(expr, state) if depth > 0 else None
            kids.append(k)
        state["dv"] |= needs
        return ('A', th.label, phi, kids, expr)

    def aim(self, th, phi):
        """Choose unconstrained images so that some hypothesis of th becomes
        an instance of a hypothesis-free theorem."""
        r = self.rng
        closers = [self.theorems[l] for l in self.order if not self.theorems[l].hyps]
        hyps = [h for h in th.hyps if tree_vars(h) & set(th.unconstrained)]
        r.shuffle(hyps)
        for h in hyps:
            pat = subst(tag(h, "?", th.unconstrained), phi)
            base = [c for c in closers[:12]]
            pick = base + r.sample(closers, min(len(closers), 30))
            r.shuffle(pick)
            for c in pick:
                s = {}
                if unify(pat, tag(c.assertion, "#", c.vars), s):
                    out = dict(phi)
                    for v in th.unconstrained:
                        img = resolve(('V', "?" + v), s)
                        if tree_size(img) > 12:
                            break
                        out[v] = self.ground(img)
                    else:
                        return out
        return None

    def ground(self, t):
        if t[0] == 'V':
            if t[1][0] in "?#":
                return self.rand_tree(VAR_TYPES[t[1][1:]], 1)
            return t
        return ('C', t[1], tuple(self.ground(k) for k in t[2]))

    def hyp(self, expr, state):
        state["nodes"] += 1
        if expr not in state["hyps"]:
            state["hyps"].append(expr)
        return ('H', expr)

    def subterms(self, t, typ):
        out = []
        if tree_type(t) == typ:
            out.append(t)
        if t[0] == 'C':
            for k in t[2]:
                out.extend(self.subterms(k, typ))
        return out

    def gen_chain(self, label):
        """Implication chain a0 -> a1 -> ... -> ak glued with syl; some links
        are axiom instances, the rest become hypotheses."""
        r = self.rng
        k = r.randint(2, 6)
        cur = self.rand_tree("wff", 1)
        links = []
        dv = set()
        for _ in range(k):
            nxt, proof = None, None
            roll = r.random()
            if roll < 0.2:
                nxt = C("wi", self.rand_tree("wff", 1), cur)
                proof = ('A', "ax-1", {"ph": cur, "ps": nxt[2][0]}, [], C("wi", cur, nxt))
            elif roll < 0.35 and cur[0] == 'C' and cur[1] == "wa":
                nxt = cur[2][0]
                proof = ('A', "ax-an1", {"ph": cur[2][0], "ps": cur[2][1]}, [], C("wi", cur, nxt))
            elif roll < 0.45 and cur[0] == 'C' and cur[1] == "wal":
                nxt = cur[2][1]
                proof = ('A', "ax-4", {"x": cur[2][0], "ph": nxt}, [], C("wi", cur, nxt))
            elif roll < 0.55:
                x = self.rand_var("set")
                vs = tree_vars(cur)
                if x[1] not in vs:
                    nxt = C("wal", x, cur)
                    proof = ('A', "ax-17", {"x": x, "ph": cur}, [], C("wi", cur, nxt))
                    dv |= set(frozenset((x[1], v)) for v in vs)
            if nxt is None or tree_size(nxt) > 14:
                nxt = self.rand_tree("wff", 2)
                proof = None
            links.append((cur, nxt, proof))
            cur = nxt
        hyps = []
        nodes = []
        for a, b, proof in links:
            e = C("wi", a, b)
            if proof is None:
                if e not in hyps:
                    hyps.append(e)
                proof = ('H', e)
            nodes.append(proof)
        acc = nodes[0]
        start = links[0][0]
        for (a, b, _), node in zip(links[1:], nodes[1:]):
            expr = C("wi", start, b)
            acc = ('A', "syl", {"ph": start, "ps": a, "ch": b}, [acc, node], expr)
        target = acc[4]
        if target in hyps or len(hyps) > 6:
            return None
        dvl = sorted(tuple(sorted(p, key=lambda v: VAR_ORDER[v])) for p in dv)
        thm = Theorem(label, hyps, target, dvl,
                      ["%s.%d" % (label, i + 1) for i in range(len(hyps))])
        return thm, acc

    def gen_prop(self, label):
        r = self.rng
        while r.random() < 0.3:
            made = self.gen_chain(label)
            if made:
                return made
        recent = self.order[-300:]
        while True:
            lab = r.choice(self.order[:24] if r.random() < 0.5 else recent)
            th = self.theorems[lab]
            if not th.hyps and r.random() < 0.85:
                continue
            if len(th.hyps) > 2 and r.random() < 0.8:
                continue
            phi = self.complete(th, {}, [])
            needs = self.dv_needs(th, phi)
            if needs is None:
                continue
            target = subst(th.assertion, phi)
            if tree_size(target) > 25:
                continue
            state = {"nodes": 1, "hyps": [], "dv": set(needs), "hyp_pool": []}
            kids = []
            ok = True
            for h in th.hyps:
                k = self.build(subst(h, phi), 1, state)
                if k is None:
                    ok = False
                    break
                kids.append(k)
            if not ok:
                continue
            if len(state["hyps"]) > 6 or target in state["hyps"]:
                continue
            root = ('A', lab, phi, kids, target)
            vs = set(tree_vars(target))
            for h in state["hyps"]:
                tree_vars(h, vs)
            # dv pairs on statement variables are mandatory; others optional
            dv = sorted(tuple(sorted(p, key=lambda v: VAR_ORDER[v])) for p in state["dv"])
            thm = Theorem(label, state["hyps"], target, dv,
                          ["%s.%d" % (label, i + 1) for i in range(len(state["hyps"]))])
            return thm, root

    def proof_labels(self, node, thm):
        """Uncompressed RPN labels of a proof node."""
        if node[0] == 'H':
            return [thm.hyp_labels[thm.hyps.index(node[1])]]
        _, lab, phi, kids, _ = node
        th = self.theorems[lab]
        out = []
        for v in th.vars:
            out.extend(syntax_rpn(phi[v]))
        for k in kids:
            out.extend(self.proof_labels(k, thm))
        out.append(lab)
        return out

    def proof_steps(self, node, thm):
        """Proof as a tree of (label, children) keyed for sharing detection."""
        if node[0] == 'H':
            return (thm.hyp_labels[thm.hyps.index(node[1])], ())
        _, lab, phi, kids, _ = node
        th = self.theorems[lab]
        ch = [self.syntax_steps(phi[v]) for v in th.vars]
        ch += [self.proof_steps(k, thm) for k in kids]
        return (lab, tuple(ch))

    def syntax_steps(self, t):
        if t[0] == 'V':
            return (FLABEL[t[1]], ())
        slots = ctor_slots(t[1])
        return (t[1], tuple(self.syntax_steps(t[2][slots.index(v)]) for v in ctor_mand(t[1])))

    def compressed(self, node, thm):
        steps = self.proof_steps(node, thm)
        mand = [FLABEL[v] for v in thm.vars] + thm.hyp_labels
        counts = {}

        def count(s):
            counts[s] = counts.get(s, 0) + 1
            if counts[s] == 1:
                for k in s[1]:
                    count(k)
        count(steps)
        labels = []

        def collect(s):
            if s[0] not in mand and s[0] not in labels:
                labels.append(s[0])
            for k in s[1]:
                collect(k)
        collect(steps)
        saved = {}
        out = []
        m, n = len(mand), len(labels)

        def num(lab):
            return mand.index(lab) + 1 if lab in mand else m + labels.index(lab) + 1

        def emit(s):
            if s in saved:
                out.append(encode(saved[s]))
                return
            for k in s[1]:
                emit(k)
            out.append(encode(num(s[0])))
            if counts[s] > 1 and s[1]:
                out.append("Z")
                saved[s] = m + n + len(saved) + 1
        emit(steps)
        return labels, "".join(out)

    def write_prop(self, thm, root, compress, out):
        out.append("\n  ${\n")
        for pair in sorted(thm.all_dv, key=lambda p: sorted(VAR_ORDER[v] for v in p)):
            out.append("    $d %s $.\n" % " ".join(sorted(pair, key=lambda v: VAR_ORDER[v])))
        for lab, h in zip(thm.hyp_labels, thm.hyps):
            out.append("    %s $e |- %s $.\n" % (lab, " ".join(render(h))))
        out.append("    %s $p |- %s $=\n" % (thm.label, " ".join(render(thm.assertion))))
        if compress:
            labels, code = self.compressed(root, thm)
            words = ["("] + labels + [")"]
            lines = wrap(words, 6)
            body = lines + chunk(code, 70, 6)
        else:
            body = wrap(self.proof_labels(root, thm), 6)
        body[-1] += " $."
        out.extend(line + "\n" for line in body)
        out.append("  $}\n")


def encode(n):
    s = chr(ord('A') + (n - 1) % 20)
    n = (n - 1) // 20
    while n > 0:
        s = chr(ord('U') + (n - 1) % 5) + s
        n = (n - 1) // 5
    return s


def wrap(words, indent, width=78):
    lines, cur = [], " " * indent
    for w in words:
        if len(cur) + len(w) + 1 > width and cur.strip():
            lines.append(cur)
            cur = " " * indent
        cur += ("" if not cur.strip() else " ") + w
    lines.append(cur)
    return lines


def chunk(code, n, indent):
    return [" " * indent + code[i:i + n] for i in range(0, len(code), n)] or [" " * indent]


HAND = [
    # (label, hyps, assertion, proof builder as nested applications)
    ("mp2b", ["ph", "( ph -> ps )", "( ps -> ch )"], "ch"),
    ("a1i", ["ph"], "( ps -> ph )"),
    ("a2i", ["( ph -> ( ps -> ch ) )"], "( ( ph -> ps ) -> ( ph -> ch ) )"),
    ("mpd", ["( ph -> ps )", "( ph -> ( ps -> ch ) )"], "( ph -> ch )"),
    ("syl", ["( ph -> ps )", "( ps -> ch )"], "( ph -> ch )"),
    ("id", [], "( ph -> ph )"),
]


def hand_proof(gen, label, hyps, assertion):
    """Hand-derived proofs of the set.mm opening theorems."""
    H = [('H', parse_wff(h)) for h in hyps]
    P = parse_wff
    hypt = [parse_wff(h) for h in hyps]

    def app(lab, phi_text, kids, expr_text):
        phi = {k: P(v) if VAR_TYPES[k] == "wff" else None for k, v in phi_text.items()}
        return ('A', lab, phi, kids, P(expr_text))

    if label == "mp2b":
        s1 = app("ax-mp", {"ph": "ph", "ps": "ps"}, [H[0], H[1]], "ps")
        return app("ax-mp", {"ph": "ps", "ps": "ch"}, [s1, H[2]], "ch")
    if label == "a1i":
        ax1 = app("ax-1", {"ph": "ph", "ps": "ps"}, [], "( ph -> ( ps -> ph ) )")
        return app("ax-mp", {"ph": "ph", "ps": "( ps -> ph )"}, [H[0], ax1], "( ps -> ph )")
    if label == "a2i":
        ax2 = app("ax-2", {"ph": "ph", "ps": "ps", "ch": "ch"}, [],
                  "( ( ph -> ( ps -> ch ) ) -> ( ( ph -> ps ) -> ( ph -> ch ) ) )")
        return app("ax-mp", {"ph": "( ph -> ( ps -> ch ) )",
                             "ps": "( ( ph -> ps ) -> ( ph -> ch ) )"}, [H[0], ax2],
                   "( ( ph -> ps ) -> ( ph -> ch ) )")
    if label == "mpd":
        s = app("a2i", {"ph": "ph", "ps": "ps", "ch": "ch"}, [H[1]],
                "( ( ph -> ps ) -> ( ph -> ch ) )")
        return app("ax-mp", {"ph": "( ph -> ps )", "ps": "( ph -> ch )"}, [H[0], s], "( ph -> ch )")
    if label == "syl":
        s = app("a1i", {"ph": "( ps -> ch )", "ps": "ph"}, [H[1]], "( ph -> ( ps -> ch ) )")
        return app("mpd", {"ph": "ph", "ps": "ps", "ch": "ch"}, [H[0], s], "( ph -> ch )")
    if label == "id":
        a = app("ax-1", {"ph": "ph", "ps": "ph"}, [], "( ph -> ( ph -> ph ) )")
        b = app("ax-1", {"ph": "ph", "ps": "( ph -> ph )"}, [], "( ph -> ( ( ph -> ph ) -> ph ) )")
        return app("mpd", {"ph": "ph", "ps": "( ph -> ph )", "ch": "ph"}, [a, b], "( ph -> ph )")
    raise KeyError(label)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=3200)
    ap.add_argument("--seed", type=int, default=20170213)
    args = ap.parse_args()
    gen = Gen(args.seed)
    out = [HEADER]
    for label, hyps, assertion in HAND:
        thm = Theorem(label, [parse_wff(h) for h in hyps], parse_wff(assertion), (),
                      ["%s.%d" % (label, i + 1) for i in range(len(hyps))])
        root = hand_proof(gen, label, hyps, assertion)
        gen.write_prop(thm, root, label in ("syl", "id"), out)
        gen.theorems[label] = thm
        gen.order.append(label)
    for i in range(args.count):
        label = "th%04d" % (i + 1)
        thm, root = gen.gen_prop(label)
        gen.write_prop(thm, root, gen.rng.random() < 0.5, out)
        gen.theorems[label] = thm
        gen.order.append(label)
    sys.stdout.write("".join(out))


if __name__ == "__main__":
    main()
