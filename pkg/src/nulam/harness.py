"""Desk-scale experimental apparatus: exhaustive well-typed term
enumeration, seeded random generation, and the differential suites that
exercise the two normalizers and the rewrite rules against each other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import FuelExhausted
from .nbe import norm
from .normal import (
    NCons,
    NNil,
    conforms,
    embed_nf,
    nf_eq,
    weaken_nf,
)
from .rewrite import one_step
from .staged import DEFAULT_FUEL, Fuel, WCons, WNil, diag_whenv, staged_norm, whnorm
from .syntax import (
    App,
    Append,
    Arrow,
    Base,
    Cons,
    Ctx,
    Fold,
    Fst,
    Lam,
    ListTy,
    Map,
    Nil,
    Pair,
    Prod,
    Snd,
    TT,
    Term,
    Ty,
    UNIT,
    Unit,
    Var,
    ctx_lookup,
    infer,
    term_size,
    weaken1,
    weaken_term,
)


# ---------------------------------------------------------------------------
# Enumeration of well-typed terms


def type_closure(tys) -> tuple:
    """All subterms of the given types, in a deterministic order.  These are
    the candidate types for enumeration positions the goal does not pin
    down (application arguments, map/fold sources, projections)."""
    seen = set()

    def add(ty: Ty):
        if ty in seen:
            return
        seen.add(ty)
        match ty:
            case Prod(a, b) | Arrow(a, b):
                add(a)
                add(b)
            case ListTy(a):
                add(a)
            case _:
                pass

    for ty in tys:
        add(ty)
    return tuple(sorted(seen, key=str))


class Enumerator:
    """Complete, duplicate-free enumeration of well-typed terms by exact
    node count, with non-goal types drawn from a fixed candidate set."""

    def __init__(self, ctx: Ctx, candidates: tuple):
        self.ctx = ctx
        self.candidates = candidates
        self.memo = {}

    def exact(self, ctx: Ctx, ty: Ty, size: int) -> tuple:
        key = (ctx, ty, size)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        out = []
        if size == 1:
            for i in range(len(ctx)):
                if ctx_lookup(ctx, i) == ty:
                    out.append(Var(i))
            if ty == UNIT:
                out.append(TT())
            if isinstance(ty, ListTy):
                out.append(Nil(ty.elem))
        elif size > 1:
            rest = size - 1
            match ty:
                case Arrow(a, b):
                    for body in self.exact(ctx + (a,), b, rest):
                        out.append(Lam(a, body))
                case Prod(a, b):
                    for s1 in range(1, rest):
                        for left in self.exact(ctx, a, s1):
                            for right in self.exact(ctx, b, rest - s1):
                                out.append(Pair(left, right))
                case ListTy(elem):
                    for s1 in range(1, rest):
                        for head in self.exact(ctx, elem, s1):
                            for tail in self.exact(ctx, ty, rest - s1):
                                out.append(Cons(head, tail))
                    for s1 in range(1, rest):
                        for left in self.exact(ctx, ty, s1):
                            for right in self.exact(ctx, ty, rest - s1):
                                out.append(Append(left, right))
                    for a in self.candidates:
                        for s1 in range(1, rest):
                            for fun in self.exact(ctx, Arrow(a, elem), s1):
                                for xs in self.exact(ctx, ListTy(a), rest - s1):
                                    out.append(Map(fun, xs, a))
            for a in self.candidates:
                for s1 in range(1, rest - 1):
                    for s2 in range(1, rest - s1):
                        s3 = rest - s1 - s2
                        for step in self.exact(ctx, Arrow(a, Arrow(ty, ty)), s1):
                            for init in self.exact(ctx, ty, s2):
                                for xs in self.exact(ctx, ListTy(a), s3):
                                    out.append(Fold(step, init, xs, a))
            for a in self.candidates:
                for s1 in range(1, rest):
                    for fun in self.exact(ctx, Arrow(a, ty), s1):
                        for arg in self.exact(ctx, a, rest - s1):
                            out.append(App(fun, arg))
            for b in self.candidates:
                for pair in self.exact(ctx, Prod(ty, b), rest):
                    out.append(Fst(pair))
            for a in self.candidates:
                for pair in self.exact(ctx, Prod(a, ty), rest):
                    out.append(Snd(pair))
        result = tuple(out)
        self.memo[key] = result
        return result


def enum_terms(ctx: Ctx, ty: Ty, size_bound: int) -> tuple:
    """Every well-typed term of node count <= size_bound at the given type,
    each exactly once, in a deterministic order."""
    enum = Enumerator(ctx, type_closure(ctx + (ty,)))
    out = []
    for size in range(1, size_bound + 1):
        out.extend(enum.exact(ctx, ty, size))
    return tuple(out)


@dataclass(frozen=True)
class Corpus:
    ctx: Ctx
    goals: tuple
    size_bound: int
    items: tuple  # of (goal type, term)


def build_corpus(ctx: Ctx, goals, size_bound: int) -> Corpus:
    enum = Enumerator(ctx, type_closure(ctx + tuple(goals)))
    items = []
    for goal in goals:
        for size in range(1, size_bound + 1):
            for t in enum.exact(ctx, goal, size):
                items.append((goal, t))
    return Corpus(ctx, tuple(goals), size_bound, tuple(items))


def default_corpus(size_bound: int = 7) -> Corpus:
    b0, b1 = Base(0), Base(1)
    ctx = (
        b0,                    # a
        Prod(b0, b1),          # p
        Arrow(b0, b0),         # f
        Arrow(b0, UNIT),       # g
        ListTy(b0),            # xs
        ListTy(b0),            # ys
    )
    goals = (b0, UNIT, Prod(b0, b1), ListTy(b0), Arrow(ListTy(b0), ListTy(b0)))
    return build_corpus(ctx, goals, size_bound)


DEFAULT_CORPUS_NAMES = ("a", "p", "f", "g", "xs", "ys")


# ---------------------------------------------------------------------------
# Seeded random generation


class TermGen:
    """Type-directed random generator over a fixed context."""

    def __init__(self, ctx: Ctx, seed: int, candidates: tuple = ()):
        self.ctx = ctx
        self.rng = random.Random(seed)
        self.candidates = candidates or type_closure(ctx)

    def minimal(self, ctx: Ctx, ty: Ty):
        for i in range(len(ctx)):
            if ctx_lookup(ctx, i) == ty:
                return Var(i)
        match ty:
            case Unit():
                return TT()
            case ListTy(_):
                return Nil(ty.elem)
            case Prod(a, b):
                left = self.minimal(ctx, a)
                right = self.minimal(ctx, b)
                if left is not None and right is not None:
                    return Pair(left, right)
            case Arrow(a, b):
                body = self.minimal(ctx + (a,), b)
                if body is not None:
                    return Lam(a, body)
        # one level of elimination out of the context
        for i in range(len(ctx)):
            entry = ctx_lookup(ctx, i)
            if isinstance(entry, Prod):
                if entry.left == ty:
                    return Fst(Var(i))
                if entry.right == ty:
                    return Snd(Var(i))
        for i in range(len(ctx)):
            entry = ctx_lookup(ctx, i)
            if isinstance(entry, Arrow) and entry.cod == ty:
                arg = self.minimal(ctx, entry.dom)
                if arg is not None:
                    return App(Var(i), arg)
        return None

    def gen(self, ty: Ty, size_budget: int, tries: int = 50):
        for _ in range(tries):
            t = self._go(self.ctx, ty, size_budget, depth=0)
            if t is not None:
                return t
        return self.minimal(self.ctx, ty)

    def _go(self, ctx: Ctx, ty: Ty, budget: int, depth: int):
        if budget <= 2 or depth > 12:
            return self.minimal(ctx, ty)
        options = ["minimal", "app", "fold"]
        match ty:
            case Arrow(_, __):
                options += ["lam", "lam", "lam"]
            case Prod(_, __):
                options += ["pair", "pair"]
            case ListTy(_):
                options += ["cons", "append", "map", "map"]
            case _:
                options += ["minimal"]
        for i in range(len(ctx)):
            if ctx_lookup(ctx, i) == ty:
                options.append("var")
        kind = self.rng.choice(options)
        split = lambda n, k: self._split(n, k)
        match kind:
            case "minimal":
                return self.minimal(ctx, ty)
            case "var":
                hits = [i for i in range(len(ctx)) if ctx_lookup(ctx, i) == ty]
                return Var(self.rng.choice(hits))
            case "lam":
                body = self._go(ctx + (ty.dom,), ty.cod, budget - 1, depth + 1)
                return None if body is None else Lam(ty.dom, body)
            case "pair":
                s1, s2 = split(budget - 1, 2)
                left = self._go(ctx, ty.left, s1, depth + 1)
                right = self._go(ctx, ty.right, s2, depth + 1)
                if left is None or right is None:
                    return None
                return Pair(left, right)
            case "cons":
                s1, s2 = split(budget - 1, 2)
                head = self._go(ctx, ty.elem, s1, depth + 1)
                tail = self._go(ctx, ty, s2, depth + 1)
                if head is None or tail is None:
                    return None
                return Cons(head, tail)
            case "append":
                s1, s2 = split(budget - 1, 2)
                left = self._go(ctx, ty, s1, depth + 1)
                right = self._go(ctx, ty, s2, depth + 1)
                if left is None or right is None:
                    return None
                return Append(left, right)
            case "map":
                a = self.rng.choice(self.candidates)
                s1, s2 = split(budget - 1, 2)
                fun = self._go(ctx, Arrow(a, ty.elem), s1, depth + 1)
                xs = self._go(ctx, ListTy(a), s2, depth + 1)
                if fun is None or xs is None:
                    return None
                return Map(fun, xs, a)
            case "fold":
                a = self.rng.choice(self.candidates)
                s1, s2, s3 = split(budget - 1, 3)
                step = self._go(ctx, Arrow(a, Arrow(ty, ty)), s1, depth + 1)
                init = self._go(ctx, ty, s2, depth + 1)
                xs = self._go(ctx, ListTy(a), s3, depth + 1)
                if step is None or init is None or xs is None:
                    return None
                return Fold(step, init, xs, a)
            case "app":
                a = self.rng.choice(self.candidates)
                s1, s2 = split(budget - 1, 2)
                fun = self._go(ctx, Arrow(a, ty), s1, depth + 1)
                arg = self._go(ctx, a, s2, depth + 1)
                if fun is None or arg is None:
                    return None
                return App(fun, arg)
        raise AssertionError(kind)

    def _split(self, total: int, parts: int):
        cuts = sorted(self.rng.randint(1, max(1, total - 1)) for _ in range(parts - 1))
        sizes = []
        prev = 0
        for c in cuts:
            sizes.append(max(1, c - prev))
            prev = c
        sizes.append(max(1, total - prev))
        return sizes


def random_terms(ctx: Ctx, goals, seed: int, count: int, max_size: int) -> tuple:
    gen = TermGen(ctx, seed)
    rng = random.Random(seed ^ 0x5EED)
    out = []
    while len(out) < count:
        ty = goals[rng.randrange(len(goals))]
        t = gen.gen(ty, max_size)
        if t is None:
            continue
        if term_size(t) <= max_size:
            out.append((ty, t))
    return tuple(out)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Report:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def fail(self, message: str):
        self.failures.append(message)

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self):
        for message in self.failures:
            yield f"FAIL [{self.name}] {message}"


class NormCache:
    """Memoized normal forms: rewrite instances share many terms."""

    def __init__(self, ctx: Ctx):
        self.ctx = ctx
        self.cache = {}

    def __call__(self, t: Term):
        hit = self.cache.get(t)
        if hit is None:
            hit = self.cache[t] = norm(self.ctx, t)
        return hit


# ---------------------------------------------------------------------------
# Suites


def check_rule_soundness(corpus: Corpus, normalize=None) -> Report:
    """Every one-step rewrite instance over the corpus preserves both the
    type and the normal form."""
    report = Report("rule-soundness")
    ctx = corpus.ctx
    normalize = normalize or NormCache(ctx)
    instances = 0
    for goal, t in corpus.items:
        base_nf = normalize(t)
        for step in one_step(ctx, t, bidirectional=True):
            instances += 1
            try:
                got_ty = infer(ctx, step.result, None)
            except Exception as e:
                report.fail(f"{step.rule.value} broke typing on {t}: {e}")
                continue
            if got_ty != goal:
                report.fail(f"{step.rule.value} changed type of {t}: {got_ty}")
                continue
            if not nf_eq(base_nf, normalize(step.result)):
                report.fail(f"{step.rule.value} changed the normal form of {t}")
        report.checked += 1
    report.notes["instances"] = instances
    return report


def cross_check_normalizers(corpus: Corpus, fuel: int = DEFAULT_FUEL, extra_items=()) -> Report:
    """Differential and structural checks over both engines."""
    report = Report("cross-check")
    ctx = corpus.ctx
    fresh = Base(1)
    up = weaken1(ctx, fresh)
    exhausted = 0
    for goal, t in tuple(corpus.items) + tuple(extra_items):
        report.checked += 1
        reference = norm(ctx, t)
        try:
            layered = staged_norm(ctx, t, fuel)
        except FuelExhausted:
            exhausted += 1
            report.fail(f"fuel exhausted on {t}")
            continue
        if not nf_eq(layered, reference):
            report.fail(f"engines disagree on {t}")
            continue
        if not conforms(ctx, goal, reference):
            report.fail(f"output grammar violation on {t}")
        embedded = embed_nf(reference)
        if infer(ctx, embedded, None) != goal:
            report.fail(f"type not preserved on {t}")
        if not nf_eq(norm(ctx, embedded), reference):
            report.fail(f"not idempotent on {t}")
        weak_then_norm = norm(ctx + (fresh,), weaken_term(up, t))
        if not nf_eq(weak_then_norm, weaken_nf(up, reference)):
            report.fail(f"weakening unstable on {t}")
        if isinstance(goal, ListTy) and isinstance(reference, (NNil, NCons)):
            head = whnorm(diag_whenv(ctx), t, Fuel(fuel))
            if not isinstance(head, (WNil, WCons)):
                report.fail(f"constructor-headed nf but stuck weak head on {t}")
    report.notes["fuel_exhausted"] = exhausted
    return report


def check_surface_roundtrip(corpus: Corpus, names=DEFAULT_CORPUS_NAMES) -> Report:
    from .surface import elaborate, parse, pretty

    report = Report("surface-roundtrip")
    ctx = corpus.ctx
    sctx = tuple(zip(names, ctx))
    for goal, t in corpus.items:
        report.checked += 1
        printed = pretty(names, t)
        _, back, _ = elaborate(sctx, parse(printed))
        if back != t:
            report.fail(f"term round trip broke on {printed}")
            continue
        nf = norm(ctx, t)
        printed_nf = pretty(names, nf)
        _, back_nf, _ = elaborate(sctx, parse(printed_nf))
        if back_nf != embed_nf(nf):
            report.fail(f"normal form round trip broke on {printed_nf}")
    return report


def selftest(
    seed: int = 0,
    size_bound: int = 7,
    random_count: int = 300,
    random_size: int = 15,
    fuel: int = DEFAULT_FUEL,
    out=print,
) -> bool:
    """Run every suite on the default corpus; one line per failure and a
    PASS/FAIL summary line last."""
    corpus = default_corpus(size_bound)
    out(f"corpus: {len(corpus.items)} terms over {len(corpus.goals)} goal types")
    randoms = random_terms(corpus.ctx, corpus.goals, seed, random_count, random_size)
    reports = [
        check_rule_soundness(corpus),
        cross_check_normalizers(corpus, fuel, extra_items=randoms),
        check_surface_roundtrip(corpus),
    ]
    total = sum(r.checked for r in reports)
    failed = sum(len(r.failures) for r in reports)
    for r in reports:
        for line in r.lines():
            out(line)
        note = ", ".join(f"{k}={v}" for k, v in r.notes.items())
        out(f"suite {r.name}: {r.checked} checked" + (f" ({note})" if note else ""))
    if failed:
        out(f"FAIL {total - failed}/{total}")
        return False
    out(f"PASS {total}/{total}")
    return True
