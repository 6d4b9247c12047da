"""Normalization by evaluation: a Kripke model, evaluation into it, and
type-directed readback.

Semantic values are indexed by type: the unit object at unit type, a
neutral spine at base types, real pairs at product types, context-stable
functions at arrow types (callables taking an explicit embedding), and a
three-constructor semantic list at list types whose stuck form pairs a
neutral spine with a function consuming fresh neutrals.

Unlike the staged pipeline this normalizer is structurally recursive on
types and terms, so it needs no fuel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .errors import IllTyped, ShapeViolation, TypeError_
from .normal import (
    Mapp,
    NApp,
    NCons,
    NFold,
    NFst,
    NLam,
    NNil,
    NPair,
    NSnd,
    NTT,
    NVar,
    Ne,
    NeAtBase,
    Nf,
    StdListVal,
    infer_ne,
    weaken_ne,
)
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
    Ope,
    Pair,
    Prod,
    Snd,
    TT,
    Term,
    Ty,
    Unit,
    Var,
    infer,
    ope_compose,
    ope_id,
    ope_is_id,
    ope_tgt,
    weaken1,
)


# ---------------------------------------------------------------------------
# The model


@dataclass(frozen=True, slots=True)
class SemUnit:
    pass


@dataclass(frozen=True, slots=True, eq=False)
class SemPair:
    fst: "Sem"
    snd: "Sem"


@dataclass(frozen=True, slots=True, eq=False)
class SemFun:
    """A context-stable function: callable in any extension of its home
    context, witnessed by an explicit embedding argument.  The callable
    must be pure and capture only immutable data."""

    run: Callable[[Ope, "Sem"], "Sem"]


@dataclass(frozen=True, slots=True)
class SNil:
    pass


@dataclass(frozen=True, slots=True, eq=False)
class SCons:
    head: "Sem"
    tail: "SemList"


@dataclass(frozen=True, slots=True, eq=False)
class SMapp:
    """A stuck map over a neutral list, followed by a semantic tail.  The
    stored function consumes fresh neutrals of the nut's element type."""

    fun: Callable[[Ope, Ne], "Sem"]
    xs: Ne
    rest: "SemList"


SemList = Union[SNil, SCons, SMapp]

# At unit: SemUnit; at base: a bare Ne; at products: SemPair; at arrows:
# SemFun; at lists: SemList.
Sem = Union[SemUnit, Ne, SemPair, SemFun, SemList]


@dataclass(frozen=True, slots=True)
class SemEnv:
    """Semantic values for every slot of ``src``, all living at ``tgt``."""

    src: Ctx
    tgt: Ctx
    values: tuple

    def lookup(self, idx: int) -> Sem:
        return self.values[len(self.values) - 1 - idx]

    def extend(self, ty: Ty, s: Sem) -> "SemEnv":
        return SemEnv(self.src + (ty,), self.tgt, self.values + (s,))

    def weaken(self, ope: Ope) -> "SemEnv":
        if ope_is_id(ope):
            return self
        return SemEnv(
            self.src,
            ope_tgt(ope),
            tuple(sem_weaken(ty, ope, v) for ty, v in zip(self.src, self.values)),
        )


# ---------------------------------------------------------------------------
# Weakening


def sem_weaken(ty: Ty, ope: Ope, s: Sem) -> Sem:
    if ope_is_id(ope):
        return s
    match ty:
        case Unit():
            return s
        case Base(_):
            return weaken_ne(ope, s)
        case Prod(a, b):
            return SemPair(sem_weaken(a, ope, s.fst), sem_weaken(b, ope, s.snd))
        case Arrow(_, _):
            run = s.run
            return SemFun(lambda ope2, arg: run(ope_compose(ope2, ope), arg))
        case ListTy(elem):
            return semlist_weaken(elem, ope, s)
    raise AssertionError(ty)


def semlist_weaken(elem: Ty, ope: Ope, s: SemList) -> SemList:
    match s:
        case SNil():
            return s
        case SCons(head, tail):
            return SCons(sem_weaken(elem, ope, head), semlist_weaken(elem, ope, tail))
        case SMapp(fun, xs, rest):
            return SMapp(
                lambda ope2, ne: fun(ope_compose(ope2, ope), ne),
                weaken_ne(ope, xs),
                semlist_weaken(elem, ope, rest),
            )
    raise AssertionError(s)


# ---------------------------------------------------------------------------
# Semantic list combinators


def vappend(xs: SemList, zs: SemList) -> SemList:
    match xs:
        case SNil():
            return zs
        case SCons(head, tail):
            return SCons(head, vappend(tail, zs))
        case SMapp(fun, nut, rest):
            return SMapp(fun, nut, vappend(rest, zs))
    raise AssertionError(xs)


def vmap(ctx: Ctx, fun: SemFun, xs: SemList) -> SemList:
    match xs:
        case SNil():
            return xs
        case SCons(head, tail):
            return SCons(fun.run(ope_id(ctx), head), vmap(ctx, fun, tail))
        case SMapp(gun, nut, rest):
            run = fun.run
            return SMapp(
                lambda ope, ne: run(ope, gun(ope, ne)), nut, vmap(ctx, fun, rest)
            )
    raise AssertionError(xs)


def vfold(ctx: Ctx, ret: Ty, step: SemFun, init: Sem, xs: SemList) -> Sem:
    match xs:
        case SNil():
            return init
        case SCons(head, tail):
            rest = vfold(ctx, ret, step, init, tail)
            return step.run(ope_id(ctx), head).run(ope_id(ctx), rest)
        case SMapp(fun, nut, rest):
            # The one place evaluation needs type information: build the
            # fused algebra and new seed as normal forms, then reflect the
            # fold over the bare neutral back into the model.
            nut_elem = infer_ne(ctx, nut).elem
            inner = ctx + (nut_elem, ret)
            up2 = weaken1(ctx + (nut_elem,), ret)
            up1 = weaken1(ctx, nut_elem)
            both = ope_compose(up2, up1)
            applied = step.run(both, fun(both, NVar(1)))
            body = applied.run(ope_id(inner), reflect(inner, ret, NVar(0)))
            algebra = NLam(nut_elem, NLam(ret, reify(inner, ret, body)))
            seed = reify(ctx, ret, vfold(ctx, ret, step, init, rest))
            return reflect(ctx, ret, NFold(algebra, seed, nut, nut_elem))
    raise AssertionError(xs)


# ---------------------------------------------------------------------------
# Evaluation


def eval_term(t: Term, env: SemEnv) -> Sem:
    match t:
        case Var(idx):
            return env.lookup(idx)
        case Lam(dom, body):
            return SemFun(
                lambda ope, arg: eval_term(body, env.weaken(ope).extend(dom, arg))
            )
        case App(fun, arg):
            f = eval_term(fun, env)
            return f.run(ope_id(env.tgt), eval_term(arg, env))
        case TT():
            return SemUnit()
        case Pair(left, right):
            return SemPair(eval_term(left, env), eval_term(right, env))
        case Fst(pair):
            p = eval_term(pair, env)
            if not isinstance(p, SemPair):
                raise ShapeViolation(f"projected from {p}")
            return p.fst
        case Snd(pair):
            p = eval_term(pair, env)
            if not isinstance(p, SemPair):
                raise ShapeViolation(f"projected from {p}")
            return p.snd
        case Nil(_):
            return SNil()
        case Cons(head, tail):
            return SCons(eval_term(head, env), eval_term(tail, env))
        case Append(left, right):
            return vappend(eval_term(left, env), eval_term(right, env))
        case Map(fun, xs, _):
            return vmap(env.tgt, eval_term(fun, env), eval_term(xs, env))
        case Fold(step, init, xs, _):
            # The return type is recovered by inference over the source
            # context the environment carries.
            ret = infer(env.src, t, None)
            return vfold(
                env.tgt, ret, eval_term(step, env), eval_term(init, env),
                eval_term(xs, env),
            )
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Readback


def reify(ctx: Ctx, ty: Ty, s: Sem) -> Nf:
    match ty:
        case Unit():
            return NTT()
        case Base(_):
            return NeAtBase(s)
        case Prod(a, b):
            return NPair(reify(ctx, a, s.fst), reify(ctx, b, s.snd))
        case Arrow(a, b):
            inner = ctx + (a,)
            up = weaken1(ctx, a)
            body = s.run(up, reflect(inner, a, NVar(0)))
            return NLam(a, reify(inner, b, body))
        case ListTy(elem):
            return listreify(ctx, elem, s)
    raise AssertionError(ty)


def listreify(ctx: Ctx, elem: Ty, s: SemList) -> Nf:
    match s:
        case SNil():
            return NNil(elem)
        case SCons(head, tail):
            return NCons(reify(ctx, elem, head), listreify(ctx, elem, tail))
        case SMapp(fun, nut, rest):
            nut_elem = infer_ne(ctx, nut).elem
            inner = ctx + (nut_elem,)
            up = weaken1(ctx, nut_elem)
            fn = NLam(nut_elem, reify(inner, elem, fun(up, NVar(0))))
            tail = listreify(ctx, elem, rest)
            return StdListVal(Mapp(fn, nut, tail, nut_elem))
    raise AssertionError(s)


def reflect(ctx: Ctx, ty: Ty, ne: Ne) -> Sem:
    match ty:
        case Unit():
            return SemUnit()
        case Base(_):
            return ne
        case Prod(a, b):
            return SemPair(reflect(ctx, a, NFst(ne)), reflect(ctx, b, NSnd(ne)))
        case Arrow(a, b):
            def run(ope: Ope, arg: Sem) -> Sem:
                there = ope_tgt(ope)
                return reflect(there, b, NApp(weaken_ne(ope, ne), reify(there, a, arg)))

            return SemFun(run)
        case ListTy(_):
            return listreflect(ctx, ty, ne)
    raise AssertionError(ty)


def listreflect(ctx: Ctx, ty: ListTy, ne: Ne) -> SemList:
    """Inject a neutral list as a stuck identity map with an empty tail."""
    elem = ty.elem
    return SMapp(lambda ope, t_ne: reflect(ope_tgt(ope), elem, t_ne), ne, SNil())


def diag_semenv(ctx: Ctx) -> SemEnv:
    n = len(ctx)
    values = tuple(
        reflect(ctx, ty, NVar(n - 1 - k)) for k, ty in enumerate(ctx)
    )
    return SemEnv(ctx, ctx, values)


# ---------------------------------------------------------------------------
# The normalizer


def norm(ctx: Ctx, t: Term) -> Nf:
    """Evaluate in the diagonal environment and read the result back."""
    try:
        ty = infer(ctx, t, None)
    except TypeError_ as e:
        raise IllTyped(str(e)) from e
    return reify(ctx, ty, eval_term(t, diag_semenv(ctx)))
