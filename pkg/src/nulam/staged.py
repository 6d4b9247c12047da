"""The three-stage normalizer: weak-head evaluation, then type-directed
eta-expansion, then standardization of stuck lists and folds.

The first stage is an environment machine with first-class closures that
never reduces under a binder.  The second expands values at unit, product
and arrow types, re-entering the machine when it applies a closure to a
fresh variable.  The third flattens stuck map/append trees into a single
``Mapp`` layer and pushes folds through stuck maps and appends by fusing
function compositions, which again restarts evaluation.

Because later stages re-invoke earlier ones, termination of the whole
pipeline is not structurally evident; every re-entry therefore draws from
a shared fuel budget and the pipeline fails loudly when it is exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import FuelExhausted, IllTyped, ShapeViolation, TypeError_
from .normal import Mapp, NCons, NFold, NLam, NNil, NPair, NTT, Ne, NeAtBase, Nf, NVar, NApp, NFst, NSnd, StdListVal, embed_nf
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
    UNIT,
    Unit,
    Var,
    ctx_lookup,
    infer,
    ope_apply,
    ope_tgt,
    weaken1,
)

DEFAULT_FUEL = 10**6


class Fuel:
    """Shared re-entry budget for one normalization run."""

    __slots__ = ("remaining",)

    def __init__(self, budget: int):
        self.remaining = budget

    def spend(self):
        self.remaining -= 1
        if self.remaining < 0:
            raise FuelExhausted("staged normalizer exceeded its fuel budget")


# ---------------------------------------------------------------------------
# Weak-head values


@dataclass(frozen=True, slots=True)
class WVar:
    idx: int


@dataclass(frozen=True, slots=True)
class WApp:
    fun: "WhNe"
    arg: "Wh"


@dataclass(frozen=True, slots=True)
class WFst:
    pair: "WhNe"


@dataclass(frozen=True, slots=True)
class WSnd:
    pair: "WhNe"


@dataclass(frozen=True, slots=True)
class WFold:
    step: "Wh"
    init: "Wh"
    xs: "WhNe"
    elem: Ty


@dataclass(frozen=True, slots=True)
class WMap:
    fun: "Wh"
    xs: "WhNe"
    dom: Ty


@dataclass(frozen=True, slots=True)
class WAppend:
    left: "WhNe"
    right: "Wh"


WhNe = Union[WVar, WApp, WFst, WSnd, WFold, WMap, WAppend]


@dataclass(frozen=True, slots=True)
class WhEnv:
    """Weak-head values for every slot of ``src``, all living at ``tgt``."""

    src: Ctx
    tgt: Ctx
    values: tuple

    def lookup(self, idx: int) -> "Wh":
        return self.values[len(self.values) - 1 - idx]

    def extend(self, ty: Ty, w: "Wh") -> "WhEnv":
        return WhEnv(self.src + (ty,), self.tgt, self.values + (w,))


@dataclass(frozen=True, slots=True)
class WNe:
    ne: WhNe


@dataclass(frozen=True, slots=True)
class WClosure:
    dom: Ty
    body: Term
    env: WhEnv


@dataclass(frozen=True, slots=True)
class WTT:
    pass


@dataclass(frozen=True, slots=True)
class WPair:
    left: "Wh"
    right: "Wh"


@dataclass(frozen=True, slots=True)
class WNil:
    elem: Ty


@dataclass(frozen=True, slots=True)
class WCons:
    head: "Wh"
    tail: "Wh"


Wh = Union[WNe, WClosure, WTT, WPair, WNil, WCons]


def diag_whenv(ctx: Ctx) -> WhEnv:
    n = len(ctx)
    return WhEnv(ctx, ctx, tuple(WNe(WVar(n - 1 - k)) for k in range(n)))


# ---------------------------------------------------------------------------
# Weakening of weak-head values


def weaken_whne(ope: Ope, m: WhNe) -> WhNe:
    match m:
        case WVar(idx):
            return WVar(ope_apply(ope, idx))
        case WApp(fun, arg):
            return WApp(weaken_whne(ope, fun), weaken_wh(ope, arg))
        case WFst(pair):
            return WFst(weaken_whne(ope, pair))
        case WSnd(pair):
            return WSnd(weaken_whne(ope, pair))
        case WFold(step, init, xs, elem):
            return WFold(weaken_wh(ope, step), weaken_wh(ope, init), weaken_whne(ope, xs), elem)
        case WMap(fun, xs, dom):
            return WMap(weaken_wh(ope, fun), weaken_whne(ope, xs), dom)
        case WAppend(left, right):
            return WAppend(weaken_whne(ope, left), weaken_wh(ope, right))
    raise AssertionError(m)


def weaken_wh(ope: Ope, w: Wh) -> Wh:
    match w:
        case WNe(m):
            return WNe(weaken_whne(ope, m))
        case WClosure(dom, body, env):
            return WClosure(dom, body, weaken_whenv(ope, env))
        case WTT() | WNil():
            return w
        case WPair(left, right):
            return WPair(weaken_wh(ope, left), weaken_wh(ope, right))
        case WCons(head, tail):
            return WCons(weaken_wh(ope, head), weaken_wh(ope, tail))
    raise AssertionError(w)


def weaken_whenv(ope: Ope, env: WhEnv) -> WhEnv:
    return WhEnv(env.src, ope_tgt(ope), tuple(weaken_wh(ope, v) for v in env.values))


# ---------------------------------------------------------------------------
# Typing weak-head values (needed to direct eta-expansion)


def infer_wh(tctx: Ctx, w: Wh) -> Ty:
    match w:
        case WNe(m):
            return infer_whne(tctx, m)
        case WClosure(dom, body, env):
            return Arrow(dom, infer(env.src + (dom,), body, None))
        case WTT():
            return UNIT
        case WPair(left, right):
            return Prod(infer_wh(tctx, left), infer_wh(tctx, right))
        case WNil(elem):
            return ListTy(elem)
        case WCons(head, _):
            return ListTy(infer_wh(tctx, head))
    raise AssertionError(w)


def infer_whne(tctx: Ctx, m: WhNe) -> Ty:
    match m:
        case WVar(idx):
            return ctx_lookup(tctx, idx)
        case WApp(fun, _):
            fun_ty = infer_whne(tctx, fun)
            if not isinstance(fun_ty, Arrow):
                raise ShapeViolation(f"application head has type {fun_ty}")
            return fun_ty.cod
        case WFst(pair):
            return infer_whne(tctx, pair).left
        case WSnd(pair):
            return infer_whne(tctx, pair).right
        case WFold(_, init, _, _):
            return infer_wh(tctx, init)
        case WMap(fun, _, _):
            fun_ty = infer_wh(tctx, fun)
            return ListTy(fun_ty.cod)
        case WAppend(left, _):
            return infer_whne(tctx, left)
    raise AssertionError(m)


# ---------------------------------------------------------------------------
# Stage one: the environment machine


def whnorm(env: WhEnv, t: Term, fuel: Fuel) -> Wh:
    """Weak-head evaluation; never descends under a binder."""
    match t:
        case Var(idx):
            return env.lookup(idx)
        case Lam(dom, body):
            return WClosure(dom, body, env)
        case App(fun, arg):
            return wh_app(whnorm(env, fun, fuel), whnorm(env, arg, fuel), fuel)
        case TT():
            return WTT()
        case Pair(left, right):
            return WPair(whnorm(env, left, fuel), whnorm(env, right, fuel))
        case Fst(pair):
            return wh_fst(whnorm(env, pair, fuel))
        case Snd(pair):
            return wh_snd(whnorm(env, pair, fuel))
        case Nil(elem):
            return WNil(elem)
        case Cons(head, tail):
            return WCons(whnorm(env, head, fuel), whnorm(env, tail, fuel))
        case Append(left, right):
            return wh_append(whnorm(env, left, fuel), whnorm(env, right, fuel), fuel)
        case Map(fun, xs, dom):
            return wh_map(env.tgt, whnorm(env, fun, fuel), whnorm(env, xs, fuel), dom, fuel)
        case Fold(step, init, xs, elem):
            return wh_fold(
                env.tgt,
                whnorm(env, step, fuel),
                whnorm(env, init, fuel),
                whnorm(env, xs, fuel),
                elem,
                fuel,
            )
    raise AssertionError(t)


def wh_app(fun: Wh, arg: Wh, fuel: Fuel) -> Wh:
    match fun:
        case WClosure(dom, body, env):
            fuel.spend()
            return whnorm(env.extend(dom, arg), body, fuel)
        case WNe(m):
            return WNe(WApp(m, arg))
    raise ShapeViolation(f"applied a non-function: {fun}")


def wh_fst(pair: Wh) -> Wh:
    match pair:
        case WPair(left, _):
            return left
        case WNe(m):
            return WNe(WFst(m))
    raise ShapeViolation(f"projected from a non-pair: {pair}")


def wh_snd(pair: Wh) -> Wh:
    match pair:
        case WPair(_, right):
            return right
        case WNe(m):
            return WNe(WSnd(m))
    raise ShapeViolation(f"projected from a non-pair: {pair}")


def wh_append(left: Wh, right: Wh, fuel: Fuel) -> Wh:
    match left:
        case WNil(_):
            return right
        case WCons(head, tail):
            return WCons(head, wh_append(tail, right, fuel))
        case WNe(m):
            return WNe(WAppend(m, right))
    raise ShapeViolation(f"appended a non-list: {left}")


def wh_map(tctx: Ctx, fun: Wh, xs: Wh, dom: Ty, fuel: Fuel) -> Wh:
    match xs:
        case WNil(_):
            fun_ty = infer_wh(tctx, fun)
            return WNil(fun_ty.cod)
        case WCons(head, tail):
            return WCons(
                wh_app(fun, head, fuel), wh_map(tctx, fun, tail, dom, fuel)
            )
        case WNe(m):
            return WNe(WMap(fun, m, dom))
    raise ShapeViolation(f"mapped over a non-list: {xs}")


def wh_fold(tctx: Ctx, step: Wh, init: Wh, xs: Wh, elem: Ty, fuel: Fuel) -> Wh:
    match xs:
        case WNil(_):
            return init
        case WCons(head, tail):
            rest = wh_fold(tctx, step, init, tail, elem, fuel)
            return wh_app(wh_app(step, head, fuel), rest, fuel)
        case WNe(m):
            return WNe(WFold(step, init, m, elem))
    raise ShapeViolation(f"folded over a non-list: {xs}")


def wh_comp(tctx: Ctx, fun: Wh, fun_ty: Arrow, gun: Wh, gun_ty: Arrow) -> Wh:
    """The closure of ``fun . gun``, built without evaluating under it."""
    env = WhEnv((fun_ty, gun_ty), tctx, (fun, gun))
    return WClosure(gun_ty.dom, App(Var(2), App(Var(1), Var(0))), env)


def wh_eliminate(kind: str, *args):
    """Dispatch to one of the weak-head elimination helpers by name."""
    table = {
        "app": wh_app,
        "fst": wh_fst,
        "snd": wh_snd,
        "map": wh_map,
        "append": wh_append,
        "fold": wh_fold,
        "comp": wh_comp,
    }
    return table[kind](*args)


# ---------------------------------------------------------------------------
# Eta-long values


@dataclass(frozen=True, slots=True)
class EVar:
    idx: int


@dataclass(frozen=True, slots=True)
class EApp:
    fun: "EtaNe"
    arg: "EtaVal"


@dataclass(frozen=True, slots=True)
class EFst:
    pair: "EtaNe"


@dataclass(frozen=True, slots=True)
class ESnd:
    pair: "EtaNe"


@dataclass(frozen=True, slots=True)
class EFold:
    step: "EtaVal"
    init: "EtaVal"
    xs: "EtaList"
    elem: Ty
    ret: Ty


EtaNe = Union[EVar, EApp, EFst, ESnd, EFold]


@dataclass(frozen=True, slots=True)
class ENeList:
    ne: EtaNe


@dataclass(frozen=True, slots=True)
class EStuckMap:
    fun: "EtaVal"
    xs: "EtaList"
    dom: Ty


@dataclass(frozen=True, slots=True)
class EStuckAppend:
    xs: "EtaList"
    rest: "EtaVal"


EtaList = Union[ENeList, EStuckMap, EStuckAppend]


@dataclass(frozen=True, slots=True)
class ENeAtBase:
    ne: EtaNe


@dataclass(frozen=True, slots=True)
class EStuckList:
    stuck: EtaList


@dataclass(frozen=True, slots=True)
class ELam:
    dom: Ty
    body: "EtaVal"


@dataclass(frozen=True, slots=True)
class ETT:
    pass


@dataclass(frozen=True, slots=True)
class EPairV:
    left: "EtaVal"
    right: "EtaVal"


@dataclass(frozen=True, slots=True)
class ENilV:
    elem: Ty


@dataclass(frozen=True, slots=True)
class EConsV:
    head: "EtaVal"
    tail: "EtaVal"


EtaVal = Union[ENeAtBase, EStuckList, ELam, ETT, EPairV, ENilV, EConsV]


# ---------------------------------------------------------------------------
# Stage two: type-directed eta-expansion


def etanorm(tctx: Ctx, ty: Ty, w: Wh, fuel: Fuel) -> EtaVal:
    """Eta-long value of ``w`` at type ``ty``, with ``w`` living in ``tctx``."""
    match ty:
        case Base(_):
            if not isinstance(w, WNe):
                raise ShapeViolation(f"non-neutral at base type: {w}")
            n, _ = etaneut(tctx, w.ne, fuel)
            return ENeAtBase(n)
        case ListTy(elem):
            match w:
                case WNil(_):
                    return ENilV(elem)
                case WCons(head, tail):
                    return EConsV(
                        etanorm(tctx, elem, head, fuel), etanorm(tctx, ty, tail, fuel)
                    )
                case WNe(m):
                    return EStuckList(etalist(tctx, elem, m, fuel))
            raise ShapeViolation(f"non-list at list type: {w}")
        case Unit():
            return ETT()
        case Prod(a, b):
            return EPairV(
                etanorm(tctx, a, wh_fst(w), fuel), etanorm(tctx, b, wh_snd(w), fuel)
            )
        case Arrow(a, b):
            inner = tctx + (a,)
            applied = wh_app(weaken_wh(weaken1(tctx, a), w), WNe(WVar(0)), fuel)
            return ELam(a, etanorm(inner, b, applied, fuel))
    raise AssertionError(ty)


def etalist(tctx: Ctx, elem: Ty, m: WhNe, fuel: Fuel) -> EtaList:
    """Eta-expand a stuck list of element type ``elem``."""
    match m:
        case WMap(fun, xs, dom):
            fv = etanorm(tctx, Arrow(dom, elem), fun, fuel)
            return EStuckMap(fv, etalist(tctx, dom, xs, fuel), dom)
        case WAppend(left, right):
            return EStuckAppend(
                etalist(tctx, elem, left, fuel),
                etanorm(tctx, ListTy(elem), right, fuel),
            )
        case _:
            n, _ = etaneut(tctx, m, fuel)
            return ENeList(n)


def etaneut(tctx: Ctx, m: WhNe, fuel: Fuel) -> tuple:
    """Eta-expand the arguments of a stuck spine; returns the spine's type
    alongside it, inferred from the head variable outward."""
    match m:
        case WVar(idx):
            return EVar(idx), ctx_lookup(tctx, idx)
        case WApp(fun, arg):
            n, fun_ty = etaneut(tctx, fun, fuel)
            if not isinstance(fun_ty, Arrow):
                raise ShapeViolation(f"application head has type {fun_ty}")
            return EApp(n, etanorm(tctx, fun_ty.dom, arg, fuel)), fun_ty.cod
        case WFst(pair):
            n, pair_ty = etaneut(tctx, pair, fuel)
            return EFst(n), pair_ty.left
        case WSnd(pair):
            n, pair_ty = etaneut(tctx, pair, fuel)
            return ESnd(n), pair_ty.right
        case WFold(step, init, xs, elem):
            ret = infer_wh(tctx, init)
            sv = etanorm(tctx, Arrow(elem, Arrow(ret, ret)), step, fuel)
            iv = etanorm(tctx, ret, init, fuel)
            return EFold(sv, iv, etalist(tctx, elem, xs, fuel), elem, ret), ret
        case WMap() | WAppend():
            raise ShapeViolation("stuck map/append outside a list position")
    raise AssertionError(m)


# ---------------------------------------------------------------------------
# Embedding eta-long values back into terms (used to restart computation)


def embed_eta(v: EtaVal) -> Term:
    match v:
        case ENeAtBase(n):
            return embed_etane(n)
        case EStuckList(l):
            return embed_etalist(l)
        case ELam(dom, body):
            return Lam(dom, embed_eta(body))
        case ETT():
            return TT()
        case EPairV(left, right):
            return Pair(embed_eta(left), embed_eta(right))
        case ENilV(elem):
            return Nil(elem)
        case EConsV(head, tail):
            return Cons(embed_eta(head), embed_eta(tail))
    raise AssertionError(v)


def embed_etane(n: EtaNe) -> Term:
    match n:
        case EVar(idx):
            return Var(idx)
        case EApp(fun, arg):
            return App(embed_etane(fun), embed_eta(arg))
        case EFst(pair):
            return Fst(embed_etane(pair))
        case ESnd(pair):
            return Snd(embed_etane(pair))
        case EFold(step, init, xs, elem, _):
            return Fold(embed_eta(step), embed_eta(init), embed_etalist(xs), elem)
    raise AssertionError(n)


def embed_etalist(l: EtaList) -> Term:
    match l:
        case ENeList(n):
            return embed_etane(n)
        case EStuckMap(fun, xs, dom):
            return Map(embed_eta(fun), embed_etalist(xs), dom)
        case EStuckAppend(xs, rest):
            return Append(embed_etalist(xs), embed_eta(rest))
    raise AssertionError(l)


# ---------------------------------------------------------------------------
# Stage three: standardization


def value_to_wh(tctx: Ctx, t: Term, fuel: Fuel) -> Wh:
    """Re-enter the machine on an embedded value (cheap: values are inert
    or become closures immediately)."""
    return whnorm(diag_whenv(tctx), t, fuel)


def standard(tctx: Ctx, ty: Ty, w: Wh, fuel: Fuel) -> Nf:
    """Stages two and three composed."""
    return nfnorm(tctx, ty, etanorm(tctx, ty, w, fuel), fuel)


def nfnorm(tctx: Ctx, ty: Ty, v: EtaVal, fuel: Fuel) -> Nf:
    match v:
        case ENeAtBase(n):
            ne, _ = nfneut(tctx, n, fuel)
            return NeAtBase(ne)
        case EStuckList(l):
            return StdListVal(nflist(tctx, ty.elem, l, fuel))
        case ELam(dom, body):
            return NLam(dom, nfnorm(tctx + (dom,), ty.cod, body, fuel))
        case ETT():
            return NTT()
        case EPairV(left, right):
            return NPair(
                nfnorm(tctx, ty.left, left, fuel), nfnorm(tctx, ty.right, right, fuel)
            )
        case ENilV(elem):
            return NNil(elem)
        case EConsV(head, tail):
            return NCons(
                nfnorm(tctx, ty.elem, head, fuel), nfnorm(tctx, ty, tail, fuel)
            )
    raise AssertionError(v)


def nfneut(tctx: Ctx, n: EtaNe, fuel: Fuel) -> tuple:
    match n:
        case EVar(idx):
            return NVar(idx), ctx_lookup(tctx, idx)
        case EApp(fun, arg):
            ne, fun_ty = nfneut(tctx, fun, fuel)
            return NApp(ne, nfnorm(tctx, fun_ty.dom, arg, fuel)), fun_ty.cod
        case EFst(pair):
            ne, pair_ty = nfneut(tctx, pair, fuel)
            return NFst(ne), pair_ty.left
        case ESnd(pair):
            ne, pair_ty = nfneut(tctx, pair, fuel)
            return NSnd(ne), pair_ty.right
        case EFold(step, init, xs, elem, ret):
            stuck = nflist(tctx, elem, xs, fuel)
            return nffold(tctx, step, init, stuck, elem, ret, fuel), ret
    raise AssertionError(n)


def nflist(tctx: Ctx, elem: Ty, l: EtaList, fuel: Fuel) -> Mapp:
    """Flatten a stuck list into a single ``Mapp`` layer."""
    match l:
        case ENeList(n):
            nut, _ = nfneut(tctx, n, fuel)
            ident = standard(
                tctx,
                Arrow(elem, elem),
                value_to_wh(tctx, Lam(elem, Var(0)), fuel),
                fuel,
            )
            return Mapp(ident, nut, NNil(elem), elem)
        case EStuckMap(fun, xs, dom):
            stuck = nflist(tctx, dom, xs, fuel)
            return nfmap(tctx, elem, fun, dom, stuck, fuel)
        case EStuckAppend(xs, rest):
            stuck = nflist(tctx, elem, xs, fuel)
            return nfappend(tctx, elem, stuck, rest, fuel)
    raise AssertionError(l)


def nfmap(tctx: Ctx, cod: Ty, fun: EtaVal, dom: Ty, stuck: Mapp, fuel: Fuel) -> Mapp:
    """Fuse ``map fun`` into an already-standard stuck list."""
    fuel.spend()
    nut_elem = stuck.dom
    fun_wh = value_to_wh(tctx, embed_eta(fun), fuel)
    gun_wh = value_to_wh(tctx, embed_nf(stuck.fun), fuel)
    fused = standard(
        tctx,
        Arrow(nut_elem, cod),
        wh_comp(tctx, fun_wh, Arrow(dom, cod), gun_wh, Arrow(nut_elem, dom)),
        fuel,
    )
    rest_wh = value_to_wh(tctx, embed_nf(stuck.rest), fuel)
    mapped_rest = standard(
        tctx, ListTy(cod), wh_map(tctx, fun_wh, rest_wh, dom, fuel), fuel
    )
    return Mapp(fused, stuck.xs, mapped_rest, nut_elem)


def nfappend(tctx: Ctx, elem: Ty, stuck: Mapp, rest: EtaVal, fuel: Fuel) -> Mapp:
    """Merge a trailing list into the tail of a stuck list."""
    fuel.spend()
    left_wh = value_to_wh(tctx, embed_nf(stuck.rest), fuel)
    right_wh = value_to_wh(tctx, embed_eta(rest), fuel)
    merged = standard(
        tctx, ListTy(elem), wh_append(left_wh, right_wh, fuel), fuel
    )
    return Mapp(stuck.fun, stuck.xs, merged, stuck.dom)


def nffold(
    tctx: Ctx, step: EtaVal, init: EtaVal, stuck: Mapp, elem: Ty, ret: Ty, fuel: Fuel
) -> Ne:
    """Push a fold through a stuck list: fuse the map into the algebra and
    fold the tail into the seed, leaving a fold over the bare neutral."""
    fuel.spend()
    nut_elem = stuck.dom
    step_wh = value_to_wh(tctx, embed_eta(step), fuel)
    fun_wh = value_to_wh(tctx, embed_nf(stuck.fun), fuel)
    fused_step = standard(
        tctx,
        Arrow(nut_elem, Arrow(ret, ret)),
        wh_comp(
            tctx,
            step_wh,
            Arrow(elem, Arrow(ret, ret)),
            fun_wh,
            Arrow(nut_elem, elem),
        ),
        fuel,
    )
    init_wh = value_to_wh(tctx, embed_eta(init), fuel)
    rest_wh = value_to_wh(tctx, embed_nf(stuck.rest), fuel)
    seed = standard(
        tctx, ret, wh_fold(tctx, step_wh, init_wh, rest_wh, elem, fuel), fuel
    )
    return NFold(fused_step, seed, stuck.xs, nut_elem)


# ---------------------------------------------------------------------------
# The full pipeline


def staged_norm(ctx: Ctx, t: Term, fuel: int = DEFAULT_FUEL) -> Nf:
    """Normalize ``t`` by the three-stage pipeline under a fuel budget."""
    try:
        ty = infer(ctx, t, None)
    except TypeError_ as e:
        raise IllTyped(str(e)) from e
    tank = Fuel(fuel)
    return standard(ctx, ty, whnorm(diag_whenv(ctx), t, tank), tank)


def staged_trace(ctx: Ctx, t: Term, fuel: int = DEFAULT_FUEL) -> tuple:
    """The three intermediate representations, for the CLI trace command."""
    try:
        ty = infer(ctx, t, None)
    except TypeError_ as e:
        raise IllTyped(str(e)) from e
    tank = Fuel(fuel)
    w = whnorm(diag_whenv(ctx), t, tank)
    ev = etanorm(ctx, ty, w, tank)
    nf = nfnorm(ctx, ty, ev, tank)
    return w, ev, nf
