"""Standard (fully normal) forms: neutral spines, values and stuck lists.

A stuck list is always a single ``Mapp`` layer — a stuck map followed by a
tail — which embeds back into terms as ``(map f xs) ++ rest``.  Fold
spines are only ever stuck on a genuine neutral, never on a ``Mapp``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import TypeMismatch
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
    Pop,
    Prod,
    Snd,
    TT,
    Term,
    Ty,
    Unit,
    Var,
    ctx_lookup,
    ope_apply,
)


# ---------------------------------------------------------------------------
# Grammar


@dataclass(frozen=True, slots=True)
class NVar:
    idx: int


@dataclass(frozen=True, slots=True)
class NApp:
    fun: "Ne"
    arg: "Nf"


@dataclass(frozen=True, slots=True)
class NFst:
    pair: "Ne"


@dataclass(frozen=True, slots=True)
class NSnd:
    pair: "Ne"


@dataclass(frozen=True, slots=True)
class NFold:
    step: "Nf"
    init: "Nf"
    xs: "Ne"  # a genuine neutral, never a Mapp
    elem: Ty


Ne = Union[NVar, NApp, NFst, NSnd, NFold]


@dataclass(frozen=True, slots=True)
class Mapp:
    """A stuck map plus a tail: ``(map fun xs) ++ rest``."""

    fun: "Nf"
    xs: Ne
    rest: "Nf"
    dom: Ty  # element type of the stuck neutral ``xs``


@dataclass(frozen=True, slots=True)
class NeAtBase:
    ne: Ne


@dataclass(frozen=True, slots=True)
class StdListVal:
    stuck: Mapp


@dataclass(frozen=True, slots=True)
class NLam:
    dom: Ty
    body: "Nf"


@dataclass(frozen=True, slots=True)
class NTT:
    pass


@dataclass(frozen=True, slots=True)
class NPair:
    left: "Nf"
    right: "Nf"


@dataclass(frozen=True, slots=True)
class NNil:
    elem: Ty


@dataclass(frozen=True, slots=True)
class NCons:
    head: "Nf"
    tail: "Nf"


Nf = Union[NeAtBase, StdListVal, NLam, NTT, NPair, NNil, NCons]


# ---------------------------------------------------------------------------
# Embedding back into terms


def embed_ne(ne: Ne) -> Term:
    match ne:
        case NVar(idx):
            return Var(idx)
        case NApp(fun, arg):
            return App(embed_ne(fun), embed_nf(arg))
        case NFst(pair):
            return Fst(embed_ne(pair))
        case NSnd(pair):
            return Snd(embed_ne(pair))
        case NFold(step, init, xs, elem):
            return Fold(embed_nf(step), embed_nf(init), embed_ne(xs), elem)
    raise AssertionError(ne)


def embed_nf(nf: Nf) -> Term:
    match nf:
        case NeAtBase(ne):
            return embed_ne(ne)
        case StdListVal(Mapp(fun, xs, rest, dom)):
            return Append(Map(embed_nf(fun), embed_ne(xs), dom), embed_nf(rest))
        case NLam(dom, body):
            return Lam(dom, embed_nf(body))
        case NTT():
            return TT()
        case NPair(left, right):
            return Pair(embed_nf(left), embed_nf(right))
        case NNil(elem):
            return Nil(elem)
        case NCons(head, tail):
            return Cons(embed_nf(head), embed_nf(tail))
    raise AssertionError(nf)


def nf_eq(a: Nf, b: Nf) -> bool:
    """Syntactic equality of nameless trees (alpha-equivalence)."""
    return a == b


# ---------------------------------------------------------------------------
# Weakening and inference on normal forms


def weaken_ne(ope: Ope, ne: Ne) -> Ne:
    match ne:
        case NVar(idx):
            return NVar(ope_apply(ope, idx))
        case NApp(fun, arg):
            return NApp(weaken_ne(ope, fun), weaken_nf(ope, arg))
        case NFst(pair):
            return NFst(weaken_ne(ope, pair))
        case NSnd(pair):
            return NSnd(weaken_ne(ope, pair))
        case NFold(step, init, xs, elem):
            return NFold(weaken_nf(ope, step), weaken_nf(ope, init), weaken_ne(ope, xs), elem)
    raise AssertionError(ne)


def weaken_nf(ope: Ope, nf: Nf) -> Nf:
    match nf:
        case NeAtBase(ne):
            return NeAtBase(weaken_ne(ope, ne))
        case StdListVal(Mapp(fun, xs, rest, dom)):
            return StdListVal(
                Mapp(weaken_nf(ope, fun), weaken_ne(ope, xs), weaken_nf(ope, rest), dom)
            )
        case NLam(dom, body):
            return NLam(dom, weaken_nf(Pop(ope, dom), body))
        case NTT() | NNil():
            return nf
        case NPair(left, right):
            return NPair(weaken_nf(ope, left), weaken_nf(ope, right))
        case NCons(head, tail):
            return NCons(weaken_nf(ope, head), weaken_nf(ope, tail))
    raise AssertionError(nf)


def infer_ne(ctx: Ctx, ne: Ne) -> Ty:
    match ne:
        case NVar(idx):
            return ctx_lookup(ctx, idx)
        case NApp(fun, _):
            fun_ty = infer_ne(ctx, fun)
            if not isinstance(fun_ty, Arrow):
                raise TypeMismatch("a function type", fun_ty)
            return fun_ty.cod
        case NFst(pair):
            pair_ty = infer_ne(ctx, pair)
            if not isinstance(pair_ty, Prod):
                raise TypeMismatch("a product type", pair_ty)
            return pair_ty.left
        case NSnd(pair):
            pair_ty = infer_ne(ctx, pair)
            if not isinstance(pair_ty, Prod):
                raise TypeMismatch("a product type", pair_ty)
            return pair_ty.right
        case NFold(step, _, _, _):
            # In standard form the step function is an eta-long double
            # lambda, so the return type can be read off its inner binder.
            if not (isinstance(step, NLam) and isinstance(step.body, NLam)):
                raise TypeMismatch("an eta-long fold step", step)
            return step.body.dom
    raise AssertionError(ne)


def conforms(ctx: Ctx, ty: Ty, nf: Nf) -> bool:
    """Does ``nf`` inhabit the standard-form grammar at ``ty`` in ``ctx``?

    Most of the grammar is enforced by construction (the dataclasses cannot
    express a map or append outside the single Mapp layer); what remains to
    check is the typing discipline: neutrals appear as values only at base
    type, stuck lists only at list type, and every sub-piece is at the type
    the grammar assigns it.
    """
    try:
        _check_nf(ctx, ty, nf)
        return True
    except (TypeMismatch, AssertionError):
        return False


def _check_ne(ctx: Ctx, ne: Ne) -> Ty:
    match ne:
        case NVar(idx):
            return ctx_lookup(ctx, idx)
        case NApp(fun, arg):
            fun_ty = _check_ne(ctx, fun)
            assert isinstance(fun_ty, Arrow)
            _check_nf(ctx, fun_ty.dom, arg)
            return fun_ty.cod
        case NFst(pair):
            pair_ty = _check_ne(ctx, pair)
            assert isinstance(pair_ty, Prod)
            return pair_ty.left
        case NSnd(pair):
            pair_ty = _check_ne(ctx, pair)
            assert isinstance(pair_ty, Prod)
            return pair_ty.right
        case NFold(step, init, xs, elem):
            xs_ty = _check_ne(ctx, xs)
            assert xs_ty == ListTy(elem)
            ret = _nf_list_free_ret(ctx, step, init, elem)
            return ret
    raise AssertionError(ne)


def _nf_list_free_ret(ctx: Ctx, step: Nf, init: Nf, elem: Ty) -> Ty:
    # The fold's return type is the type under the step function's two
    # binders; recover it from the step's shape (always an NLam of NLam
    # in eta-long standard form).
    assert isinstance(step, NLam)
    assert step.dom == elem
    inner = step.body
    assert isinstance(inner, NLam)
    ret = inner.dom
    _check_nf(ctx, Arrow(elem, Arrow(ret, ret)), step)
    _check_nf(ctx, ret, init)
    return ret


def _check_nf(ctx: Ctx, ty: Ty, nf: Nf) -> None:
    match nf:
        case NeAtBase(ne):
            assert isinstance(ty, Base)
            got = _check_ne(ctx, ne)
            assert got == ty
        case StdListVal(Mapp(fun, xs, rest, dom)):
            assert isinstance(ty, ListTy)
            xs_ty = _check_ne(ctx, xs)
            assert xs_ty == ListTy(dom)
            _check_nf(ctx, Arrow(dom, ty.elem), fun)
            _check_nf(ctx, ty, rest)
        case NLam(dom, body):
            assert isinstance(ty, Arrow)
            assert ty.dom == dom
            _check_nf(ctx + (dom,), ty.cod, body)
        case NTT():
            assert isinstance(ty, Unit)
        case NPair(left, right):
            assert isinstance(ty, Prod)
            _check_nf(ctx, ty.left, left)
            _check_nf(ctx, ty.right, right)
        case NNil(elem):
            assert ty == ListTy(elem)
        case NCons(head, tail):
            assert isinstance(ty, ListTy)
            _check_nf(ctx, ty.elem, head)
            _check_nf(ctx, ty, tail)
        case _:
            raise AssertionError(nf)
