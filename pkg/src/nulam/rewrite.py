"""The equational theory as an executable one-step rewrite relation, plus a
bounded bidirectional search for conversion paths.

The oriented relation reduces computation rules left to right, performs
guarded eta-expansion, and rearranges stuck lists left to right -- except
for the two identity laws (append-nil and map-id), which orient as
expansions so that every term reduces to its own normal form.

The bidirectional relation adds every reverse instance that is finitely
matchable.  Reverses that would have to synthesize an unconstrained
function argument (beta, map-nil, fold-nil, eta at unit) are omitted:
they are not finitely branching.  The conversion search is therefore an
underapproximation: a found path is always genuine, a miss is only
"unknown".
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

from .errors import IllTyped, TypeError_
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
    Unit,
    Var,
    infer,
    is_neutral,
    shift_term,
    subst_single,
    term_children,
    term_with_children,
    weaken1,
    weaken_term,
)


class RuleName(Enum):
    BETA = "beta"
    ETA_ARROW = "eta-arrow"
    ETA_PROD = "eta-prod"
    ETA_UNIT = "eta-unit"
    MAP_NIL = "map-nil"
    MAP_CONS = "map-cons"
    APPEND_NIL = "append-nil"
    APPEND_CONS = "append-cons"
    FOLD_NIL = "fold-nil"
    FOLD_CONS = "fold-cons"
    NU_APPEND_NIL_R = "nu-append-nil-r"
    NU_APPEND_ASSOC = "nu-append-assoc"
    NU_MAP_ID = "nu-map-id"
    NU_MAP_MAP = "nu-map-map"
    NU_MAP_APPEND = "nu-map-append"
    NU_FOLD_MAP = "nu-fold-map"
    NU_FOLD_APPEND = "nu-fold-append"


class Direction(Enum):
    L2R = "->"
    R2L = "<-"


def flip(direction: Direction) -> Direction:
    return Direction.R2L if direction is Direction.L2R else Direction.L2R


@dataclass(frozen=True, slots=True)
class RewriteStep:
    rule: RuleName
    direction: Direction
    path: tuple
    result: Term


# ---------------------------------------------------------------------------
# Eta-long expansion of neutral terms (purely syntactic; kept independent
# of both normalizers so the oracle can cross-check them)


def eta_expand(ctx: Ctx, ty: Ty, t: Term) -> Term:
    """The eta-nu-long form of a neutral term, built syntactically."""
    match ty:
        case Unit():
            return TT()
        case Base(_):
            return t
        case Prod(a, b):
            return Pair(eta_expand(ctx, a, Fst(t)), eta_expand(ctx, b, Snd(t)))
        case Arrow(a, b):
            inner = ctx + (a,)
            lifted = weaken_term(weaken1(ctx, a), t)
            return Lam(a, eta_expand(inner, b, App(lifted, eta_expand(inner, a, Var(0)))))
        case ListTy(elem):
            return Append(Map(eta_long_identity(elem), t, elem), Nil(elem))
    raise AssertionError(ty)


def eta_long_identity(elem: Ty) -> Term:
    return Lam(elem, eta_expand((elem,), elem, Var(0)))


def compose_terms(ctx: Ctx, fun: Term, gun: Term, dom: Ty) -> Term:
    """``\\x:dom. fun (gun x)`` with both functions lifted under the binder."""
    up = weaken1(ctx, dom)
    return Lam(dom, App(weaken_term(up, fun), App(weaken_term(up, gun), Var(0))))


def unshift(t: Term, cutoff: int = 0) -> Optional[Term]:
    """Strengthen away the binder at ``cutoff``; None if it occurs."""
    match t:
        case Var(idx):
            if idx == cutoff:
                return None
            return Var(idx - 1) if idx > cutoff else t
        case Lam(dom, body):
            body2 = unshift(body, cutoff + 1)
            return None if body2 is None else Lam(dom, body2)
        case TT() | Nil():
            return t
        case _:
            parts = []
            for child in term_children(t):
                child2 = unshift(child, cutoff)
                if child2 is None:
                    return None
                parts.append(child2)
            return term_with_children(t, tuple(parts))


def decompose_composition(ctx: Ctx, fun: Term, dom: Ty):
    """Match ``\\x:dom. f (g x)`` with ``x`` free in neither f nor g."""
    match fun:
        case Lam(d, App(f_lifted, App(g_lifted, Var(0)))) if d == dom:
            f = unshift(f_lifted)
            g = unshift(g_lifted)
            if f is not None and g is not None:
                return f, g
    return None


def is_identity_fun(ctx: Ctx, fun: Term, elem: Ty) -> bool:
    return fun == Lam(elem, Var(0)) or fun == eta_long_identity(elem)


# ---------------------------------------------------------------------------
# Local rewrites


def _local_rewrites(ctx: Ctx, ty: Ty, t: Term, bidirectional: bool):
    """Yield (rule, direction, result) for redexes at the root of ``t``."""
    both = bidirectional
    match t:
        case App(Lam(dom, body), arg):
            yield RuleName.BETA, Direction.L2R, subst_single(ctx, dom, body, arg)
        case Map(fun, Nil(_), _):
            fun_ty = infer(ctx, fun, None)
            yield RuleName.MAP_NIL, Direction.L2R, Nil(fun_ty.cod)
        case Map(fun, Cons(head, tail), dom):
            yield RuleName.MAP_CONS, Direction.L2R, Cons(
                App(fun, head), Map(fun, tail, dom)
            )
        case Append(Nil(_), right):
            yield RuleName.APPEND_NIL, Direction.L2R, right
        case Append(Cons(head, tail), right):
            yield RuleName.APPEND_CONS, Direction.L2R, Cons(
                head, Append(tail, right)
            )
        case Fold(_, init, Nil(_), _):
            yield RuleName.FOLD_NIL, Direction.L2R, init
        case Fold(step, init, Cons(head, tail), elem):
            yield RuleName.FOLD_CONS, Direction.L2R, App(
                App(step, head), Fold(step, init, tail, elem)
            )

    # Guarded eta-expansions.
    match ty:
        case Arrow(a, _):
            if not isinstance(t, Lam):
                yield RuleName.ETA_ARROW, Direction.L2R, Lam(
                    a, App(shift_term(t, ctx, a), Var(0))
                )
        case Prod(_, _):
            if not isinstance(t, Pair):
                yield RuleName.ETA_PROD, Direction.L2R, Pair(Fst(t), Snd(t))
        case Unit():
            if not isinstance(t, TT):
                yield RuleName.ETA_UNIT, Direction.L2R, TT()

    # Oriented nu-rules (the nut must be a neutral term).
    match t:
        case Append(Append(xs, ys), zs) if is_neutral(xs):
            yield RuleName.NU_APPEND_ASSOC, Direction.L2R, Append(
                xs, Append(ys, zs)
            )
        case Map(fun, Map(gun, xs, dom_g), _) if is_neutral(xs):
            yield RuleName.NU_MAP_MAP, Direction.L2R, Map(
                compose_terms(ctx, fun, gun, dom_g), xs, dom_g
            )
        case Map(fun, Append(xs, ys), dom) if is_neutral(xs):
            yield RuleName.NU_MAP_APPEND, Direction.L2R, Append(
                Map(fun, xs, dom), Map(fun, ys, dom)
            )
        case Fold(step, init, Map(fun, xs, dom_f), _) if is_neutral(xs):
            yield RuleName.NU_FOLD_MAP, Direction.L2R, Fold(
                compose_terms(ctx, step, fun, dom_f), init, xs, dom_f
            )
        case Fold(step, init, Append(xs, ys), elem) if is_neutral(xs):
            yield RuleName.NU_FOLD_APPEND, Direction.L2R, Fold(
                step, Fold(step, init, ys, elem), xs, elem
            )

    # Identity laws, oriented as expansions.
    if isinstance(ty, ListTy) and is_neutral(t):
        yield RuleName.NU_APPEND_NIL_R, Direction.R2L, Append(t, Nil(ty.elem))
        yield RuleName.NU_MAP_ID, Direction.R2L, Map(
            eta_long_identity(ty.elem), t, ty.elem
        )

    if not both:
        return

    # Reverse instances (finitely matchable ones only).
    match t:
        case Lam(_, App(fun_lifted, Var(0))):
            fun = unshift(fun_lifted)
            if fun is not None:
                yield RuleName.ETA_ARROW, Direction.R2L, fun
        case Pair(Fst(p), Snd(q)) if p == q:
            yield RuleName.ETA_PROD, Direction.R2L, p

    match t:
        case Cons(App(f1, head), Map(f2, tail, dom)) if f1 == f2:
            if infer(ctx, head, None) == dom:
                yield RuleName.MAP_CONS, Direction.R2L, Map(
                    f1, Cons(head, tail), dom
                )
        case Cons(head, Append(tail, right)):
            yield RuleName.APPEND_CONS, Direction.R2L, Append(
                Cons(head, tail), right
            )
        case App(App(c1, head), Fold(c2, init, tail, elem)) if c1 == c2:
            if infer(ctx, head, None) == elem:
                yield RuleName.FOLD_CONS, Direction.R2L, Fold(
                    c1, init, Cons(head, tail), elem
                )

    if isinstance(ty, ListTy):
        yield RuleName.APPEND_NIL, Direction.R2L, Append(Nil(ty.elem), t)

    match t:
        case Append(xs, Nil(_)) if is_neutral(xs):
            yield RuleName.NU_APPEND_NIL_R, Direction.L2R, xs
        case Map(fun, xs, elem) if is_neutral(xs) and is_identity_fun(ctx, fun, elem):
            yield RuleName.NU_MAP_ID, Direction.L2R, xs
        case Append(xs, Append(ys, zs)) if is_neutral(xs):
            yield RuleName.NU_APPEND_ASSOC, Direction.R2L, Append(
                Append(xs, ys), zs
            )
        case Append(Map(f1, xs, d1), Map(f2, ys, d2)) if (
            f1 == f2 and d1 == d2 and is_neutral(xs)
        ):
            yield RuleName.NU_MAP_APPEND, Direction.R2L, Map(
                f1, Append(xs, ys), d1
            )
        case Fold(c1, Fold(c2, init, ys, e1), xs, e2) if (
            c1 == c2 and e1 == e2 and is_neutral(xs)
        ):
            yield RuleName.NU_FOLD_APPEND, Direction.R2L, Fold(
                c1, init, Append(xs, ys), e1
            )

    match t:
        case Map(fun, xs, dom) if is_neutral(xs):
            split = decompose_composition(ctx, fun, dom)
            if split is not None:
                f, g = split
                mid = infer(ctx, g, None).cod
                yield RuleName.NU_MAP_MAP, Direction.R2L, Map(
                    f, Map(g, xs, dom), mid
                )
        case Fold(step, init, xs, dom) if is_neutral(xs):
            split = decompose_composition(ctx, step, dom)
            if split is not None:
                c, f = split
                mid = infer(ctx, f, None).cod
                yield RuleName.NU_FOLD_MAP, Direction.R2L, Fold(
                    c, init, Map(f, xs, dom), mid
                )


# ---------------------------------------------------------------------------
# Congruence closure


def subterm_at(t: Term, path: tuple) -> Term:
    for i in path:
        t = term_children(t)[i]
    return t


def replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    children = list(term_children(t))
    children[path[0]] = replace_at(children[path[0]], path[1:], new)
    return term_with_children(t, tuple(children))


def one_step(ctx: Ctx, t: Term, bidirectional: bool = False) -> tuple:
    """All one-step rewrites of ``t``, closed under congruence.

    With ``bidirectional=False`` this is the oriented reduction relation;
    with ``bidirectional=True`` it also fires every finitely matchable
    reverse instance, giving one step of the conversion relation.
    """
    try:
        infer(ctx, t, None)
    except TypeError_ as e:
        raise IllTyped(str(e)) from e
    seen = set()
    steps = []

    def visit(local_ctx: Ctx, u: Term, path: tuple):
        ty_u = infer(local_ctx, u, None)
        for rule, direction, local_result in _local_rewrites(
            local_ctx, ty_u, u, bidirectional
        ):
            result = replace_at(t, path, local_result)
            key = (rule, direction, path, result)
            if key not in seen:
                seen.add(key)
                steps.append(RewriteStep(rule, direction, path, result))
        if isinstance(u, Lam):
            visit(local_ctx + (u.dom,), u.body, path + (0,))
        else:
            for i, child in enumerate(term_children(u)):
                visit(local_ctx, child, path + (i,))

    visit(ctx, t, ())
    return tuple(steps)


@lru_cache(maxsize=1 << 16)
def _one_step_cached(ctx: Ctx, t: Term) -> tuple:
    return one_step(ctx, t, bidirectional=True)


def step_is_instance(ctx: Ctx, source: Term, step: RewriteStep) -> bool:
    """Is (source -> step.result) a genuine instance of step.rule at
    step.path?  Accepts either firing direction, so reversed halves of a
    meet-in-the-middle path re-check too."""
    for s in _one_step_cached(ctx, source):
        if s.rule is step.rule and s.path == step.path and s.result == step.result:
            return True
    for s in _one_step_cached(ctx, step.result):
        if s.rule is step.rule and s.path == step.path and s.result == source:
            return True
    return False


def replay_path(ctx: Ctx, start: Term, steps: tuple, end: Term) -> bool:
    current = start
    for step in steps:
        if not step_is_instance(ctx, current, step):
            return False
        current = step.result
    return current == end


# ---------------------------------------------------------------------------
# Bounded conversion search


def convertible_bounded(
    ctx: Ctx, ty: Ty, t: Term, u: Term, budget: int
) -> Optional[tuple]:
    """Search for a conversion path from ``t`` to ``u`` by bidirectional
    breadth-first search from both endpoints, exploring at most ``budget``
    distinct terms per side.

    Returns the step sequence on success (empty for identical terms) and
    None when the search is inconclusive.  A returned path always replays;
    None never means "not convertible".
    """
    for side in (t, u):
        try:
            got = infer(ctx, side, None)
        except TypeError_ as e:
            raise IllTyped(str(e)) from e
        if got != ty:
            raise IllTyped(f"expected {ty}, got {got}")
    if t == u:
        return ()

    # parent maps: term -> (previous term, step taken from previous)
    from_t = {t: None}
    from_u = {u: None}
    frontier_t = [t]
    frontier_u = [u]

    def expand(frontier, visited, other):
        new_frontier = []
        meeting = None
        for x in frontier:
            for step in _one_step_cached(ctx, x):
                y = step.result
                if y in visited:
                    continue
                if len(visited) >= budget:
                    return new_frontier, meeting
                visited[y] = (x, step)
                new_frontier.append(y)
                if y in other and meeting is None:
                    meeting = y
        return new_frontier, meeting

    while frontier_t or frontier_u:
        if frontier_u and (not frontier_t or len(frontier_u) <= len(frontier_t)):
            frontier_u, meeting = expand(frontier_u, from_u, from_t)
        else:
            frontier_t, meeting = expand(frontier_t, from_t, from_u)
        if meeting is not None:
            return _assemble(from_t, from_u, meeting)
        if len(from_t) >= budget and len(from_u) >= budget:
            break
    return None


def _assemble(from_t, from_u, meeting: Term) -> tuple:
    forward = []
    node = meeting
    while from_t[node] is not None:
        prev, step = from_t[node]
        forward.append(step)
        node = prev
    forward.reverse()

    backward = []
    node = meeting
    while from_u[node] is not None:
        prev, step = from_u[node]
        # The u-side explored prev -> node; in the final t-to-u path the
        # edge is crossed the other way, so record it flipped.
        backward.append(RewriteStep(step.rule, flip(step.direction), step.path, prev))
        node = prev
    return tuple(forward) + tuple(backward)
