"""The decision procedure: normalize both sides and compare syntactically."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import IllTyped, TypeError_, TypeMismatchBetweenSides
from .nbe import norm
from .normal import Nf, nf_eq
from .syntax import Ctx, Term, infer


@dataclass(frozen=True, slots=True)
class Convertible:
    shared: Nf


@dataclass(frozen=True, slots=True)
class Distinct:
    left: Nf
    right: Nf


EqVerdict = Union[Convertible, Distinct]


def decide_eq(ctx: Ctx, t: Term, u: Term) -> EqVerdict:
    """Decide the nu-enriched judgmental equality of two terms of the same
    type: they are convertible exactly when their normal forms coincide."""
    try:
        left_ty = infer(ctx, t, None)
        right_ty = infer(ctx, u, None)
    except TypeError_ as e:
        raise IllTyped(str(e)) from e
    if left_ty != right_ty:
        raise TypeMismatchBetweenSides(left_ty, right_ty)
    left = norm(ctx, t)
    right = norm(ctx, u)
    if nf_eq(left, right):
        return Convertible(left)
    return Distinct(left, right)
