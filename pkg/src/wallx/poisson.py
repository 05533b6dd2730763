"""Truncated Poisson torus over a lattice.

Elements are finite Fraction-combinations of monomials t^alpha indexed by
lattice classes.  The bracket of two monomials is
sigma^chi * chi * t^(alpha1+alpha2) with chi the Euler pairing; the star
product keeps only the sign, and the naive product drops both.  A
truncation limits which monomials survive: ranks in a fixed set, curve
parts effective and bounded by a cap, and optionally a degree window on
the point part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import jsonio
from .errors import InputError
from .lattice import KClass, LatticeSpec, kclass_from_obj, kclass_to_obj

_ZERO = Fraction(0)

_MAX_EXP_AD_ROUNDS = 10000


@dataclass(frozen=True)
class Truncation:
    """Survival predicate for torus monomials."""

    beta_cap: tuple[int, ...]
    deg_cap: Fraction | None = None
    rank_set: frozenset[int] = frozenset({0, -1})

    def __post_init__(self):
        object.__setattr__(self, "beta_cap", tuple(int(b) for b in self.beta_cap))
        if self.deg_cap is not None:
            object.__setattr__(self, "deg_cap", Fraction(self.deg_cap))
        object.__setattr__(self, "rank_set", frozenset(self.rank_set))

    def contains(self, spec: LatticeSpec, alpha: KClass) -> bool:
        if alpha.r not in self.rank_set:
            return False
        if not spec.is_effective(alpha.beta):
            return False
        if not spec.is_effective(tuple(a - b for a, b in
                                       zip(self.beta_cap, alpha.beta))):
            return False
        if self.deg_cap is not None and spec.deg_point(alpha.c) > self.deg_cap:
            return False
        return True


class TorusElement:
    """Finite linear combination of torus monomials over a fixed lattice."""

    __slots__ = ("_terms", "context")

    def __init__(self, context: LatticeSpec, terms):
        items = terms.items() if isinstance(terms, Mapping) else terms
        data: dict[KClass, Fraction] = {}
        for cls, coeff in items:
            coeff = Fraction(coeff)
            if not coeff:
                continue
            if len(cls.beta) != context.rank1 or len(cls.c) != context.rank0:
                raise InputError("class shape does not match the lattice")
            acc = data.get(cls, _ZERO) + coeff
            if acc:
                data[cls] = acc
            else:
                data.pop(cls, None)
        self._terms = data
        self.context = context

    def terms(self):
        return self._terms.items()

    def coeff(self, cls: KClass) -> Fraction:
        return self._terms.get(cls, _ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def items_sorted(self):
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def __eq__(self, other):
        if not isinstance(other, TorusElement):
            return NotImplemented
        return self.context == other.context and self._terms == other._terms

    def __hash__(self):
        raise TypeError("torus elements are not hashable")

    def __add__(self, other):
        _same_context(self, other)
        out = dict(self._terms)
        for cls, coeff in other._terms.items():
            acc = out.get(cls, _ZERO) + coeff
            if acc:
                out[cls] = acc
            else:
                out.pop(cls, None)
        return TorusElement(self.context, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor) -> "TorusElement":
        factor = Fraction(factor)
        return TorusElement(self.context,
                            {cls: c * factor for cls, c in self._terms.items()})

    def __repr__(self):
        inner = ", ".join(f"t^{(cls.r, cls.beta, cls.c)}: {c}"
                          for cls, c in self.items_sorted())
        return f"TorusElement({{{inner}}})"


def _same_context(a: TorusElement, b: TorusElement):
    if a.context != b.context:
        raise InputError("torus elements live over different lattices")


def _sigma_power(sigma: int, chi: int) -> int:
    return -1 if sigma == -1 and chi % 2 else 1


def _binary_op(x: TorusElement, y: TorusElement, trunc: Truncation | None, kind: str):
    _same_context(x, y)
    spec = x.context
    out: dict[KClass, Fraction] = {}
    for a1, c1 in x._terms.items():
        for a2, c2 in y._terms.items():
            chi = spec.euler_pairing(a1, a2)
            if kind == "bracket":
                weight = Fraction(_sigma_power(spec.sigma, chi) * chi)
            elif kind == "star":
                weight = Fraction(_sigma_power(spec.sigma, chi))
            else:
                weight = Fraction(1)
            if not weight:
                continue
            total = a1 + a2
            if trunc is not None and not trunc.contains(spec, total):
                continue
            acc = out.get(total, _ZERO) + c1 * c2 * weight
            if acc:
                out[total] = acc
            else:
                out.pop(total, None)
    return TorusElement(spec, out)


def bracket(x: TorusElement, y: TorusElement,
            trunc: Truncation | None = None) -> TorusElement:
    """{t^a, t^b} = sigma^chi(a,b) chi(a,b) t^(a+b), extended bilinearly."""
    return _binary_op(x, y, trunc, "bracket")


def star_product(x: TorusElement, y: TorusElement,
                 trunc: Truncation | None = None) -> TorusElement:
    """t^a * t^b = sigma^chi(a,b) t^(a+b)."""
    return _binary_op(x, y, trunc, "star")


def naive_product(x: TorusElement, y: TorusElement,
                  trunc: Truncation | None = None) -> TorusElement:
    """t^a t^b = t^(a+b) with no sign; this is what assembles series."""
    return _binary_op(x, y, trunc, "naive")


def exp_ad(w: TorusElement, x: TorusElement, trunc: Truncation) -> TorusElement:
    """exp({w, -}) applied to x inside the truncation.

    Every w-term must have rank 0 and either a nonzero effective curve
    part, or a curve part of zero with positive point degree; in the
    latter case the truncation must carry a degree cap, otherwise the
    adjoint action never becomes nilpotent.  The inverse is exp_ad(-w).
    """
    if trunc is None:
        raise InputError("non-nilpotent adjoint under this truncation")
    spec = w.context
    _same_context(w, x)
    for cls, _ in w.terms():
        if cls.r != 0:
            raise InputError("wall data must have rank zero")
        if all(b == 0 for b in cls.beta):
            if spec.deg_point(cls.c) <= 0 or trunc.deg_cap is None:
                raise InputError("non-nilpotent adjoint under this truncation")
        elif not spec.is_effective(cls.beta):
            raise InputError("non-nilpotent adjoint under this truncation")
    acc = x
    cur = x
    k = 1
    while not cur.is_zero():
        if k > _MAX_EXP_AD_ROUNDS:
            raise RuntimeError("adjoint exponential failed to terminate")
        cur = bracket(w, cur, trunc)
        if cur.is_zero():
            break
        acc = acc + cur.scale(Fraction(1, math.factorial(k)))
        k += 1
    return acc


# -- wire format --------------------------------------------------------------

def element_to_obj(x: TorusElement):
    return [{"class": kclass_to_obj(cls), "coeff": jsonio.format_rational(c)}
            for cls, c in x.items_sorted()]


def element_from_obj(obj, path: str, spec: LatticeSpec) -> TorusElement:
    if not isinstance(obj, list):
        raise InputError("expected a list of torus terms", path)
    terms = []
    for i, entry in enumerate(obj):
        cls = kclass_from_obj(jsonio.get_key(entry, "class", f"{path}[{i}]"),
                              f"{path}[{i}].class", spec)
        coeff = jsonio.parse_rational(
            jsonio.get_key(entry, "coeff", f"{path}[{i}]"), f"{path}[{i}].coeff")
        terms.append((cls, coeff))
    return TorusElement(spec, terms)


def truncation_from_obj(obj, path: str, spec: LatticeSpec) -> Truncation:
    beta_cap = jsonio.parse_int_vector(
        jsonio.get_key(obj, "beta_cap", path), f"{path}.beta_cap", spec.rank1)
    deg_cap_obj = jsonio.get_optional(obj, "deg_cap", path)
    deg_cap = None if deg_cap_obj is None else jsonio.parse_rational(
        deg_cap_obj, f"{path}.deg_cap")
    ranks_obj = jsonio.get_optional(obj, "ranks", path)
    if ranks_obj is None:
        rank_set = frozenset({0, -1})
    else:
        rank_set = frozenset(jsonio.parse_int_vector(ranks_obj, f"{path}.ranks"))
    if not spec.is_effective(beta_cap):
        raise InputError("truncation cap must be effective", f"{path}.beta_cap")
    return Truncation(beta_cap, deg_cap, rank_set)


def truncation_to_obj(trunc: Truncation):
    obj = {"beta_cap": list(trunc.beta_cap),
           "ranks": sorted(trunc.rank_set)}
    if trunc.deg_cap is not None:
        obj["deg_cap"] = jsonio.format_rational(trunc.deg_cap)
    return obj
