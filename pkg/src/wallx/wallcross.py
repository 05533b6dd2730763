"""Wall-crossing engine over the truncated Poisson torus.

Walls carry rank-0 torus elements of a single slope; crossing a wall
applies the adjoint exponential, and an ascending sweep folds the walls
left to right.  Groups of wall classes sharing a slope-chain pattern
resum to closed-form rational functions; the remaining operations divide
rank-0 layers, check a family of layer fractions against the configured
duality, and certify re-expansions across a gamma wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import jsonio
from .errors import InputError
from .lattice import INF, IntVec, KClass, LatticeSpec, kclass_from_obj, kclass_to_obj
from .poisson import (
    TorusElement,
    Truncation,
    element_from_obj,
    element_to_obj,
    exp_ad,
)
from .quasipoly import (
    ChainPattern,
    QuasiPolynomial,
    ReexpandVerdict,
    reexpand_check,
    resum_chain,
)
from .series import (
    LaurentPolynomial,
    LaurentSeries,
    LinearFunctional,
    RationalFunction,
    divide,
)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class WallDatum:
    """Rank-0 wall element of a single nu-slope (a Fraction, or INF for
    pure point classes)."""

    slope: object
    J: TorusElement

    def __post_init__(self):
        if self.slope is not INF:
            object.__setattr__(self, "slope", Fraction(self.slope))
        spec = self.J.context
        for cls, _ in self.J.terms():
            if cls.r != 0:
                raise InputError("wall data must have rank zero")
            if spec.nu_slope(cls) != self.slope:
                raise InputError("wall term slope does not match the wall")
            if not spec.is_effective(cls.beta):
                raise InputError("wall curve parts must be effective")


@dataclass(frozen=True)
class SeedSeries:
    """Rank-(-1) torus element together with a cutoff label."""

    element: TorusElement
    label: str = "seed"

    def __post_init__(self):
        for cls, _ in self.element.terms():
            if cls.r != -1:
                raise InputError("seed terms must have rank -1")


def cross_wall(state: SeedSeries, wall: WallDatum,
               trunc: Truncation) -> SeedSeries:
    out = exp_ad(wall.J, state.element, trunc)
    return SeedSeries(out, f"past {wall.slope}")


def iterate_walls(seed: SeedSeries, walls, trunc: Truncation) -> SeedSeries:
    walls = list(walls)
    for first, second in zip(walls, walls[1:]):
        if not first.slope < second.slope:
            raise InputError("walls must have strictly increasing slopes")
    state = seed
    for wall in walls:
        state = cross_wall(state, wall, trunc)
    return state


# -- group resummation --------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """One slope-chain group of wall classes acting on a seed class.

    Positions i = 1..r carry curve classes betas[i-1] and minimal point
    representatives kappas[i-1]; equalities lists the chain positions i
    with a_i = a_{i+1}.  J_values and DT_value are the numerical inputs,
    delta0 the slope cutoff below the first wall.
    """

    context: LatticeSpec
    alpha_prime: KClass
    betas: tuple[IntVec, ...]
    kappas: tuple[IntVec, ...]
    equalities: frozenset[int]
    J_values: tuple[Fraction, ...]
    DT_value: Fraction
    delta0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "betas",
                           tuple(tuple(int(x) for x in b) for b in self.betas))
        object.__setattr__(self, "kappas",
                           tuple(tuple(int(x) for x in k) for k in self.kappas))
        object.__setattr__(self, "equalities", frozenset(self.equalities))
        object.__setattr__(self, "J_values",
                           tuple(Fraction(v) for v in self.J_values))
        object.__setattr__(self, "DT_value", Fraction(self.DT_value))
        object.__setattr__(self, "delta0", Fraction(self.delta0))

    @property
    def r(self) -> int:
        return len(self.betas)

    def total_beta(self) -> IntVec:
        total = list(self.alpha_prime.beta)
        for b in self.betas:
            total = [x + y for x, y in zip(total, b)]
        return tuple(total)


def _chain_slopes(group: GroupSpec) -> list[Fraction]:
    spec = group.context
    return [spec.nu_slope(KClass(0, b, k))
            for b, k in zip(group.betas, group.kappas)]


def _validate_group(group: GroupSpec, trunc: Truncation | None):
    spec = group.context
    r = group.r
    if len(group.kappas) != r or len(group.J_values) != r:
        raise InputError("group position lists must have equal length")
    if group.alpha_prime.r != -1:
        raise InputError("group seed class must have rank -1")
    if not group.equalities <= set(range(1, r)):
        raise InputError("equality positions must lie strictly inside the chain")
    for b in group.betas:
        if not spec.is_effective(b):
            raise InputError("group curve classes must be effective")
        if spec.l_of(b) < 1:
            raise InputError("group curve classes must have positive l")
    if trunc is not None and tuple(trunc.beta_cap) != group.total_beta():
        raise InputError("truncation cap must equal the total group class")
    nus = _chain_slopes(group)
    if r and not group.delta0 <= nus[0] < group.delta0 + 1:
        raise InputError("first representative is not minimal past the cutoff")
    for i in range(1, r):
        if i in group.equalities:
            if nus[i] != nus[i - 1]:
                raise InputError("equal-slope positions must have equal slopes")
        elif not nus[i - 1] - 1 < nus[i] <= nus[i - 1]:
            raise InputError("representative is not minimal for the slope chain")


def _b_factor(group: GroupSpec) -> QuasiPolynomial:
    """The product of bracket weights as a quasi-polynomial in (a_1..a_r).

    Position i contributes sigma^chi_i * chi_i with
    chi_i = chi(alpha_i, alpha' + alpha_1 + ... + alpha_{i-1}) and
    alpha_i = (0, beta_i, kappa_i + a_i twist(beta_i)).  The chi_i are
    integer polynomials in the a's, so the sigma sign only depends on the
    residues mod 2.
    """
    spec = group.context
    r = group.r
    zero_beta = (0,) * spec.rank1
    base = [KClass(0, b, k) for b, k in zip(group.betas, group.kappas)]
    steps = [KClass(0, zero_beta, spec.twist(b)) for b in group.betas]

    def unit(i):
        return tuple(1 if j == i else 0 for j in range(r))

    chis = []
    cur = group.alpha_prime
    for i in range(r):
        terms = {
            (0,) * r: Fraction(spec.euler_pairing(base[i], cur)),
            unit(i): Fraction(spec.euler_pairing(steps[i], cur)),
        }
        for j in range(i):
            e_j = unit(j)
            terms[e_j] = (terms.get(e_j, _ZERO)
                          + spec.euler_pairing(base[i], steps[j]))
            e_ij = tuple(x + y for x, y in zip(unit(i), e_j))
            terms[e_ij] = (terms.get(e_ij, _ZERO)
                           + spec.euler_pairing(steps[i], steps[j]))
        chis.append(LaurentPolynomial(terms, r))
        cur = cur + base[i]

    product = LaurentPolynomial.constant(r, 1)
    for chi in chis:
        product = product * chi
    if spec.sigma == 1:
        return QuasiPolynomial(r, 1, {(0,) * r: product})
    table = {}
    for rho in _binary_residues(r):
        sign = 1
        for chi in chis:
            if int(chi.evaluate(rho)) % 2:
                sign = -sign
        table[rho] = product.scale(sign)
    return QuasiPolynomial(r, 2, table)


def _binary_residues(n: int):
    out = [()]
    for _ in range(n):
        out = [rho + (b,) for rho in out for b in (0, 1)]
    return out


def _exponential_factor(group: GroupSpec) -> Fraction:
    """1/k! per maximal run of chain positions on the same wall."""
    boundaries = sorted(set(range(1, group.r + 1)) - group.equalities)
    value = Fraction(1)
    prev = 0
    for n in boundaries:
        value /= math.factorial(n - prev)
        prev = n
    return value


def group_resum(group: GroupSpec, trunc: Truncation | None) -> RationalFunction:
    """Closed form of the group's total contribution as g/h in the point
    variables, at the fixed output class alpha' + sum alpha_i."""
    _validate_group(group, trunc)
    spec = group.context
    nq = spec.rank0
    r = group.r
    base_shift = tuple(
        c + sum(k[j] for k in group.kappas)
        for j, c in enumerate(group.alpha_prime.c))
    scalar = group.DT_value * _exponential_factor(group)
    for v in group.J_values:
        scalar *= v
    if r == 0:
        g = LaurentPolynomial.monomial(base_shift, scalar)
        return RationalFunction(g, LaurentPolynomial.constant(nq, 1))
    qp = _b_factor(group)
    pattern = ChainPattern(r, group.equalities)
    monos = [spec.twist(b) for b in group.betas]
    inner = resum_chain(qp, pattern, monos, spec.point_degree_functional())
    g = inner.numerator.shift(base_shift).scale(scalar)
    return RationalFunction(g, inner.denominator)


# -- DT/PT division -----------------------------------------------------------

def dtpt_ratio(dt_beta: LaurentSeries, dt_zero: LaurentSeries,
               L: LinearFunctional) -> LaurentSeries:
    leading = dt_zero.items_sorted()
    if leading and leading[0][1] != 1:
        raise InputError("rank-zero column must lead with coefficient 1")
    return divide(dt_beta, dt_zero, L)


# -- duality ------------------------------------------------------------------

@dataclass(frozen=True)
class DualityEntry:
    beta: IntVec
    image: IntVec
    ok: bool
    first_discrepancy: tuple | None


@dataclass(frozen=True)
class DualityReport:
    entries: tuple[DualityEntry, ...]
    all_ok: bool


def duality_check(f_by_beta: Mapping[IntVec, RationalFunction],
                  spec: LatticeSpec, trunc: Truncation | None = None
                  ) -> DualityReport:
    """Check a family of point-variable fractions against the duality.

    Applying the duality to the monomials of z^beta f_beta must reproduce
    z^(D beta) f_(D beta); equality is verified by cross-multiplication,
    so no truncation of the fractions is needed.
    """
    family = {tuple(int(x) for x in b): f for b, f in f_by_beta.items()}
    n0 = spec.rank0
    point_map = [[spec.duality[1 + spec.rank1 + i][1 + spec.rank1 + j]
                  for j in range(n0)] for i in range(n0)]
    zero_c = (0,) * n0

    def c_image(e):
        return tuple(sum(point_map[i][j] * e[j] for j in range(n0))
                     for i in range(n0))

    entries = []
    all_ok = True
    for beta in sorted(family):
        f = family[beta]
        img = spec.dualize(KClass(0, beta, zero_c))
        if img.r != 0:
            raise InputError("duality does not preserve the curve-point block")
        if img.beta not in family:
            raise InputError("incomplete family")
        g = family[img.beta]
        num_t = f.numerator.map_exponents(c_image, n0).shift(img.c)
        den_t = f.denominator.map_exponents(c_image, n0)
        diff = num_t * g.denominator - g.numerator * den_t
        if diff.is_zero():
            entries.append(DualityEntry(beta, img.beta, True, None))
        else:
            first = diff.support_sorted()[0]
            entries.append(DualityEntry(beta, img.beta, False,
                                        (first, diff.coeff(first))))
            all_ok = False
    return DualityReport(tuple(entries), all_ok)


# -- gamma-wall crossing ------------------------------------------------------

@dataclass(frozen=True)
class GammaCrossing:
    gamma: Fraction
    beta_gamma: IntVec
    c_gamma: IntVec
    epsilon: Fraction
    verdict: ReexpandVerdict


def cross_gamma_wall(f: RationalFunction, gamma, b,
                     s_plus_side: LaurentSeries, s_minus_side: LaurentSeries,
                     spec: LatticeSpec, max_period: int = 4,
                     max_degree: int = 6) -> GammaCrossing:
    """Certify the two one-sided expansions of f across the wall at gamma.

    s_plus_side is the verified expansion for the functional just above
    gamma, s_minus_side the candidate for just below; their difference
    must be quasi-polynomial along the crossing direction c_gamma, which
    points into the region where the above-gamma functional is negative.
    """
    gamma = Fraction(gamma)
    walls = spec.gamma_walls(b)
    if gamma not in walls:
        raise InputError("not a wall")
    others = [w for w in walls if w != gamma] + [Fraction(0)]
    gap = min(abs(gamma - w) for w in others)
    if gap == 0:
        raise InputError("non-generic")
    eps = gap / 2
    beta_gamma = spec.distinguished_class(gamma, b)
    c_gamma = tuple(-x for x in spec.twist(beta_gamma))
    l_above = spec.L_gamma(gamma + eps)
    l_below = spec.L_gamma(gamma - eps)
    if not l_above(c_gamma) < 0 < l_below(c_gamma):
        raise InputError("non-generic")
    verdict = reexpand_check(f, s_plus_side, s_minus_side, c_gamma,
                             l_above, l_below, max_period, max_degree)
    return GammaCrossing(gamma, beta_gamma, c_gamma, eps, verdict)


# -- wire format --------------------------------------------------------------

def wall_from_obj(obj, path: str, spec: LatticeSpec) -> WallDatum:
    slope_obj = jsonio.get_key(obj, "slope", path)
    if slope_obj == "oo":
        slope = INF
    else:
        slope = jsonio.parse_rational(slope_obj, f"{path}.slope")
    element = element_from_obj(jsonio.get_key(obj, "J", path),
                               f"{path}.J", spec)
    try:
        return WallDatum(slope, element)
    except InputError as err:
        raise InputError(err.message, err.path or path) from err


def wall_to_obj(wall: WallDatum):
    slope = "oo" if wall.slope is INF else jsonio.format_rational(wall.slope)
    return {"slope": slope, "J": element_to_obj(wall.J)}


def seed_from_obj(obj, path: str, spec: LatticeSpec) -> SeedSeries:
    element = element_from_obj(jsonio.get_key(obj, "element", path),
                               f"{path}.element", spec)
    label = jsonio.get_optional(obj, "label", path, "seed")
    if not isinstance(label, str):
        raise InputError("label must be a string", f"{path}.label")
    try:
        return SeedSeries(element, label)
    except InputError as err:
        raise InputError(err.message, err.path or path) from err


def seed_to_obj(seed: SeedSeries):
    return {"element": element_to_obj(seed.element), "label": seed.label}


def group_from_obj(obj, path: str, spec: LatticeSpec) -> GroupSpec:
    alpha_prime = kclass_from_obj(jsonio.get_key(obj, "alpha_prime", path),
                                  f"{path}.alpha_prime", spec)
    betas_obj = jsonio.get_key(obj, "betas", path)
    if not isinstance(betas_obj, list):
        raise InputError("betas must be a list", f"{path}.betas")
    betas = tuple(jsonio.parse_int_vector(b, f"{path}.betas[{i}]", spec.rank1)
                  for i, b in enumerate(betas_obj))
    kappas_obj = jsonio.get_key(obj, "kappas", path)
    if not isinstance(kappas_obj, list):
        raise InputError("kappas must be a list", f"{path}.kappas")
    kappas = tuple(jsonio.parse_int_vector(k, f"{path}.kappas[{i}]", spec.rank0)
                   for i, k in enumerate(kappas_obj))
    equalities = jsonio.parse_int_vector(
        jsonio.get_optional(obj, "equalities", path, []), f"{path}.equalities")
    j_values = jsonio.parse_rational_vector(
        jsonio.get_key(obj, "J_values", path), f"{path}.J_values")
    dt_value = jsonio.parse_rational(jsonio.get_key(obj, "DT_value", path),
                                     f"{path}.DT_value")
    delta0 = jsonio.parse_rational(jsonio.get_key(obj, "delta0", path),
                                   f"{path}.delta0")
    return GroupSpec(spec, alpha_prime, betas, kappas, frozenset(equalities),
                     j_values, dt_value, delta0)


def group_to_obj(group: GroupSpec):
    return {
        "alpha_prime": kclass_to_obj(group.alpha_prime),
        "betas": [list(b) for b in group.betas],
        "kappas": [list(k) for k in group.kappas],
        "equalities": sorted(group.equalities),
        "J_values": [jsonio.format_rational(v) for v in group.J_values],
        "DT_value": jsonio.format_rational(group.DT_value),
        "delta0": jsonio.format_rational(group.delta0),
    }
