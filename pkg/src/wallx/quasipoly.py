"""Multivariate quasi-polynomials and their exact resummation.

A quasi-polynomial of period p in r variables is a table of polynomials
indexed by residue tuples in (Z/p)^r.  Orthant and chain sums of
q^(integer combinations) weighted by a quasi-polynomial close up into
rational functions with predictable denominators; this module computes
those rational functions exactly, detects quasi-polynomial structure in
sample sequences, and checks re-expansion claims across a wall of
gradings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import jsonio
from .errors import InputError
from .series import (
    Exponent,
    LaurentPolynomial,
    LaurentSeries,
    LinearFunctional,
    RationalFunction,
    verify_expansion,
)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class QuasiPolynomial:
    """Period-p table of polynomials on residue classes of Z^vars."""

    vars: int
    period: int
    table: Mapping[tuple[int, ...], LaurentPolynomial]

    def __post_init__(self):
        if self.period < 1:
            raise InputError("period must be at least 1")
        if self.vars < 0:
            raise InputError("variable count must be nonnegative")
        expected = set(itertools.product(range(self.period), repeat=self.vars))
        table = dict(self.table)
        if set(table) != expected:
            raise InputError("residue table must cover every residue tuple exactly once")
        for rho, poly in table.items():
            if poly.nvars != self.vars:
                raise InputError("table polynomial arity must match the variable count")
            for e, _ in poly.items():
                if any(k < 0 for k in e):
                    raise InputError("table polynomials must have nonnegative exponents")
        object.__setattr__(self, "table", table)

    def eval(self, n) -> Fraction:
        n = tuple(int(x) for x in n)
        if len(n) != self.vars:
            raise InputError("evaluation point arity mismatch")
        rho = tuple(x % self.period for x in n)
        return self.table[rho].evaluate(n)

    def degree(self, i: int) -> int:
        """Largest power of variable i across the table; -1 for the zero table."""
        if not 0 <= i < self.vars:
            raise InputError("variable index out of range")
        return max(poly.degree_in_var(i) for poly in self.table.values())

    def is_zero(self) -> bool:
        return all(poly.is_zero() for poly in self.table.values())


def qp_eval(a: QuasiPolynomial, n) -> Fraction:
    return a.eval(n)


def qp_degree(a: QuasiPolynomial, i: int) -> int:
    return a.degree(i)


def _per_var_degrees(a: QuasiPolynomial) -> tuple[int, ...]:
    return tuple(a.degree(i) for i in range(a.vars))


def _residues(period: int, n: int):
    return itertools.product(range(period), repeat=n)


def _box_numerator(a: QuasiPolynomial, degs: tuple[int, ...]) -> LaurentPolynomial:
    """Numerator of sum a(n) x^n over the nonnegative orthant, against the
    denominator prod_i (1 - x_i^period)^(1 + degs[i]).

    Eliminates the last variable: multiplying by (1 - x_r^p)^(1+d) kills
    everything at heights >= p(1+d) because the (1+d)-th difference of a
    degree-d polynomial vanishes, and each remaining slab is again a
    quasi-polynomial in one variable fewer with the same degree bounds.
    """
    r = a.vars
    p = a.period
    if r == 0:
        return LaurentPolynomial({(): a.table[()].coeff(())}, 0)
    d_last = degs[-1]
    out: dict[Exponent, Fraction] = {}
    for m in range(p * (1 + d_last)):
        rho_last = m % p
        table: dict[tuple[int, ...], LaurentPolynomial] = {}
        for rho_rest in _residues(p, r - 1):
            acc = LaurentPolynomial({}, r - 1)
            for k in range(1 + d_last + 1):
                arg = m - p * k
                if arg < 0:
                    break
                poly = a.table[rho_rest + (rho_last,)]
                piece = poly.substitute_last(arg)
                sign = -1 if k % 2 else 1
                acc = acc + piece.scale(sign * math.comb(1 + d_last, k))
            table[rho_rest] = acc
        slab = QuasiPolynomial(r - 1, p, table)
        if slab.is_zero():
            continue
        g_m = _box_numerator(slab, degs[:-1])
        for e, c in g_m.items():
            out[e + (m,)] = c
    return LaurentPolynomial(out, r)


def _check_monomials(monos, count: int, grading: LinearFunctional):
    nq = len(grading.coeffs)
    if len(monos) != count:
        raise InputError("one exponent vector per summation variable is required")
    cleaned = []
    for i, v in enumerate(monos):
        v = tuple(int(x) for x in v)
        if len(v) != nq:
            raise InputError("monomial exponent length must match the grading arity")
        if grading(v) <= 0:
            raise InputError("monomial grading must be positive")
        cleaned.append(v)
    return cleaned, nq


def resum_orthant(a: QuasiPolynomial, monos, grading: LinearFunctional) -> RationalFunction:
    """Closed form of sum over n in Z_{>=0}^r of a(n) q^(n1 v1 + ... + nr vr).

    The denominator is exactly prod_i (1 - q^(p v_i))^(1 + deg_i a); the
    grading must be positive on every v_i so the sum is locally finite.
    """
    monos_t, nq = _check_monomials(monos, a.vars, grading)
    if a.is_zero():
        return RationalFunction(LaurentPolynomial({}, nq),
                                LaurentPolynomial.constant(nq, 1))
    degs = _per_var_degrees(a)
    g_formal = _box_numerator(a, degs)

    def to_q(e):
        return tuple(sum(e[i] * monos_t[i][j] for i in range(a.vars))
                     for j in range(nq))

    g = g_formal.map_exponents(to_q, nq)
    h = LaurentPolynomial.constant(nq, 1)
    one = LaurentPolynomial.constant(nq, 1)
    for i, v in enumerate(monos_t):
        factor = one - LaurentPolynomial.monomial(
            tuple(a.period * x for x in v))
        h = h * factor ** (1 + degs[i])
    return RationalFunction(g, h)


@dataclass(frozen=True)
class ChainPattern:
    """Ascending chains 0 <= n_1 <= ... <= n_r with equality exactly at
    positions listed in ``equalities`` (position i means n_i == n_{i+1})."""

    r: int
    equalities: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "equalities", frozenset(self.equalities))
        if self.r < 0:
            raise InputError("chain length must be nonnegative")
        if not self.equalities <= set(range(1, self.r)):
            raise InputError("equality positions must lie strictly inside the chain")

    def free_positions(self) -> list[int]:
        return [1] + [i + 1 for i in range(1, self.r) if i not in self.equalities]


def resum_chain(a: QuasiPolynomial, pattern: ChainPattern, monos,
                grading: LinearFunctional) -> RationalFunction:
    """Closed form of the chain sum of a(n) q^(sum n_i v_i).

    Over 0 <= n_1 <= ... <= n_r with equalities exactly on the pattern.
    The denominator is prod over free positions m of
    (1 - q^(p w_m))^(1 + D_m) with tail sums w_m = sum_{i >= m} v_i and
    D_m = sum_{i >= m} deg_i a.
    """
    if a.vars != pattern.r:
        raise InputError("quasi-polynomial arity must match the chain length")
    monos_t, nq = _check_monomials(monos, pattern.r, grading)
    if pattern.r == 0:
        value = a.table[()].coeff(())
        return RationalFunction(LaurentPolynomial.constant(nq, value),
                                LaurentPolynomial.constant(nq, 1))
    if a.is_zero():
        return RationalFunction(LaurentPolynomial({}, nq),
                                LaurentPolynomial.constant(nq, 1))
    r = pattern.r
    p = a.period
    free = pattern.free_positions()
    s = len(free)
    # n_i = consts[i] + sum over free positions m_t <= i+1 of j_t
    consts = [sum(1 for t in range(1, s) if free[t] <= i + 1) for i in range(r)]
    matrix = [[1 if free[t] <= i + 1 else 0 for t in range(s)] for i in range(r)]
    table: dict[tuple[int, ...], LaurentPolynomial] = {}
    for rho_j in _residues(p, s):
        n_res = tuple(
            (consts[i] + sum(matrix[i][t] * rho_j[t] for t in range(s))) % p
            for i in range(r))
        table[rho_j] = a.table[n_res].compose_affine(consts, matrix, s)
    a_sub = QuasiPolynomial(s, p, table)

    tails = [tuple(sum(monos_t[i][j] for i in range(m - 1, r)) for j in range(nq))
             for m in free]
    orthant = resum_orthant(a_sub, tails, grading)

    degs_a = _per_var_degrees(a)
    tail_degs = [sum(degs_a[i] for i in range(m - 1, r)) for m in free]
    one = LaurentPolynomial.constant(nq, 1)
    h = LaurentPolynomial.constant(nq, 1)
    for t in range(s):
        factor = one - LaurentPolynomial.monomial(tuple(p * x for x in tails[t]))
        h = h * factor ** (1 + tail_degs[t])
    if a_sub.is_zero():
        return RationalFunction(LaurentPolynomial({}, nq), h)
    sub_degs = _per_var_degrees(a_sub)
    extra = LaurentPolynomial.constant(nq, 1)
    for t in range(s):
        gap = tail_degs[t] - sub_degs[t]
        if gap:
            factor = one - LaurentPolynomial.monomial(tuple(p * x for x in tails[t]))
            extra = extra * factor ** gap
    shift = tuple(sum(consts[i] * monos_t[i][j] for i in range(r)) for j in range(nq))
    g = (orthant.numerator * extra).shift(shift)
    return RationalFunction(g, h)


# -- detection ----------------------------------------------------------------

def _interpolate(points) -> LaurentPolynomial:
    """Exact Lagrange interpolation through (x, y) pairs, one variable."""
    x_var = LaurentPolynomial({(1,): Fraction(1)}, 1)
    total = LaurentPolynomial({}, 1)
    for i, (xi, yi) in enumerate(points):
        term = LaurentPolynomial.constant(1, yi)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            term = term * (x_var - LaurentPolynomial.constant(1, xj)).scale(
                Fraction(1, xi - xj))
        total = total + term
    return total


def detect_quasipoly(samples: Mapping[int, Fraction], max_period: int = 4,
                     max_degree: int = 6) -> QuasiPolynomial | None:
    """Smallest (period, degree) quasi-polynomial fitting the samples exactly.

    Samples must cover a contiguous integer range (negative indices are
    fine).  Candidates are tried by ascending period, then ascending
    degree; a candidate is attempted only when every residue class holds at
    least degree + 2 samples, so a fit is always confirmed on at least one
    held-out point per class.  Returns None when every attemptable
    candidate fails, and raises "window too small" when no candidate was
    attemptable at all.
    """
    keys = sorted(samples)
    if not keys:
        raise InputError("window too small")
    if keys != list(range(keys[0], keys[-1] + 1)):
        raise InputError("samples must cover a contiguous integer range")
    values = {int(k): Fraction(samples[k]) for k in keys}
    attempted = False
    for period in range(1, max_period + 1):
        classes = {rho: [n for n in keys if n % period == rho]
                   for rho in range(period)}
        for degree in range(0, max_degree + 1):
            if any(len(ns) < degree + 2 for ns in classes.values()):
                continue
            attempted = True
            table = {}
            ok = True
            for rho, ns in classes.items():
                pts = [(n, values[n]) for n in ns[:degree + 1]]
                poly = _interpolate(pts)
                if any(poly.evaluate((n,)) != values[n] for n in ns[degree + 1:]):
                    ok = False
                    break
                table[(rho,)] = poly
            if ok:
                return QuasiPolynomial(1, period, table)
    if not attempted:
        raise InputError("window too small")
    return None


# -- re-expansion -------------------------------------------------------------

def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


@dataclass(frozen=True)
class CosetFit:
    representative: Exponent
    k_lo: int
    k_hi: int
    fit: QuasiPolynomial | None


@dataclass(frozen=True)
class ReexpandVerdict:
    c0: Exponent
    cosets: tuple[CosetFit, ...]
    all_fit: bool
    confirmed: bool


def reexpand_check(f: RationalFunction, s_minus: LaurentSeries,
                   s_plus: LaurentSeries, c0, L_minus: LinearFunctional,
                   L_plus: LinearFunctional, max_period: int = 4,
                   max_degree: int = 6) -> ReexpandVerdict:
    """Certify s_plus as the L_plus re-expansion of f across the c0 direction.

    s_minus must already be the (verified) L_minus expansion.  On every
    coset of Z c0 meeting either support, the difference s_plus - s_minus
    sampled along c0 must be quasi-polynomial; when every coset fits and
    s_plus passes direct verification the verdict is confirmed.
    """
    c0 = tuple(int(x) for x in c0)
    if all(x == 0 for x in c0):
        raise InputError("re-expansion direction must be nonzero")
    down = L_minus(c0)
    up = L_plus(c0)
    if not (down < 0 < up):
        raise InputError("re-expansion direction must have L_minus(c0) < 0 < L_plus(c0)")
    if s_minus.window.functional != L_minus or s_plus.window.functional != L_plus:
        raise InputError("window functional mismatch")
    if not verify_expansion(s_minus, f):
        raise InputError("s_minus is not an expansion of the rational function")

    pivot = next(j for j, x in enumerate(c0) if x)

    def rep_of(e: Exponent) -> Exponent:
        steps = e[pivot] // c0[pivot]
        return tuple(x - steps * y for x, y in zip(e, c0))

    reps = sorted({rep_of(e) for e, _ in s_minus.terms()}
                  | {rep_of(e) for e, _ in s_plus.terms()})
    cosets = []
    all_fit = True
    for rep in reps:
        k_lo = _ceil_frac((s_minus.bound - L_minus(rep)) / down)
        k_hi = _floor_frac((s_plus.bound - L_plus(rep)) / up)
        samples = {}
        for k in range(k_lo, k_hi + 1):
            e = tuple(x + k * y for x, y in zip(rep, c0))
            samples[k] = s_plus.coeff(e) - s_minus.coeff(e)
        fit = detect_quasipoly(samples, max_period, max_degree)
        if fit is None:
            all_fit = False
        cosets.append(CosetFit(rep, k_lo, k_hi, fit))
    confirmed = all_fit and verify_expansion(s_plus, f)
    return ReexpandVerdict(c0, tuple(cosets), all_fit, confirmed)


# -- wire format --------------------------------------------------------------

def qp_to_obj(a: QuasiPolynomial):
    entries = []
    for rho in sorted(a.table):
        poly = a.table[rho]
        entries.append({"residues": list(rho),
                        "poly": [{"exponent": list(e),
                                  "coeff": jsonio.format_rational(c)}
                                 for e, c in sorted(poly.items())]})
    return {"vars": a.vars, "period": a.period, "table": entries}


def qp_from_obj(obj, path: str) -> QuasiPolynomial:
    nvars = jsonio.parse_int(jsonio.get_key(obj, "vars", path), f"{path}.vars")
    period = jsonio.parse_int(jsonio.get_key(obj, "period", path), f"{path}.period")
    entries = jsonio.get_key(obj, "table", path)
    if not isinstance(entries, list):
        raise InputError("expected a list of residue entries", f"{path}.table")
    table = {}
    for i, entry in enumerate(entries):
        epath = f"{path}.table[{i}]"
        rho = jsonio.parse_int_vector(
            jsonio.get_key(entry, "residues", epath), f"{epath}.residues", nvars)
        terms = []
        poly_obj = jsonio.get_key(entry, "poly", epath)
        if not isinstance(poly_obj, list):
            raise InputError("expected a list of terms", f"{epath}.poly")
        for j, term in enumerate(poly_obj):
            exp = jsonio.parse_int_vector(
                jsonio.get_key(term, "exponent", f"{epath}.poly[{j}]"),
                f"{epath}.poly[{j}].exponent", nvars)
            coeff = jsonio.parse_rational(
                jsonio.get_key(term, "coeff", f"{epath}.poly[{j}]"),
                f"{epath}.poly[{j}].coeff")
            terms.append((exp, coeff))
        if rho in table:
            raise InputError("duplicate residue tuple", f"{epath}.residues")
        table[rho] = LaurentPolynomial(terms, nvars)
    try:
        return QuasiPolynomial(nvars, period, table)
    except InputError as err:
        raise InputError(err.message, path) from None
