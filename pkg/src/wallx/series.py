"""Exact Laurent arithmetic graded by a rational linear functional.

Exponents are integer tuples; coefficients are Fractions throughout.  A
window (functional L, bound b, optional coset) marks the region where a
series' coefficients are final: stored terms all satisfy the window
predicate, and anything not stored with L-value at most b is a true zero.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from . import jsonio
from .errors import InputError

Exponent = tuple[int, ...]

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LinearFunctional:
    """Rational linear form on integer exponent vectors."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    def __call__(self, exponent) -> Fraction:
        if len(exponent) != len(self.coeffs):
            raise InputError(
                f"exponent length {len(exponent)} does not match "
                f"functional arity {len(self.coeffs)}")
        return sum((c * e for c, e in zip(self.coeffs, exponent)), _ZERO)

    def negated(self) -> "LinearFunctional":
        return LinearFunctional(tuple(-c for c in self.coeffs))

    def to_obj(self):
        return [jsonio.format_rational(c) for c in self.coeffs]

    @classmethod
    def from_obj(cls, obj, path: str) -> "LinearFunctional":
        return cls(jsonio.parse_rational_vector(obj, path))


def _solve_rational(columns: list[tuple[Fraction, ...]], target: list[Fraction]):
    """Solve sum_j x_j * columns[j] = target for rational x, or return None.

    The columns are required to be linearly independent, so a solution is
    unique when it exists.
    """
    rows = len(target)
    ncols = len(columns)
    aug = [[Fraction(columns[j][i]) for j in range(ncols)] + [Fraction(target[i])]
           for i in range(rows)]
    pivot_cols = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, rows) if aug[i][col]), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        scale = aug[r][col]
        aug[r] = [v / scale for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][col]:
                factor = aug[i][col]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[r])]
        pivot_cols.append(col)
        r += 1
    if len(pivot_cols) != ncols:
        raise InputError("coset generators must be linearly independent")
    for i in range(r, rows):
        if aug[i][ncols]:
            return None
    sol = [_ZERO] * ncols
    for row, col in enumerate(pivot_cols):
        sol[col] = aug[row][ncols]
    return sol


@dataclass(frozen=True)
class Coset:
    """Affine sublattice base + Z-span(generators)."""

    base: Exponent
    generators: tuple[Exponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(b) for b in self.base))
        object.__setattr__(
            self, "generators",
            tuple(tuple(int(g) for g in gen) for gen in self.generators))
        for gen in self.generators:
            if len(gen) != len(self.base):
                raise InputError("coset generator length does not match base")
        # force the independence check once, on a solvable system
        _solve_rational(
            [tuple(Fraction(g) for g in gen) for gen in self.generators],
            [_ZERO] * len(self.base))

    def contains(self, exponent) -> bool:
        if len(exponent) != len(self.base):
            return False
        if not self.generators:
            return tuple(exponent) == self.base
        target = [Fraction(e - b) for e, b in zip(exponent, self.base)]
        sol = _solve_rational(
            [tuple(Fraction(g) for g in gen) for gen in self.generators], target)
        return sol is not None and all(x.denominator == 1 for x in sol)


@dataclass(frozen=True)
class Window:
    """Region predicate: L(e) <= bound, optionally e in a coset."""

    functional: LinearFunctional
    bound: Fraction
    coset: Coset | None = None

    def __post_init__(self):
        object.__setattr__(self, "bound", Fraction(self.bound))

    def admits(self, exponent) -> bool:
        if self.functional(exponent) > self.bound:
            return False
        if self.coset is not None and not self.coset.contains(exponent):
            return False
        return True


def _merge_terms(items, nvars: int | None):
    data: dict[Exponent, Fraction] = {}
    for exp, coeff in items:
        exp = tuple(int(e) for e in exp)
        if nvars is None:
            nvars = len(exp)
        elif len(exp) != nvars:
            raise InputError("mixed exponent lengths")
        coeff = Fraction(coeff)
        if coeff:
            acc = data.get(exp, _ZERO) + coeff
            if acc:
                data[exp] = acc
            else:
                data.pop(exp, None)
    return data, nvars


def _mul_terms(a: Mapping[Exponent, Fraction], b: Mapping[Exponent, Fraction]):
    out: dict[Exponent, Fraction] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            acc = out.get(e, _ZERO) + ca * cb
            if acc:
                out[e] = acc
            else:
                out.pop(e, None)
    return out


class LaurentPolynomial:
    """Finitely supported Laurent polynomial; zero coefficients are never stored."""

    __slots__ = ("_terms", "nvars")

    def __init__(self, terms=(), nvars: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        data, nv = _merge_terms(items, nvars)
        if nv is None:
            raise InputError("variable count of an empty polynomial must be given")
        self._terms = data
        self.nvars = nv

    @classmethod
    def constant(cls, nvars: int, value) -> "LaurentPolynomial":
        return cls({(0,) * nvars: Fraction(value)}, nvars)

    @classmethod
    def monomial(cls, exponent, coeff=1) -> "LaurentPolynomial":
        exponent = tuple(int(e) for e in exponent)
        return cls({exponent: Fraction(coeff)}, len(exponent))

    def items(self):
        return self._terms.items()

    def coeff(self, exponent) -> Fraction:
        return self._terms.get(tuple(exponent), _ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def support_sorted(self) -> list[Exponent]:
        return sorted(self._terms)

    def __eq__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    def __neg__(self):
        return LaurentPolynomial({e: -c for e, c in self._terms.items()}, self.nvars)

    def __add__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        if self.nvars != other.nvars:
            raise InputError("polynomial variable counts differ")
        out = dict(self._terms)
        for e, c in other._terms.items():
            acc = out.get(e, _ZERO) + c
            if acc:
                out[e] = acc
            else:
                out.pop(e, None)
        return LaurentPolynomial(out, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPolynomial):
            if self.nvars != other.nvars:
                raise InputError("polynomial variable counts differ")
            return LaurentPolynomial(_mul_terms(self._terms, other._terms), self.nvars)
        return NotImplemented

    def scale(self, factor) -> "LaurentPolynomial":
        factor = Fraction(factor)
        if not factor:
            return LaurentPolynomial({}, self.nvars)
        return LaurentPolynomial(
            {e: c * factor for e, c in self._terms.items()}, self.nvars)

    def shift(self, exponent) -> "LaurentPolynomial":
        exponent = tuple(int(e) for e in exponent)
        return LaurentPolynomial(
            {tuple(a + b for a, b in zip(e, exponent)): c
             for e, c in self._terms.items()}, self.nvars)

    def __pow__(self, n: int):
        if n < 0:
            raise InputError("negative polynomial power")
        out = LaurentPolynomial.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def degree_in_var(self, i: int) -> int:
        """Largest exponent of variable i, or -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(e[i] for e in self._terms)

    def evaluate(self, point) -> Fraction:
        point = tuple(Fraction(p) for p in point)
        total = _ZERO
        for e, c in self._terms.items():
            val = c
            for p, k in zip(point, e):
                if k == 0:
                    continue
                if p == 0 and k < 0:
                    raise InputError("evaluating a negative power at zero")
                val *= p ** k
            total += val
        return total

    def substitute_last(self, value: int) -> "LaurentPolynomial":
        """Plug an integer into the last variable."""
        if self.nvars == 0:
            raise InputError("no variable to substitute")
        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            coeff = c * Fraction(value) ** e[-1] if e[-1] else c
            key = e[:-1]
            acc = out.get(key, _ZERO) + coeff
            if acc:
                out[key] = acc
            else:
                out.pop(key, None)
        return LaurentPolynomial(out, self.nvars - 1)

    def compose_affine(self, consts, matrix, nvars_out: int) -> "LaurentPolynomial":
        """Substitute variable i by consts[i] + sum_t matrix[i][t] * y_t.

        Exponents must be nonnegative for this to make sense.
        """
        forms = []
        for i in range(self.nvars):
            terms = {(0,) * nvars_out: Fraction(consts[i])}
            for t in range(nvars_out):
                if matrix[i][t]:
                    unit = tuple(1 if s == t else 0 for s in range(nvars_out))
                    terms[unit] = terms.get(unit, _ZERO) + Fraction(matrix[i][t])
            forms.append(LaurentPolynomial(terms, nvars_out))
        total = LaurentPolynomial({}, nvars_out)
        for e, c in self._terms.items():
            if any(k < 0 for k in e):
                raise InputError("affine composition needs nonnegative exponents")
            term = LaurentPolynomial.constant(nvars_out, c)
            for i, k in enumerate(e):
                if k:
                    term = term * forms[i] ** k
            total = total + term
        return total

    def map_exponents(self, fn: Callable[[Exponent], Exponent],
                      nvars_out: int) -> "LaurentPolynomial":
        """Push exponents through fn, summing collisions."""
        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            e2 = tuple(int(x) for x in fn(e))
            acc = out.get(e2, _ZERO) + c
            if acc:
                out[e2] = acc
            else:
                out.pop(e2, None)
        return LaurentPolynomial(out, nvars_out)

    def l_min(self, functional: LinearFunctional):
        """(value, exponents) attaining the minimal L-value, or (None, [])."""
        best = None
        exps: list[Exponent] = []
        for e in self._terms:
            v = functional(e)
            if best is None or v < best:
                best, exps = v, [e]
            elif v == best:
                exps.append(e)
        return best, exps

    def l_max(self, functional: LinearFunctional):
        best = None
        for e in self._terms:
            v = functional(e)
            if best is None or v > best:
                best = v
        return best

    def __repr__(self):
        inner = ", ".join(f"{e}: {c}" for e, c in sorted(self._terms.items()))
        return f"LaurentPolynomial({{{inner}}})"


class RationalFunction:
    """Quotient g/h with h nonzero; equality is by cross-multiplication."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: LaurentPolynomial, denominator: LaurentPolynomial):
        if denominator.is_zero():
            raise InputError("zero denominator")
        if numerator.nvars != denominator.nvars:
            raise InputError("numerator and denominator variable counts differ")
        self.numerator = numerator
        self.denominator = denominator

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.numerator * other.denominator == other.numerator * self.denominator

    def __hash__(self):
        raise TypeError("rational functions are not hashable")

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return RationalFunction(self.numerator * other.numerator,
                                    self.denominator * other.denominator)
        return NotImplemented

    def scale(self, factor) -> "RationalFunction":
        return RationalFunction(self.numerator.scale(factor), self.denominator)

    def __repr__(self):
        return f"RationalFunction({self.numerator!r}, {self.denominator!r})"


class LaurentSeries:
    """Window-truncated series: stored terms are final, and every exponent
    admitted by the window but not stored has coefficient zero."""

    __slots__ = ("_terms", "window")

    def __init__(self, terms, window: Window):
        items = terms.items() if isinstance(terms, Mapping) else terms
        data: dict[Exponent, Fraction] = {}
        for exp, coeff in items:
            exp = tuple(int(e) for e in exp)
            coeff = Fraction(coeff)
            if not coeff or not window.admits(exp):
                continue
            acc = data.get(exp, _ZERO) + coeff
            if acc:
                data[exp] = acc
            else:
                data.pop(exp, None)
        self._terms = data
        self.window = window

    @property
    def functional(self) -> LinearFunctional:
        return self.window.functional

    @property
    def bound(self) -> Fraction:
        return self.window.bound

    def coeff(self, exponent) -> Fraction:
        return self._terms.get(tuple(exponent), _ZERO)

    def terms(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def items_sorted(self) -> list[tuple[Exponent, Fraction]]:
        L = self.window.functional
        return sorted(self._terms.items(), key=lambda item: (L(item[0]), item[0]))

    def support_min(self):
        """Smallest L-value present, or None for the empty series."""
        L = self.window.functional
        return min((L(e) for e in self._terms), default=None)

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.window == other.window and self._terms == other._terms

    def __hash__(self):
        raise TypeError("series are not hashable")

    def __neg__(self):
        return LaurentSeries({e: -c for e, c in self._terms.items()}, self.window)

    def scale(self, factor) -> "LaurentSeries":
        factor = Fraction(factor)
        return LaurentSeries(
            {e: c * factor for e, c in self._terms.items()}, self.window)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        _same_functional(self, other)
        window = Window(self.window.functional, min(self.bound, other.bound))
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, _ZERO) + c
        return LaurentSeries(out, window)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self + (-other)

    def __repr__(self):
        inner = ", ".join(f"{e}: {c}" for e, c in self.items_sorted())
        return f"LaurentSeries({{{inner}}}, bound={self.bound})"


def _same_functional(a: LaurentSeries, b: LaurentSeries):
    if a.window.functional != b.window.functional:
        raise InputError("window functional mismatch")


def _unique_l_min(terms: Mapping[Exponent, Fraction], L: LinearFunctional):
    best = None
    exps: list[Exponent] = []
    for e in terms:
        v = L(e)
        if best is None or v < best:
            best, exps = v, [e]
        elif v == best:
            exps.append(e)
    return best, exps


def _divide_terms(num: Mapping[Exponent, Fraction], den: Mapping[Exponent, Fraction],
                  L: LinearFunctional, bound: Fraction, m0: Exponent, c0: Fraction):
    """Long division of num by den in increasing (L, lex) order.

    den's unique L-minimal term (m0, c0) must be supplied.  Emits quotient
    terms with L-value at most bound; terms are processed in a monotone
    order so each quotient exponent is written exactly once.
    """
    r = dict(num)
    heap = [(L(e), e) for e in r]
    heapq.heapify(heap)
    l_m0 = L(m0)
    out: dict[Exponent, Fraction] = {}
    while heap:
        l_e, e = heapq.heappop(heap)
        c = r.pop(e, _ZERO)
        if not c:
            continue
        if l_e - l_m0 > bound:
            break
        q_exp = tuple(a - b for a, b in zip(e, m0))
        q_c = c / c0
        out[q_exp] = q_c
        for he, hc in den.items():
            if he == m0:
                continue
            ne = tuple(a + b for a, b in zip(q_exp, he))
            acc = r.get(ne, _ZERO) - q_c * hc
            if acc:
                if ne not in r:
                    heapq.heappush(heap, (L(ne), ne))
                r[ne] = acc
            else:
                r.pop(ne, None)
    return out


def expand(f: RationalFunction, L: LinearFunctional, window: Window) -> LaurentSeries:
    """Laurent-expand f = g/h with respect to L, truncated to the window.

    All reported coefficients are final.  The denominator must have a unique
    L-minimal monomial for the expansion direction to be well defined.
    """
    if window.functional != L:
        raise InputError("window functional mismatch")
    _, exps = _unique_l_min(f.denominator._terms, L)
    if len(exps) != 1:
        raise InputError("functional not generic for denominator")
    m0 = exps[0]
    c0 = f.denominator.coeff(m0)
    out = _divide_terms(f.numerator._terms, f.denominator._terms,
                        L, window.bound, m0, c0)
    if not out and not f.numerator.is_zero():
        raise InputError("empty window")
    return LaurentSeries(out, window)


def multiply(s1: LaurentSeries, s2: LaurentSeries) -> LaurentSeries:
    """Product series; the window shrinks by the operands' L-spreads."""
    _same_functional(s1, s2)
    L = s1.window.functional
    m1 = s1.support_min()
    m2 = s2.support_min()
    candidates = []
    if m2 is not None:
        candidates.append(s1.bound + m2)
    if m1 is not None:
        candidates.append(s2.bound + m1)
    bound = min(candidates) if candidates else s1.bound + s2.bound
    return LaurentSeries(_mul_terms(s1._terms, s2._terms), Window(L, bound))


def divide(s1: LaurentSeries, s2: LaurentSeries, L: LinearFunctional) -> LaurentSeries:
    """Series quotient s1/s2 with respect to L.

    s2 needs a unique L-minimal known term; the result window accounts for
    both operands' unknown tails, so every reported coefficient is final.
    """
    if s1.window.functional != L or s2.window.functional != L:
        raise InputError("window functional mismatch")
    _, exps = _unique_l_min(s2._terms, L)
    if len(exps) != 1:
        raise InputError("not invertible with respect to L")
    m0 = exps[0]
    c0 = s2._terms[m0]
    l_m0 = L(m0)
    m1 = s1.support_min()
    if m1 is None:
        m1 = s1.bound
    bound = min(s1.bound - l_m0, m1 + s2.bound - 2 * l_m0)
    out = _divide_terms(s1._terms, s2._terms, L, bound, m0, c0)
    return LaurentSeries(out, Window(L, bound))


def mul_series_polynomial(s: LaurentSeries, p: LaurentPolynomial) -> LaurentSeries:
    """Multiply a series by a fully known polynomial."""
    L = s.window.functional
    if p.is_zero():
        return LaurentSeries({}, s.window)
    min_l, _ = _unique_l_min(p._terms, L)
    bound = s.bound + min_l
    return LaurentSeries(_mul_terms(s._terms, p._terms), Window(L, bound))


def verify_expansion(s: LaurentSeries, f: RationalFunction) -> bool:
    """Check s * h == g on the region where the product is final."""
    product = mul_series_polynomial(s, f.denominator)
    L = s.window.functional
    diff = dict(product._terms)
    for e, c in f.numerator.items():
        if L(e) <= product.bound:
            acc = diff.get(e, _ZERO) - c
            if acc:
                diff[e] = acc
            else:
                diff.pop(e, None)
    return not diff


# -- wire format --------------------------------------------------------------

def window_to_obj(w: Window):
    obj = {"functional": w.functional.to_obj(),
           "bound": jsonio.format_rational(w.bound)}
    if w.coset is not None:
        obj["coset"] = {"base": list(w.coset.base),
                        "generators": [list(g) for g in w.coset.generators]}
    return obj


def window_from_obj(obj, path: str) -> Window:
    functional = LinearFunctional.from_obj(
        jsonio.get_key(obj, "functional", path), f"{path}.functional")
    bound = jsonio.parse_rational(jsonio.get_key(obj, "bound", path), f"{path}.bound")
    coset_obj = jsonio.get_optional(obj, "coset", path)
    coset = None
    if coset_obj is not None:
        base = jsonio.parse_int_vector(
            jsonio.get_key(coset_obj, "base", f"{path}.coset"), f"{path}.coset.base")
        gens = jsonio.get_key(coset_obj, "generators", f"{path}.coset")
        if not isinstance(gens, list):
            raise InputError("expected a list of generators", f"{path}.coset.generators")
        generators = tuple(
            jsonio.parse_int_vector(g, f"{path}.coset.generators[{i}]", len(base))
            for i, g in enumerate(gens))
        coset = Coset(base, generators)
    return Window(functional, bound, coset)


def terms_to_obj(items, sort_key=None):
    items = sorted(items, key=sort_key if sort_key else lambda kv: kv[0])
    return [{"exponent": list(e), "coeff": jsonio.format_rational(c)}
            for e, c in items]


def terms_from_obj(obj, path: str, nvars: int | None = None):
    if not isinstance(obj, list):
        raise InputError("expected a list of terms", path)
    out = []
    for i, entry in enumerate(obj):
        exp = jsonio.parse_int_vector(
            jsonio.get_key(entry, "exponent", f"{path}[{i}]"),
            f"{path}[{i}].exponent", nvars)
        coeff = jsonio.parse_rational(
            jsonio.get_key(entry, "coeff", f"{path}[{i}]"), f"{path}[{i}].coeff")
        out.append((exp, coeff))
    return out


def series_to_obj(s: LaurentSeries):
    L = s.window.functional
    return {"window": window_to_obj(s.window),
            "terms": terms_to_obj(s.terms(), lambda kv: (L(kv[0]), kv[0]))}


def series_from_obj(obj, path: str, nvars: int | None = None) -> LaurentSeries:
    window = window_from_obj(jsonio.get_key(obj, "window", path), f"{path}.window")
    terms = terms_from_obj(jsonio.get_key(obj, "terms", path), f"{path}.terms", nvars)
    return LaurentSeries(terms, window)


def polynomial_to_obj(p: LaurentPolynomial):
    return terms_to_obj(p.items())


def polynomial_from_obj(obj, path: str, nvars: int | None = None) -> LaurentPolynomial:
    terms = terms_from_obj(obj, path, nvars)
    if not terms and nvars is None:
        raise InputError("cannot infer variable count of an empty polynomial", path)
    return LaurentPolynomial(terms, nvars)


def rational_function_to_obj(f: RationalFunction):
    return {"numerator": polynomial_to_obj(f.numerator),
            "denominator": polynomial_to_obj(f.denominator)}


def rational_function_from_obj(obj, path: str, nvars: int | None = None) -> RationalFunction:
    num = polynomial_from_obj(jsonio.get_key(obj, "numerator", path),
                              f"{path}.numerator", nvars)
    den = polynomial_from_obj(jsonio.get_key(obj, "denominator", path),
                              f"{path}.denominator", num.nvars)
    return RationalFunction(num, den)
