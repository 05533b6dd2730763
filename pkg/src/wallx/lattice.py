"""Numerical K-theory lattice Z[O] + N1 + N0 with its pairings and slopes.

A full lattice vector is (r, beta, c): rank component, curve block, point
block.  Everything downstream (brackets, wall data, slope functions) is
parameterized by a LatticeSpec carrying the integer Euler pairing and the
grading functionals.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import jsonio
from .errors import InputError
from .series import LinearFunctional

IntVec = tuple[int, ...]


class _PlusInfinity:
    """Totally ordered above every Fraction; compares equal only to itself."""

    __slots__ = ()

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is INF

    def __gt__(self, other):
        return other is not INF

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is INF

    def __hash__(self):
        return hash("+oo")

    def __repr__(self):
        return "oo"


INF = _PlusInfinity()


@dataclass(frozen=True)
class KClass:
    """Lattice vector (r, beta, c)."""

    r: int
    beta: IntVec
    c: IntVec

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))

    def __add__(self, other: "KClass") -> "KClass":
        return KClass(self.r + other.r,
                      tuple(a + b for a, b in zip(self.beta, other.beta)),
                      tuple(a + b for a, b in zip(self.c, other.c)))

    def __sub__(self, other: "KClass") -> "KClass":
        return self + (-other)

    def __neg__(self) -> "KClass":
        return KClass(-self.r, tuple(-b for b in self.beta),
                      tuple(-x for x in self.c))

    def vector(self) -> IntVec:
        return (self.r,) + self.beta + self.c

    def sort_key(self):
        return (self.r, self.beta, self.c)


def _dot(row, vec) -> Fraction:
    return sum((Fraction(a) * b for a, b in zip(row, vec)), Fraction(0))


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _proportional(u: IntVec, v: IntVec) -> bool:
    n = len(u)
    for i in range(n):
        for j in range(i + 1, n):
            if u[i] * v[j] != u[j] * v[i]:
                return False
    return True


@dataclass(frozen=True)
class LatticeSpec:
    """User-supplied lattice: pairing, gradings, twist, duality, effective cone.

    rank1 / rank0 are the sizes of the curve and point blocks; full vectors
    have length 1 + rank1 + rank0.  ``pairing`` is the integer matrix of the
    Euler form on full vectors.  ``deg`` grades N1 + N0, ``l`` grades N1,
    ``excdeg`` is a rational functional on N0.  ``twist_matrix`` has one row
    per N0 coordinate and one column per N1 coordinate and represents
    twisting by the auxiliary ample class.  ``duality`` is an involution of
    the full lattice preserving the point block.  ``effgens1`` generate the
    effective cone in N1; ``sigma`` is the integration sign.
    """

    rank1: int
    rank0: int
    pairing: tuple[tuple[int, ...], ...]
    deg: tuple[int, ...]
    l: tuple[int, ...]
    excdeg: tuple[Fraction, ...]
    twist_matrix: tuple[tuple[int, ...], ...]
    duality: tuple[tuple[int, ...], ...]
    effgens1: tuple[IntVec, ...]
    sigma: int
    _eff_cache: dict = field(default_factory=dict, init=False, repr=False,
                             compare=False, hash=False)

    def __post_init__(self):
        n = 1 + self.rank1 + self.rank0
        if self.rank1 < 1 or self.rank0 < 1:
            raise InputError("rank1 and rank0 must be at least 1")
        if len(self.pairing) != n or any(len(row) != n for row in self.pairing):
            raise InputError(f"pairing must be a {n}x{n} integer matrix")
        if len(self.deg) != self.rank1 + self.rank0:
            raise InputError("deg must grade the curve and point blocks")
        if len(self.l) != self.rank1:
            raise InputError("l must grade the curve block")
        if len(self.excdeg) != self.rank0:
            raise InputError("excdeg must grade the point block")
        object.__setattr__(self, "excdeg",
                           tuple(Fraction(x) for x in self.excdeg))
        if len(self.twist_matrix) != self.rank0 or any(
                len(row) != self.rank1 for row in self.twist_matrix):
            raise InputError("twist matrix must map the curve block to the point block")
        if len(self.duality) != n or any(len(row) != n for row in self.duality):
            raise InputError(f"duality must be a {n}x{n} integer matrix")
        if self.sigma not in (1, -1):
            raise InputError("sigma must be +1 or -1")
        if not self.effgens1:
            raise InputError("at least one effective generator is required")
        for g in self.effgens1:
            if len(g) != self.rank1:
                raise InputError("effective generator length must match rank1")
            if self.l_of(g) < 1:
                raise InputError("every effective generator must have l at least 1")
        # duality is an involution preserving the point block
        ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        square = [[sum(self.duality[i][k] * self.duality[k][j] for k in range(n))
                   for j in range(n)] for i in range(n)]
        if square != ident:
            raise InputError("duality must square to the identity")
        for i in range(1 + self.rank1, n):
            for j in range(1 + self.rank1):
                if self.duality[j][i] != 0:
                    raise InputError("duality must preserve the point block")
        # the point grading must be positive on each point basis vector
        for i in range(self.rank0):
            if self.deg[self.rank1 + i] <= 0:
                raise InputError("deg must be positive on each point basis vector")
        # twisting must shift deg by l
        for j in range(self.rank1):
            col_deg = sum(self.deg[self.rank1 + i] * self.twist_matrix[i][j]
                          for i in range(self.rank0))
            if col_deg != self.l[j]:
                raise InputError("deg of the twist must equal l on the curve block")

    # -- basic functionals ----------------------------------------------------

    def l_of(self, beta) -> int:
        return sum(a * b for a, b in zip(self.l, beta))

    def deg_pair(self, beta, c) -> int:
        return sum(a * b for a, b in zip(self.deg, tuple(beta) + tuple(c)))

    def deg_point(self, c) -> int:
        return sum(a * b for a, b in zip(self.deg[self.rank1:], c))

    def excdeg_point(self, c) -> Fraction:
        return _dot(self.excdeg, c)

    def twist(self, beta) -> IntVec:
        return tuple(sum(row[j] * beta[j] for j in range(self.rank1))
                     for row in self.twist_matrix)

    def point_degree_functional(self) -> LinearFunctional:
        return LinearFunctional(tuple(Fraction(d) for d in self.deg[self.rank1:]))

    def euler_pairing(self, a: KClass, b: KClass) -> int:
        va, vb = a.vector(), b.vector()
        n = len(va)
        if len(vb) != n or n != 1 + self.rank1 + self.rank0:
            raise InputError("class length does not match the lattice")
        return sum(va[i] * self.pairing[i][j] * vb[j]
                   for i in range(n) for j in range(n))

    def dualize(self, x: KClass) -> KClass:
        v = x.vector()
        n = len(v)
        if n != 1 + self.rank1 + self.rank0:
            raise InputError("class length does not match the lattice")
        out = tuple(sum(self.duality[i][j] * v[j] for j in range(n))
                    for i in range(n))
        return KClass(out[0], out[1:1 + self.rank1], out[1 + self.rank1:])

    # -- effective cone -------------------------------------------------------

    def is_effective(self, beta) -> bool:
        """beta is a nonnegative integer combination of the effective generators."""
        beta = tuple(int(b) for b in beta)
        if len(beta) != self.rank1:
            raise InputError("curve class length does not match rank1")
        cache = self._eff_cache

        def search(v: IntVec) -> bool:
            hit = cache.get(v)
            if hit is not None:
                return hit
            if all(x == 0 for x in v):
                cache[v] = True
                return True
            if self.l_of(v) < 1:
                cache[v] = False
                return False
            res = any(search(tuple(a - b for a, b in zip(v, g)))
                      for g in self.effgens1)
            cache[v] = res
            return res

        return search(beta)

    def leq_effective(self, b1, b2) -> bool:
        """b1 <= b2 in the effective order: both differences effective."""
        return self.is_effective(b1) and self.is_effective(
            tuple(a - b for a, b in zip(b2, b1)))

    def enumerate_below(self, beta) -> list[IntVec]:
        """All effective b' with b' <= beta, in lexicographic order."""
        beta = tuple(int(b) for b in beta)
        if not self.is_effective(beta):
            raise InputError("class is not effective")
        budget = self.l_of(beta)
        zero = (0,) * self.rank1
        seen = {zero}
        queue = [zero]
        while queue:
            v = queue.pop()
            for g in self.effgens1:
                w = tuple(a + b for a, b in zip(v, g))
                if w not in seen and self.l_of(w) <= budget:
                    seen.add(w)
                    queue.append(w)
        return sorted(v for v in seen
                      if self.is_effective(tuple(a - b for a, b in zip(beta, v))))

    # -- slopes and walls -----------------------------------------------------

    def nu_slope(self, x: KClass):
        """deg/l slope of (beta, c); +oo on the point block."""
        l_val = self.l_of(x.beta)
        d_val = self.deg_pair(x.beta, x.c)
        if l_val == 0:
            return INF
        return Fraction(d_val, l_val)

    def nu_walls(self, beta, lo: Fraction, hi: Fraction) -> list[Fraction]:
        """Slope values in [lo, hi] of step 1/l(beta)! (candidate walls)."""
        lo, hi = Fraction(lo), Fraction(hi)
        if hi < lo:
            return []
        step = Fraction(1, math.factorial(self.l_of(beta)))
        k0 = _ceil(lo / step)
        k1 = _floor(hi / step)
        return [k * step for k in range(k0, k1 + 1)]

    def zeta_slope(self, x: KClass):
        """(zeta1, nu) ordered lexicographically; (+oo, +oo) on the point block."""
        if all(b == 0 for b in x.beta):
            return (INF, INF)
        tw = self.twist(x.beta)
        denom = self.deg_point(tw)
        if denom == 0:
            raise InputError("degenerate twist: zeta slope undefined")
        zeta1 = -self.excdeg_point(tw) / denom
        return (zeta1, self.nu_slope(x))

    def gamma_walls(self, beta) -> list[Fraction]:
        """Positive zeta1 values over nonzero effective classes below beta."""
        values = set()
        for bp in self.enumerate_below(beta):
            if all(x == 0 for x in bp):
                continue
            z1, _ = self.zeta_slope(KClass(0, bp, (0,) * self.rank0))
            if z1 > 0:
                values.add(z1)
        return sorted(values)

    def distinguished_class(self, gamma: Fraction, beta) -> IntVec:
        """The l-minimal effective class below beta with zeta1 equal to gamma.

        All matching classes must be mutually proportional, otherwise the
        configured functionals cannot separate them.
        """
        gamma = Fraction(gamma)
        matches = []
        for bp in self.enumerate_below(beta):
            if all(x == 0 for x in bp):
                continue
            z1, _ = self.zeta_slope(KClass(0, bp, (0,) * self.rank0))
            if z1 == gamma:
                matches.append(bp)
        if not matches:
            raise InputError("not a wall")
        best = min(matches, key=lambda v: (self.l_of(v), v))
        for other in matches:
            if not _proportional(best, other):
                raise InputError("non-generic functionals")
        return best

    def L_gamma(self, gamma: Fraction) -> LinearFunctional:
        """deg + gamma^-1 excdeg on the point block."""
        gamma = Fraction(gamma)
        if gamma <= 0:
            raise InputError("gamma must be positive")
        return LinearFunctional(tuple(
            Fraction(self.deg[self.rank1 + i]) + self.excdeg[i] / gamma
            for i in range(self.rank0)))

    # -- serialization --------------------------------------------------------

    def to_obj(self):
        return {
            "rank1": self.rank1,
            "rank0": self.rank0,
            "pairing": [list(row) for row in self.pairing],
            "deg": list(self.deg),
            "l": list(self.l),
            "excdeg": [jsonio.format_rational(x) for x in self.excdeg],
            "twistA": [list(row) for row in self.twist_matrix],
            "duality": [list(row) for row in self.duality],
            "effgens1": [list(g) for g in self.effgens1],
            "sigma": self.sigma,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def lattice_from_obj(obj, path: str = "lattice") -> LatticeSpec:
    rank1 = jsonio.parse_int(jsonio.get_key(obj, "rank1", path), f"{path}.rank1")
    rank0 = jsonio.parse_int(jsonio.get_key(obj, "rank0", path), f"{path}.rank0")
    n = 1 + rank1 + rank0
    pairing = jsonio.parse_int_matrix(
        jsonio.get_key(obj, "pairing", path), f"{path}.pairing", n, n)
    deg = jsonio.parse_int_vector(
        jsonio.get_key(obj, "deg", path), f"{path}.deg", rank1 + rank0)
    l_row = jsonio.parse_int_vector(
        jsonio.get_key(obj, "l", path), f"{path}.l", rank1)
    excdeg = jsonio.parse_rational_vector(
        jsonio.get_key(obj, "excdeg", path), f"{path}.excdeg", rank0)
    twist = jsonio.parse_int_matrix(
        jsonio.get_key(obj, "twistA", path), f"{path}.twistA", rank0, rank1)
    duality = jsonio.parse_int_matrix(
        jsonio.get_key(obj, "duality", path), f"{path}.duality", n, n)
    gens_obj = jsonio.get_key(obj, "effgens1", path)
    if not isinstance(gens_obj, list):
        raise InputError("expected a list of generators", f"{path}.effgens1")
    gens = tuple(jsonio.parse_int_vector(g, f"{path}.effgens1[{i}]", rank1)
                 for i, g in enumerate(gens_obj))
    sigma = jsonio.parse_int(jsonio.get_key(obj, "sigma", path), f"{path}.sigma")
    try:
        return LatticeSpec(rank1=rank1, rank0=rank0, pairing=pairing, deg=deg,
                           l=l_row, excdeg=excdeg, twist_matrix=twist,
                           duality=duality, effgens1=gens, sigma=sigma)
    except InputError as err:
        raise InputError(err.message, path) from None


def kclass_from_obj(obj, path: str, spec: LatticeSpec) -> KClass:
    r = jsonio.parse_int(jsonio.get_key(obj, "r", path), f"{path}.r")
    beta = jsonio.parse_int_vector(
        jsonio.get_key(obj, "beta", path), f"{path}.beta", spec.rank1)
    c = jsonio.parse_int_vector(
        jsonio.get_key(obj, "c", path), f"{path}.c", spec.rank0)
    return KClass(r, beta, c)


def kclass_to_obj(x: KClass):
    return {"r": x.r, "beta": list(x.beta), "c": list(x.c)}
