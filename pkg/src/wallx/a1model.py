"""Fixed worked model on a rank (1+1+2) lattice, with its verification report.

The model has one curve generator beta with l(beta) = 2 and two point
classes, each of degree 1; the point exponents are written (m, n) and the
two point variables are called q_plus and q_minus.  Stored series data
covers the point row (curve class 0, n = 0) and the curve row 2*beta at
n = 4, as rational functions in the two point variables; the implicit
curve variable is constant across each row and is omitted.

``run_a1`` recomputes the two one-sided column expansions of the shared
curve-row rational function, fits the quasi-polynomial column difference,
certifies the re-expansion across the first point class, and cross-checks
every table entry against the smooth-moduli Behrend weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .jsonio import format_rational
from .lattice import KClass, LatticeSpec
from .quasipoly import detect_quasipoly, qp_degree, qp_eval, reexpand_check
from .series import (LaurentPolynomial, LinearFunctional, RationalFunction,
                     Window, expand)
from .wallcross import dtpt_ratio


def behrend_smooth(dims) -> int:
    """Behrend-weighted Euler characteristic of a product of projective spaces.

    A smooth moduli space carries the constant Behrend function
    (-1)^dimension, so the weighted count of a product of projective spaces
    P^{d_1} x ... x P^{d_k} is (-1)^(sum d_i) * prod (d_i + 1).
    """
    dims = [int(d) for d in dims]
    if any(d < 0 for d in dims):
        raise InputError("projective space dimensions must be nonnegative")
    sign = -1 if sum(dims) % 2 else 1
    for d in dims:
        sign *= d + 1
    return sign


def _alt(m: int) -> int:
    return -1 if m % 2 else 1


@dataclass(frozen=True)
class StoredVariant:
    """A source coefficient table kept verbatim for the record.

    ``suspect`` marks a table that disagrees with the closed form it
    accompanies.  Suspect tables are never used as oracles and are never
    silently corrected; the note records the first disagreement.
    """

    coefficients: tuple[tuple[int, int], ...]
    suspect: bool
    note: str


@dataclass(frozen=True)
class A1Model:
    """The worked model: lattice, expansion functionals, and series data.

    ``point_row`` is the rank-zero count row at n = 0, with coefficients
    (-1)^m (m + 1).  ``orbifold_layer`` is the curve-row data on one side
    and ``shared_layer`` is the common rational function whose two
    one-sided expansions are the report columns; the other side's curve
    row equals ``shared_layer`` directly.  ``identifications`` records the
    images of the resolution-side curve and point classes in (d, (m, n))
    coordinates, for documentation only.
    """

    lattice: LatticeSpec
    l_plus: LinearFunctional
    l_minus: LinearFunctional
    point_row: RationalFunction
    orbifold_layer: RationalFunction
    shared_layer: RationalFunction
    curve_class: KClass
    identifications: dict
    raw_orbifold_variant: StoredVariant
    normalization: dict

    def __post_init__(self):
        names = ("C_h", "C_v", "p")
        classes = [self.identifications[name] for name in names]
        if len(set(classes)) != len(classes):
            raise InputError("identification classes must be pairwise distinct")
        diff = self.identifications["p"] - self.identifications["C_v"]
        if diff != KClass(0, (0,) * self.lattice.rank1, self.point_plus_exponent()):
            raise InputError("p minus C_v must be the first point class")

    def point_plus_exponent(self):
        return (1,) + (0,) * (self.lattice.rank0 - 1)

    # -- tabulated column values (the ground truth for the report) ------------

    def orbifold_column(self, m: int) -> Fraction:
        if m <= 3:
            return Fraction(0)
        return Fraction(_alt(m) * (3 * m - 9))

    def resolution_column(self, m: int) -> Fraction:
        if m >= 3:
            return Fraction(0)
        return Fraction(-_alt(m) * (3 * m - 9))

    def column_difference(self, m: int) -> Fraction:
        """Orbifold column minus resolution column; equals (-1)^m (3m - 9)."""
        return self.orbifold_column(m) - self.resolution_column(m)

    def point_row_coefficient(self, m: int) -> Fraction:
        if m < 0:
            return Fraction(0)
        return Fraction(_alt(m) * (m + 1))

    def resolution_point_coefficient(self, m: int, n: int) -> Fraction:
        """Resolution-side rank-zero table: identically zero for n <= 0."""
        if n <= 0:
            return Fraction(0)
        raise InputError("resolution point counts are tabulated only for n <= 0")


def build_a1() -> A1Model:
    """Materialize the worked model with all stored series data."""
    lattice = LatticeSpec(
        rank1=1, rank0=2,
        pairing=((0, 1, 1, 0),
                 (-1, 0, 0, 0),
                 (-1, 0, 0, 0),
                 (0, 0, 0, 0)),
        deg=(0, 1, 1),
        l=(2,),
        excdeg=(Fraction(-1), Fraction(1)),
        twist_matrix=((2,), (0,)),
        duality=((1, 0, 0, 0),
                 (0, 1, 0, 0),
                 (0, 0, 1, 0),
                 (0, 0, 0, 1)),
        effgens1=((1,),),
        sigma=-1,
    )
    one = LaurentPolynomial.constant(2, 1)
    one_plus_q = one + LaurentPolynomial.monomial((1, 0))
    square = one_plus_q * one_plus_q
    layer_top = LaurentPolynomial.monomial((4, 4), 3)
    raw = tuple((m, 3 * math.comb(m + 3, 3)) for m in range(4, 9))
    return A1Model(
        lattice=lattice,
        l_plus=LinearFunctional((1, 1)),
        l_minus=LinearFunctional((-1, 1)),
        point_row=RationalFunction(one, square),
        orbifold_layer=RationalFunction(layer_top, square * square),
        shared_layer=RationalFunction(layer_top, square),
        curve_class=KClass(0, (2,), (0, 0)),
        identifications={"C_h": KClass(0, (1,), (0, 1)),
                         "C_v": KClass(0, (0,), (0, 1)),
                         "p": KClass(0, (0,), (1, 1))},
        raw_orbifold_variant=StoredVariant(
            coefficients=raw,
            suspect=True,
            note=("table disagrees with the expansion of the stored closed "
                  "form starting at m = 4 (table 105, expansion 3); kept "
                  "verbatim and excluded from every oracle"),
        ),
        normalization={"deg_point_plus": 1, "deg_point_minus": 1, "l_curve": 2},
    )


def _first_divergence(pairs):
    """First (m, expected, actual) disagreement in an iterable, or None."""
    for m, expected, actual in pairs:
        if expected != actual:
            return {"m": m, "expected": format_rational(expected),
                    "actual": format_rational(actual)}
    return None


def run_a1(report_window: int) -> dict:
    """Recompute both columns and return the full verification report.

    The report covers m in [-report_window, report_window + 4].  Each step
    carries its own ok flag; any mismatch is reported as the step's first
    divergent coefficient and flips the top-level ok flag instead of
    raising.
    """
    if report_window < 8:
        raise InputError("report window must be at least 8")
    model = build_a1()
    w = int(report_window)
    m_lo, m_hi = -w, w + 4
    ms = range(m_lo, m_hi + 1)

    point_series = expand(model.point_row, model.l_plus,
                          Window(model.l_plus, w + 8))
    orbifold_series = dtpt_ratio(
        expand(model.orbifold_layer, model.l_plus, Window(model.l_plus, w + 8)),
        point_series, model.l_plus)
    resolution_series = expand(model.shared_layer, model.l_minus,
                               Window(model.l_minus, w + 4))
    orb = {m: orbifold_series.coeff((m, 4)) for m in ms}
    res = {m: resolution_series.coeff((m, 4)) for m in ms}

    steps = []

    def add_step(name, divergence, **detail):
        entry = {"name": name, "ok": divergence is None}
        if divergence is not None:
            entry["first_divergence"] = divergence
        entry.update(detail)
        steps.append(entry)

    add_step("orbifold column",
             _first_divergence((m, model.orbifold_column(m), orb[m])
                               for m in ms),
             checked=len(orb))
    add_step("resolution column",
             _first_divergence((m, model.resolution_column(m), res[m])
                               for m in ms),
             checked=len(res))

    fit = detect_quasipoly({m: orb[m] - res[m] for m in ms},
                           max_period=4, max_degree=6)
    if fit is None:
        fit_div = {"m": m_lo, "expected": "quasi-polynomial fit",
                   "actual": "no fit"}
        fit_detail = {}
    else:
        fit_div = _first_divergence((m, model.column_difference(m),
                                     qp_eval(fit, (m,))) for m in ms)
        fit_detail = {"period": fit.period, "degree": qp_degree(fit, 0)}
    add_step("difference quasi-polynomial", fit_div, **fit_detail)

    verdict = reexpand_check(model.shared_layer, resolution_series,
                             orbifold_series, model.point_plus_exponent(),
                             model.l_minus, model.l_plus)
    add_step("re-expansion certificate",
             None if verdict.confirmed else
             {"m": m_lo, "expected": "confirmed", "actual": "not confirmed"},
             cosets=len(verdict.cosets))

    behrend_pairs = []
    for m in range(0, w + 5):
        behrend_pairs.append((m, Fraction(behrend_smooth([m])),
                              point_series.coeff((m, 0))))
    for m in ms:
        expected = (Fraction(behrend_smooth([2, m - 4])) if m >= 4
                    else Fraction(0))
        behrend_pairs.append((m, expected, orb[m]))
        expected = (Fraction(behrend_smooth([2, 2 - m])) if m <= 2
                    else Fraction(0))
        behrend_pairs.append((m, expected, res[m]))
    add_step("behrend cross-check", _first_divergence(behrend_pairs),
             checked=len(behrend_pairs))

    ok = all(step["ok"] for step in steps)
    report = {
        "model": "transverse-a1",
        "window": w,
        "normalization": dict(model.normalization),
        "lattice_fingerprint": model.lattice.fingerprint(),
        "steps": steps,
        "table": [{"m": m,
                   "orbifold": format_rational(orb[m]),
                   "resolution": format_rational(res[m]),
                   "difference": format_rational(orb[m] - res[m])}
                  for m in ms],
        "point_row": [{"m": m, "value": format_rational(point_series.coeff((m, 0)))}
                      for m in range(0, w + 5)],
        "ok": ok,
    }
    if not ok:
        first_bad = next(step for step in steps if not step["ok"])
        report["first_divergence"] = dict(first_bad.get("first_divergence", {}),
                                          step=first_bad["name"])
    return report


def render_a1_table(report: dict) -> str:
    """Human-readable two-column table for a run_a1 report."""
    rows = [("m", "orbifold", "resolution", "difference")]
    for entry in report["table"]:
        rows.append((str(entry["m"]), entry["orbifold"],
                     entry["resolution"], entry["difference"]))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row))
             for row in rows]
    lines.append("")
    lines.append(f"ok: {'yes' if report['ok'] else 'no'}")
    return "\n".join(lines)
