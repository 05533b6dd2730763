"""Batch front-end: JSON problem documents in, deterministic reports out.

A problem document is a JSON object with a ``kind`` field naming the
operation and kind-specific payload fields next to it.  Reports are
printed to standard output with sorted keys and a fixed indent, so equal
documents always produce byte-identical output.  Exit status: 0 for
success or a positive verification verdict, 1 for a negative verdict,
2 for input or schema errors; every input error names the offending JSON
path.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__, jsonio
from .a1model import behrend_smooth, build_a1, render_a1_table, run_a1
from .errors import InputError
from .lattice import (KClass, LatticeSpec, kclass_from_obj, kclass_to_obj,
                      lattice_from_obj)
from .poisson import (Truncation, TorusElement, bracket, element_from_obj,
                      element_to_obj, exp_ad, naive_product, star_product,
                      truncation_from_obj)
from .quasipoly import (ChainPattern, QuasiPolynomial, detect_quasipoly,
                        qp_eval, qp_from_obj, qp_to_obj, reexpand_check,
                        resum_chain, resum_orthant)
from .series import (LaurentPolynomial, LinearFunctional, RationalFunction,
                     Window, expand, multiply, rational_function_from_obj,
                     rational_function_to_obj, series_from_obj, series_to_obj,
                     verify_expansion, window_from_obj)
from .wallcross import (SeedSeries, WallDatum, cross_wall, dtpt_ratio,
                        duality_check, group_from_obj, group_resum,
                        iterate_walls, seed_from_obj, seed_to_obj,
                        wall_from_obj)

SELFCHECK_SEED = 20260823


@dataclass(frozen=True)
class _Options:
    window: Fraction | None
    seed: int | None


def _tool_obj():
    return {"name": "wallx", "version": __version__}


def _doc_lattice(doc) -> LatticeSpec:
    return lattice_from_obj(jsonio.get_key(doc, "lattice", "document"),
                            "document.lattice")


def _doc_truncation(doc, spec, required: bool):
    obj = jsonio.get_optional(doc, "truncation", "document")
    if obj is None:
        if required:
            raise InputError("a truncation is required", "document.truncation")
        return None
    return truncation_from_obj(obj, "document.truncation", spec)


def _doc_window(doc, opts: _Options) -> Window:
    window = window_from_obj(jsonio.get_key(doc, "window", "document"),
                             "document.window")
    if opts.window is not None:
        window = Window(window.functional, opts.window, window.coset)
    return window


# -- handlers, one per document kind ------------------------------------------

def _run_expand(doc, opts):
    f = rational_function_from_obj(jsonio.get_key(doc, "f", "document"),
                                   "document.f")
    window = _doc_window(doc, opts)
    series = expand(f, window.functional, window)
    return {"series": series_to_obj(series)}, 0


def _run_verify(doc, opts):
    f = rational_function_from_obj(jsonio.get_key(doc, "f", "document"),
                                   "document.f")
    series = series_from_obj(jsonio.get_key(doc, "series", "document"),
                             "document.series", f.numerator.nvars)
    verified = verify_expansion(series, f)
    return {"verified": verified}, 0 if verified else 1


def _run_resum(doc, opts):
    if "group" in doc:
        spec = _doc_lattice(doc)
        group = group_from_obj(jsonio.get_key(doc, "group", "document"),
                               "document.group", spec)
        trunc = _doc_truncation(doc, spec, required=False)
        out = group_resum(group, trunc)
        return {"lattice_fingerprint": spec.fingerprint(),
                "rational_function": rational_function_to_obj(out)}, 0
    a = qp_from_obj(jsonio.get_key(doc, "quasipoly", "document"),
                    "document.quasipoly")
    monos_obj = jsonio.get_key(doc, "monomials", "document")
    if not isinstance(monos_obj, list):
        raise InputError("monomials must be a list", "document.monomials")
    monos = [jsonio.parse_int_vector(m, f"document.monomials[{i}]")
             for i, m in enumerate(monos_obj)]
    grading = LinearFunctional.from_obj(
        jsonio.get_key(doc, "grading", "document"), "document.grading")
    pattern_obj = jsonio.get_optional(doc, "pattern", "document")
    if pattern_obj is None:
        out = resum_orthant(a, monos, grading)
    else:
        equalities = jsonio.parse_int_vector(
            jsonio.get_key(pattern_obj, "equalities", "document.pattern"),
            "document.pattern.equalities")
        out = resum_chain(a, ChainPattern(a.vars, frozenset(equalities)),
                          monos, grading)
    return {"rational_function": rational_function_to_obj(out)}, 0


def _run_detect(doc, opts):
    samples_obj = jsonio.get_key(doc, "samples", "document")
    if not isinstance(samples_obj, list):
        raise InputError("samples must be a list", "document.samples")
    samples = {}
    for i, entry in enumerate(samples_obj):
        n = jsonio.parse_int(jsonio.get_key(entry, "n", f"document.samples[{i}]"),
                             f"document.samples[{i}].n")
        samples[n] = jsonio.parse_rational(
            jsonio.get_key(entry, "value", f"document.samples[{i}]"),
            f"document.samples[{i}].value")
    max_period = jsonio.parse_int(
        jsonio.get_optional(doc, "max_period", "document", 4),
        "document.max_period")
    max_degree = jsonio.parse_int(
        jsonio.get_optional(doc, "max_degree", "document", 6),
        "document.max_degree")
    fit = detect_quasipoly(samples, max_period, max_degree)
    report = {"found": fit is not None,
              "fit": None if fit is None else qp_to_obj(fit)}
    return report, 0 if fit is not None else 1


_PRODUCTS = {"bracket": bracket, "star": star_product, "naive": naive_product}


def _run_bracket(doc, opts):
    spec = _doc_lattice(doc)
    x = element_from_obj(jsonio.get_key(doc, "x", "document"), "document.x", spec)
    y = element_from_obj(jsonio.get_key(doc, "y", "document"), "document.y", spec)
    operation = jsonio.get_optional(doc, "operation", "document", "bracket")
    if operation not in _PRODUCTS:
        raise InputError("operation must be one of bracket, star, naive",
                         "document.operation")
    trunc = _doc_truncation(doc, spec, required=False)
    out = _PRODUCTS[operation](x, y, trunc)
    return {"lattice_fingerprint": spec.fingerprint(),
            "operation": operation, "element": element_to_obj(out)}, 0


def _run_exp_ad(doc, opts):
    spec = _doc_lattice(doc)
    w = element_from_obj(jsonio.get_key(doc, "w", "document"), "document.w", spec)
    x = element_from_obj(jsonio.get_key(doc, "x", "document"), "document.x", spec)
    trunc = _doc_truncation(doc, spec, required=True)
    out = exp_ad(w, x, trunc)
    return {"lattice_fingerprint": spec.fingerprint(),
            "element": element_to_obj(out)}, 0


def _run_wallcross(doc, opts):
    spec = _doc_lattice(doc)
    seed = seed_from_obj(jsonio.get_key(doc, "seed", "document"),
                         "document.seed", spec)
    walls_obj = jsonio.get_key(doc, "walls", "document")
    if not isinstance(walls_obj, list):
        raise InputError("walls must be a list", "document.walls")
    walls = [wall_from_obj(w, f"document.walls[{i}]", spec)
             for i, w in enumerate(walls_obj)]
    trunc = _doc_truncation(doc, spec, required=True)
    final = iterate_walls(seed, walls, trunc)
    return {"lattice_fingerprint": spec.fingerprint(),
            "seed": seed_to_obj(final)}, 0


def _run_dtpt(doc, opts):
    dt = rational_function_from_obj(jsonio.get_key(doc, "dt", "document"),
                                    "document.dt")
    dt_zero = rational_function_from_obj(
        jsonio.get_key(doc, "dt_zero", "document"), "document.dt_zero")
    window = _doc_window(doc, opts)
    L = window.functional
    ratio = dtpt_ratio(expand(dt, L, window), expand(dt_zero, L, window), L)
    return {"series": series_to_obj(ratio)}, 0


def _run_dualize(doc, opts):
    spec = _doc_lattice(doc)
    report = {"lattice_fingerprint": spec.fingerprint()}
    if "family" in doc:
        family_obj = doc["family"]
        if not isinstance(family_obj, list):
            raise InputError("family must be a list", "document.family")
        family = {}
        for i, entry in enumerate(family_obj):
            beta = tuple(jsonio.parse_int_vector(
                jsonio.get_key(entry, "beta", f"document.family[{i}]"),
                f"document.family[{i}].beta", spec.rank1))
            family[beta] = rational_function_from_obj(
                jsonio.get_key(entry, "f", f"document.family[{i}]"),
                f"document.family[{i}].f", spec.rank0)
        out = duality_check(family, spec)
        entries = []
        for entry in out.entries:
            row = {"beta": list(entry.beta), "image": list(entry.image),
                   "ok": entry.ok}
            if entry.first_discrepancy is not None:
                exponent, coeff = entry.first_discrepancy
                row["first_discrepancy"] = {
                    "exponent": list(exponent),
                    "coeff": jsonio.format_rational(coeff)}
            entries.append(row)
        report.update({"entries": entries, "all_ok": out.all_ok})
        return report, 0 if out.all_ok else 1
    x = kclass_from_obj(jsonio.get_key(doc, "class", "document"),
                        "document.class", spec)
    report["image"] = kclass_to_obj(spec.dualize(x))
    return report, 0


def _run_reexpand(doc, opts):
    f = rational_function_from_obj(jsonio.get_key(doc, "f", "document"),
                                   "document.f")
    nvars = f.numerator.nvars
    s_minus = series_from_obj(jsonio.get_key(doc, "s_minus", "document"),
                              "document.s_minus", nvars)
    s_plus = series_from_obj(jsonio.get_key(doc, "s_plus", "document"),
                             "document.s_plus", nvars)
    c0 = jsonio.parse_int_vector(jsonio.get_key(doc, "c0", "document"),
                                 "document.c0", nvars)
    max_period = jsonio.parse_int(
        jsonio.get_optional(doc, "max_period", "document", 4),
        "document.max_period")
    max_degree = jsonio.parse_int(
        jsonio.get_optional(doc, "max_degree", "document", 6),
        "document.max_degree")
    verdict = reexpand_check(f, s_minus, s_plus, c0,
                             s_minus.window.functional,
                             s_plus.window.functional, max_period, max_degree)
    cosets = []
    for coset in verdict.cosets:
        cosets.append({"representative": list(coset.representative),
                       "k_lo": coset.k_lo, "k_hi": coset.k_hi,
                       "fit": None if coset.fit is None else qp_to_obj(coset.fit)})
    report = {"c0": list(verdict.c0), "cosets": cosets,
              "all_fit": verdict.all_fit, "confirmed": verdict.confirmed}
    return report, 0 if verdict.confirmed else 1


def _run_appendix_a(doc, opts):
    if opts.window is not None:
        if opts.window.denominator != 1:
            raise InputError("report window must be an integer", "--window")
        window = int(opts.window)
    else:
        window = jsonio.parse_int(
            jsonio.get_optional(doc, "window", "document", 10),
            "document.window")
    report = run_a1(window)
    return report, 0 if report["ok"] else 1


def _run_selfcheck(doc, opts):
    if opts.seed is not None:
        seed = opts.seed
    else:
        seed = jsonio.parse_int(
            jsonio.get_optional(doc, "seed", "document", SELFCHECK_SEED),
            "document.seed")
    report = _selfcheck(seed)
    return report, 0 if report["ok"] else 1


_HANDLERS = {
    "expand": _run_expand,
    "verify": _run_verify,
    "resum": _run_resum,
    "detect": _run_detect,
    "bracket": _run_bracket,
    "exp-ad": _run_exp_ad,
    "wallcross": _run_wallcross,
    "dtpt": _run_dtpt,
    "dualize": _run_dualize,
    "reexpand": _run_reexpand,
    "appendix-a": _run_appendix_a,
    "selfcheck": _run_selfcheck,
}


# -- the selfcheck property suite ---------------------------------------------

def _selfcheck_lattice() -> LatticeSpec:
    """The worked-model lattice with the duality swapping the two point rows."""
    base = build_a1().lattice
    swapped = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0))
    return LatticeSpec(rank1=base.rank1, rank0=base.rank0,
                       pairing=base.pairing, deg=base.deg, l=base.l,
                       excdeg=base.excdeg, twist_matrix=base.twist_matrix,
                       duality=swapped, effgens1=base.effgens1,
                       sigma=base.sigma)


def _random_poly(rng, max_exp=4):
    terms = {}
    for _ in range(rng.randint(0, 3)):
        terms[(rng.randint(1, max_exp),)] = Fraction(rng.randint(-3, 3))
    return LaurentPolynomial(terms, 1)


def _random_unit_poly(rng):
    poly = _random_poly(rng)
    return poly + LaurentPolynomial.constant(1, rng.choice((1, -1, 2)))


def _random_element(rng, spec, ranks, count=2):
    terms = []
    for _ in range(rng.randint(1, count)):
        cls = KClass(rng.choice(ranks), (rng.randint(0, 2),),
                     (rng.randint(-2, 2), rng.randint(-2, 2)))
        terms.append((cls, Fraction(rng.randint(-3, 3))))
    return TorusElement(spec, terms)


def _selfcheck(seed: int) -> dict:
    rng = random.Random(seed)
    checks = []

    def record(name, runs, ok):
        checks.append({"name": name, "ok": bool(ok), "runs": runs})

    deg1 = LinearFunctional((1,))

    ok = True
    for _ in range(25):
        f = RationalFunction(_random_poly(rng), _random_unit_poly(rng))
        ok = ok and verify_expansion(expand(f, deg1, Window(deg1, 12)), f)
    record("series expansion verifies against its source", 25, ok)

    ok = True
    for _ in range(15):
        f = RationalFunction(_random_poly(rng), _random_unit_poly(rng))
        g = RationalFunction(_random_poly(rng), _random_unit_poly(rng))
        prod = multiply(expand(f, deg1, Window(deg1, 12)),
                        expand(g, deg1, Window(deg1, 12)))
        ok = ok and verify_expansion(prod, f * g)
    record("series products match source products", 15, ok)

    spec = _selfcheck_lattice()
    ok = True
    for _ in range(25):
        x = KClass(rng.choice((-1, 0, 1)), (rng.randint(-2, 2),),
                   (rng.randint(-3, 3), rng.randint(-3, 3)))
        ok = ok and spec.dualize(spec.dualize(x)) == x
        beta = (rng.randint(1, 3),)
        c = (rng.randint(-3, 3), rng.randint(-3, 3))
        shifted = tuple(a + b for a, b in zip(c, spec.twist(beta)))
        ok = ok and spec.nu_slope(KClass(0, beta, shifted)) == \
            spec.nu_slope(KClass(0, beta, c)) + 1
    record("duality is an involution and twisting raises the slope by one",
           25, ok)

    ok = True
    for _ in range(15):
        period = rng.choice((1, 2))
        table = {}
        for rho in range(period):
            table[(rho,)] = LaurentPolynomial(
                {(e,): Fraction(rng.randint(-3, 3)) for e in range(3)}, 1)
        a = QuasiPolynomial(1, period, table)
        step = rng.randint(1, 3)
        out = resum_orthant(a, [(step,)], deg1)
        series = expand(out, deg1, Window(deg1, 12))
        for j in range(13):
            expected = (qp_eval(a, (j // step,))
                        if j % step == 0 else Fraction(0))
            ok = ok and series.coeff((j,)) == expected
    record("orthant resummation matches one-sided partial sums", 15, ok)

    ok = True
    for _ in range(20):
        x = _random_element(rng, spec, (-1, 0, 1))
        y = _random_element(rng, spec, (-1, 0, 1))
        z = _random_element(rng, spec, (-1, 0, 1))
        ok = ok and (bracket(x, y) + bracket(y, x)).is_zero()
        jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) \
            + bracket(z, bracket(x, y))
        ok = ok and jac.is_zero()
    record("bracket antisymmetry and jacobi identity", 20, ok)

    trunc = Truncation((3,), Fraction(8))
    ok = True
    for _ in range(15):
        w = TorusElement(spec, [(KClass(0, (rng.randint(1, 2),),
                                        (rng.randint(-2, 2), rng.randint(-2, 2))),
                                 Fraction(rng.randint(-2, 2)))])
        x = _random_element(rng, spec, (-1,))
        back = exp_ad(w.scale(-1), exp_ad(w, x, trunc), trunc)
        ok = ok and (back - x).is_zero()
    record("adjoint exponentials of opposite walls invert each other", 15, ok)

    ok = True
    for _ in range(15):
        j = TorusElement(spec, [(KClass(0, (1,), (1, 0)),
                                 Fraction(rng.randint(-3, 3)))])
        wall = WallDatum(Fraction(1, 2), j)
        anti = WallDatum(Fraction(1, 2), j.scale(-1))
        seed_el = _random_element(rng, spec, (-1,))
        state = SeedSeries(seed_el)
        back = cross_wall(cross_wall(state, wall, trunc), anti, trunc)
        ok = ok and (back.element - seed_el).is_zero()
    record("crossing a wall and its negative restores the seed", 15, ok)

    one = LaurentPolynomial.constant(1, 1)
    geom = RationalFunction(one, one - LaurentPolynomial.monomial((1,)))
    l_minus = LinearFunctional((-1,))
    s_plus = expand(geom, deg1, Window(deg1, 8))
    s_minus = expand(geom, l_minus, Window(l_minus, 8))
    verdict = reexpand_check(geom, s_minus, s_plus, (1,), l_minus, deg1)
    fit = verdict.cosets[0].fit
    ok = verdict.confirmed and fit is not None and fit.period == 1 \
        and all(qp_eval(fit, (k,)) == 1 for k in range(-4, 5))
    record("geometric series re-expands across zero with constant difference",
           1, ok)

    ok = True
    for _ in range(25):
        a = [rng.randint(0, 5) for _ in range(rng.randint(0, 4))]
        b = [rng.randint(0, 5) for _ in range(rng.randint(0, 4))]
        ok = ok and behrend_smooth(a + b) == behrend_smooth(a) * behrend_smooth(b)
    record("behrend weight is multiplicative over products", 25, ok)

    return {"seed": seed, "checks": checks,
            "ok": all(c["ok"] for c in checks)}


# -- driver -------------------------------------------------------------------

def _load_document(source: str | None):
    if source is None or source == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(source, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as err:
            raise InputError(f"cannot read input: {err}", "--input") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"invalid JSON: {err.msg}", "document") from err
    if not isinstance(doc, dict):
        raise InputError("expected a JSON object", "document")
    return doc


def _dumps(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def _flatten(prefix, value, lines):
    if isinstance(value, dict):
        for key in sorted(value):
            child = f"{prefix}.{key}" if prefix else str(key)
            _flatten(child, value[key], lines)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, lines)
    elif value is None:
        lines.append(f"{prefix}: null")
    else:
        lines.append(f"{prefix}: {value}")


def render_report(report, fmt: str) -> str:
    if fmt == "json":
        return _dumps(report)
    if report.get("kind") == "appendix-a":
        return render_a1_table(report)
    if "series" in report:
        terms = report["series"]["terms"]
        rows = [("exponent", "coeff")] + [
            (" ".join(str(x) for x in t["exponent"]), t["coeff"]) for t in terms]
        widths = [max(len(r[i]) for r in rows) for i in range(2)]
        lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
                 for row in rows]
        lines.append(f"bound: {report['series']['window']['bound']}")
        return "\n".join(lines)
    if report.get("kind") == "selfcheck":
        lines = [f"seed: {report['seed']}"]
        for check in report["checks"]:
            flag = "ok" if check["ok"] else "FAIL"
            lines.append(f"{flag:4}  {check['runs']:3} runs  {check['name']}")
        lines.append(f"ok: {'yes' if report['ok'] else 'no'}")
        return "\n".join(lines)
    lines = []
    _flatten("", report, lines)
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wallx",
        description="Run one exact wall-crossing problem document.")
    parser.add_argument("--input", metavar="FILE",
                        help="problem document path; '-' or omitted reads stdin")
    parser.add_argument("--format", choices=("json", "table"), default="json",
                        help="report rendering (default json)")
    parser.add_argument("--window", metavar="RATIONAL",
                        help="override the document's expansion bound")
    parser.add_argument("--seed", type=int, metavar="INT",
                        help="override the selfcheck seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = _load_document(args.input)
        kind = jsonio.get_key(doc, "kind", "document")
        if kind not in _HANDLERS:
            raise InputError("unknown document kind", "document.kind")
        window = None
        if args.window is not None:
            window = jsonio.parse_rational(args.window, "--window")
        opts = _Options(window=window, seed=args.seed)
        payload, status = _HANDLERS[kind](doc, opts)
    except InputError as err:
        report = {"error": {"message": err.message, "path": err.path}}
        print(_dumps(report))
        return 2
    report = {"kind": kind, "tool": _tool_obj()}
    report.update(payload)
    print(render_report(report, args.format))
    return status
