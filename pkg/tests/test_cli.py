import json
import subprocess
import sys

import pytest

from wallx import cli
from wallx.a1model import build_a1


def _poly_obj(terms):
    return [{"exponent": list(e), "coeff": str(c)} for e, c in terms]


def _element_obj(*terms):
    return [{"class": {"r": r, "beta": list(b), "c": list(c)},
             "coeff": str(q)} for r, b, c, q in terms]


_GEOMETRIC = {"numerator": _poly_obj([((0,), 1)]),
              "denominator": _poly_obj([((0,), 1), ((1,), -1)])}


def _write_doc(tmp_path, doc):
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(doc))
    return str(path)


def _run(tmp_path, capsys, doc, extra=()):
    status = cli.main(["--input", _write_doc(tmp_path, doc), *extra])
    return status, capsys.readouterr().out


def _series_coeffs(report):
    return {tuple(t["exponent"]): t["coeff"]
            for t in report["series"]["terms"]}


# -- expand / verify ----------------------------------------------------------

def test_expand_geometric_series(tmp_path, capsys):
    doc = {"kind": "expand", "f": _GEOMETRIC,
           "window": {"functional": [1], "bound": "5"}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    report = json.loads(out)
    assert report["kind"] == "expand"
    assert report["tool"]["name"] == "wallx"
    assert _series_coeffs(report) == {(m,): "1" for m in range(6)}


def test_expand_window_flag_overrides_bound(tmp_path, capsys):
    doc = {"kind": "expand", "f": _GEOMETRIC,
           "window": {"functional": [1], "bound": "2"}}
    status, out = _run(tmp_path, capsys, doc, ("--window", "8"))
    assert status == 0
    assert _series_coeffs(json.loads(out)) == {(m,): "1" for m in range(9)}


def test_expand_output_is_byte_deterministic(tmp_path, capsys):
    doc = {"kind": "expand", "f": _GEOMETRIC,
           "window": {"functional": [1], "bound": "4"}}
    _, first = _run(tmp_path, capsys, doc)
    _, second = _run(tmp_path, capsys, doc)
    assert first == second


def test_verify_accepts_and_rejects(tmp_path, capsys):
    good = [{"exponent": [m], "coeff": "1"} for m in range(5)]
    window = {"functional": [1], "bound": "4"}
    doc = {"kind": "verify", "f": _GEOMETRIC,
           "series": {"window": window, "terms": good}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0 and json.loads(out)["verified"] is True
    bad = dict(doc, series={"window": window,
                            "terms": good[:-1] + [{"exponent": [4],
                                                   "coeff": "7"}]})
    status, out = _run(tmp_path, capsys, bad)
    assert status == 1 and json.loads(out)["verified"] is False


# -- resum / detect -----------------------------------------------------------

def _constant_qp_obj():
    return {"vars": 1, "period": 1,
            "table": [{"residues": [0],
                       "poly": [{"exponent": [0], "coeff": "1"}]}]}


def test_resum_orthant_geometric(tmp_path, capsys):
    doc = {"kind": "resum", "quasipoly": _constant_qp_obj(),
           "monomials": [[1]], "grading": [1]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    rf = json.loads(out)["rational_function"]
    assert rf["numerator"] == [{"exponent": [0], "coeff": "1"}]
    assert rf["denominator"] == [{"exponent": [0], "coeff": "1"},
                                 {"exponent": [1], "coeff": "-1"}]


def test_resum_chain_pattern_agrees_with_orthant(tmp_path, capsys):
    base = {"kind": "resum", "quasipoly": _constant_qp_obj(),
            "monomials": [[1]], "grading": [1]}
    _, plain = _run(tmp_path, capsys, base)
    _, chained = _run(tmp_path, capsys,
                      dict(base, pattern={"equalities": []}))
    assert json.loads(plain)["rational_function"] == \
        json.loads(chained)["rational_function"]


def test_resum_group_document(tmp_path, capsys):
    doc = {"kind": "resum", "lattice": build_a1().lattice.to_obj(),
           "group": {"alpha_prime": {"r": -1, "beta": [0], "c": [1, 2]},
                     "betas": [], "kappas": [], "J_values": [],
                     "DT_value": "5/3", "delta0": "0"}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    report = json.loads(out)
    assert report["lattice_fingerprint"] == build_a1().lattice.fingerprint()
    rf = report["rational_function"]
    assert rf["numerator"] == [{"exponent": [1, 2], "coeff": "5/3"}]
    assert rf["denominator"] == [{"exponent": [0, 0], "coeff": "1"}]


def _alt(m):
    return -1 if m % 2 else 1


def test_detect_finds_period_two_fit(tmp_path, capsys):
    doc = {"kind": "detect",
           "samples": [{"n": n, "value": str(_alt(n) * (3 * n - 9))}
                       for n in range(-8, 13)]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    report = json.loads(out)
    assert report["found"] is True
    assert report["fit"]["period"] == 2


def test_detect_no_fit_exits_one(tmp_path, capsys):
    doc = {"kind": "detect",
           "samples": [{"n": n, "value": str(2 ** n)} for n in range(13)]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 1
    report = json.loads(out)
    assert report["found"] is False and report["fit"] is None


# -- poisson kinds ------------------------------------------------------------

def test_bracket_and_naive_differ_by_sign(tmp_path, capsys):
    doc = {"kind": "bracket", "lattice": build_a1().lattice.to_obj(),
           "x": _element_obj((0, (1,), (0, 0), 1)),
           "y": _element_obj((-1, (0,), (0, 0), 1))}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    report = json.loads(out)
    assert report["operation"] == "bracket"
    assert report["element"] == _element_obj((-1, (1,), (0, 0), -1))
    status, out = _run(tmp_path, capsys, dict(doc, operation="naive"))
    assert status == 0
    assert json.loads(out)["element"] == _element_obj((-1, (1,), (0, 0), 1))


def test_exp_ad_document(tmp_path, capsys):
    doc = {"kind": "exp-ad", "lattice": build_a1().lattice.to_obj(),
           "w": _element_obj((0, (1,), (1, 0), 1)),
           "x": _element_obj((-1, (0,), (0, 0), 1)),
           "truncation": {"beta_cap": [2]}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    assert json.loads(out)["element"] == _element_obj(
        (-1, (0,), (0, 0), 1), (-1, (1,), (1, 0), 2), (-1, (2,), (2, 0), 2))


def test_exp_ad_requires_truncation(tmp_path, capsys):
    doc = {"kind": "exp-ad", "lattice": build_a1().lattice.to_obj(),
           "w": _element_obj((0, (1,), (1, 0), 1)),
           "x": _element_obj((-1, (0,), (0, 0), 1))}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 2
    assert json.loads(out)["error"]["path"] == "document.truncation"


def test_wallcross_document(tmp_path, capsys):
    doc = {"kind": "wallcross", "lattice": build_a1().lattice.to_obj(),
           "seed": {"element": _element_obj((-1, (0,), (0, 0), 1))},
           "walls": [{"slope": "1/2",
                      "J": _element_obj((0, (1,), (1, 0), 2))}],
           "truncation": {"beta_cap": [1]}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    report = json.loads(out)
    assert report["seed"]["label"] == "past 1/2"
    assert report["seed"]["element"] == _element_obj(
        (-1, (0,), (0, 0), 1), (-1, (1,), (1, 0), 4))


# -- dtpt / dualize / reexpand ------------------------------------------------

def test_dtpt_document_reproduces_ratio(tmp_path, capsys):
    model = build_a1()
    from wallx.series import rational_function_to_obj
    doc = {"kind": "dtpt",
           "dt": rational_function_to_obj(model.orbifold_layer),
           "dt_zero": rational_function_to_obj(model.point_row),
           "window": {"functional": [1, 1], "bound": "12"}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    coeffs = _series_coeffs(json.loads(out))
    assert coeffs[(4, 4)] == "3" and coeffs[(5, 4)] == "-6"
    assert (3, 4) not in coeffs


def test_dualize_class_swaps_point_coordinates(tmp_path, capsys):
    doc = {"kind": "dualize", "lattice": cli._selfcheck_lattice().to_obj(),
           "class": {"r": 0, "beta": [1], "c": [1, 0]}}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    assert json.loads(out)["image"] == {"r": 0, "beta": [1], "c": [0, 1]}


def test_dualize_family_pass_and_fail(tmp_path, capsys):
    palindromic = {
        "numerator": _poly_obj([((1, 0), 1), ((0, 1), 1)]),
        "denominator": _poly_obj([((0, 0), 1), ((1, 1), -1)])}
    doc = {"kind": "dualize", "lattice": cli._selfcheck_lattice().to_obj(),
           "family": [{"beta": [1], "f": palindromic}]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0 and json.loads(out)["all_ok"] is True
    skew = {"numerator": _poly_obj([((1, 0), 2), ((0, 1), 1)]),
            "denominator": _poly_obj([((0, 0), 1)])}
    doc = {"kind": "dualize", "lattice": cli._selfcheck_lattice().to_obj(),
           "family": [{"beta": [1], "f": skew}]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 1
    report = json.loads(out)
    assert report["all_ok"] is False
    assert report["entries"][0]["first_discrepancy"] == {
        "exponent": [0, 1], "coeff": "1"}


def _geometric_series_obj(functional, bound, coeffs):
    return {"window": {"functional": functional, "bound": str(bound)},
            "terms": [{"exponent": [m], "coeff": str(c)} for m, c in coeffs]}


def test_reexpand_confirms_geometric(tmp_path, capsys):
    doc = {"kind": "reexpand", "f": _GEOMETRIC,
           "s_minus": _geometric_series_obj([-1], 8,
                                            [(m, -1) for m in range(-8, 0)]),
           "s_plus": _geometric_series_obj([1], 8,
                                           [(m, 1) for m in range(9)]),
           "c0": [1]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 0
    report = json.loads(out)
    assert report["confirmed"] is True and report["all_fit"] is True
    assert len(report["cosets"]) == 1
    fit = report["cosets"][0]["fit"]
    assert fit["period"] == 1
    assert fit["table"][0]["poly"] == [{"exponent": [0], "coeff": "1"}]


def test_reexpand_rejects_corrupted_candidate(tmp_path, capsys):
    coeffs = [(m, 1) for m in range(9)]
    coeffs[4] = (4, 5)
    doc = {"kind": "reexpand", "f": _GEOMETRIC,
           "s_minus": _geometric_series_obj([-1], 8,
                                            [(m, -1) for m in range(-8, 0)]),
           "s_plus": _geometric_series_obj([1], 8, coeffs),
           "c0": [1]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 1
    assert json.loads(out)["confirmed"] is False


# -- appendix-a / selfcheck ---------------------------------------------------

def test_appendix_a_default_window(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "appendix-a"})
    assert status == 0
    report = json.loads(out)
    assert report["ok"] is True
    assert report["window"] == 10
    assert len(report["table"]) == 25
    assert report["lattice_fingerprint"] == build_a1().lattice.fingerprint()


def test_appendix_a_window_flag(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "appendix-a"},
                       ("--window", "8"))
    assert status == 0
    assert len(json.loads(out)["table"]) == 21


def test_appendix_a_fractional_window_rejected(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "appendix-a"},
                       ("--window", "17/2"))
    assert status == 2
    assert json.loads(out)["error"]["path"] == "--window"


def test_appendix_a_table_format(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "appendix-a", "window": 8},
                       ("--format", "table"))
    assert status == 0
    lines = out.splitlines()
    assert lines[0].split() == ["m", "orbifold", "resolution", "difference"]
    assert lines[-1] == "ok: yes"


def test_selfcheck_default_seed(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "selfcheck"})
    assert status == 0
    report = json.loads(out)
    assert report["ok"] is True
    assert report["seed"] == 20260823
    assert len(report["checks"]) == 9
    assert all(check["ok"] for check in report["checks"])


def test_selfcheck_seed_flag_overrides(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "selfcheck", "seed": 99},
                       ("--seed", "7"))
    assert status == 0 and json.loads(out)["seed"] == 7
    status, out = _run(tmp_path, capsys, {"kind": "selfcheck", "seed": 99})
    assert status == 0 and json.loads(out)["seed"] == 99


# -- driver errors ------------------------------------------------------------

def test_malformed_rational_exits_two_with_path(tmp_path, capsys):
    doc = {"kind": "detect", "samples": [{"n": 0, "value": "1/0"}]}
    status, out = _run(tmp_path, capsys, doc)
    assert status == 2
    report = json.loads(out)
    assert report["error"]["path"] == "document.samples[0].value"


def test_unknown_kind_exits_two(tmp_path, capsys):
    status, out = _run(tmp_path, capsys, {"kind": "frobnicate"})
    assert status == 2
    assert json.loads(out)["error"]["path"] == "document.kind"


def test_missing_input_file_exits_two(capsys):
    status = cli.main(["--input", "/nonexistent/doc.json"])
    out = capsys.readouterr().out
    assert status == 2
    assert json.loads(out)["error"]["path"] == "--input"


def test_invalid_json_exits_two(tmp_path, capsys):
    path = tmp_path / "doc.json"
    path.write_text("not json at all")
    status = cli.main(["--input", str(path)])
    out = capsys.readouterr().out
    assert status == 2
    assert json.loads(out)["error"]["path"] == "document"


def test_non_object_document_exits_two(tmp_path, capsys):
    path = tmp_path / "doc.json"
    path.write_text("[1, 2]")
    status = cli.main(["--input", str(path)])
    out = capsys.readouterr().out
    assert status == 2
    assert json.loads(out)["error"]["path"] == "document"


def test_module_entry_point_subprocess(tmp_path):
    doc = {"kind": "expand", "f": _GEOMETRIC,
           "window": {"functional": [1], "bound": "3"}}
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(doc))
    proc = subprocess.run([sys.executable, "-m", "wallx", "--input", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    assert {tuple(t["exponent"]): t["coeff"]
            for t in report["series"]["terms"]} == {(m,): "1"
                                                    for m in range(4)}
