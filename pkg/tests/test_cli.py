import csv
import io
import json

import jsonschema
import pytest

from watsonlattice.cli import (
    CSV_FIELDS,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    UsageError,
    main,
    output_schema,
    parse_grid,
)

I2_AT_ONE = 1.3932039296856768


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("LATTICE_TOL", "LATTICE_MAX_TERMS", "LATTICE_SEED"):
        monkeypatch.delenv(name, raising=False)


def test_eval_square_lattice_value():
    code, text = run("eval", "--family", "I", "--d", "2", "--eta", "1", "--format", "json")
    record = json.loads(text)
    assert code == EXIT_OK and record["status"] == "ok"
    assert abs(record["value"] - 1.3932) < 5e-5
    assert abs(record["value"] - I2_AT_ONE) < 1e-9


def test_eval_text_mode_rounds():
    code, text = run("eval", "--family", "I", "--d", "2", "--eta", "1")
    assert code == EXIT_OK
    assert "1.393204" in text and "ok" in text


def test_eval_divergent_exit_code():
    code, text = run("eval", "--family", "J", "--d", "2", "--eta", "1", "--format", "csv")
    assert code == EXIT_NUMERIC
    (row,) = rows(text)
    assert row["status"] == "divergent" and row["value"] == ""
    code, _ = run("eval", "--family", "J", "--d", "2", "--eta", "1", "--allow-divergent")
    assert code == EXIT_OK


def test_eval_large_anisotropy():
    code, text = run("eval", "--family", "I", "--d", "3", "--eta", "1e6", "--format", "json")
    assert code == EXIT_OK
    assert abs(json.loads(text)["value"] - 1) < 1e-11


@pytest.mark.parametrize("argv", [
    ("eval", "--family", "I", "--d", "two", "--eta", "1"),
    ("eval", "--family", "Q", "--d", "2", "--eta", "1"),
    ("eval", "--family", "I", "--d", "2"),
    ("eval", "--family", "I", "--d", "2", "--eta", "0.5"),
    ("eval", "--family", "I", "--d", "2,3", "--eta", "1.5"),
    ("eval", "--family", "I", "--d", "2", "--eta", "1.5", "--tol", "-1"),
    ("table", "--family", "I", "--d", "2:1:1", "--eta", "1.5"),
    ("table", "--family", "I", "--d", "2", "--eta", "1:inf:1"),
    ("frobnicate",),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_table_interior_grid():
    code, text = run("table", "--family", "I", "--d", "2,3,4", "--eta", "1.1,1.5,2")
    assert code == EXIT_OK
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
    table = rows(text)
    assert len(table) == 9 and all(r["status"] == "ok" for r in table)
    # d-major ordering
    assert [(float(r["d"]), float(r["eta"])) for r in table[:4]] == [
        (2, 1.1), (2, 1.5), (2, 2), (3, 1.1)]


def test_table_marks_divergent_rows():
    code, text = run("table", "--family", "I", "--d", "1,2", "--eta", "1,1.5")
    table = rows(text)
    assert code == EXIT_OK
    status = {(float(r["d"]), float(r["eta"])): r["status"] for r in table}
    assert status.pop((1, 1)) == "divergent"
    assert set(status.values()) == {"ok"}


def test_table_is_reproducible_and_worker_independent():
    argv = ("table", "--family", "Jtilde", "--d", "1:4:1", "--eta", "1.05:1.25:0.1")
    first, second = run(*argv), run(*argv)
    assert first == second
    assert run(*argv, "--workers", "4") == first


def test_csv_uses_fifteen_digits():
    _, text = run("table", "--family", "J", "--d", "1", "--eta", "2")
    row = rows(text)[0]
    assert len(row["value"].replace("0.", "", 1)) == 15
    assert abs(float(row["value"]) - 1 / 3**0.5) <= float(row["tail_bound"]) + 1e-15


def test_json_matches_schema():
    schema = output_schema()
    _, text = run("table", "--family", "J", "--d", "1,2,3", "--eta", "1,1.5", "--format",
                  "json")
    records = json.loads(text)
    assert len(records) == 6
    for record in records:
        jsonschema.validate(record, schema)
    _, text = run("physics", "--d", "2", "--format", "json")
    for record in json.loads(text):
        jsonschema.validate(record, schema)


def test_schema_rejects_value_on_failure():
    bad = dict(family="J", d=2.0, eta=1.0, spin=None, value=1.0, tail_bound=None,
               terms_used=None, status="divergent")
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, output_schema())


def test_json_and_csv_agree():
    argv = ("table", "--family", "Itilde", "--d", "2,3", "--eta", "1.2")
    _, as_csv = run(*argv)
    _, as_json = run(*argv, "--format", "json")
    for row, record in zip(rows(as_csv), json.loads(as_json)):
        assert float(row["value"]) == record["value"]
        assert int(row["terms_used"]) == record["terms_used"]


def test_environment_and_flag_precedence(monkeypatch):
    argv = ("eval", "--family", "I", "--d", "3", "--eta", "1.5", "--format", "json")
    default_terms = json.loads(run(*argv)[1])["terms_used"]
    monkeypatch.setenv("LATTICE_TOL", "1e-4")
    loose = json.loads(run(*argv)[1])["terms_used"]
    assert loose < default_terms
    assert json.loads(run(*argv, "--tol", "1e-13")[1])["terms_used"] == default_terms
    monkeypatch.setenv("LATTICE_MAX_TERMS", "3")
    monkeypatch.setenv("LATTICE_TOL", "1e-13")
    assert run(*argv)[0] == EXIT_NUMERIC
    monkeypatch.setenv("LATTICE_MAX_TERMS", "many")
    assert run(*argv)[0] == EXIT_USAGE


def test_fixed_terms_flag():
    _, text = run("eval", "--family", "I", "--d", "3", "--eta", "1", "--fixed-M", "50",
                  "--format", "json")
    # terms m = 0 .. M inclusive
    assert json.loads(text)["terms_used"] == 51


def test_physics_records():
    code, text = run("physics", "--d", "3", "--spin", "2.5", "--format", "csv")
    assert code == EXIT_OK
    values = {r["family"]: r for r in rows(text)}
    assert set(values) == {"P_S", "magnetization", "relative_magnetization", "T_N", "T_C"}
    assert float(values["T_N"]["value"]) == pytest.approx(16.748, abs=5e-4)
    code, text = run("physics", "--d", "2", "--format", "csv")
    assert code == EXIT_OK
    values = {r["family"]: r["status"] for r in rows(text)}
    assert values["T_N"] == values["T_C"] == "zero_Tc"
    assert values["magnetization"] == "ok"


def test_physics_disordered_chain_fails():
    assert run("physics", "--d", "1", "--spin", "0.5")[0] == EXIT_NUMERIC


def test_figure1_properties():
    code, text = run("figure1", "--d", "1.5:5:0.5")
    assert code == EXIT_OK
    table = rows(text)
    assert list(table[0]) == ["d", "I_at_eta_1", "I_at_eta_1.005", "tail_at_eta_1",
                              "tail_at_eta_1.005"]
    iso = [float(r["I_at_eta_1"]) for r in table]
    aniso = [float(r["I_at_eta_1.005"]) for r in table]
    assert all(a >= b for a, b in zip(iso, aniso))
    assert all(b < a for a, b in zip(iso, iso[1:]))
    assert all(b < a for a, b in zip(aniso, aniso[1:]))
    assert all(v > 1 for v in aniso)
    at_two = next(r for r in table if float(r["d"]) == 2.0)
    assert abs(float(at_two["I_at_eta_1"]) - I2_AT_ONE) <= float(at_two["tail_at_eta_1"])


def test_figure2_properties():
    code, text = run("figure2", "--d", "1.5,2,2.5,3,20")
    assert code == EXIT_OK
    table = {float(r["d"]): r for r in rows(text)}
    assert float(table[2.0]["red_Tc_eta1"]) == 0 and table[2.0]["zero_Tc_eta1"] == "1"
    assert float(table[2.5]["red_Tc_eta1"]) > 0 and table[2.5]["zero_Tc_eta1"] == "0"
    assert float(table[2.0]["red_Tc_eta1.005"]) > 0
    assert float(table[20.0]["rel_mag_eta1"]) > 1 - 1e-5
    assert float(table[20.0]["rel_mag_eta1.005"]) > 1 - 1e-5
    _, half = run("figure2", "--d", "1.5,2,2.5,3,20", "--spin", "0.5")
    for r in rows(half):
        base = table[float(r["d"])]
        assert r["red_Tc_eta1"] == base["red_Tc_eta1"]
        assert r["red_Tc_eta1.005"] == base["red_Tc_eta1.005"]


def test_figures_worker_independent():
    argv = ("figure2", "--d", "2:3:0.25")
    assert run(*argv) == run(*argv, "--workers", "3")


def test_verify_identities_reports():
    code, text = run("verify", "identities")
    lines = text.splitlines()
    assert code == EXIT_OK
    assert any("connection" in line and line.startswith("PASS") for line in lines)
    assert lines[-1].endswith("checks passed")


def test_verify_is_deterministic():
    argv = ("verify", "appendix", "--seed", "42")
    first = run(*argv)
    assert first == run(*argv)
    assert "1.1" in first[1] and "2" in first[1]


def test_verify_oracle_with_small_sample(monkeypatch):
    monkeypatch.setenv("LATTICE_SEED", "5")
    a = run("verify", "oracle", "--mc-samples", "100000")
    b = run("verify", "oracle", "--mc-samples", "100000", "--seed", "5")
    assert a == b


def test_parse_grid():
    assert parse_grid("1:2:0.25") == [1.0, 1.25, 1.5, 1.75, 2.0]
    assert parse_grid("3, 1.5") == [3.0, 1.5]
    assert parse_grid("1.01:5:0.01")[-1] == 5.0
    for bad in ("", "1:2", "a", "1,nan", "1:2:0"):
        with pytest.raises(UsageError):
            parse_grid(bad)
