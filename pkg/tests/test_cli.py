import json

import numpy as np
import pytest

from logloss_regions import dsbs
from logloss_regions.cli import main
from logloss_regions.errors import EmptyAlphabet, NotNormalized, ParseError
from logloss_regions.io import csv_text, emit, load_csv, load_pmf


@pytest.fixture
def pmf_file(tmp_path):
    f = tmp_path / "dsbs.json"
    f.write_text(json.dumps({"pmf": [[0.375, 0.125], [0.125, 0.375]]}))
    return f


def test_load_pmf_uniform(tmp_path):
    f = tmp_path / "u.json"
    f.write_text('{"pmf": [[0.25,0.25],[0.25,0.25]]}')
    p = load_pmf(f)
    assert p.p.shape == (2, 2) and np.allclose(p.p, 0.25)


@pytest.mark.parametrize("text, exc", [
    ('{"pmf": [[0.5, 0.5]', ParseError),
    ('{"weights": [[1.0]]}', ParseError),
    ('{"pmf": 3}', ParseError),
    ('{"pmf": [[0.5, 0.6]]}', NotNormalized),
    ('{"pmf": []}', EmptyAlphabet),
])
def test_load_pmf_errors(tmp_path, text, exc):
    f = tmp_path / "bad.json"
    f.write_text(text)
    with pytest.raises(exc) as info:
        load_pmf(f)
    assert "bad.json" in str(info.value)


def test_parse_error_names_line(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{\n  "pmf": [[0.5, 0.5]\n')
    with pytest.raises(ParseError, match="line 3"):
        load_pmf(f)


def test_summary_header(pmf_file, capsys):
    assert main(["rdfun", "--pmf", str(pmf_file), "--samples", "3"]) == 0
    out = capsys.readouterr().out
    assert "H(X|Y)=0.811278" in out


def test_emit_header_only_and_rows(tmp_path):
    f = tmp_path / "e.csv"
    emit((["a", "b"], []), "csv", f)
    assert f.read_text() == "a,b\n"
    emit((["a", "b"], [(1, 0.5), (2, 1 / 3), (3, 2.0)]), "csv", f)
    lines = f.read_text().splitlines()
    assert len(lines) == 4 and lines[2] == "2,0.333333333"


def test_csv_round_trip(tmp_path, pmf_file):
    out = tmp_path / "curve.csv"
    assert main(["region-jd", "--pmf", str(pmf_file), "--d", "0.3", "--out", str(out)]) == 0
    cols, rows = load_csv(out)
    assert csv_text(cols, rows) == out.read_text()
    again = tmp_path / "again.csv"
    emit((cols, rows), "csv", again)
    assert again.read_bytes() == out.read_bytes()


def test_region_jd_zero_distortion_is_sw_face(tmp_path, pmf_file):
    out = tmp_path / "b.csv"
    main(["region-jd", "--pmf", str(pmf_file), "--d", "0", "--samples", "3", "--out", str(out)])
    _, rows = load_csv(out)
    p = dsbs(0.25)
    assert rows[0] == pytest.approx([p.h_x_given_y, p.h_y], abs=1e-8)
    assert rows[-1] == pytest.approx([p.h_x, p.h_y_given_x], abs=1e-8)


def test_region_jd_membership_json(tmp_path, pmf_file):
    out = tmp_path / "m.json"
    assert main(["region-jd", "--pmf", str(pmf_file), "--d", "0.4", "--rx", "0.5", "--ry", "1",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["member"] is True and doc["closed_form"] is True
    assert doc["certificate"]["delta_x"] == pytest.approx(0.311278124, abs=1e-9)


def test_region_xd_curve_nonincreasing(tmp_path, pmf_file):
    out = tmp_path / "x.csv"
    assert main(["region-xd", "--pmf", str(pmf_file), "--samples", "5", "--out", str(out)]) == 0
    _, rows = load_csv(out)
    vals = [r[1] for r in rows]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_simulate_wz_row_and_sidecar(tmp_path, pmf_file):
    out = tmp_path / "s.csv"
    assert main(["simulate", "wz", "--pmf", str(pmf_file), "--n", "16", "--rate", "0.4",
                 "--eps", "0.1", "--trials", "500", "--out", str(out)]) == 0
    cols, rows = load_csv(out)
    row = dict(zip(cols, [None] + rows[0][1:]))
    assert abs(row["mean_distortion"] - 0.452) <= 0.08
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["seed"] == 0 and meta["params"]["rate"] == 0.4 and "version" in meta


def test_rerun_is_byte_identical_and_verify(tmp_path, pmf_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "jd", "--pmf", str(pmf_file), "--d", "0.3", "--trials", "100", "--seed", "4"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["verify", "--out", str(a)]) == 0
    a.write_text(a.read_text().replace("jd,", "jd,9"))
    assert main(["verify", "--out", str(a)]) == 3


@pytest.mark.parametrize("args, code", [
    (["nonsense", "--pmf", "{pmf}"], 2),
    (["simulate", "qq", "--pmf", "{pmf}"], 2),
    (["simulate", "wz", "--pmf", "{pmf}"], 2),
    (["region-jd", "--pmf", "{pmf}"], 2),
    (["rdfun", "--pmf", "/nonexistent/p.json"], 4),
    (["simulate", "wz", "--pmf", "{pmf}", "--rate", "0.8", "--n", "64", "--trials", "1"], 3),
    (["rdfun", "--pmf", "{pmf}", "--bogus-flag"], 2),
])
def test_exit_codes(args, code, pmf_file, capsys):
    args = [a.replace("{pmf}", str(pmf_file)) for a in args]
    assert main(args) == code
    if code in (3, 4) or args[0] in ("nonsense", "simulate", "region-jd"):
        err = capsys.readouterr().err.strip().splitlines()[-1]
        assert json.loads(err)["exit"] == code


def test_unwritable_output_is_io_error(pmf_file, capsys):
    assert main(["rdfun", "--pmf", str(pmf_file), "--out", "/nonexistent/dir/x.csv"]) == 4


def test_ragged_csv_is_parse_error(tmp_path):
    f = tmp_path / "r.csv"
    f.write_text("a,b\n1\n")
    with pytest.raises(ParseError, match="line 2"):
        load_csv(f)
