import csv
import io
import json

import pytest

from ep3chiral.cli import run
from ep3chiral.puiseux import fit_power


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_construct_example():
    code, text = call("construct", "--e", "0,0", "1,0", "3,0", "--signs", "+", "-")
    assert code == 0
    d = json.loads(text)
    assert d["E_c"] == pytest.approx([4 / 3, 0.0], abs=1e-11)
    assert d["validated"] is True
    assert d["s2"] == pytest.approx([0.1924500897, 0], abs=1e-9)
    assert d["s3"] == pytest.approx([0, -1.5396007178], abs=1e-9)
    assert d["a1_abs"] == pytest.approx(0.8399473, rel=1e-6)


def test_verify_e013():
    code, text = call("verify", "--model", "e013")
    assert code == 0
    assert "FAIL" not in text


def test_classify_example():
    code, text = call("classify", "--e", "0,0", "1,0", "3,0", "--lambda", "0.001,0")
    assert code == 0
    d = json.loads(text)
    assert d["handedness"] == "Right" and d["width_pattern"] == "MiddleBroadest"


def test_determinism():
    args = ("sweep", "--e", "0,0", "1,0", "3,0", "--radii", "1e-3", "1e-4", "1e-5")
    assert call(*args)[1] == call(*args)[1]
    args = ("classify", "--e", "0,0", "1,0", "3,0", "--lambda", "0.001,0.0002")
    assert call(*args)[1] == call(*args)[1]


def test_sweep_csv_layout():
    code, text = call("sweep", "--e", "0,0", "1,0", "3,0", "--radii", "1e-3", "1e-4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["lambda_re", "lambda_im", "sheet", "E_re", "E_im", "t_norm_abs", "overlap_abs"]
    body = rows[1:]
    assert len(body) == 6
    assert [r[2] for r in body] == ["1", "2", "3"] * 2
    assert [float(r[0]) for r in body] == [1e-3] * 3 + [1e-4] * 3
    for r in body:
        for x in r:
            assert "E" not in x


def test_sweep_fit_round_trip(tmp_path):
    path = tmp_path / "sweep.csv"
    assert call("sweep", "--e", "0,0", "1,0", "3,0", "--out", str(path))[0] == 0
    code, from_csv = call("fit", "--csv", str(path))
    assert code == 0
    code, rerun = call("fit", "--e", "0,0", "1,0", "3,0")
    assert from_csv == rerun
    # the CSV values themselves reproduce an in-memory fit to formatting precision
    rows = list(csv.DictReader(open(path)))
    r = [float(x["lambda_re"]) for x in rows if x["sheet"] == "1"]
    y = [float(x["overlap_abs"]) for x in rows if x["sheet"] == "1"]
    fit = fit_power(r, y)
    d = json.loads(from_csv)
    assert d["overlap"]["1"]["exponent"] == pytest.approx(fit.exponent, abs=1e-11)
    assert d["overlap_pooled"]["exponent"] == pytest.approx(2 / 3, abs=0.01)


def test_out_file(tmp_path):
    path = tmp_path / "c.json"
    code, text = call("construct", "--out", str(path))
    assert code == 0 and text == ""
    assert json.loads(path.read_text())["validated"] is True


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"model": {"special": {"e": [[0, 0], [1, 0]]}}}))
    assert call("construct", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert call("construct", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"model": {"special": {"e": [[0, 0], [1, 0], [3, 0]]}, "generic": {}}}))
    assert call("construct", "--config", str(cfg))[0] == 2
    assert "config error" in capsys.readouterr().err


def test_numerical_error_exit_3(capsys):
    code, text = call("construct", "--e", "1,0", "1,0", "3,0")
    assert code == 3 and text == ""
    assert "SingularConfigurationError" in capsys.readouterr().err


def test_config_variants(tmp_path):
    special = {"model": {"special": {"e": [[0, 0], [1, 0], [3, 0]], "signs": [1, -1]}}}
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(special))
    d = json.loads(call("construct", "--config", str(cfg))[1])
    assert d["s3"] == pytest.approx([0, -1.5396007178], abs=1e-9)

    explicit = {"model": {"explicit": {"H0": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]],
                                       "H1": [[[0, 0], [0, 0]], [[0, 0], [0, 1]]]}},
                "sweep": {"center": [0, 0], "radii": [1e-3, 1e-4]}}
    cfg.write_text(json.dumps(explicit))
    code, text = call("sweep", "--config", str(cfg))
    assert code == 0 and len(text.strip().splitlines()) == 1 + 2 * 2


def test_monodromy_json():
    d = json.loads(call("monodromy", "--e", "0,0", "1,0", "3,0", "--radius", "1e-3", "--loops", "3")[1])
    assert d["permutation"] == [1, 2, 3] and d["loops"] == 3
    d = json.loads(call("monodromy", "--model", "ep2", "--radius", "1e-3", "--loops", "2")[1])
    assert d["permutation"] == [1, 2]


def test_locate_json():
    code, text = call("locate", "--model", "ep2", "--order", "2", "--lambda", "0,0.4")
    assert code == 0
    d = json.loads(text)
    assert d["lambda_c"] == pytest.approx([0, 0.5], abs=1e-10)


def test_helix_csv():
    code, text = call("helix", "--e", "0,0", "1,0", "3,0", "--lambda", "0.001,0")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["kind", "x", "y", "z"]
    kinds = [r[0] for r in rows[1:]]
    assert kinds.count("point") == 3 and kinds.count("curve") == 60
    pts = [[float(x) for x in r[1:]] for r in rows[1:] if r[0] == "point"]
    assert pts[1][:2] == pytest.approx([-0.5, 0.866], abs=1e-3)
