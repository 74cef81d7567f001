import csv
import json
from fractions import Fraction

import pytest

from chamberwalk import cli, gallery
from chamberwalk.report import CURVE_COLUMNS, dumps, format_number, write_csv


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def run(args, capsys):
    code = cli.main(args)
    return code, json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_format_number():
    assert format_number(None) == ""
    assert format_number(3) == "3"
    assert format_number(Fraction(1, 3)) == "0.33333333333333331"
    assert write_csv(["a", "b"], [[1, None]]) == "a,b\n1,\n"
    assert json.loads(dumps({"x": Fraction(1, 4)})) == {"x": {"exact": "1/4", "value": 0.25}}


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "riffle" in out and "kflip" in out
    assert cli.main(["list", "--json"]) == 0
    items = json.loads(capsys.readouterr().out)
    assert {i["name"] for i in items} == set(gallery.CATALOG)
    assert all(set(i["modes"]) == set(cli.MODES) for i in items)


def test_boolean_nn_separation_below_thm3(tmp_path, capsys):
    code, msg = run(["run", "--instance", "boolean-nn", "--param", "n=3", "--mode", "exact-separation",
                     "--mode", "bounds", "--t-max", "40", "--out", str(tmp_path)], capsys)
    assert code == 0 and msg["ok"]
    rows = read_csv(tmp_path / "curves.csv")
    assert list(rows[0]) == list(CURVE_COLUMNS)
    assert len(rows) == 41
    for r in rows:
        assert float(r["s_exact"]) <= float(r["bound_thm3"]) + 1e-15
    sep = read_csv(tmp_path / "exact-separation.csv")
    assert sep[0]["bound_thm1"] == "" and sep[0]["s_exact"] == "1"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert (summary["hyperplanes"], summary["faces"], summary["chambers"]) == (3, 27, 8)
    assert summary["separating"] and summary["certificate"]["valid"]


def test_figure1_crosscheck(tmp_path, capsys):
    code, _ = run(["run", "--instance", "figure1", "--mode", "stationary-crosscheck", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "stationary-crosscheck.csv")
    assert len(rows) == 7
    for r in rows:
        a, b, c = (float(r[k]) for k in ("pi_solve", "pi_without_replacement", "pi_until_chamber"))
        assert abs(a - b) < 1e-10 and abs(a - c) < 1e-10
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["chambers"] == 7 and summary["faces"] == 19


def test_tsetlin_n1_refused(tmp_path, capsys):
    code, msg = run(["run", "--instance", "tsetlin", "--param", "n=1", "--mode", "bounds", "--out", str(tmp_path)],
                    capsys)
    assert code != 0
    assert msg["error"]["kind"] == "non-separating"


@pytest.mark.parametrize("args,kind", [
    (["--instance", "nope", "--mode", "bounds"], "validation"),
    (["--instance", "riffle", "--mode", "bounds", "--t-max", "-1"], "validation"),
    (["--instance", "riffle", "--param", "n"], "validation"),
])
def test_invalid_config(tmp_path, capsys, args, kind):
    code, msg = run(["run", "--out", str(tmp_path)] + args, capsys)
    assert code == 2 and msg["error"]["kind"] == kind


def test_non_separating_exact_mode(tmp_path, capsys):
    arr = '{"dimension": 2, "hyperplanes": [{"normal": ["1","0"], "offset": "0"}, {"normal": ["0","1"], "offset": "0"}]}'
    meas = '[{"signs": "+0", "weight": "1/2"}, {"signs": "-0", "weight": "1/2"}]'
    code, msg = run(["run", "--instance", "custom", "--param", f"arrangement={arr}", "--param", f"measure={meas}",
                     "--mode", "exact-separation", "--out", str(tmp_path)], capsys)
    assert code == 2 and msg["error"]["kind"] == "non-separating"


def test_thm3_refusal_is_reported(tmp_path, capsys):
    code, _ = run(["run", "--instance", "tsetlin", "--param", 'weights=["1/2","3/10","1/5"]', "--mode", "bounds",
                   "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["modes"]["bounds"]["thm3"].startswith("symmetry bound needs")
    assert all(r["bound_thm3"] == "" for r in read_csv(tmp_path / "bounds.csv"))


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"instance": "riffle", "params": {"n": 3}, "modes": ["tails"], "t_max": 5,
                               "out": str(tmp_path / "a")}))
    code, _ = run(["run", "--config", str(cfg), "--t-max", "7", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads((tmp_path / "a" / "tails.json").read_text())
    assert len(rows) == 8
    # three pairs, each split w.p. 1/2, any two only together: 3/4 - 2/16
    assert rows[2]["tail_T3"]["exact"] == "5/8"


def test_json_exact_fields(tmp_path, capsys):
    code, _ = run(["run", "--instance", "tsetlin", "--param", "n=3", "--mode", "stationary-crosscheck",
                   "--format", "json", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = json.loads((tmp_path / "stationary-crosscheck.json").read_text())
    assert rows[0]["pi_solve"] == {"exact": "1/6", "value": pytest.approx(1 / 6)}


def test_simulate_and_conditional_modes(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    code, _ = run(["run", "--instance", "boolean-nn", "--param", "n=2", "--mode", "simulate", "--mode",
                   "sst-conditional-check", "--seed", "1", "--seed", "2", "--runs", "2000", "--horizon", "5",
                   "--t-max", "10", "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["modes"]["simulate"]["runs"] == 4000
    assert summary["modes"]["sst-conditional-check"]["max_tv_to_pi"] == {"T1": 0.0, "T2": 0.0, "T3": 0.0}


def test_deterministic_outputs(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / str(k)
        code, _ = run(["run", "--instance", "riffle", "--param", "n=3", "--mode", "simulate", "--mode", "tails",
                       "--seed", "5", "--runs", "3000", "--t-max", "15", "--out", str(out)], capsys)
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]


@pytest.mark.parametrize("name", sorted(gallery.CATALOG))
def test_catalog_round_trip(name, tmp_path, capsys):
    code, msg = run(["run", "--instance", name, "--mode", "exact-separation", "--mode", "bounds", "--mode", "tails",
                     "--t-max", "5", "--out", str(tmp_path)], capsys)
    assert code == 0, msg
