import csv
import io
import json

import pytest

from voltspec.cli import main, parse_modes
from voltspec.errors import ConfigError

K1 = '{"type": "finite", "terms": [[1, 2]]}'
K_UNSTABLE = '{"type": "finite", "terms": [[4, 2]]}'
FAMILY = '{"type": "power_law", "A": 0.5, "B": 1, "alpha": 0.5, "beta": 2, "N": 50}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_modes():
    assert parse_modes("1,2.5", None) == [1.0, 2.5]
    assert parse_modes(None, "10:10:3") == [10.0, 100.0, 1000.0]
    assert parse_modes(None, None) == [1.0]
    for bad in [("1,x", None), (None, "1:2"), ("1", "1:2:3")]:
        with pytest.raises(ConfigError):
            parse_modes(*bad)


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--kernel", K1, "--modes", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["kind"] for r in rows] == ["real", "pair", "pair"]
    assert float(rows[0]["re"]) == pytest.approx(-1.75487766624669276, rel=1e-14)
    assert float(rows[1]["im"]) == pytest.approx(0.74486176661974423659, rel=1e-14)


def test_spectrum_unstable_kind(capsys):
    code, out, _ = run(capsys, "spectrum", "--kernel", K_UNSTABLE)
    assert code == 0
    assert "unstable,0.69562076955986" in out


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--kernel", K_UNSTABLE, "--modes", "1,2")
    doc = json.loads(out)
    assert code == 0
    assert doc["verdict"] == "Unstable" and doc["N0"] == 1
    assert doc["regime"] == "FiniteSum"


def test_classify_family(capsys):
    code, out, _ = run(capsys, "classify", "--kernel", FAMILY, "--theta", "0.875")
    doc = json.loads(out)
    assert doc["regime"] == "ConstantAbscissa"
    assert doc["vartheta"] == pytest.approx(-0.51308607648851544444, rel=1e-12)
    assert doc["r"] == 0.75


def test_asymptotics_finite(capsys):
    code, out, err = run(capsys, "asymptotics", "--kernel", K1, "--theta", "0.5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["slope_re"] == pytest.approx(-3.0, abs=0.05)
    assert err.startswith("PASS")


def test_asymptotics_family_diagnostic(capsys):
    code, out, _ = run(capsys, "asymptotics", "--kernel", FAMILY, "--theta", "0.875", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["pass_vartheta"]
    assert "equals -D" in doc["D_diagnostic"]


def test_oracle_check(capsys):
    code, out, err = run(capsys, "oracle-check", "--count", "10")
    assert code == 0
    assert err.strip() == "10/10 PASS"
    assert out.count("PASS") == 10


def test_oracle_check_negative_control(capsys):
    code, _, _ = run(capsys, "oracle-check", "--kernel", K1, "--perturb", "1e-3")
    assert code == 2


def test_oracle_check_size_limit(capsys):
    terms = [[1, k] for k in range(1, 21)]
    code, _, err = run(capsys, "oracle-check", "--kernel", json.dumps({"type": "finite", "terms": terms}))
    assert code == 1 and "at most 12" in err


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--kernel", K1, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["modes"][0]["rel_error"] < 1e-3


def test_probe(capsys):
    family = FAMILY.replace('"N": 50', '"N": 10000')
    code, out, _ = run(capsys, "probe", "--kernel", family, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["h_bounded"] is True
    assert doc["decay_violations"] == [] and doc["notes"] == []


def test_probe_short_truncation_is_flagged(capsys):
    code, out, _ = run(capsys, "probe", "--kernel", FAMILY, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert "raise N" in doc["notes"][0]


@pytest.mark.parametrize("argv", [
    ["spectrum"],
    ["spectrum", "--kernel", "{bad"],
    ["spectrum", "--kernel", K1, "--theta", "2"],
    ["spectrum", "--kernel", K1, "--modes", "0.5"],
    ["probe", "--kernel", K1, "--rays", "3.1"],
    ["nonsense"],
])
def test_config_errors_exit_one(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 1


def test_out_directory(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--kernel", K1, "--out", str(tmp_path))
    assert code == 0 and out == ""
    assert sorted(p.name for p in tmp_path.iterdir()) == ["simulate.json", "trace.csv"]


@pytest.mark.parametrize("argv", [
    ["spectrum", "--kernel", FAMILY, "--a-grid", "1:10:4", "--theta", "0.3"],
    ["oracle-check", "--count", "15", "--seed", "4"],
    ["asymptotics", "--kernel", FAMILY, "--theta", "0.3"],
    ["simulate", "--kernel", K_UNSTABLE],
    ["probe", "--kernel", K1],
    ["classify", "--kernel", K1, "--modes", "1,3"],
])
def test_byte_identical_reruns(tmp_path, capsys, argv):
    first, second = tmp_path / "a", tmp_path / "b"
    main(argv + ["--out", str(first)])
    main(argv + ["--out", str(second)])
    capsys.readouterr()
    names = sorted(p.name for p in first.iterdir())
    assert names and names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()
