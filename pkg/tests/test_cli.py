import csv
import json

import pytest

from tmcmobf.cli import ARTIFACTS, main, parse_duration, parse_key, read_constants
from tmcmobf.core import ConstantSet
from tmcmobf.decoy import assign_decoys

PINNED = "15,12,13,9;19,22,21,23"


@pytest.fixture
def consts(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("# example pair\n13\n23\n")
    return f


def gen(tmp_path, consts, name="d", *extra):
    out = tmp_path / name
    argv = ["gen", "--constants", str(consts), "--p", "4", "--seed", "1", "--out", str(out), *extra]
    return main(argv), out


def snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_read_constants(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("  -7\n\n# skip\n+12  # trailing\n")
    assert read_constants(f) == [-7, 12]
    f.write_text("1.5\n")
    with pytest.raises(Exception):
        read_constants(f)


def test_parse_helpers():
    assert parse_duration("1s") == 1 and parse_duration("10m") == 600 and parse_duration("250ms") == 0.25
    plan = assign_decoys(ConstantSet((13, 23), 8), 4)
    assert parse_key("0x8", plan).to_int() == parse_key("8", plan).to_int() == parse_key("0b1000", plan).to_int()


def test_gen_artifacts_and_determinism(tmp_path, consts):
    code, a = gen(tmp_path, consts, "a", "--slots", PINNED)
    assert code == 0 and sorted(p.name for p in a.iterdir()) == sorted(ARTIFACTS)
    code, b = gen(tmp_path, consts, "b", "--slots", PINNED)
    assert snapshot(a) == snapshot(b)
    st = json.loads((a / "stats.json").read_text())
    assert st["p"] == 4 and st["gates"]["key_count"] == 4
    assert json.loads((a / "tables.json").read_text())["encoder"] is None


def test_seed_from_environment(tmp_path, consts, monkeypatch):
    _, a = gen(tmp_path, consts, "a")
    monkeypatch.setenv("TMCM_SEED", "1")
    out = tmp_path / "env"
    assert main(["gen", "--constants", str(consts), "--p", "4", "--out", str(out)]) == 0
    assert snapshot(a) == snapshot(out)
    monkeypatch.delenv("TMCM_SEED")
    assert main(["gen", "--constants", str(consts), "--p", "4", "--out", str(tmp_path / "x")]) == 1


def test_secret_hygiene(tmp_path, consts):
    _, d = gen(tmp_path, consts, "d", "--slots", PINNED)
    for name in ("design.v", "netlist.bench", "stats.json", "tables.json"):
        text = (d / name).read_text()
        assert "1011" not in text and "SECRET" not in text and "target" not in text.lower()
    assert "SECRET" in (d / "plan.json").read_text()
    assert (d / "testbench.v").read_text().startswith("// SECRET")


def test_sa_tables(tmp_path, consts):
    code, d = gen(tmp_path, consts, "sa", "--arch", "tmcm-sa", "--slots", PINNED)
    assert code == 0
    assert json.loads((d / "tables.json").read_text())["encoder"]["g_width"] == 3


def test_sim_exit_codes(tmp_path, consts, capsys):
    _, d = gen(tmp_path, consts, "d", "--slots", PINNED)
    assert main(["sim", str(d)]) == 0
    capsys.readouterr()
    assert main(["sim", str(d), "--key", "0x8"]) == 2
    assert "19" in capsys.readouterr().out
    assert main(["sim", str(d), "--key", "zz"]) == 1
    assert main(["sim", str(tmp_path / "nope")]) == 1


def test_usage_errors(tmp_path, consts):
    assert main(["gen", "--constants", str(consts), "--p", "40", "--seed", "0",
                 "--out", str(tmp_path / "big")]) == 1
    assert not (tmp_path / "big").exists()
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmcm-")]
    with pytest.raises(SystemExit) as e:
        main(["gen", "--bogus"])
    assert e.value.code == 1


def test_attack_recovers_targets(tmp_path, consts):
    _, d = gen(tmp_path, consts, "d", "--slots", PINNED)
    assert main(["attack", str(d)]) == 0
    res = json.loads((d / "attack.json").read_text())
    assert res["status"] == "KeyFound" and res["verified"] and res["recovered_constants"] == [13, 23]
    lines = (d / "attack_log.jsonl").read_text().splitlines()
    assert len(lines) == res["dip_count"]


def test_attack_rand_lock(tmp_path, consts):
    _, d = gen(tmp_path, consts, "d")
    assert main(["attack", str(d), "--lock", "rand", "--p", "8", "--seed", "2",
                 "--out", str(tmp_path / "r")]) == 0
    res = json.loads((tmp_path / "r" / "attack.json").read_text())
    assert res["status"] == "KeyFound" and res["verified"]


def test_attack_timeout_exit(tmp_path, consts):
    out = tmp_path / "wide"
    assert main(["gen", "--constants", str(consts), "--p", "4", "--ibw", "24", "--seed", "0",
                 "--out", str(out)]) == 0
    assert main(["attack", str(out), "--time-limit", "0s"]) == 3
    assert json.loads((out / "attack.json").read_text())["status"] == "Timeout"


def test_analyze_outputs(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("\n".join(map(str, (13, 23, -9, 40))) + "\n")
    d = tmp_path / "d"
    assert main(["gen", "--constants", str(f), "--p", "8", "--seed", "3", "--out", str(d)]) == 0
    assert main(["analyze", str(d), "--wrong-keys", "100", "--seed", "5"]) == 0
    rows = list(csv.DictReader((d / "response.csv").open()))
    assert len({r["key_id"] for r in rows}) == 101
    m = json.loads((d / "metrics.json").read_text())
    assert isinstance(m, dict) and m
    assert main(["analyze", str(d), "--wrong-keys", "256"]) == 1
