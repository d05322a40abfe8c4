import json

import pytest

from arbor.cli import ConfigError, load_config, main
from arbor.reiter import monotone_tensor, tensor_to_json

EQUIV_X = "prefix=e;cycle=b,a"
EQUIV_Y = "prefix=;cycle=a,b"
OTHER_Y = "prefix=;cycle=a,b2"


def run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_no_command_prints_help(capsys):
    rc, out, _ = run(capsys, [])
    assert rc == 0
    assert "usage" in out


def test_tree_report(capsys):
    rc, out, _ = run(capsys, ["tree", "--radius", "3"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["counts_by_distance"] == [1, 2, 4, 4]
    assert doc["vertices"] == 11
    assert doc["edges"] == 10
    assert doc["version"] == "0.1.0"
    assert doc["config"] == "sl2z"
    assert "timings" not in doc


def test_tree_dot_and_out(tmp_path, capsys):
    dot = tmp_path / "ball.dot"
    report = tmp_path / "report.json"
    rc, out, _ = run(capsys, ["tree", "--radius", "2", "--dot", str(dot),
                              "--out", str(report)])
    assert rc == 0
    assert out == ""
    assert dot.read_text().startswith("graph bass_serre {")
    doc = json.loads(report.read_text())
    assert doc["counts_by_distance"] == [1, 2, 4]


def test_reports_byte_identical(capsys):
    _, first, _ = run(capsys, ["witness", "--config", "dihedral"])
    _, second, _ = run(capsys, ["witness", "--config", "dihedral"])
    assert first == second
    _, third, _ = run(capsys, ["check", "--what", "theorem-a"])
    _, fourth, _ = run(capsys, ["check", "--what", "theorem-a"])
    assert third == fourth


def test_timings_flag(capsys):
    rc, out, _ = run(capsys, ["tree", "--radius", "2", "--timings"])
    assert rc == 0
    assert "seconds" in json.loads(out)["timings"]


def test_config_from_file(tmp_path, capsys):
    cfg = {
        "model": {
            "h": {"cyclic": 2, "names": ["e", "s"]},
            "k": {"cyclic": 2, "names": ["e", "t"]},
            "c": {"cyclic": 1, "names": ["e"]},
            "embed_h": [0],
            "embed_k": [0],
        },
        "limits": {"tree_radius": 3},
    }
    path = tmp_path / "line.json"
    path.write_text(json.dumps(cfg))
    rc, out, _ = run(capsys, ["tree", "--config", str(path)])
    assert rc == 0
    assert json.loads(out)["counts_by_distance"] == [1, 2, 2, 2]


def test_config_errors(tmp_path, capsys):
    rc, _, err = run(capsys, ["tree", "--config", "nosuch"])
    assert rc == 2
    assert "unknown config" in err

    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    rc, _, err = run(capsys, ["tree", "--config", str(bad)])
    assert rc == 2
    assert "invalid JSON" in err

    with pytest.raises(ConfigError) as exc:
        load_config("nosuch")
    assert "nosuch" in str(exc.value)


def test_config_key_paths(tmp_path, capsys):
    base = {
        "model": {
            "h": {"cyclic": 2}, "k": {"cyclic": 2}, "c": {"cyclic": 1},
            "embed_h": [0], "embed_k": [0],
        },
    }
    broken = dict(base)
    broken["limits"] = {"bogus": 3}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(broken))
    rc, _, err = run(capsys, ["tree", "--config", str(path)])
    assert rc == 2
    assert "limits.bogus" in err

    broken = {"model": dict(base["model"])}
    broken["model"]["h"] = {"cyclic": 2, "mul_table": [[0]]}
    path.write_text(json.dumps(broken))
    rc, _, err = run(capsys, ["tree", "--config", str(path)])
    assert rc == 2
    assert "model.h" in err

    broken = {"model": dict(base["model"])}
    broken["model"]["embed_h"] = "nope"
    path.write_text(json.dumps(broken))
    rc, _, err = run(capsys, ["tree", "--config", str(path)])
    assert rc == 2
    assert "model.embed_h" in err


def test_vertex_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("ARBOR_VERTEX_CAP", "5")
    rc, _, err = run(capsys, ["tree", "--radius", "4"])
    assert rc == 2
    assert "cap" in err
    monkeypatch.setenv("ARBOR_VERTEX_CAP", "abc")
    rc, _, err = run(capsys, ["tree", "--radius", "2"])
    assert rc == 2
    assert "ARBOR_VERTEX_CAP" in err


def test_check_theorem_a(capsys):
    rc, out, _ = run(capsys, ["check", "--what", "theorem-a"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["ok"] is True
    assert len(doc["rows"]) == 8
    for row in doc["rows"]:
        assert row["certified"] is True
        assert row["sigma_length"] == 1
        assert row["order"] == 2

    rc, out, _ = run(capsys, ["check", "--what", "theorem-a",
                              "--max-len", "0"])
    assert rc == 1
    assert json.loads(out)["ok"] is False


def test_check_acylindrical(capsys):
    rc, out, _ = run(capsys, ["check", "--what", "acylindrical",
                              "--bound", "2"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["max_order"] == 2
    assert doc["ok"] is True
    rc, out, _ = run(capsys, ["check", "--what", "acylindrical",
                              "--bound", "1"])
    assert rc == 1
    assert json.loads(out)["ok"] is False


def test_check_stabilizers(capsys):
    rc, out, _ = run(capsys, ["check", "--what", "stabilizers",
                              "--codes", EQUIV_Y])
    assert rc == 0
    doc = json.loads(out)
    assert doc["rows"] == [
        {"code": EQUIV_Y, "order": 2, "elements": ["e", "z"]}]


def test_equiv_positive(capsys):
    rc, out, _ = run(capsys, ["equiv", "--x", EQUIV_X, "--y", EQUIV_Y])
    assert rc == 0
    doc = json.loads(out)
    assert doc["equivalent"] is True
    assert doc["conclusive"] is True
    assert doc["witness"]
    assert doc["shifts"] == [0, 0]


def test_equiv_negative(capsys):
    rc, out, _ = run(capsys, ["equiv", "--x", EQUIV_Y, "--y", OTHER_Y])
    assert rc == 1
    doc = json.loads(out)
    assert doc["equivalent"] is False
    assert doc["conclusive"] is True


def test_equiv_brute(capsys):
    rc, out, _ = run(capsys, ["equiv", "--x", EQUIV_X, "--y", EQUIV_Y,
                              "--brute", "--bound", "2"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["method"] == "brute"
    assert doc["equivalent"] is True


def test_equiv_bad_code(capsys):
    rc, _, err = run(capsys, ["equiv", "--x", "prefix=;cycle=b,a",
                              "--y", EQUIV_Y])
    assert rc == 2
    assert "letter" in err


def test_witness_report(capsys):
    rc, out, _ = run(capsys, ["witness", "--config", "dihedral"])
    assert rc == 0
    doc = json.loads(out)
    assert len(doc["points"]) == 2
    assert doc["target"] == [[0, 1]]
    assert doc["class_counts"][-1] == 1
    assert all(w["word"] for w in doc["witnesses"])

    rc, out, _ = run(capsys, ["witness", "--no-witnesses"])
    assert rc == 0
    assert "witnesses" not in json.loads(out)


def test_reiter_z_window(capsys):
    rc, out, _ = run(capsys, ["reiter", "--window", "z",
                              "--support-size", "3", "--target", "1",
                              "--grid-check", "--denominator", "6"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["optimum"] == "2/3"
    assert doc["ok"] is True
    assert doc["grid"]["matches_lp"] is True

    rc, out, _ = run(capsys, ["reiter", "--window", "z",
                              "--support-size", "3", "--target", "1/2"])
    assert rc == 1
    assert json.loads(out)["ok"] is False


def test_reiter_group_window(capsys):
    rc, out, _ = run(capsys, ["reiter", "--window", "group", "--side", "k"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["max_deviation"] == "0"
    assert len(doc["per_gen"]) == 5


def test_reiter_generators_flag(capsys):
    rc, out, _ = run(capsys, ["reiter", "--window", "z", "--support-size",
                              "4", "--generators", "2,-2"])
    assert rc == 0
    doc = json.loads(out)
    assert [g for g, _ in doc["per_gen"]] == ["2", "-2"]

    rc, out, _ = run(capsys, ["reiter", "--window", "group", "--side", "k",
                              "--generators", "b,b2"])
    assert rc == 0
    assert len(json.loads(out)["per_gen"]) == 2

    rc, _, err = run(capsys, ["reiter", "--window", "free",
                              "--generators", "a"])
    assert rc == 2
    assert "generators" in err


def test_cfw_builtin_tensor(capsys):
    rc, out, _ = run(capsys, ["cfw"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["thresholds"] == list(range(11))
    assert all(row["ok"] for row in doc["rows"])


def test_cfw_custom_tensor(tmp_path, capsys):
    path = tmp_path / "tensor.json"
    path.write_text(json.dumps(tensor_to_json(monotone_tensor(3, 4))))
    rc, out, _ = run(capsys, ["cfw", "--tensor", str(path), "--m-max", "3"])
    assert rc == 0
    assert json.loads(out)["thresholds"] == [0, 1, 2]

    doc = tensor_to_json(monotone_tensor(2, 2))
    doc["values"][0][0][0][0] = "5/2"
    path.write_text(json.dumps(doc))
    rc, _, err = run(capsys, ["cfw", "--tensor", str(path)])
    assert rc == 2
    assert "tensor" in err
