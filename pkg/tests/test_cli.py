import json

import pytest

from blockbench.cli import main


def _csv(tmp_path, name, rows, header="id,x1"):
    path = tmp_path / name
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return str(path)


@pytest.fixture
def binary_csv(tmp_path):
    return _csv(tmp_path, "binary.csv", [f"{i + 1},{v}" for i, v in enumerate([1, 1, 1, 0, 0, 0])])


def _json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_block_threshold_binary(binary_csv, capsys):
    out = _json(capsys, ["block", binary_csv, "--method", "threshold", "--format", "json"])
    assert out["schema"] == "blockbench/1"
    assert out["blocks"] == [[1, 2, 3], [4, 5, 6]]
    assert out["objective"]["value"] == 0


def test_block_two_covariates(tmp_path, capsys):
    rows = ["1,1,36", "2,1,38", "3,1,40", "4,0,36", "5,0,38", "6,0,40"]
    path = _csv(tmp_path, "two.csv", rows, header="id,x1,x2")
    assert main(["block", path, "--method", "fixed"]) == 0
    text = capsys.readouterr().out
    assert "{{1,4}, {2,5}, {3,6}}" in text and "0.5" in text and "exhaustive" in text


def test_block_exit_codes(tmp_path, capsys):
    five = _csv(tmp_path, "five.csv", [f"{i},{i}" for i in range(1, 6)])
    assert main(["block", five, "--method", "fixed"]) == 2
    assert "fixed-sized blocking infeasible: 5 not a multiple of 2" in capsys.readouterr().err

    blank = _csv(tmp_path, "blank.csv", ["1,0.5", "2,"])
    assert main(["block", blank]) == 1
    assert main(["block", str(tmp_path / "missing.csv")]) == 1
    assert main(["block", _csv(tmp_path, "hdr.csv", ["1,2"], header="name,x1")]) == 1

    twelve = _csv(tmp_path, "twelve.csv", [f"{i},{i * 0.37 % 1:.3f}" for i in range(1, 13)])
    assert main(["block", twelve, "--solver", "exhaustive"]) == 3
    assert main(["block", twelve]) == 0


def test_block_output_feeds_assign(binary_csv, tmp_path, capsys):
    out = _json(capsys, ["block", binary_csv, "--format", "json"])
    path = tmp_path / "b.json"
    path.write_text(json.dumps(out))
    first = _json(capsys, ["assign", str(path), "--seed", "4"])
    again = _json(capsys, ["assign", str(path), "--seed", "4"])
    assert first == again
    assert all(b["treated_count"] in (1, 2) for b in first["blocks"])
    assert len(first["treated"]) == 6


def test_assign_pairs_and_bad_input(tmp_path, capsys):
    pairs = tmp_path / "pairs.json"
    pairs.write_text(json.dumps({"schema": "blockbench/1", "n": 4, "blocks": [[1, 3], [2, 4]]}))
    out = _json(capsys, ["assign", str(pairs), "--seed", "1"])
    assert [b["treated_count"] for b in out["blocks"]] == [1, 1]

    single = tmp_path / "single.json"
    single.write_text(json.dumps({"schema": "blockbench/1", "n": 3, "blocks": [[1], [2, 3]]}))
    assert main(["assign", str(single)]) == 2

    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"schema": "other", "blocks": []}))
    assert main(["assign", str(broken)]) == 1


def test_variance_presets(capsys):
    out = _json(capsys, ["variance", "--preset", "table1", "--format", "json"])
    assert len(out["rows"]) == 8
    assert sorted(round(r["variance"], 3) for r in out["rows"]) == sorted(
        [1.333, 0.889, 0.750, 1.250, 0.889, 1.185, 0.889, 1.067])

    out = _json(capsys, ["variance", "--preset", "closed-forms", "--n", "6", "--sigma2", "1", "--delta2", "2", "--format", "json"])
    assert [round(out["designs"][m]["closed_form"], 5) for m in ("C", "F2", "T2")] == [6.0, 4.66667, 4.40625]

    out = _json(capsys, ["variance", "--preset", "appendixC", "--delta2", "1", "--format", "json"])
    assert out["optimum"] == [[1, 4], [2, 5], [3, 6]]
    assert out["difference"] == pytest.approx(2 / 15)
    assert len(out["pairings"]) == 15

    out = _json(capsys, ["variance", "--preset", "decomposition", "--n", "8", "--format", "json"])
    assert all(d["identity_holds"] for d in out["designs"].values())

    assert main(["variance", "--preset", "closed-forms", "--n", "5"]) == 2
    assert main(["variance", "--preset", "table1", "--sigma2", "-1"]) == 2


def test_simulate(capsys, monkeypatch):
    monkeypatch.setenv("BLOCKBENCH_THREADS", "1")
    assert main(["simulate", "--samples", "1", "--reps", "1"]) == 0
    text = capsys.readouterr().out
    assert "n/a" in text and "unavailable" in text

    out = _json(capsys, ["simulate", "--model", "noise", "--n", "8", "--samples", "20", "--reps", "2", "--format", "json"])
    assert set(out["ratios_to_threshold"]) == {"complete", "fixed"}

    assert main(["simulate", "--n", "7"]) == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
