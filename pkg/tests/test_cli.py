from __future__ import annotations

import csv
import json

import pytest

from densecode.cli import main, theta_json
from densecode.codec import encode
from densecode.programs import DEFAULT_ADVERSARY


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_roundtrip_empty_sample_set(tmp_path):
    out = tmp_path / "rt.csv"
    assert main(["roundtrip", "--samples", "0", "--out", str(out)]) == 0
    assert rows_of(out) == [["sample", "f", "decoded", "equal"]]


def test_roundtrip_default_thousand_samples(tmp_path):
    out = tmp_path / "rt.csv"
    assert main(["roundtrip", "--out", str(out)]) == 0
    rows = rows_of(out)[1:]
    assert len(rows) == 1000 and all(r[3] == "true" for r in rows)


def test_roundtrip_corruption_hook_fails(tmp_path):
    out = tmp_path / "rt.csv"
    assert main(["roundtrip", "--samples", "5", "--inject-corruption", "--out", str(out)]) == 1
    failing = [r for r in rows_of(out)[1:] if r[3] == "false"]
    assert [r[0] for r in failing] == ["0"]


def test_roundtrip_desk_schedule(tmp_path):
    sched = tmp_path / "s.json"
    rows = [{"n": 0, "b": 1}] * 4 + [{"n": 1, "b": 2}] * 64
    sched.write_text(json.dumps(rows))
    assert main(["roundtrip", "--schedule", str(sched), "--samples", "50", "--out", str(tmp_path / "o.csv")]) == 0


def test_perturb_empty_s_gives_zero_columns(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["perturb", "--samples", "3", "--density", "0", "--out", str(out)]) == 0
    for r in rows_of(out)[1:]:
        assert r[4] == "0/1" and r[5] == "0/1" and r[6] == "0" and r[8] == "true"


def test_perturb_is_deterministic_and_exact(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["perturb", "--seed", "11", "--samples", "20", "--out", str(a)]) == 0
    assert main(["perturb", "--seed", "11", "--samples", "20", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert all("/" in r[4] and "/" in r[5] for r in rows_of(a)[1:])


def test_decode_prints_the_word(tmp_path, capsys):
    path = tmp_path / "theta.json"
    path.write_text(json.dumps(theta_json(encode((2, 0, 1, 3)))))
    assert main(["decode", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "2 0 1 3"


def test_decode_bad_file_exit_code(tmp_path):
    path = tmp_path / "theta.json"
    path.write_text("{}")
    assert main(["decode", str(path)]) != 0


def test_construct_one_stage_empty_adversary(tmp_path):
    adv = tmp_path / "adv.json"
    adv.write_text("[]")
    out = tmp_path / "trace.jsonl"
    assert main(["construct", "--stages", "1", "--adversary", str(adv), "--out", str(out)]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["step"] for r in records] == ["start", "2", "3"]
    report = json.loads(out.with_suffix(".report.json").read_text())
    assert report["breaches"] == 0 and report["exits"] == 0


def test_construct_is_deterministic(tmp_path):
    adv = tmp_path / "adv.json"
    adv.write_text(json.dumps(DEFAULT_ADVERSARY))
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["construct", "--stages", "30", "--adversary", str(adv), "--out", str(a)]) == 0
    assert main(["construct", "--stages", "30", "--adversary", str(adv), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_construct_with_pi_file(tmp_path):
    pi = tmp_path / "pi.json"
    pi.write_text(json.dumps(["", "1", "0", "00", "01"]))
    assert main(["construct", "--stages", "5", "--pi", str(pi), "--out", str(tmp_path / "t.jsonl")]) == 0
    pi.write_text(json.dumps(["", "1"]))
    assert main(["construct", "--stages", "5", "--pi", str(pi)]) == 2


def test_layout_rows(tmp_path):
    out = tmp_path / "l.csv"
    assert main(["layout", "--rows", "3", "--out", str(out)]) == 0
    rows = rows_of(out)
    assert rows[0] == ["row", "n", "s", "b", "r", "l_minus", "l"]
    # row 0: n = 0, b = 1, r = 2, L_0 = [2, 6)
    assert rows[1] == ["0", "0", "0", "1", "2", "2", "6"]


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
