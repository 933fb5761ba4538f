import json
import os

import pytest

from foalt.cli import main

from conftest import corpus_path

TA_LE3 = """(timed (events a) (clocks x1)
  (state s0 :initial)
  (state s1 :final)
  (edge s0 a s1 :guard (<= x1 3)))"""

TA_LE5 = TA_LE3.replace("(<= x1 3)", "(<= x1 5)")


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_empty_verdict_exit_codes(capsys):
    code, out, _ = run(["empty", corpus_path("example1.foaa")], capsys)
    assert code == 0
    assert out.splitlines()[0] == "Empty"
    code, out, _ = run(["empty", corpus_path("nonempty.foaa")], capsys)
    assert code == 1
    assert out.splitlines()[0].startswith("NonEmpty ")


def test_empty_json_payload(capsys):
    code, out, _ = run(["empty", corpus_path("nonempty.foaa"), "--json"], capsys)
    assert code == 1
    payload = json.loads(out)
    assert payload["verdict"] == "NonEmpty"
    assert payload["witness"]
    assert payload["Nodes Expanded"] >= 1
    assert payload["Nodes Visited"] >= 1
    assert "time_seconds" in payload


def test_metrics_printed_in_text_mode(capsys):
    _, out, _ = run(["empty", corpus_path("example1.foaa")], capsys)
    assert any(line.startswith("Nodes Expanded: ") for line in out.splitlines())
    assert any(line.startswith("Nodes Visited: ") for line in out.splitlines())


def test_missing_file_is_usage_error(capsys):
    code, _, err = run(["empty", "no-such-file.foaa"], capsys)
    assert code == 3
    assert "error:" in err


def test_bad_subcommand_is_usage_error(capsys):
    assert run(["frobnicate"], capsys)[0] == 3


def test_member_exit_codes(capsys):
    f = corpus_path("nonempty.foaa")
    assert run(["member", f, "--word", "a{x=1}"], capsys)[0] == 0
    assert run(["member", f, "--word", "a{x=-1}"], capsys)[0] == 1


def test_validate(capsys):
    assert run(["validate", corpus_path("example1.foaa")], capsys)[0] == 0


def test_complement_round_trip(tmp_path, capsys):
    out_file = tmp_path / "comp.foaa"
    code, _, _ = run(["complement", corpus_path("eqpair.foaa"), "-o", str(out_file)], capsys)
    assert code == 0
    # complement of a non-empty automaton over eqpair's language is non-empty
    # (the empty word is rejected by eqpair, hence accepted here)
    code, _, _ = run(["member", str(out_file), "--word", ""], capsys)
    assert code == 0


def test_dump_unfolding(tmp_path, capsys):
    dump = tmp_path / "unfolding.txt"
    code, _, _ = run(
        ["empty", corpus_path("example1.foaa"), "--dump-unfolding", str(dump)], capsys
    )
    assert code == 0
    text = dump.read_text()
    assert text.startswith("ε | ")
    assert "covered-by:" in text


def test_include_timed_pair(tmp_path, capsys):
    t1 = tmp_path / "t1.fta"
    t2 = tmp_path / "t2.fta"
    t1.write_text(TA_LE3)
    t2.write_text(TA_LE5)
    assert run(["include", str(t1), "--rhs", str(t2)], capsys)[0] == 0
    code, out, _ = run(["include", str(t2), "--rhs", str(t1), "--json"], capsys)
    assert code == 1
    assert json.loads(out)["verdict"] == "Violated"


def test_translate_timed(tmp_path, capsys):
    src = tmp_path / "t.fta"
    src.write_text(TA_LE3)
    code, out, _ = run(["translate", "--from", "timed", str(src)], capsys)
    assert code == 0
    assert "(theory LRA)" in out and "(rule q_s0 " in out


def test_member_accepts_timed_word_syntax(tmp_path, capsys):
    src = tmp_path / "t.fta"
    src.write_text(TA_LE3)
    assert run(["member", str(src), "--word", "a@2"], capsys)[0] == 0
    assert run(["member", str(src), "--word", "a@4"], capsys)[0] == 1


def test_gen_writes_parseable_corpus(tmp_path, capsys):
    out_dir = tmp_path / "generated"
    code, _, _ = run(["gen", "--kind", "eq", "--count", "4", "--seed", "1", "-o", str(out_dir)], capsys)
    assert code == 0
    files = sorted(os.listdir(out_dir))
    assert len(files) == 4
    for f in files:
        assert run(["validate", str(out_dir / f)], capsys)[0] == 0


def test_gen_is_deterministic(tmp_path, capsys):
    d1, d2 = tmp_path / "g1", tmp_path / "g2"
    run(["gen", "--count", "3", "--seed", "9", "-o", str(d1)], capsys)
    run(["gen", "--count", "3", "--seed", "9", "-o", str(d2)], capsys)
    for f in os.listdir(d1):
        assert (d1 / f).read_text() == (d2 / f).read_text()
