import io
import json
import subprocess
import sys

import pytest

from rpilcheck.cli import main
from rpilcheck.db import parse_function_db
from rpilcheck.instructions import render_body

from support import corpus_text


@pytest.fixture
def corpus(tmp_path):
    def put(name, text=None):
        path = tmp_path / name
        path.write_text(corpus_text(name) if text is None else text)
        return str(path)
    return put


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_interpret_golden(corpus):
    code, out = run(["interpret", "--db", corpus("selfref.rpil"), "--program", corpus("selfref.prog")])
    assert code == 2
    lines = out.splitlines()
    assert len(lines) == 6 and lines[-1].endswith("v1:pinned_moved }")


def test_interpret_clean_single_line(corpus):
    code, out = run(["interpret", "--db", corpus("selfref.rpil"),
                     "--program", corpus("one.prog", "v1 = SelfRef::new()\n")])
    assert (code, out) == (0, "line 1: { }\n")


def test_interpret_undefined_variable(corpus, capsys):
    code, _ = run(["interpret", "--db", corpus("selfref.rpil"),
                   "--program", corpus("bad.prog", "v1 = SelfRef::new()\nv2 = borrow(v9)\n")])
    assert code == 1
    assert "line 2: dead or undefined variable" in capsys.readouterr().err


def test_interpret_json(corpus):
    code, out = run(["interpret", "--db", corpus("rio.rpil"), "--program", corpus("rio.prog"),
                     "--emit", "json"])
    assert code == 2
    assert json.loads(out)["violations"] == [["v9", "pinned_forgotten"]]


def test_synthesize_selfref(corpus):
    code, out = run(["synthesize", "--db", corpus("selfref_min.rpil"), "--max-len", "4"])
    assert code == 2
    assert out.splitlines()[:4] == [
        "let mut v1 = SelfRef::new();", "let mut v2 = borrow_mut(v1);",
        "let mut v3 = mylib::pin_new(v2);", "let mut v4 = deref_move(v2);"]
    assert "witness: v1" in out


def test_synthesize_defaults_only_clean(corpus):
    db = corpus("things.rpil", "#defaults on\nfn Thing::new() -> Thing\n")
    code, out = run(["synthesize", "--db", db, "--max-len", "3", "--strategy", "eager"])
    assert code == 0
    assert out.startswith("no violation up to length 3")


def test_synthesize_json_and_budget(corpus):
    code, out = run(["synthesize", "--db", corpus("selfref_min.rpil"), "--max-len", "4",
                     "--emit", "json", "--goal", "pinned_moved"])
    report = json.loads(out)
    assert code == 2 and report["witness_place"] == "v1"
    assert set(report) >= {"goal", "strategy", "max_len", "found", "stubs_explored",
                           "wall_time_ms", "per_length"}
    code, _ = run(["synthesize", "--db", corpus("selfref_min.rpil"), "--max-len", "6",
                   "--stub-budget", "5"])
    assert code == 3


def test_synthesize_all_solutions(corpus):
    code, out = run(["synthesize", "--db", corpus("selfref_min.rpil"), "--goal", "borrows:v2:v1",
                     "--max-len", "2", "--all-solutions", "--emit", "json"])
    assert code == 0
    assert json.loads(out)["solutions"] == [["v1 = SelfRef::new()", "v2 = borrow(v1)"],
                                            ["v1 = SelfRef::new()", "v2 = borrow_mut(v1)"]]


def test_synthesize_whitelist_and_no_defaults(corpus):
    code, out = run(["synthesize", "--db", corpus("selfref.rpil"), "--no-defaults",
                     "--functions", "SelfRef::new,mylib::pin_new", "--max-len", "3"])
    assert code == 0
    too_many = ",".join(f"f{i}" for i in range(11))
    code, _ = run(["synthesize", "--db", corpus("selfref.rpil"), "--functions", too_many])
    assert code == 1


def test_translate(corpus, tmp_path, capsys):
    out_path = tmp_path / "out.rpil"
    code, out = run(["translate", "--input", corpus("store_refs.mir"),
                     "--intrinsics", corpus("default.intrinsics"), "--out", str(out_path)])
    assert code == 0 and out == "store_refs: 1 variant(s)\n"
    db = parse_function_db(out_path.read_text())
    assert [render_body(v) for v in db["store_refs"].variants] == \
        ["BIND(_0[1][1], _1); BIND(_0[2][1], _2);"]


def test_translate_empty_and_failing(corpus, tmp_path, capsys):
    out_path = tmp_path / "out.rpil"
    code, _ = run(["translate", "--input", corpus("empty.mir", ""), "--out", str(out_path)])
    assert code == 0 and "warning" in capsys.readouterr().err
    assert len(parse_function_db(out_path.read_text())) == 4  # builtins only
    spin = corpus("spin.mir", "fn spin() -> () {\n  bb0: { goto bb0; }\n}\n")
    code, _ = run(["translate", "--input", spin, "--out", str(out_path)])
    assert code == 1 and "spin" in capsys.readouterr().err


def test_missing_file_is_input_error(capsys):
    code, _ = run(["interpret", "--db", "/nonexistent.rpil", "--program", "/nonexistent.prog"])
    assert code == 1


def test_module_entry_point(corpus):
    proc = subprocess.run([sys.executable, "-m", "rpilcheck", "interpret", "--db",
                           corpus("selfref.rpil"), "--program", corpus("selfref.prog")],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "line 6:" in proc.stdout
