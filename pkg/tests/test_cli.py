import json

import pytest
from hypothesis import given, settings, strategies as st

from bubbletree.cli import (
    Config,
    CorpusError,
    FamilyFileError,
    default_corpus_dir,
    dumps,
    format_file,
    main,
    parse,
    run,
    run_corpus,
)

XYZ2 = "ring x y z\nmatrix E 3 1\nx\ny\nz^2\ntask classify E\n"


def test_parse_simple():
    ff = parse(XYZ2)
    assert ff.variables == ["x", "y", "z"]
    assert ff.matrices["E"].rows == 3 and ff.matrices["E"].cols == 1
    assert [(t.verb, t.matrix) for t in ff.tasks] == [("classify", "E")]


def test_parse_polynomial_entry():
    ff = parse("ring x y z\nmatrix H 3 1\nx\ny^2+z^4\ny*z^2\n")
    E = ff.family("H")
    assert str(E.columns[0][1]) in ("y^2 + z^4", "z^4 + y^2")


def test_dimension_mismatch():
    with pytest.raises(FamilyFileError) as exc:
        parse("ring x y z\nmatrix E 2 2\nx")
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("ring x y z\nmatrix E 3 1\nx\ny + w\nz\n", 4, 5),
        ("ring x y z\ntask classify F\n", 2, 15),
        ("ring x y z\nmatrix E 3 1\nx\ny\nz\ntask explode E\n", 6, 6),
        ("matrix E 3 1\n", 1, 1),
        ("ring x y\n", 1, 1),
        ("ring x y z\nmatrix E 3 1\nx\ny\nz\ntask classify E seed=abc\n", 6, 17),
    ],
)
def test_diagnostics_locate_errors(text, line, column):
    with pytest.raises(FamilyFileError) as exc:
        parse(text)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_renamed_variables_map_by_position():
    a = run(parse(XYZ2), Config())
    b = run(parse(XYZ2.replace("ring x y z", "ring u v w").replace("z^2", "w^2").replace("x\ny", "u\nv")), Config())
    assert a["tasks"][0]["result"] == b["tasks"][0]["result"]


names = st.sampled_from(["x", "y", "z"])
entries = st.lists(
    st.tuples(st.integers(1, 5), names, st.integers(1, 4)), min_size=1, max_size=3
).map(lambda ts: " + ".join(f"{c}*{v}^{e}" for c, v, e in ts))


@settings(max_examples=30, deadline=None)
@given(st.lists(entries, min_size=3, max_size=3))
def test_print_parse_roundtrip(es):
    text = "ring x y z\nmatrix E 3 1\n" + "\n".join(es) + "\ntask multiplicity E seed=2\n"
    ff = parse(text)
    assert parse(format_file(ff)) == ff
    assert format_file(parse(format_file(ff))) == format_file(ff)


def test_report_is_deterministic():
    text = XYZ2 + "task kgeneric E\ntask normalize E\n"
    a = dumps(run(parse(text), Config(seed=3)))
    b = dumps(run(parse(text), Config(seed=3)))
    assert a == b
    rep = json.loads(a)
    assert rep["schema"] == "bubbletree-report/1"
    assert rep["tasks"][0]["result"]["verdict"] == "fertile"


def test_field_option():
    rep = run(parse(XYZ2), Config(field="fp:32003"))
    assert rep["tasks"][0]["result"]["verdict"] == "fertile"


def test_task_errors_embedded():
    rep = run(parse("ring x y z\nmatrix E 3 1\nx\ny\n0\ntask classify E\n"), Config())
    assert rep["tasks"][0]["status"] == "error"
    assert "InvalidFamily" in rep["tasks"][0]["error"]


def _write(tmp_path, text, name="f.fam"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_main_exit_codes(tmp_path, capsys):
    assert main(["run", _write(tmp_path, "ring x y z\nmatrix E 3 1\nx\ny\nz\ntask classify E\n")]) == 0
    assert "barren" in capsys.readouterr().out
    assert main(["run", _write(tmp_path, "ring x y z\nmatrix E 2 2\nx\n")]) == 1
    assert ":2:" in capsys.readouterr().err
    assert main(["classify", _write(tmp_path, "ring x y z\nmatrix E 3 1\nx\ny\n0\n")]) == 1


def test_main_consistency_error_exit(tmp_path, monkeypatch, capsys):
    from bubbletree import cli
    from bubbletree.pipeline import ConsistencyError

    def boom(*a, **k):
        raise ConsistencyError("forced")

    monkeypatch.setattr(cli, "classify", boom)
    assert main(["classify", _write(tmp_path, XYZ2)]) == 2


def test_main_verbs_and_json(tmp_path, capsys):
    path = _write(tmp_path, "ring x y z\nmatrix E 3 1\nx\ny\nz^4\n")
    assert main(["normalize", path, "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    r = out["tasks"][0]["result"]
    assert (r["final_verdict"], r["stage_b_steps"]) == ("fertile", 2)
    assert main(["multiplicity", path]) == 0
    assert "k=1" in capsys.readouterr().out
    assert main(["bubble", path, "--trace", "--json"]) == 0
    assert "seconds" in capsys.readouterr().out


def test_multiplicity_of_section_file():
    text = "ring x y z\nmatrix S 4 2\n0\nx\nx\ny\ny\nz\nz^3\n0\ntask multiplicity S\n"
    assert run(parse(text), Config())["tasks"][0]["result"]["k"] == 3


def test_corpus_passes():
    summary = run_corpus()
    assert summary.ok, summary.table()
    assert len(summary.checks) > 50


def test_corpus_parallel_matches():
    a = run_corpus(threads=1)
    b = run_corpus(threads=2)
    assert [(c.file, c.task, c.path, c.actual) for c in a.checks] == [(c.file, c.task, c.path, c.actual) for c in b.checks]


def test_corpus_tampered(tmp_path):
    src = default_corpus_dir()
    (tmp_path / "zn_ladder.fam").write_text((src / "zn_ladder.fam").read_text())
    exp = json.loads((src / "zn_ladder.expected.json").read_text())
    exp["tasks"][1]["expect"]["chern.c2"] = 2
    (tmp_path / "zn_ladder.expected.json").write_text(json.dumps(exp))
    summary = run_corpus(tmp_path)
    assert not summary.ok
    [bad] = summary.failures()
    assert (bad.file, bad.task, bad.path, bad.actual) == ("zn_ladder", 1, "chern.c2", 1)
    assert main(["corpus", str(tmp_path)]) == 1


def test_corpus_empty(tmp_path):
    with pytest.raises(CorpusError):
        run_corpus(tmp_path)
    assert main(["corpus", str(tmp_path)]) == 1
