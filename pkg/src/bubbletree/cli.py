"""Family files, the command-line driver and the bundled reproducibility corpus.

A family file is line oriented::

    ring x y z
    matrix E 3 1
    x
    y
    z^2
    task classify E seed=3

``matrix NAME ROWS COLS`` is followed by ROWS*COLS polynomial lines in row-major
order.  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .blowup import stripping_assignment, zero_assignment
from .exactring import QQ, ParseError, Poly, PolyRing, field_from_spec
from .family import (
    FamilyPresentation,
    InvalidFamily,
    central_restriction,
    generic_multiplicity,
    germ_ring,
    multiplicity,
)
from .pipeline import (
    ConsistencyError,
    StepLimitExceeded,
    bubble_report,
    classify,
    normalize_to_fertile,
)

SCHEMA = "bubbletree-report/1"
VERBS = ("classify", "multiplicity", "bubble", "normalize", "kgeneric")
TASK_OPTIONS = {
    "seed": int,
    "samples": int,
    "max_steps": int,
    "degree_bound": int,
    "assignment": str,
}

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONSISTENCY = 2


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class FamilyFileError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass
class MatrixDecl:
    name: str
    rows: int
    cols: int
    entries: List[str]
    line: int = 0


@dataclass
class Task:
    verb: str
    matrix: str
    options: Dict[str, str] = field(default_factory=dict)
    line: int = 0


@dataclass
class FamilyFile:
    variables: List[str]
    matrices: Dict[str, MatrixDecl]
    tasks: List[Task]

    def ring(self, fld=None) -> PolyRing:
        return PolyRing(tuple(self.variables), field=fld or QQ)

    def family(self, name: str, fld=None) -> FamilyPresentation:
        """The named matrix as a family over the germ ring; variables map by position."""
        decl = self.matrices[name]
        src = self.ring(fld)
        target = germ_ring(fld or QQ)
        polys = [_rename(src.parse(e), target) for e in decl.entries]
        rows = [polys[i * decl.cols:(i + 1) * decl.cols] for i in range(decl.rows)]
        return FamilyPresentation.from_rows(target, rows, label=name)

    def __eq__(self, other):
        return (
            isinstance(other, FamilyFile)
            and self.variables == other.variables
            and [(m.name, m.rows, m.cols, m.entries) for m in self.matrices.values()]
            == [(m.name, m.rows, m.cols, m.entries) for m in other.matrices.values()]
            and [(t.verb, t.matrix, t.options) for t in self.tasks]
            == [(t.verb, t.matrix, t.options) for t in other.tasks]
        )


def _rename(p: Poly, target: PolyRing) -> Poly:
    return Poly(target, {e: target.field(c) for e, c in p.terms.items()})


def _words(line: str):
    """Split on whitespace, remembering 1-based start columns."""
    out = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _int_word(word, lineno, what) -> int:
    text, col = word
    try:
        value = int(text)
    except ValueError:
        raise FamilyFileError(f"{what} must be an integer, got {text!r}", lineno, col) from None
    if value <= 0:
        raise FamilyFileError(f"{what} must be positive", lineno, col)
    return value


def parse(text: str) -> FamilyFile:
    lines = text.splitlines()
    variables: Optional[List[str]] = None
    ring: Optional[PolyRing] = None
    matrices: Dict[str, MatrixDecl] = {}
    tasks: List[Task] = []
    i = 0
    while i < len(lines):
        lineno = i + 1
        raw = _strip_comment(lines[i])
        i += 1
        words = _words(raw)
        if not words:
            continue
        head, col = words[0]
        if head == "ring":
            if variables is not None:
                raise FamilyFileError("ring declared twice", lineno, col)
            variables = [w for w, _ in words[1:]]
            if len(variables) != 3:
                raise FamilyFileError("a family ring has exactly three variables", lineno, col)
            for name, c in words[1:]:
                if not name.isidentifier():
                    raise FamilyFileError(f"bad variable name {name!r}", lineno, c)
            if len(set(variables)) != 3:
                raise FamilyFileError("repeated variable name", lineno, col)
            ring = PolyRing(tuple(variables))
        elif head == "matrix":
            if ring is None:
                raise FamilyFileError("matrix before ring declaration", lineno, col)
            if len(words) != 4:
                raise FamilyFileError("expected: matrix NAME ROWS COLS", lineno, col)
            name, ncol = words[1]
            if not name.isidentifier():
                raise FamilyFileError(f"bad matrix name {name!r}", lineno, ncol)
            if name in matrices:
                raise FamilyFileError(f"matrix {name} declared twice", lineno, ncol)
            r = _int_word(words[2], lineno, "row count")
            c = _int_word(words[3], lineno, "column count")
            entries = []
            while len(entries) < r * c:
                if i >= len(lines):
                    raise FamilyFileError(
                        f"matrix {name} is {r}x{c} but has {len(entries)} entries", lineno, ncol
                    )
                body = _strip_comment(lines[i])
                i += 1
                if not body.strip():
                    continue
                head2 = body.split()[0]
                if head2 in ("ring", "matrix", "task"):
                    raise FamilyFileError(
                        f"matrix {name} is {r}x{c} but has {len(entries)} entries", i, 1
                    )
                offset = len(body) - len(body.lstrip())
                try:
                    ring.parse(body.strip())
                except ParseError as exc:
                    pos = (exc.pos or 0) + offset + 1
                    raise FamilyFileError(exc.message, i, pos) from None
                entries.append(body.strip())
            matrices[name] = MatrixDecl(name, r, c, entries, lineno)
        elif head == "task":
            if len(words) < 3:
                raise FamilyFileError("expected: task VERB MATRIX [key=value ...]", lineno, col)
            verb, vcol = words[1]
            if verb not in VERBS:
                raise FamilyFileError(f"unknown verb {verb!r}", lineno, vcol)
            name, ncol = words[2]
            if name not in matrices:
                raise FamilyFileError(f"undeclared matrix {name!r}", lineno, ncol)
            options = {}
            for text_, c in words[3:]:
                key, eq, value = text_.partition("=")
                if not eq or not value:
                    raise FamilyFileError(f"expected key=value, got {text_!r}", lineno, c)
                if key not in TASK_OPTIONS:
                    raise FamilyFileError(f"unknown option {key!r}", lineno, c)
                try:
                    TASK_OPTIONS[key](value)
                except ValueError:
                    raise FamilyFileError(f"bad value for {key}: {value!r}", lineno, c) from None
                options[key] = value
            tasks.append(Task(verb, name, options, lineno))
        else:
            raise FamilyFileError(f"unexpected {head!r}", lineno, col)
    if variables is None:
        raise FamilyFileError("missing ring declaration", max(len(lines), 1), 1)
    return FamilyFile(variables, matrices, tasks)


def format_file(ff: FamilyFile) -> str:
    """Canonical text; ``parse(format_file(f)) == f``."""
    out = ["ring " + " ".join(ff.variables)]
    for m in ff.matrices.values():
        out.append(f"matrix {m.name} {m.rows} {m.cols}")
        out.extend(m.entries)
    for t in ff.tasks:
        opts = "".join(f" {k}={v}" for k, v in t.options.items())
        out.append(f"task {t.verb} {t.matrix}{opts}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Running tasks
# ---------------------------------------------------------------------------


@dataclass
class Config:
    seed: int = 0
    max_steps: Optional[int] = None
    degree_bound: int = 3
    field: str = "q"
    trace: bool = False
    samples: int = 5


def _task_settings(task: Task, cfg: Config) -> dict:
    s = {"seed": cfg.seed, "samples": cfg.samples, "max_steps": cfg.max_steps, "degree_bound": cfg.degree_bound, "assignment": "stripping"}
    for k, v in task.options.items():
        s[k] = TASK_OPTIONS[k](v)
    if s["assignment"] not in ("stripping", "zero"):
        raise ValueError(f"unknown assignment {s['assignment']!r}")
    return s


def run_task(E: FamilyPresentation, verb: str, s: dict, trace: bool) -> dict:
    if verb == "multiplicity":
        R = central_restriction(E)
        return {"k": multiplicity(E), "central_torsion_free": R.torsion_free}
    if verb == "kgeneric":
        g = generic_multiplicity(E, samples=s["samples"], seed=s["seed"])
        out = {"k_generic": g.k_generic, "samples": len(g.samples), "values": [v for _, v in g.samples]}
        if trace:
            out["planes"] = [m for m, _ in g.samples]
        return out
    assignment = zero_assignment(E) if s["assignment"] == "zero" else stripping_assignment(E)
    if verb == "normalize":
        tr = normalize_to_fertile(E, max_steps=s["max_steps"], seed=s["seed"], degree_bound=s["degree_bound"])
        out = tr.as_dict()
        if not trace:
            out.pop("entries")
        return out
    rep = classify(E, seed=s["seed"], samples=s["samples"], assignment=assignment, max_steps=s["max_steps"])
    if verb == "classify":
        out = rep.as_dict()
        if trace:
            out["visited_deltas"] = rep.semistable.deltas()
        return out
    b = bubble_report(E, rep)
    out = {"classification": {"verdict": rep.verdict, "k": rep.k}}
    out.update(b.as_dict())
    return out


def run(ff: FamilyFile, cfg: Config, tasks: Optional[Sequence[Task]] = None) -> dict:
    """Execute tasks in order.  ConsistencyError propagates; other failures are
    recorded in the task entry."""
    fld = field_from_spec(cfg.field)
    results = []
    for task in ff.tasks if tasks is None else tasks:
        entry = {"verb": task.verb, "matrix": task.matrix}
        t0 = time.perf_counter()
        try:
            s = _task_settings(task, cfg)
            E = ff.family(task.matrix, fld)
            entry["result"] = run_task(E, task.verb, s, cfg.trace)
            entry["status"] = "ok"
        except ConsistencyError:
            raise
        except (InvalidFamily, StepLimitExceeded, ValueError) as exc:
            entry["status"] = "error"
            entry["error"] = f"{type(exc).__name__}: {exc}"
        if cfg.trace:
            entry["seconds"] = round(time.perf_counter() - t0, 3)
        results.append(entry)
    return {
        "schema": SCHEMA,
        "engine_version": __version__,
        "seed": cfg.seed,
        "field": cfg.field,
        "tasks": results,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _text_report(report: dict) -> str:
    out = []
    for t in report["tasks"]:
        head = f"{t['verb']} {t['matrix']}:"
        if t["status"] != "ok":
            out.append(f"{head} error: {t['error']}")
            continue
        r = t["result"]
        if t["verb"] == "classify":
            ch = r["chern"]
            out.append(
                f"{head} {r['verdict']}  k={r['k']} k_g={r['k_generic']}  "
                f"c1={ch['c1']} c2={ch['c2']} delta={ch['delta']}  {r['stability']}  "
                f"P1 type {tuple(r['p1_splitting']['types'])}"
            )
        elif t["verb"] == "multiplicity":
            out.append(f"{head} k={r['k']}")
        elif t["verb"] == "kgeneric":
            out.append(f"{head} k_g={r['k_generic']} over {r['samples']} planes")
        elif t["verb"] == "normalize":
            out.append(
                f"{head} {r['final_verdict']} after {r['stage_a_steps']} ideal_factor and "
                f"{r['stage_b_steps']} trivial_factor steps; final {r['final_family']}"
            )
        else:
            ch = r["chern"]
            pts = ", ".join(f"{p['point']} charge {p['charge']}" for p in r["singular_points"]) or "none"
            out.append(
                f"{head} c2={ch['c2']} locally_free={r['locally_free']} height {r['height']}  "
                f"singular: {pts}  smooth charge {r['smooth_charge']}  h0={r['h0']}"
            )
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


class CorpusError(RuntimeError):
    pass


@dataclass
class Check:
    file: str
    task: int
    path: str
    expected: object
    actual: object

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


@dataclass
class CorpusSummary:
    checks: List[Check]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.ok]

    def table(self) -> str:
        rows = [f"{'file':<18} {'task':>4}  {'field':<44} {'result'}"]
        for c in self.checks:
            mark = "pass" if c.ok else f"FAIL expected {c.expected!r} got {c.actual!r}"
            rows.append(f"{c.file:<18} {c.task:>4}  {c.path:<44} {mark}")
        n = len(self.checks)
        rows.append(f"{n - len(self.failures())}/{n} checks passed")
        return "\n".join(rows) + "\n"


def default_corpus_dir() -> Path:
    return Path(str(resources.files("bubbletree") / "corpus"))


def _lookup(obj, path: str):
    for part in path.split("."):
        if isinstance(obj, list):
            obj = obj[int(part)]
        elif isinstance(obj, dict) and part in obj:
            obj = obj[part]
        else:
            return "<missing>"
    return obj


def _corpus_file(path: str, seed: int):
    p = Path(path)
    expected = json.loads(p.with_suffix(".expected.json").read_text())
    report = run(parse(p.read_text()), Config(seed=seed))
    checks = []
    for item in expected["tasks"]:
        idx = item["index"]
        entry = report["tasks"][idx]
        if entry["status"] != "ok":
            checks.append(Check(p.stem, idx, "status", "ok", entry.get("error")))
            continue
        for key, value in item["expect"].items():
            checks.append(Check(p.stem, idx, key, value, _lookup(entry["result"], key)))
    return checks


def run_corpus(directory: Optional[Path] = None, threads: Optional[int] = None, seed: int = 0) -> CorpusSummary:
    d = Path(directory) if directory is not None else default_corpus_dir()
    files = sorted(str(f) for f in d.glob("*.fam"))
    if not files:
        raise CorpusError(f"no corpus files in {d}")
    missing = [f for f in files if not Path(f).with_suffix(".expected.json").exists()]
    if missing:
        raise CorpusError(f"missing expectations for {', '.join(Path(f).name for f in missing)}")
    if threads is None:
        threads = int(os.environ.get("BUBBLETREE_THREADS", "1") or 1)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_corpus_file, files, [seed] * len(files)))
    else:
        parts = [_corpus_file(f, seed) for f in files]
    return CorpusSummary([c for part in parts for c in part])


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bubbletree", description="Bubble trees of rank-two families over a 3-fold germ.")
    ap.add_argument("--version", action="version", version=f"bubbletree {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-steps", type=int, default=None)
        p.add_argument("--degree-bound", type=int, default=3)
        p.add_argument("--field", default="q", help="q or fp:P")
        p.add_argument("--json", action="store_true", help="emit the JSON report")
        p.add_argument("--trace", action="store_true", help="include ladder traces and timings")

    p = sub.add_parser("run", help="execute the tasks listed in a family file")
    p.add_argument("file")
    common(p)
    for verb in VERBS:
        p = sub.add_parser(verb, help=f"{verb} every matrix (or the one named) in a family file")
        p.add_argument("file")
        p.add_argument("--matrix", default=None)
        common(p)
    p = sub.add_parser("corpus", help="run the reproducibility corpus")
    p.add_argument("dir", nargs="?", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "corpus":
        try:
            summary = run_corpus(args.dir, args.threads, args.seed)
        except (CorpusError, FamilyFileError, OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except ConsistencyError as exc:
            print(f"consistency error: {exc}", file=sys.stderr)
            return EXIT_CONSISTENCY
        sys.stdout.write(summary.table())
        return EXIT_OK if summary.ok else EXIT_INPUT

    try:
        text = Path(args.file).read_text()
        ff = parse(text)
        field_from_spec(args.field)
    except FamilyFileError as exc:
        print(f"{args.file}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.verb == "run":
        tasks = None
    else:
        names = [args.matrix] if args.matrix else list(ff.matrices)
        if args.matrix and args.matrix not in ff.matrices:
            print(f"error: no matrix named {args.matrix!r}", file=sys.stderr)
            return EXIT_INPUT
        tasks = [Task(args.verb, n) for n in names]
    cfg = Config(seed=args.seed, max_steps=args.max_steps, degree_bound=args.degree_bound, field=args.field, trace=args.trace)
    try:
        report = run(ff, cfg, tasks)
    except ConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    sys.stdout.write(dumps(report) if args.json else _text_report(report))
    return EXIT_OK if all(t["status"] == "ok" for t in report["tasks"]) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
