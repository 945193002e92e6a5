"""Text formats for transition-count data.

Generic counts format, one line per transient state::

    # comments and blank lines are ignored
    Egg: to_Egg=478, to_N1=139, absorb=59
    N1:  to_N1=528, to_N2=89, absorb=52, n=669

Destinations not listed count as zero. ``absorb`` is required; ``n`` is an
optional declared total that must equal the sum of the row. Labels are
runs of letters, digits, ``_``, ``-`` or ``.``.

Stage format, one line per stage with columns ``label G R P n``
(graduation to the next stage, death, persistence, total), separated by
whitespace or commas::

    # label  G    R    P    n
    Egg      139  59   478  676

The last stage must have ``G = 0``. Stage tables are written in the chain
orientation: row ``i`` moves to ``i`` with ``P``, to ``i + 1`` with ``G``
and is absorbed with ``R``. A matrix population model stores the transpose
of that transient block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain import AbsorbingChainSpec, validate_spec
from .errors import ParseError, ValidationError
from .sampling import TransitionCountTable

_LABEL = r"[A-Za-z0-9_.\-]+"
_ROW = re.compile(rf"^\s*({_LABEL})\s*:(.*)$")
_ENTRY = re.compile(rf"^\s*(to_{_LABEL}|absorb|n)\s*=\s*(\S+?)\s*$")
_LABEL_ONLY = re.compile(rf"^{_LABEL}$")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def _parse_int(text: str, lineno: int, col: int) -> int:
    if not re.fullmatch(r"[+]?\d+", text):
        raise ParseError(f"expected a nonnegative integer count, got {text!r}", lineno, col)
    return int(text)


def _check_absorbing(table: TransitionCountTable) -> None:
    problems = validate_spec(table.point_estimate())
    if problems:
        labels = table.state_labels

        def name(msg):
            return re.sub(r"^row (\d+)", lambda m: f"row {labels[int(m.group(1))]}", msg)

        raise ValidationError([name(p) for p in problems])


def parse_counts(text: str) -> TransitionCountTable:
    """Parse the generic counts format into a validated table."""
    rows: list[tuple[str, dict[str, int], int, int | None, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _ROW.match(line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected '<label>: to_<label>=<count>, ..., absorb=<count>'", lineno, col)
        label = m.group(1)
        dests: dict[str, int] = {}
        absorb = None
        declared = None
        offset = m.start(2)
        for chunk in m.group(2).split(","):
            col = offset + len(chunk) - len(chunk.lstrip()) + 1
            offset += len(chunk) + 1
            if not chunk.strip():
                raise ParseError("empty entry", lineno, col)
            e = _ENTRY.match(chunk)
            if not e:
                raise ParseError(f"malformed entry {chunk.strip()!r}", lineno, col)
            key, value = e.group(1), _parse_int(e.group(2), lineno, col)
            if key == "absorb":
                if absorb is not None:
                    raise ParseError("duplicate 'absorb' entry", lineno, col)
                absorb = value
            elif key == "n":
                if declared is not None:
                    raise ParseError("duplicate 'n' entry", lineno, col)
                declared = value
            else:
                dest = key[3:]
                if dest in dests:
                    raise ParseError(f"duplicate destination {dest!r}", lineno, col)
                dests[dest] = value
        if absorb is None:
            raise ParseError(f"row {label!r} has no 'absorb' entry", lineno, len(line.rstrip()) + 1)
        rows.append((label, dests, absorb, declared, lineno))

    if not rows:
        raise ParseError("no states found")
    labels = [r[0] for r in rows]
    index = {lab: i for i, lab in enumerate(labels)}
    problems = []
    if len(index) != len(labels):
        dup = sorted({lab for lab in labels if labels.count(lab) > 1})
        problems.append(f"duplicate state labels: {', '.join(dup)}")
    k = len(labels)
    counts = np.zeros((k, k + 1), dtype=np.int64)
    for i, (label, dests, absorb, declared, lineno) in enumerate(rows):
        for dest, c in dests.items():
            if dest not in index:
                problems.append(f"row {label} (line {lineno}): unknown destination state {dest!r}")
                continue
            counts[i, index[dest]] = c
        counts[i, k] = absorb
        total = int(counts[i].sum())
        if declared is not None and declared != total:
            problems.append(f"row {label} (line {lineno}): counts sum to {total}, declared n = {declared}")
    if problems:
        raise ValidationError(problems)
    table = TransitionCountTable(tuple(labels), counts)
    _check_absorbing(table)
    return table


def emit_counts(table: TransitionCountTable) -> str:
    """Canonical generic-format text: every destination listed, ``absorb`` last."""
    lines = []
    for i, label in enumerate(table.state_labels):
        parts = [f"to_{dest}={int(table.counts[i, j])}" for j, dest in enumerate(table.state_labels)]
        parts.append(f"absorb={int(table.counts[i, -1])}")
        lines.append(f"{label}: " + ", ".join(parts))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Stage:
    label: str
    G: int
    R: int
    P: int
    n: int


@dataclass(frozen=True)
class StageTable:
    stages: tuple[Stage, ...]

    def violations(self) -> list[str]:
        out = []
        if not self.stages:
            return ["stage table is empty"]
        labels = [s.label for s in self.stages]
        if len(set(labels)) != len(labels):
            out.append("stage labels are not unique")
        for s in self.stages:
            for name in ("G", "R", "P", "n"):
                if getattr(s, name) < 0:
                    out.append(f"stage {s.label}: {name} is negative")
            if s.G + s.R + s.P != s.n:
                out.append(f"stage {s.label}: G + R + P = {s.G + s.R + s.P} but n = {s.n}")
            if s.n < 1:
                out.append(f"stage {s.label}: n must be at least 1")
        last = self.stages[-1]
        if last.G != 0:
            out.append(f"stage {last.label}: final stage must have G = 0, got {last.G}")
        return out


def parse_stage_table(text: str) -> StageTable:
    stages = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        fields = [(m.group(0), m.start() + 1) for m in re.finditer(r"[^\s,]+", line)]
        if len(fields) != 5:
            raise ParseError(f"expected 5 columns (label G R P n), got {len(fields)}", lineno, fields[0][1])
        label, col = fields[0]
        if not _LABEL_ONLY.match(label):
            raise ParseError(f"invalid stage label {label!r}", lineno, col)
        G, R, P, n = (_parse_int(text_, lineno, c) for text_, c in fields[1:])
        stages.append(Stage(label, G, R, P, n))
    if not stages:
        raise ParseError("no stages found")
    return StageTable(tuple(stages))


def emit_stage_table(stages: StageTable) -> str:
    lines = ["# label G R P n"]
    lines += [f"{s.label} {s.G} {s.R} {s.P} {s.n}" for s in stages.stages]
    return "\n".join(lines) + "\n"


def stage_table_to_counts(stages: StageTable) -> TransitionCountTable:
    """Chain-orientation counts: ``P`` to self, ``G`` to the next stage, ``R`` absorbed."""
    problems = stages.violations()
    if problems:
        raise ValidationError(problems)
    k = len(stages.stages)
    counts = np.zeros((k, k + 1), dtype=np.int64)
    for i, s in enumerate(stages.stages):
        counts[i, i] = s.P
        if i + 1 < k:
            counts[i, i + 1] = s.G
        counts[i, k] = s.R
    table = TransitionCountTable(tuple(s.label for s in stages.stages), counts)
    _check_absorbing(table)
    return table


def chain_from_mpm(A, v=None, state_labels=None) -> AbsorbingChainSpec:
    """Chain spec from the transient block of a matrix population model (column = source)."""
    return AbsorbingChainSpec(np.asarray(A, dtype=float).T, v, state_labels)


def mpm_transient_block(spec: AbsorbingChainSpec) -> np.ndarray:
    """Transient block in matrix-population-model orientation (column = source)."""
    return spec.U.T.copy()


def detect_format(path: str | Path) -> str:
    return "stage" if Path(path).suffix.lower() == ".stage" else "generic"


def load_table(path: str | Path, fmt: str | None = None) -> TransitionCountTable:
    fmt = fmt or detect_format(path)
    text = Path(path).read_text()
    if fmt == "generic":
        return parse_counts(text)
    if fmt == "stage":
        return stage_table_to_counts(parse_stage_table(text))
    raise ValueError(f"unknown format {fmt!r}")


def parse_start(text: str | None, labels: tuple[str, ...]) -> np.ndarray:
    """Start distribution from a state label or a comma-separated weight vector.

    ``None`` puts all mass on the first state.
    """
    k = len(labels)
    v = np.zeros(k)
    if text is None:
        v[0] = 1.0
        return v
    text = text.strip()
    if text in labels:
        v[labels.index(text)] = 1.0
        return v
    try:
        weights = [float(x) for x in text.split(",")]
    except ValueError:
        raise ValidationError(f"--start {text!r} is neither a state label ({', '.join(labels)}) nor a weight vector")
    if len(weights) != k:
        raise ValidationError(f"start vector has {len(weights)} entries, expected {k}")
    v = np.array(weights)
    if (v < 0).any() or abs(v.sum() - 1.0) > 1e-12:
        raise ValidationError(f"start distribution must be nonnegative and sum to 1, got sum {v.sum():.12g}")
    return v
