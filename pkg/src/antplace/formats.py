"""Readers and writers for every file the harness touches.

Trace lines are whitespace-separated directives::

    AV v | RV v | AE e u v w | RE e | CE e w | AC c | RC c | ST

with ``#`` starting a comment. Weights are written with ``repr`` so they
round-trip exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np

from .exceptions import TraceSyntaxError
from .graph import (AddColor, AddEdge, AddVertex, RemoveColor, RemoveEdge,
                    RemoveVertex, SetWeight, Tick)

UNASSIGNED_TOKEN = "UNASSIGNED"
METRICS_HEADER = ("step", "cut_ratio", "balance", "stability", "score", "moves_advised")

# directive -> (event type, argument kinds)
_GRAMMAR = {
    "AV": (AddVertex, "i"),
    "RV": (RemoveVertex, "i"),
    "AE": (AddEdge, "iiif"),
    "RE": (RemoveEdge, "i"),
    "CE": (SetWeight, "if"),
    "AC": (AddColor, "i"),
    "RC": (RemoveColor, "i"),
    "ST": (Tick, ""),
}
_DIRECTIVE = {cls: name for name, (cls, _) in _GRAMMAR.items()}


def _convert(token, kind, lineno):
    try:
        if kind == "i":
            value = int(token)
            if value < 0:
                raise ValueError
            return value
        return float(token)
    except ValueError:
        what = "non-negative integer" if kind == "i" else "number"
        raise TraceSyntaxError(lineno, f"expected a {what}, got {token!r}") from None


def parse_line(line, lineno=0):
    """Parse one trace line; returns ``None`` for blank or comment lines."""
    body = line.split("#", 1)[0].split()
    if not body:
        return None
    name, args = body[0], body[1:]
    if name not in _GRAMMAR:
        raise TraceSyntaxError(lineno, f"unknown directive {name!r}")
    cls, kinds = _GRAMMAR[name]
    if len(args) != len(kinds):
        raise TraceSyntaxError(lineno, f"{name} takes {len(kinds)} argument(s), got {len(args)}")
    return cls(*(_convert(a, k, lineno) for a, k in zip(args, kinds)))


def iter_trace(lines: Iterable[str]) -> Iterator:
    for lineno, line in enumerate(lines, 1):
        event = parse_line(line, lineno)
        if event is not None:
            yield event


def parse_trace(text) -> list:
    """Parse a whole trace given as a string or an iterable of lines."""
    if isinstance(text, str):
        text = text.splitlines()
    return list(iter_trace(text))


def format_event(event) -> str:
    name = _DIRECTIVE[type(event)]
    if isinstance(event, AddEdge):
        return f"AE {event.edge} {event.u} {event.v} {float(event.weight)!r}"
    if isinstance(event, SetWeight):
        return f"CE {event.edge} {float(event.weight)!r}"
    if isinstance(event, Tick):
        return "ST"
    (value,) = (getattr(event, f) for f in event.__dataclass_fields__)
    return f"{name} {value}"


def write_trace(events: Iterable, fh: TextIO):
    n = 0
    for event in events:
        fh.write(format_event(event))
        fh.write("\n")
        n += 1
    return n


# -- snapshots ----------------------------------------------------------------------

def _token(color):
    return UNASSIGNED_TOKEN if color is None else str(color)


def _untoken(token):
    return None if token == UNASSIGNED_TOKEN else int(token)


def edge_dominant_colors(graph):
    """Color with the most pheromone on each edge (``None`` when bare).

    Ties go to the lowest colony slot, like the vertex rule.
    """
    order = graph.colony_order()
    if not order:
        return {e: None for e in graph.edges()}
    out = {}
    slots = [graph._c_slot[c] for c in order]
    for eid in graph.edges():
        row = graph._pher[graph._e_slot[eid], slots]
        best = int(np.argmax(row))
        out[eid] = order[best] if row[best] > 0 else None
    return out


def format_snapshot(graph, step) -> str:
    lines = [f"# step {step}"]
    for vid, color in graph.assignment().items():
        lines.append(f"V {vid} {_token(color)}")
    dom = edge_dominant_colors(graph)
    for eid in graph.edges():
        u, v = graph.endpoints(eid)
        lines.append(f"E {eid} {u} {v} {graph.weight(eid)!r} {_token(dom[eid])}")
    return "\n".join(lines) + "\n"


def export_snapshot(graph, step, path):
    with open(path, "w") as fh:
        fh.write(format_snapshot(graph, step))
    return path


@dataclass
class Snapshot:
    step: int
    vertices: dict
    edges: dict


def read_snapshot(path_or_lines) -> Snapshot:
    if isinstance(path_or_lines, str):
        with open(path_or_lines) as fh:
            lines = fh.read().splitlines()
    else:
        lines = list(path_or_lines)
    step, vertices, edges = None, {}, {}
    for lineno, line in enumerate(lines, 1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "#":
            if len(parts) == 3 and parts[1] == "step":
                step = int(parts[2])
            continue
        try:
            if parts[0] == "V" and len(parts) == 3:
                vertices[int(parts[1])] = _untoken(parts[2])
            elif parts[0] == "E" and len(parts) == 6:
                edges[int(parts[1])] = (int(parts[2]), int(parts[3]), float(parts[4]),
                                        _untoken(parts[5]))
            else:
                raise ValueError
        except ValueError:
            raise TraceSyntaxError(lineno, f"malformed snapshot line {line!r}") from None
    if step is None:
        raise TraceSyntaxError(0, "snapshot lacks a '# step <n>' header")
    return Snapshot(step, vertices, edges)


# -- advice log, metrics CSV, ground truth ------------------------------------------

def format_moves(advice) -> str:
    return "".join(f"{advice.step} {m.vertex} {m.source} {m.target}\n" for m in advice.moves)


def read_advice(lines):
    """``[(step, vertex, source, target), ...]`` from an advice log."""
    out = []
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        if len(body) != 4:
            raise TraceSyntaxError(lineno, f"malformed advice line {line!r}")
        out.append(tuple(int(x) for x in body))
    return out


def metrics_row(record, moves) -> list:
    return [str(record.step), f"{record.cut_ratio:.6f}", f"{record.balance:.6f}",
            f"{record.stability:.6f}", f"{record.score:.6f}", str(moves)]


def read_metrics(fh):
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != METRICS_HEADER:
        raise TraceSyntaxError(1, f"unexpected metrics header {reader.fieldnames}")
    rows = []
    for row in reader:
        rows.append({k: (int(v) if k in ("step", "moves_advised") else float(v))
                     for k, v in row.items()})
    return rows


def write_labels(labels, fh):
    for vid in sorted(labels):
        fh.write(f"{vid} {labels[vid]}\n")


def read_labels(lines):
    out = {}
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        if len(body) != 2:
            raise TraceSyntaxError(lineno, f"malformed label line {line!r}")
        out[int(body[0])] = int(body[1])
    return out
