"""Dataset (JSONL / single JSON) and CSV input/output.

Reals are written with 17 significant digits, which round-trips every IEEE
double exactly, so ``parse(serialize(ds))`` reproduces ``ds`` bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from numbers import Real
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .graph import Graph, GraphDataset

FORMATS = ("jsonl", "single-json")


def fmt_real(value: float) -> str:
    s = format(float(value), ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _fmt_vec(values) -> str:
    return "[" + ",".join(fmt_real(v) for v in values) + "]"


def guess_format(path) -> str:
    return "single-json" if str(path).endswith(".json") else "jsonl"


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _real_list(values, what: str) -> list:
    if not isinstance(values, list):
        raise ParseError(f"{what} must be a list of numbers")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, Real):
            raise ParseError(f"{what} must be a list of numbers")
    out = [float(v) for v in values]
    if not all(math.isfinite(v) for v in out):
        raise ValidationError(f"non-finite value in {what}")
    return out


def graph_from_obj(obj) -> tuple[Graph, int | None]:
    """Decode one graph object. Returns the graph and its label (or None)."""
    if not isinstance(obj, dict):
        raise ParseError("graph record must be a JSON object")
    nodes = obj.get("nodes")
    edges = obj.get("edges", [])
    if not isinstance(nodes, list):
        raise ParseError('graph record needs a "nodes" list')
    if not isinstance(edges, list):
        raise ParseError('"edges" must be a list')

    index = {}
    feats = []
    has_x = None
    for node in nodes:
        if not isinstance(node, dict) or not _is_int(node.get("id")) or node["id"] < 0:
            raise ParseError('each node needs a nonnegative integer "id"')
        if node["id"] in index:
            raise ValidationError(f"duplicate node id {node['id']}")
        index[node["id"]] = len(index)
        present = "x" in node
        if has_x is None:
            has_x = present
        elif has_x != present:
            raise ValidationError('"x" present on some nodes but not others')
        feats.append(_real_list(node["x"], "node features") if present else [])
    dims = {len(f) for f in feats}
    if len(dims) > 1:
        raise ValidationError("ragged node features")
    dim = dims.pop() if dims else 0
    x = np.array(feats, dtype=np.float64).reshape(len(feats), dim)

    pairs = []
    efeats = []
    has_e = None
    for edge in edges:
        if not isinstance(edge, dict) or not _is_int(edge.get("u")) or not _is_int(edge.get("v")):
            raise ParseError('each edge needs integer "u" and "v"')
        u, v = edge["u"], edge["v"]
        if u == v:
            raise ValidationError("self-loop")
        if u not in index or v not in index:
            raise ValidationError("node index out of range")
        pairs.append((index[u], index[v]))
        present = "e" in edge
        if has_e is None:
            has_e = present
        elif has_e != present:
            raise ValidationError('"e" present on some edges but not others')
        if present:
            efeats.append(_real_list(edge["e"], "edge features"))
    edge_attr = None
    if has_e:
        edims = {len(f) for f in efeats}
        if len(edims) > 1:
            raise ValidationError("ragged edge features")
        edge_attr = np.array(efeats, dtype=np.float64).reshape(len(efeats), edims.pop())

    label = obj.get("label")
    if label is not None and (not _is_int(label) or label < 0):
        raise ParseError('"label" must be a nonnegative integer')
    return Graph(x, np.array(pairs, dtype=np.int64).reshape(-1, 2), edge_attr), label


def _decode_records(text: str, fmt: str):
    if fmt == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: {exc.msg} (column {exc.colno})") from None
    elif fmt == "single-json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}: {exc.msg} (column {exc.colno})") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("graphs"), list):
            raise ParseError('single-json document must be {"graphs": [...]}')
        for obj in doc["graphs"]:
            yield None, obj
    else:
        raise ValueError(f"unknown dataset format {fmt!r}")


def parse_dataset_text(text: str, fmt: str = "jsonl", num_classes: int | None = None) -> GraphDataset:
    graphs, labels = [], []
    for i, (lineno, obj) in enumerate(_decode_records(text, fmt)):
        where = f"graph {i}" + (f" (line {lineno})" if lineno is not None else "")
        try:
            g, y = graph_from_obj(obj)
        except ParseError as exc:
            raise ParseError(f"{exc} in {where}") from None
        except ValidationError as exc:
            raise ValidationError(f"{exc} in {where}") from None
        except (TypeError, ValueError, OverflowError, KeyError) as exc:
            raise ParseError(f"malformed record in {where}: {exc}") from None
        graphs.append(g)
        labels.append(y)
    present = [y is not None for y in labels]
    if any(present) and not all(present):
        raise ValidationError('"label" present on some graphs but not others')
    return GraphDataset(graphs, labels if graphs and all(present) else None, num_classes)


def parse_dataset(path, fmt: str | None = None, num_classes: int | None = None) -> GraphDataset:
    fmt = fmt or guess_format(path)
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"file is not UTF-8: {exc}") from None
    return parse_dataset_text(text, fmt, num_classes)


def graph_to_json(g: Graph, label: int | None = None) -> str:
    nodes = ",".join(f'{{"id":{i},"x":{_fmt_vec(g.x[i])}}}' for i in range(g.node_count))
    parts = []
    for k, (u, v) in enumerate(g.edges):
        e = "" if g.edge_attr is None else f',"e":{_fmt_vec(g.edge_attr[k])}'
        parts.append(f'{{"u":{int(u)},"v":{int(v)}{e}}}')
    tail = "" if label is None else f',"label":{int(label)}'
    return f'{{"nodes":[{nodes}],"edges":[{",".join(parts)}]{tail}}}'


def dataset_to_text(ds: GraphDataset, fmt: str = "jsonl") -> str:
    labels = ds.labels if ds.labels is not None else [None] * len(ds)
    records = [graph_to_json(g, y) for g, y in zip(ds.graphs, labels)]
    if fmt == "jsonl":
        return "".join(r + "\n" for r in records)
    if fmt == "single-json":
        return '{"graphs":[' + ",\n".join(records) + "]}\n"
    raise ValueError(f"unknown dataset format {fmt!r}")


def serialize_dataset(ds: GraphDataset, path, fmt: str | None = None) -> None:
    fmt = fmt or guess_format(path)
    Path(path).write_text(dataset_to_text(ds, fmt), encoding="utf-8")


# CSV ----------------------------------------------------------------------

def write_matrix_csv(path, values: np.ndarray, col_labels: Sequence = None, row_labels: Sequence = None) -> None:
    values = np.asarray(values, dtype=np.float64)
    cols = list(range(values.shape[1])) if col_labels is None else list(col_labels)
    rows = list(range(values.shape[0])) if row_labels is None else list(row_labels)
    buf = io.StringIO()
    buf.write("graph," + ",".join(str(c) for c in cols) + "\n")
    for r, row in zip(rows, values):
        buf.write(str(r) + "," + ",".join(fmt_real(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_matrix_csv(path) -> tuple[np.ndarray, list, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty matrix file")
    cols = rows[0][1:]
    labels, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(cols) + 1:
            raise ParseError(f"{path}: line {lineno}: expected {len(cols) + 1} fields")
        labels.append(row[0])
        try:
            values.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
    return np.array(values, dtype=np.float64).reshape(len(labels), len(cols)), labels, cols


def write_columns_csv(path, header: Sequence[str], columns: Iterable[Sequence]) -> None:
    columns = [list(c) for c in columns]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(fmt_real(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_column_csv(path, column: str | None = None) -> list[str]:
    """One column of a headed CSV file, by name (default: the last column)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty CSV file")
    header = rows[0]
    if column is None:
        idx = len(header) - 1
    elif column in header:
        idx = header.index(column)
    else:
        raise ParseError(f"{path}: no column {column!r}")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if idx >= len(row):
            raise ParseError(f"{path}: line {lineno}: missing column {idx}")
        out.append(row[idx])
    return out
