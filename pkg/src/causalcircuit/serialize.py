"""JSON documents for graphs, operators, circuits and reports.

Complex entries are stored as ``[re, im]`` pairs, row-major.  Floats are
written with ``repr`` precision, so parsing a serialized document gives back
bit-identical numbers.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, LayoutError
from .graph import Node, QuantumLabeledGraph
from .localizer import Circuit, Decoding, DoubledLayout, Encoding, LocalGate
from .tensor import DenseOperator, SpaceLayout

CONVENTIONS = {"index_order": "node-ascending,first-most-significant", "tapes": ["computed", "uncomputed"]}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc))


def load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


def _require(doc: dict, key: str, kind=None):
    if key not in doc:
        raise FormatError(f"missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise FormatError(f"field {key!r} has the wrong type")
    return value


def _check_kind(doc: dict, kind: str):
    if doc.get("kind", kind) != kind:
        raise FormatError(f"expected a {kind} document, got {doc.get('kind')!r}")
    conv = doc.get("conventions")
    if conv is not None and conv != CONVENTIONS:
        raise FormatError(f"unsupported conventions header {conv}")


# -- graphs -----------------------------------------------------------------


def graph_to_dict(g: QuantumLabeledGraph) -> dict:
    return {
        "kind": "graph",
        "conventions": CONVENTIONS,
        "nodes": [{"dim": n.dim, "quiescent": n.quiescent} for n in g.nodes],
        "edges": [list(e) for e in g.sorted_edges()],
    }


def graph_from_dict(doc: dict) -> QuantumLabeledGraph:
    _check_kind(doc, "graph")
    try:
        nodes = tuple(Node(int(n["dim"]), int(n.get("quiescent", 0))) for n in _require(doc, "nodes", list))
        edges = frozenset((int(x), int(y)) for x, y in _require(doc, "edges", list))
        return QuantumLabeledGraph(nodes, edges)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed graph document: {e}") from e


def parse_graph(path) -> QuantumLabeledGraph:
    return graph_from_dict(load(path))


# -- operators --------------------------------------------------------------


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"side": int(m.shape[0]), "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)]}


def matrix_from_dict(doc: dict) -> np.ndarray:
    side = _require(doc, "side", int)
    entries = _require(doc, "entries", list)
    if side < 1 or len(entries) != side * side:
        raise FormatError(f"operator side {side} does not match {len(entries)} entries")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in entries], dtype=complex)
    except (TypeError, ValueError) as e:
        raise FormatError(f"malformed operator entries: {e}") from e
    if not np.all(np.isfinite(flat)):
        raise FormatError("operator has non-finite entries")
    return flat.reshape(side, side)


def operator_to_dict(op: DenseOperator) -> dict:
    doc = {"kind": "operator", "conventions": CONVENTIONS}
    doc.update(matrix_to_dict(op.matrix))
    doc["layout"] = [list(e) for e in op.layout.entries]
    return doc


def operator_from_dict(doc: dict, graph: QuantumLabeledGraph | None = None) -> DenseOperator:
    _check_kind(doc, "operator")
    m = matrix_from_dict(doc)
    if graph is not None:
        layout = graph.layout()
    elif "layout" in doc:
        try:
            layout = SpaceLayout(tuple(tuple(e) for e in doc["layout"]))
        except (TypeError, ValueError) as e:
            raise FormatError(f"malformed layout: {e}") from e
    else:
        layout = SpaceLayout.from_dims([m.shape[0]])
    if layout.total_dim != m.shape[0]:
        raise LayoutError(f"operator side {m.shape[0]} does not match space dimension {layout.total_dim}")
    return DenseOperator(layout, m)


def parse_operator(path, graph: QuantumLabeledGraph | None = None) -> DenseOperator:
    return operator_from_dict(load(path), graph)


# -- circuits ---------------------------------------------------------------


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "kind": "circuit",
        "conventions": CONVENTIONS,
        "graph": graph_to_dict(c.doubled.base_graph),
        "doubled_layout": [list(e) for e in c.doubled.layout.entries],
        "encoding": {"quiescent": list(c.encoding.quiescent)},
        "layers": [
            [
                {
                    "origin_node": gate.origin_node,
                    "support": [list(s) for s in gate.support],
                    "block": matrix_to_dict(gate.block.matrix),
                    "residual": gate.residual,
                }
                for gate in layer
            ]
            for layer in c.layers
        ],
        "decoding": {
            "tape_swap": True,
            "uncompute": c.decoding.uncompute,
            "blocks": [matrix_to_dict(b.matrix) for b in c.decoding.blocks],
        },
        "schedule": c.schedule,
        "depth": c.depth,
    }


def circuit_from_dict(doc: dict) -> Circuit:
    _check_kind(doc, "circuit")
    try:
        g = graph_from_dict(_require(doc, "graph", dict))
        doubled = DoubledLayout.of(g)
        declared = [tuple(e) for e in _require(doc, "doubled_layout", list)]
        if tuple(declared) != doubled.layout.entries:
            raise FormatError("doubled layout does not match the base graph")
        encoding = Encoding(tuple(int(q) for q in _require(doc, "encoding", dict)["quiescent"]))
        if encoding.quiescent != g.quiescent:
            raise FormatError("encoding quiescent states disagree with the graph")
        layers = []
        for layer in _require(doc, "layers", list):
            gates = []
            for item in layer:
                support = tuple((int(t), int(n)) for t, n in item["support"])
                block = DenseOperator(doubled.layout.restrict(support), matrix_from_dict(item["block"]))
                gates.append(LocalGate(block, support, int(item["origin_node"]), float(item.get("residual", 0.0))))
            layers.append(tuple(gates))
        dec = _require(doc, "decoding", dict)
        blocks = tuple(
            DenseOperator(doubled.layout.restrict([(0, x), (1, x)]), matrix_from_dict(b))
            for x, b in enumerate(dec["blocks"])
        )
        if len(blocks) != len(g):
            raise FormatError("need one decoding block per node")
        circuit = Circuit(doubled, encoding, tuple(layers), Decoding(blocks, bool(dec["uncompute"])), doc.get("schedule", "greedy"))
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed circuit document: {e}") from e
    if "depth" in doc and doc["depth"] != circuit.depth:
        raise FormatError("declared depth disagrees with the layers")
    return circuit


def parse_circuit(path) -> Circuit:
    return circuit_from_dict(load(path))


def clean(value: Any) -> Any:
    """Convert numpy scalars and tuples for JSON output."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        f = float(value)
        return f if math.isfinite(f) else str(f)
    return value
