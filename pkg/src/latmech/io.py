"""JSON mesh and boundary documents, CSV/JSON result bundles.

Mesh document::

    {"format_version": 1,
     "nodes": [[x, y, z], ...],
     "edges": [[first, second], ...],
     "families": ["B1", ...],                       # optional
     "lengths": [..],                               # optional, checked
     "bond_params": {"x0": .., "x1": .., "x2": .., "x3": .., "f0": .., "f1": ..}
                    | [{...}, ...]}                 # one record per edge

Boundary document::

    {"format_version": 1,
     "conditions": [{"node": 3, "axis": "x", "kind": "disp", "value": 0.1}, ...]}

Unlisted (node, axis) pairs carry zero applied force.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .constitutive import BondParams, Regime
from .graph import LatticeGraph
from .linear_system import AXES, BoundaryError, DofMask

FORMAT_VERSION = 1
LAW_KEYS = ("x0", "x1", "x2", "x3", "f0", "f1")
NODE_HEADER = ["id", "x0", "y0", "z0", "ux", "uy", "uz", "fx", "fy", "fz", "kind_x", "kind_y", "kind_z"]
EDGE_HEADER = ["id", "first", "second", "elongation", "axial_force", "regime", "failed_step"]

# default law for generated lattices: first row of the demonstration cell
DEFAULT_LAW = {"x0": -0.1, "x1": 0.1, "x2": 0.3, "x3": 0.4, "f0": -0.1, "f1": 0.1}


class DocumentError(ValueError):
    """Malformed or inconsistent input document."""


def fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: not valid JSON ({exc})") from exc


# -- mesh -----------------------------------------------------------------


def mesh_document(graph: LatticeGraph, law=None, per_edge=None) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "nodes": graph.positions.tolist(),
        "edges": graph.edges.tolist(),
        "lengths": graph.reference_lengths.tolist(),
    }
    if graph.families is not None:
        doc["families"] = [str(f) for f in graph.families]
    if per_edge is not None:
        doc["bond_params"] = per_edge
    else:
        doc["bond_params"] = dict(law or DEFAULT_LAW)
    return doc


def load_graph(doc: dict) -> LatticeGraph:
    """Validate a mesh document into a :class:`LatticeGraph`."""
    if not isinstance(doc, dict):
        raise DocumentError("mesh document must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        nodes = np.asarray(doc["nodes"], dtype=float)
        edges = np.asarray(doc["edges"], dtype=np.int64)
    except KeyError as exc:
        raise DocumentError(f"mesh document is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"mesh arrays are malformed: {exc}") from exc
    if edges.size == 0:
        raise DocumentError("mesh has no edges")
    families = doc.get("families")
    if families is not None and len(families) != len(edges):
        raise DocumentError("families must list one tag per edge")
    try:
        graph = LatticeGraph(nodes, edges, None if families is None else np.asarray(families))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc

    stated = doc.get("lengths")
    if stated is not None:
        stated = np.asarray(stated, dtype=float)
        if stated.shape != graph.reference_lengths.shape:
            raise DocumentError("lengths must list one value per edge")
        rel = np.abs(stated - graph.reference_lengths) / graph.reference_lengths
        if (rel > 1e-9).any():
            i = int(np.argmax(rel))
            raise DocumentError(
                f"edge {i}: stated length {stated[i]!r} differs from computed {graph.reference_lengths[i]!r}"
            )
    return graph


def _law_record(rec, where: str) -> list[float]:
    try:
        return [float(rec[k]) for k in LAW_KEYS]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: bond law record needs numeric {LAW_KEYS}") from exc


def load_params(doc: dict, graph: LatticeGraph) -> BondParams:
    raw = doc.get("bond_params")
    if raw is None:
        raise DocumentError("mesh document has no bond_params")
    if isinstance(raw, dict):
        rows = np.tile(_law_record(raw, "bond_params"), (graph.m, 1))
    else:
        if len(raw) != graph.m:
            raise DocumentError(f"bond_params lists {len(raw)} records for {graph.m} edges")
        rows = np.array([_law_record(r, f"bond_params[{i}]") for i, r in enumerate(raw)])
    x0, x1, x2, x3, f0, f1 = rows.T
    try:
        return BondParams(x0, x1, x2, x3, f0, f1, graph.reference_lengths)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def read_mesh(path) -> tuple[LatticeGraph, BondParams]:
    doc = read_json(path)
    graph = load_graph(doc)
    return graph, load_params(doc, graph)


def write_mesh(path, doc: dict) -> None:
    atomic_write(path, json.dumps(doc, indent=1) + "\n")


# -- boundary -------------------------------------------------------------


def boundary_document(mask: DofMask) -> dict:
    conds = []
    for j in range(mask.n):
        for a in range(3):
            kind = "disp" if mask.prescribed[j, a] else "force"
            value = float(mask.values[j, a])
            if kind == "force" and value == 0.0:
                continue
            conds.append({"node": j, "axis": AXES[a], "kind": kind, "value": value})
    return {"format_version": FORMAT_VERSION, "conditions": conds}


def load_boundary(doc: dict, n: int) -> DofMask:
    """Boundary document to a :class:`DofMask` over ``n`` nodes."""
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise DocumentError("boundary document must be an object with format_version 1")
    conds = doc.get("conditions")
    if not isinstance(conds, list):
        raise DocumentError("boundary document needs a 'conditions' list")
    pres = np.zeros((n, 3), dtype=bool)
    vals = np.zeros((n, 3))
    seen = set()
    for i, c in enumerate(conds):
        try:
            node, axis, kind, value = int(c["node"]), c["axis"], c["kind"], float(c["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"conditions[{i}] needs node, axis, kind and numeric value") from exc
        if not 0 <= node < n:
            raise DocumentError(f"conditions[{i}]: node {node} outside [0, {n})")
        if axis not in AXES:
            raise DocumentError(f"conditions[{i}]: axis must be one of x, y, z")
        if kind not in ("disp", "force"):
            raise DocumentError(f"conditions[{i}]: kind must be 'disp' or 'force'")
        if (node, axis) in seen:
            raise BoundaryError(f"exclusion principle violated: (node {node}, axis {axis}) listed twice")
        seen.add((node, axis))
        a = AXES.index(axis)
        pres[node, a] = kind == "disp"
        vals[node, a] = value
    return DofMask(pres, vals)


def read_boundary(path, n: int) -> DofMask:
    return load_boundary(read_json(path), n)


def write_boundary(path, mask: DofMask) -> None:
    atomic_write(path, json.dumps(boundary_document(mask), indent=1) + "\n")


# -- results --------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def nodes_csv(graph: LatticeGraph, result) -> str:
    st = result.final
    kinds = np.where(result.mask.prescribed, "disp", "force")
    rows = []
    for j in range(graph.n):
        rows.append(
            [j]
            + [fmt(v) for v in graph.positions[j]]
            + [fmt(v) for v in st.displacement[j]]
            + [fmt(v) for v in st.nodal_forces[j]]
            + list(kinds[j])
        )
    return _csv(NODE_HEADER, rows)


def edges_csv(graph: LatticeGraph, result) -> str:
    st = result.final
    rows = [
        [
            i,
            int(graph.edges[i, 0]),
            int(graph.edges[i, 1]),
            fmt(st.elongation[i]),
            fmt(st.axial[i]),
            Regime(int(st.regimes[i])).label,
            int(result.failed_step[i]),
        ]
        for i in range(graph.m)
    ]
    return _csv(EDGE_HEADER, rows)


def plot_data_csv(result) -> str:
    rows = []
    for st in result.steps:
        for i in range(st.elongation.size):
            rows.append(
                [st.step, fmt(st.load_factor), i, fmt(st.elongation[i]), fmt(st.axial[i]),
                 Regime(int(st.regimes[i])).label]
            )
    return _csv(["step", "load_factor", "edge", "elongation", "axial_force", "regime"], rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def run_json(result) -> str:
    doc = {
        "converged": result.converged,
        "options": result.options.as_dict(),
        "convergence": result.convergence_log(),
        "damage": result.damage(),
    }
    return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"


def write_results(out_dir, graph: LatticeGraph, result, plot_data: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write(out / "nodes.csv", nodes_csv(graph, result))
    atomic_write(out / "edges.csv", edges_csv(graph, result))
    atomic_write(out / "run.json", run_json(result))
    if plot_data:
        atomic_write(out / "steps.csv", plot_data_csv(result))
