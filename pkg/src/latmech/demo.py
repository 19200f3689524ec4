"""Write the demonstration inputs: ``python -m latmech.demo OUTDIR``.

* ``lattice_3x3x3.json`` / ``tension_bc.json``: 3x3x3-cell lattice (a = 1),
  bottom face clamped, top face pulled along z.
* ``unit_cell.json`` / ``unit_cell_bc_{a,b,c,d}.json``: the 15-node cell and
  its four boundary cases, prescribed positions converted to displacements.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from . import io, unit_cell
from .lattice import LatticeSpec, build_bcc_lattice
from .linear_system import DofMask


def tension_mask(graph, pull: float) -> DofMask:
    z = graph.positions[:, 2]
    bottom = np.flatnonzero(np.isclose(z, z.min()))
    top = np.flatnonzero(np.isclose(z, z.max()))
    pres = np.zeros((graph.n, 3), dtype=bool)
    vals = np.zeros((graph.n, 3))
    pres[bottom] = True
    pres[top] = True
    vals[top, 2] = pull
    return DofMask(pres, vals)


def write_demo(out_dir, pull: float = 0.3) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = build_bcc_lattice(LatticeSpec(3, 3, 3, quarter_diagonal=1.0))
    io.write_mesh(out / "lattice_3x3x3.json", io.mesh_document(g))
    io.write_boundary(out / "tension_bc.json", tension_mask(g, pull))

    cell = unit_cell.graph()
    law = [dict(zip(io.LAW_KEYS, map(float, row))) for row in unit_cell.LAW]
    io.write_mesh(out / "unit_cell.json", io.mesh_document(cell, per_edge=law))
    for case in unit_cell.CASES:
        io.write_boundary(out / f"unit_cell_bc_{case}.json", unit_cell.case_mask(case, as_displacement=True))
    return out


if __name__ == "__main__":
    print(write_demo(sys.argv[1] if len(sys.argv) > 1 else "demo"))
