"""15-node, 14-bond demonstration cell with its four boundary cases.

Node ids are 0-based here; bond ``i`` runs from node ``i + 2`` (first) to
node ``i + 1`` (second) for ``i < 13``, and the last bond runs from node 0
to node 13.  Nodes 0-6 are loaded by forces, nodes 7-14 have prescribed
positions.
"""

from __future__ import annotations

import numpy as np

from .constitutive import BondParams
from .graph import LatticeGraph
from .linear_system import DofMask

POSITIONS = np.array(
    [
        (0, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1), (1, 0, 0),
        (1, 1, 0), (1, 0, 1), (1, 1, 1), (2, 0, 0), (2, 1, 0),
        (2, 0, 1), (2, 1, 1), (2, 2, 1), (2, 1, 2), (2, 2, 2),
    ],
    dtype=float,
)

EDGES = np.array([(i + 2, i + 1) for i in range(13)] + [(0, 13)], dtype=np.int64)

# printed edge vectors and lengths, for cross-checking the geometry
EDGE_VECTORS = np.array(
    [
        (0, -1, 1), (0, 1, 0), (1, -1, -1), (0, 1, 0), (0, -1, 1),
        (0, 1, 0), (1, -1, -1), (0, 1, 0), (0, -1, 1), (0, 1, 0),
        (0, 1, 0), (0, -1, 1), (0, 1, 0), (-2, -1, -2),
    ],
    dtype=float,
)
EDGE_LENGTHS = np.sqrt([2, 1, 3, 1, 2, 1, 3, 1, 2, 1, 1, 2, 1, 9])

# columns: x0, x1, x2, x3, f0, f1
LAW = np.array(
    [
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
        (-0.2, 0.2, 0.3, 0.5, -0.1, 0.1),
        (-0.1, 0.1, 0.2, 0.3, -0.2, 0.2),
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
        (-0.2, 0.2, 0.3, 0.5, -0.1, 0.1),
        (-0.1, 0.1, 0.2, 0.3, -0.2, 0.2),
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
        (-0.2, 0.2, 0.3, 0.5, -0.1, 0.1),
        (-0.1, 0.1, 0.2, 0.3, -0.2, 0.2),
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
        (-0.2, 0.2, 0.3, 0.4, -0.2, 0.2),
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
        (-0.1, 0.1, 0.3, 0.4, -0.1, 0.1),
    ]
)

FREE_NODES = np.arange(7)
FIXED_NODES = np.arange(7, 15)

_PATTERN = np.array(
    [
        (0, 1, 0), (0, 0, 1), (0, 1, 1), (1, 0, 0),
        (1, 1, 0), (1, 0, 1), (1, 1, 1), (1, 0, 0),
    ],
    dtype=float,
)

# case -> (regime the case is labelled with, offset added to the pattern)
CASES = {
    "a": ("compressive_elastic", 0.1),
    "b": ("tensile_elastic", 0.2),
    "c": ("plastic_plateau", 0.3),
    "d": ("softening", 0.4),
}


def graph() -> LatticeGraph:
    return LatticeGraph(POSITIONS, EDGES)


def params() -> BondParams:
    x0, x1, x2, x3, f0, f1 = LAW.T
    return BondParams(x0, x1, x2, x3, f0, f1, EDGE_LENGTHS)


def case_inputs(case: str) -> tuple[np.ndarray, np.ndarray]:
    """Prescribed positions of nodes 7-14 and applied forces on nodes 0-6."""
    _, offset = CASES[case]
    X_q = _PATTERN + offset
    B_p = _PATTERN[:7] + offset
    return X_q, B_p


def case_mask(case: str, as_displacement: bool = False) -> DofMask:
    """Boundary mask of a case; positions become displacements on request."""
    X_q, B_p = case_inputs(case)
    if as_displacement:
        X_q = X_q - POSITIONS[FIXED_NODES]
    return DofMask.from_nodes(len(POSITIONS), FIXED_NODES, X_q, B_p)
