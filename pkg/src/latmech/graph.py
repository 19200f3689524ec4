"""Graph topology, incidence operator and the discrete gradient/divergence.

Edges are oriented pairs ``(first, second)``.  Row ``i`` of the incidence
matrix carries ``+1`` in the column of the first node and ``-1`` in the
column of the second node, so the gradient of a nodal field is
``X[first] - X[second]`` and the divergence is the transpose product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class TopologyError(ValueError):
    """Edge list inconsistent with the node set."""


class DegenerateEdgeError(TopologyError):
    """Edge whose two endpoints coincide."""


def _as_edge_array(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise TopologyError(f"edges must have shape (m, 2), got {arr.shape}")
    return arr


def build_incidence(edges, n: int) -> sp.csr_matrix:
    """Signed m x n incidence matrix of an oriented edge list.

    Parameters
    ----------
    edges : array_like of shape (m, 2)
        ``(first, second)`` node ids, 0-based.
    n : int
        Number of nodes.

    Returns
    -------
    scipy.sparse.csr_matrix
        Entries in {-1, 0, +1}, exactly two nonzeros per row.
    """
    if n < 2:
        raise TopologyError(f"a graph needs at least two nodes, got n={n}")
    e = _as_edge_array(edges)
    m = e.shape[0]
    if m and (e.min() < 0 or e.max() >= n):
        bad = int(np.flatnonzero((e < 0).any(axis=1) | (e >= n).any(axis=1))[0])
        raise TopologyError(f"edge {bad} = {tuple(e[bad])} references a node outside [0, {n})")
    same = np.flatnonzero(e[:, 0] == e[:, 1])
    if same.size:
        i = int(same[0])
        raise DegenerateEdgeError(f"edge {i} has equal endpoints ({e[i, 0]})")

    # rows stored in edge order, +1 before -1, so the CSR layout is fixed
    indptr = np.arange(0, 2 * m + 1, 2, dtype=np.int64)
    indices = e.reshape(-1)
    data = np.tile(np.array([1.0, -1.0]), m)
    return sp.csr_matrix((data, indices, indptr), shape=(m, n))


def _check_rows(values, rows: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] != rows:
        raise ValueError(f"{what} has {arr.shape[0]} rows, expected {rows}")
    return arr


def gradient(A: sp.spmatrix, X) -> np.ndarray:
    """Edge field ``A @ X``: ``X[first] - X[second]`` for every edge."""
    X = _check_rows(X, A.shape[1], "nodal field")
    return np.asarray(A @ X)


def divergence(A: sp.spmatrix, F) -> np.ndarray:
    """Nodal field ``A.T @ F``; each coordinate sums to zero over the nodes."""
    F = _check_rows(F, A.shape[0], "edge field")
    return np.asarray(A.T @ F)


@dataclass(frozen=True)
class LatticeGraph:
    """Sites, oriented bonds and their reference geometry.

    ``reference_edge_vectors`` and ``reference_lengths`` are derived from
    the positions at construction; instances are treated as immutable.
    """

    positions: np.ndarray
    edges: np.ndarray
    families: np.ndarray | None = None
    incidence: sp.csr_matrix = field(init=False, repr=False)
    reference_edge_vectors: np.ndarray = field(init=False, repr=False)
    reference_lengths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise TopologyError(f"positions must have shape (n, 3), got {pos.shape}")
        edges = _as_edge_array(self.edges).copy()
        if edges.shape[0] == 0:
            raise TopologyError("graph has no edges")
        A = build_incidence(edges, pos.shape[0])

        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        key = lo * pos.shape[0] + hi
        uniq, first_seen, counts = np.unique(key, return_index=True, return_counts=True)
        if (counts > 1).any():
            k = int(np.flatnonzero(counts > 1)[0])
            dup = np.flatnonzero(key == uniq[k])
            raise TopologyError(
                f"duplicate undirected edge between nodes {lo[dup[0]]} and {hi[dup[0]]} "
                f"(edges {dup.tolist()})"
            )

        b = np.asarray(A @ pos)
        lengths = np.linalg.norm(b, axis=1)
        if (lengths <= 0).any():
            i = int(np.flatnonzero(lengths <= 0)[0])
            raise TopologyError(f"edge {i} has zero reference length (coincident nodes)")

        fam = None
        if self.families is not None:
            fam = np.asarray(self.families)
            if fam.shape != (edges.shape[0],):
                raise TopologyError("families must hold one tag per edge")
            fam.setflags(write=False)

        for arr in (pos, edges, b, lengths):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "families", fam)
        object.__setattr__(self, "incidence", A)
        object.__setattr__(self, "reference_edge_vectors", b)
        object.__setattr__(self, "reference_lengths", lengths)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def gradient(self, X) -> np.ndarray:
        return gradient(self.incidence, X)

    def divergence(self, F) -> np.ndarray:
        return divergence(self.incidence, F)

    def degree(self) -> np.ndarray:
        """Number of edges incident to each node."""
        return np.bincount(self.edges.reshape(-1), minlength=self.n)
