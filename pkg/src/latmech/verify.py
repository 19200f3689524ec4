"""Side-by-side check of the sparse engine against the dense oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import LatticeGraph
from .linear_system import DofMask, NegativeStiffnessError, assemble, solve_system
from .oracle import DenseSnapshot, dense_solve

TOLERANCE = 1e-8


def random_graph(n: int, seed: int, extra_edges: int | None = None, spread: float = 1.0) -> LatticeGraph:
    """Connected random graph: a random spanning tree plus extra random edges."""
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0.0, spread, size=(n, 3))
    pairs = set()
    edges = []
    for j in range(1, n):
        i = int(rng.integers(0, j))
        pairs.add((i, j))
        edges.append((j, i) if rng.random() < 0.5 else (i, j))
    extra = n if extra_edges is None else extra_edges
    attempts = 0
    while extra > 0 and attempts < 100 * n:
        attempts += 1
        i, j = sorted(int(v) for v in rng.choice(n, size=2, replace=False))
        if (i, j) in pairs:
            continue
        pairs.add((i, j))
        edges.append((j, i) if rng.random() < 0.5 else (i, j))
        extra -= 1
    return LatticeGraph(pos, np.asarray(edges))


def random_mask(n: int, seed: int, fixed_fraction: float = 0.3) -> DofMask:
    """Random per-axis prescription with at least one prescribed node per axis."""
    rng = np.random.default_rng(seed)
    pres = rng.random((n, 3)) < fixed_fraction
    pres[rng.integers(0, n, size=3), [0, 1, 2]] = True
    vals = rng.normal(size=(n, 3))
    return DofMask(pres, vals)


@dataclass
class VerifyReport:
    x_p: float = np.inf
    b_q: float = np.inf
    equilibrium: float = np.inf
    error: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.error is None and max(self.x_p, self.b_q, self.equilibrium) <= TOLERANCE

    def lines(self) -> list[str]:
        out = [
            f"max relative discrepancy X_p:         {self.x_p:.3e}",
            f"max relative discrepancy B_q:         {self.b_q:.3e}",
            f"equilibrium residual (free, relative): {self.equilibrium:.3e}",
        ]
        out += [f"note: {n}" for n in self.notes]
        if self.error:
            out.append(f"error: {self.error}")
        out.append("PASS" if self.passed else "FAIL")
        return out


def _rel(a, b) -> float:
    scale = float(np.max(np.abs(b))) if np.size(b) else 0.0
    diff = float(np.max(np.abs(a - b))) if np.size(a) else 0.0
    return diff / scale if scale > 0 else diff


def compare(graph: LatticeGraph, mask: DofMask, ktilde) -> VerifyReport:
    """Solve one linearized system with both paths and report discrepancies."""
    rep = VerifyReport()
    ktilde = np.asarray(ktilde, dtype=float)
    snap = DenseSnapshot.build(graph.edges, graph.n, ktilde)
    try:
        sol = solve_system(assemble(graph.incidence, ktilde), mask)
    except NegativeStiffnessError as exc:
        rep.error = f"engine rejected stiffness: {exc}"
        return rep
    if sol.flagged:
        rep.notes.append(f"engine used the regularized solve on axes {sol.regularized}")
    try:
        X_d, B_d = dense_solve(snap, mask.prescribed, mask.values)
    except np.linalg.LinAlgError as exc:
        rep.error = f"dense oracle failed: {exc}"
        return rep

    free = ~mask.prescribed
    rep.x_p = _rel(sol.X[free], X_d[free])
    rep.b_q = _rel(sol.B[mask.prescribed], B_d[mask.prescribed])
    resid = (snap.At @ sol.X - sol.B)[free]
    scale = max(
        float(np.abs(snap.At).sum(axis=1).max()) * float(np.abs(sol.X).max()),
        float(np.max(np.abs(sol.B[free]), initial=0.0)),
    )
    rep.equilibrium = float(np.max(np.abs(resid), initial=0.0)) / (scale or 1.0)
    return rep
