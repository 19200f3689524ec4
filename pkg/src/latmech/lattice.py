"""Regular site-bond lattice of a truncated-octahedron (BCC) packing.

Sites sit on two interpenetrating simple-cubic sublattices: cell corners
and cell body centres.  Each site bonds to the eight sites of the other
sublattice across the hexagonal faces (family ``B1``, length
``sqrt(3)/2 * S``) and to the six nearest sites of its own sublattice
across the square faces (family ``B2``, length ``S``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import LatticeGraph

B1 = "B1"
B2 = "B2"


@dataclass(frozen=True)
class LatticeSpec:
    """Cell counts plus exactly one sizing input.

    ``cell_size`` is the cube edge S, ``quarter_diagonal`` the unit a with
    S = sqrt(8) a, ``grain_volume`` sizes S = (2 V)^(1/3), and
    ``triple_line`` sets a directly.
    """

    nx: int
    ny: int
    nz: int
    cell_size: float | None = None
    quarter_diagonal: float | None = None
    grain_volume: float | None = None
    triple_line: float | None = None

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        given = {
            k: v
            for k, v in (
                ("cell_size", self.cell_size),
                ("quarter_diagonal", self.quarter_diagonal),
                ("grain_volume", self.grain_volume),
                ("triple_line", self.triple_line),
            )
            if v is not None
        }
        if len(given) != 1:
            raise ValueError(f"exactly one sizing input is required, got {sorted(given) or 'none'}")
        (name, value), = given.items()
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")

    @property
    def S(self) -> float:
        if self.cell_size is not None:
            return float(self.cell_size)
        if self.grain_volume is not None:
            return (2.0 * self.grain_volume) ** (1.0 / 3.0)
        return math.sqrt(8.0) * self.a

    @property
    def a(self) -> float:
        if self.quarter_diagonal is not None:
            return float(self.quarter_diagonal)
        if self.triple_line is not None:
            return float(self.triple_line)
        return self.S / math.sqrt(8.0)

    @property
    def L1(self) -> float:
        return math.sqrt(3.0) / 2.0 * self.S

    @property
    def L2(self) -> float:
        return self.S


def expected_bond_counts(nx: int, ny: int, nz: int) -> dict[str, int]:
    """Closed-form B1/B2 totals for an open nx x ny x nz block."""
    b1 = 8 * nx * ny * nz
    corner = nx * (ny + 1) * (nz + 1) + (nx + 1) * ny * (nz + 1) + (nx + 1) * (ny + 1) * nz
    centre = (nx - 1) * ny * nz + nx * (ny - 1) * nz + nx * ny * (nz - 1)
    return {B1: b1, B2: corner + centre}


def build_bcc_lattice(spec: LatticeSpec) -> LatticeGraph:
    """Generate the open-boundary site-bond lattice described by ``spec``.

    Node numbering is lexicographic in (z, y, x), all corner sites first,
    then all body-centre sites.  Each bond is oriented from the higher to
    the lower node id and edges are sorted by (lower id, higher id).
    """
    nx, ny, nz = spec.nx, spec.ny, spec.nz
    S = spec.S

    cz, cy, cx = np.meshgrid(np.arange(nz + 1), np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
    corner_ijk = np.column_stack([cx.ravel(), cy.ravel(), cz.ravel()])
    bz, by, bx = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    centre_ijk = np.column_stack([bx.ravel(), by.ravel(), bz.ravel()])

    n_corner = corner_ijk.shape[0]
    positions = np.vstack([corner_ijk * S, (centre_ijk + 0.5) * S])

    def corner_id(i, j, k):
        return (k * (ny + 1) + j) * (nx + 1) + i

    def centre_id(i, j, k):
        return n_corner + (k * ny + j) * nx + i

    pairs: list[tuple[int, int]] = []
    fams: list[str] = []

    # hexagonal faces: body centre to the 8 corners of its cell
    for i, j, k in centre_ijk:
        c = centre_id(i, j, k)
        for di in (0, 1):
            for dj in (0, 1):
                for dk in (0, 1):
                    pairs.append((c, corner_id(i + di, j + dj, k + dk)))
                    fams.append(B1)

    # square faces: axis neighbours on each sublattice
    for ids, dims in (
        (corner_id, (nx + 1, ny + 1, nz + 1)),
        (centre_id, (nx, ny, nz)),
    ):
        for k in range(dims[2]):
            for j in range(dims[1]):
                for i in range(dims[0]):
                    here = ids(i, j, k)
                    if i + 1 < dims[0]:
                        pairs.append((here, ids(i + 1, j, k)))
                        fams.append(B2)
                    if j + 1 < dims[1]:
                        pairs.append((here, ids(i, j + 1, k)))
                        fams.append(B2)
                    if k + 1 < dims[2]:
                        pairs.append((here, ids(i, j, k + 1)))
                        fams.append(B2)

    p = np.asarray(pairs, dtype=np.int64)
    lo = p.min(axis=1)
    hi = p.max(axis=1)
    order = np.lexsort((hi, lo))
    edges = np.column_stack([hi[order], lo[order]])
    families = np.asarray(fams)[order]
    return LatticeGraph(positions, edges, families)
