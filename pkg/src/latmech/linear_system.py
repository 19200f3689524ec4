"""Assembly of the linearized operator and its partitioned solution.

The scalar operator ``At = A.T @ diag(k) @ A`` acts identically on the x,
y and z columns of a nodal field.  Per axis the nodes split into free ones
(force given, position unknown) and prescribed ones (position given,
reaction unknown)::

    At11 Xp = Bp - At12 Xq          solved for Xp
    Bq      = At21 Xp + At22 Xq     recovered afterwards

Axes that share the same free/prescribed split share one factorization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

AXES = "xyz"
DEFAULT_THETA = 1e-8
# condition numbers beyond this are treated as singular
COND_LIMIT = 1.0 / (100.0 * np.finfo(float).eps)


class NegativeStiffnessError(ValueError):
    """A negative stiffness reached assembly."""


class SingularSystemError(np.linalg.LinAlgError):
    """The free-free block cannot be inverted reliably."""


class BoundaryError(ValueError):
    """Boundary prescription violating the exclusion principle or shape."""


@dataclass(frozen=True)
class DofMask:
    """Per node and axis: either a prescribed position or a prescribed force.

    ``prescribed[j, a]`` selects which; ``values[j, a]`` holds the position
    (or displacement, depending on the unknowns being solved for) where
    prescribed and the applied force elsewhere.
    """

    prescribed: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pres = np.asarray(self.prescribed, dtype=bool)
        vals = np.asarray(self.values, dtype=float)
        if pres.ndim != 2 or pres.shape[1] != 3 or vals.shape != pres.shape:
            raise BoundaryError(f"mask arrays must both be (n, 3); got {pres.shape} and {vals.shape}")
        if not pres.any():
            raise BoundaryError("system has no prescribed displacement")
        if not np.isfinite(vals).all():
            raise BoundaryError("boundary values must be finite")
        pres = pres.copy()
        vals = vals.copy()
        pres.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "prescribed", pres)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.prescribed.shape[0]

    @classmethod
    def from_nodes(cls, n: int, fixed_nodes, fixed_values, forces=None) -> "DofMask":
        """All three axes of ``fixed_nodes`` prescribed; other nodes loaded by ``forces``."""
        fixed_nodes = np.asarray(fixed_nodes, dtype=int)
        pres = np.zeros((n, 3), dtype=bool)
        pres[fixed_nodes] = True
        vals = np.zeros((n, 3))
        vals[fixed_nodes] = np.asarray(fixed_values, dtype=float).reshape(len(fixed_nodes), 3)
        if forces is not None:
            free = np.flatnonzero(~pres.all(axis=1))
            vals[free] = np.asarray(forces, dtype=float).reshape(len(free), 3)
        return cls(pres, vals)

    def scaled(self, factor: float) -> "DofMask":
        return DofMask(self.prescribed, self.values * factor)


@dataclass(frozen=True)
class AssembledSystem:
    """``At = A.T diag(k) A`` with the diagonal it was built from."""

    operator: sp.csr_matrix
    ktilde: np.ndarray

    @property
    def n(self) -> int:
        return self.operator.shape[0]


@dataclass(frozen=True)
class RegularizerSpec:
    """Tikhonov term ``E = theta * I`` on the free unknowns."""

    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    def matrix(self, size: int) -> sp.csr_matrix:
        return (self.theta * sp.identity(size, format="csr"))


@dataclass
class Blocks:
    """One free/prescribed split and the columns (axes) that use it."""

    axes: tuple[int, ...]
    free: np.ndarray
    fixed: np.ndarray
    A11: sp.csc_matrix
    A12: sp.csr_matrix
    A21: sp.csr_matrix
    A22: sp.csr_matrix
    B_p: np.ndarray
    X_q: np.ndarray
    _rhs: np.ndarray | None = field(default=None, repr=False)

    @property
    def rhs(self) -> np.ndarray:
        """``B_p - A12 X_q``."""
        if self._rhs is None:
            self._rhs = self.B_p - np.asarray(self.A12 @ self.X_q)
        return self._rhs

    @property
    def empty(self) -> bool:
        return self.free.size == 0


def assemble(A: sp.spmatrix, ktilde) -> AssembledSystem:
    """Form ``A.T @ diag(ktilde) @ A`` as a canonical CSR matrix."""
    k = np.asarray(ktilde, dtype=float)
    if k.shape != (A.shape[0],):
        raise ValueError(f"need {A.shape[0]} stiffness entries, got shape {k.shape}")
    if not np.isfinite(k).all():
        raise NegativeStiffnessError("non-finite stiffness entry")
    if (k < 0).any():
        i = int(np.flatnonzero(k < 0)[0])
        raise NegativeStiffnessError(f"stiffness of edge {i} is negative ({k[i]!r})")
    A = sp.csr_matrix(A)
    op = (A.T @ sp.diags(k) @ A).tocsr()
    op.sum_duplicates()
    op.sort_indices()
    # symmetrize exactly: both triangles come from the same products,
    # but summation order inside the sparse product is not guaranteed
    op = ((op + op.T) * 0.5).tocsr()
    op.sort_indices()
    k = k.copy()
    k.setflags(write=False)
    return AssembledSystem(op, k)


def partition(system: AssembledSystem, mask: DofMask) -> list[Blocks]:
    """Split the operator by the mask; one :class:`Blocks` per distinct split."""
    if mask.n != system.n:
        raise BoundaryError(f"mask covers {mask.n} nodes, system has {system.n}")
    op = system.operator
    groups: dict[bytes, list[int]] = {}
    for a in range(3):
        groups.setdefault(mask.prescribed[:, a].tobytes(), []).append(a)

    out = []
    for key, axes in groups.items():
        pres = mask.prescribed[:, axes[0]]
        free = np.flatnonzero(~pres)
        fixed = np.flatnonzero(pres)
        rows_p = op[free]
        rows_q = op[fixed]
        out.append(
            Blocks(
                axes=tuple(axes),
                free=free,
                fixed=fixed,
                A11=rows_p[:, free].tocsc(),
                A12=rows_p[:, fixed].tocsr(),
                A21=rows_q[:, free].tocsr(),
                A22=rows_q[:, fixed].tocsr(),
                B_p=mask.values[np.ix_(free, axes)],
                X_q=mask.values[np.ix_(fixed, axes)],
            )
        )
    return out


def _factorize(M: sp.spmatrix):
    M = sp.csc_matrix(M)
    return spla.splu(
        M,
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options={"SymmetricMode": True},
    )


def condition_estimate(M: sp.spmatrix, lu=None) -> float:
    """1-norm condition number estimate of a square sparse matrix."""
    size = M.shape[0]
    if size == 0:
        return 1.0
    norm = spla.norm(M, 1)
    if size <= 8:
        dense = M.toarray()
        try:
            return float(norm * np.linalg.norm(np.linalg.inv(dense), 1))
        except np.linalg.LinAlgError:
            return np.inf
    if lu is None:
        lu = _factorize(M)
    op = spla.LinearOperator(
        (size, size),
        matvec=lu.solve,
        rmatvec=lambda v: lu.solve(v, trans="T"),
        dtype=float,
    )
    return float(norm * spla.onenormest(op))


def solve_free(blocks: Blocks) -> np.ndarray:
    """Direct solution of ``A11 Xp = Bp - A12 Xq``.

    Raises
    ------
    SingularSystemError
        If ``A11`` is singular, too ill-conditioned, or the residual check
        fails.  Callers fall back to :func:`solve_regularized`.
    """
    rhs = blocks.rhs
    if blocks.empty:
        return np.zeros((0, rhs.shape[1]))
    try:
        lu = _factorize(blocks.A11)
    except RuntimeError as exc:  # SuperLU reports exact singularity this way
        raise SingularSystemError(str(exc)) from exc
    cond = condition_estimate(blocks.A11, lu)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(f"free block condition estimate {cond:.3e} exceeds {COND_LIMIT:.3e}")
    X_p = lu.solve(np.asarray(rhs, dtype=float))
    res = np.abs(np.asarray(blocks.A11 @ X_p) - rhs)
    bound = 1e-10 * (1.0 + np.linalg.norm(rhs, axis=0))
    if (np.linalg.norm(res, axis=0) > bound).any():
        raise SingularSystemError("residual check failed for the direct solve")
    return X_p


def solve_regularized(blocks: Blocks, reg: RegularizerSpec | None = None) -> np.ndarray:
    """Minimizer of ``|rhs - A11 Z|^2 + |E Z|^2`` with ``E = theta I``.

    The minimizer solves ``(A11^T A11 + E^T E) Z = A11^T rhs``.  Forming that
    matrix squares the condition number and, for theta near 1e-8, rounds
    ``theta^2`` away entirely, so the equivalent augmented system ::

        [ theta I      A11      ] [ r / theta ]   [ rhs ]
        [ A11^T   -theta I      ] [     Z     ] = [  0  ]

    is factorized instead (``r`` is the residual).
    """
    reg = reg or RegularizerSpec()
    rhs = np.asarray(blocks.rhs, dtype=float)
    if blocks.empty:
        return np.zeros((0, rhs.shape[1]))
    A11 = sp.csc_matrix(blocks.A11)
    p = A11.shape[0]
    t = reg.theta
    eye = sp.identity(p, format="csc")
    K = sp.bmat([[t * eye, A11], [A11.T, -t * eye]], format="csc")
    lu = spla.splu(K, permc_spec="COLAMD")
    sol = lu.solve(np.vstack([rhs, np.zeros_like(rhs)]))
    return sol[p:]


def recover_reactions(blocks: Blocks, X_p) -> np.ndarray:
    """``B_q = A21 X_p + A22 X_q``."""
    return np.asarray(blocks.A21 @ X_p) + np.asarray(blocks.A22 @ blocks.X_q)


def h1_objective(blocks: Blocks, Z, theta: float) -> float:
    r = blocks.rhs - np.asarray(blocks.A11 @ Z)
    return float(np.sum(r * r) + theta**2 * np.sum(np.asarray(Z) ** 2))


@dataclass
class LinearSolution:
    X: np.ndarray
    B: np.ndarray
    regularized: list[tuple[int, ...]]

    @property
    def flagged(self) -> bool:
        return bool(self.regularized)


def solve_system(
    system: AssembledSystem,
    mask: DofMask,
    reg: RegularizerSpec | None = None,
    force_regularized: bool = False,
) -> LinearSolution:
    """Partition, solve each split (direct first, regularized fallback), recover reactions.

    Returns the full nodal unknown field ``X`` and force field ``B`` with
    prescribed entries copied from the mask.
    """
    reg = reg or RegularizerSpec()
    X = np.zeros((system.n, 3))
    B = np.zeros((system.n, 3))
    regularized = []
    for blk in partition(system, mask):
        X_p = None
        if not force_regularized:
            try:
                X_p = solve_free(blk)
            except SingularSystemError as exc:
                log.info("axes %s: direct solve rejected (%s); using regularized solve", blk.axes, exc)
        if X_p is None:
            X_p = solve_regularized(blk, reg)
            regularized.append(blk.axes)
        cols = list(blk.axes)
        X[np.ix_(blk.free, cols)] = X_p
        X[np.ix_(blk.fixed, cols)] = blk.X_q
        B[np.ix_(blk.free, cols)] = blk.B_p
        B[np.ix_(blk.fixed, cols)] = recover_reactions(blk, X_p)
    return LinearSolution(X, B, regularized)
