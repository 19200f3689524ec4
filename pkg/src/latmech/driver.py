"""Displacement-controlled load stepping with regime fixed-point iteration.

Each load step repeats: classify every bond from its current elongation,
build the regime-wise stiffness, assemble and solve the partitioned linear
system for nodal displacements, recompute elongations.  The step has
converged when the regimes that produced the elongations are the regimes
those elongations classify into, and the elongations stopped moving.

Unknowns are displacements ``U`` from the reference positions, so the
unloaded lattice is an exact solution.  Boundary values in the
:class:`~latmech.linear_system.DofMask` are therefore displacements on
prescribed axes and applied forces elsewhere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .constitutive import (
    MIDPOINT,
    BondParams,
    Regime,
    axial_force,
    classify_regime,
    default_epsilon,
    ktilde_entry,
)
from .graph import LatticeGraph
from .linear_system import (
    DEFAULT_THETA,
    DofMask,
    RegularizerSpec,
    assemble,
    solve_system,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveOptions:
    max_regime_iters: int = 50
    tol_e: float | None = None  # None -> 1e-10 * min |b|
    tol_r: float = 1e-10
    mode: str = MIDPOINT
    epsilon: float | None = None  # None -> 1e-9 * max f1/x1
    theta: float = DEFAULT_THETA
    load_steps: int = 1
    irreversible: bool = True
    snap: float = 1e-12  # breakpoint snapping, relative to |b|

    def __post_init__(self):
        if self.max_regime_iters < 1:
            raise ValueError("max_regime_iters must be >= 1")
        if self.load_steps < 1:
            raise ValueError("load_steps must be >= 1")
        for name in ("tol_e", "epsilon"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not self.tol_r > 0 or not self.theta > 0 or self.snap < 0:
            raise ValueError("tol_r and theta must be positive, snap non-negative")

    def resolved(self, graph: LatticeGraph, params: BondParams) -> "SolveOptions":
        """Copy with data-dependent defaults filled in."""
        from dataclasses import replace

        return replace(
            self,
            tol_e=self.tol_e if self.tol_e is not None else 1e-10 * float(graph.reference_lengths.min()),
            epsilon=self.epsilon if self.epsilon is not None else default_epsilon(params),
        )

    def as_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


@dataclass
class StepState:
    """Converged (or best) iterate of one load step.

    ``nodal_forces`` are the applied forces on free axes and the reactions
    of the linearized system on prescribed axes; ``internal_forces`` is the
    divergence of the bond-law forces at the same configuration.
    """

    step: int
    load_factor: float
    displacement: np.ndarray
    positions: np.ndarray
    edge_vectors: np.ndarray
    elongation: np.ndarray
    regimes: np.ndarray
    ktilde: np.ndarray
    axial: np.ndarray
    forces: np.ndarray
    nodal_forces: np.ndarray
    internal_forces: np.ndarray
    failed: np.ndarray
    iterations: int
    converged: bool
    regularized: bool
    pinned: np.ndarray
    below_x0: np.ndarray
    history: list[dict] = field(default_factory=list, repr=False)


@dataclass
class SolveResult:
    steps: list[StepState]
    options: SolveOptions
    mask: DofMask
    initial_ktilde: np.ndarray
    failed_step: np.ndarray

    @property
    def final(self) -> StepState:
        return self.steps[-1]

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.steps)

    @property
    def reactions(self) -> np.ndarray:
        """Nodal forces at prescribed axes of the final step (zero elsewhere)."""
        return np.where(self.mask.prescribed, self.final.nodal_forces, 0.0)

    def damage(self) -> dict:
        return damage_metrics(self.final, self.initial_ktilde)

    def convergence_log(self) -> list[dict]:
        return [
            {
                "step": s.step,
                "load_factor": s.load_factor,
                "iterations": s.iterations,
                "converged": s.converged,
                "regularized": s.regularized,
                "pinned_edges": s.pinned.tolist(),
                "below_x0_edges": int(s.below_x0.sum()),
                "history": s.history,
            }
            for s in self.steps
        ]


def damage_metrics(state: StepState, initial_ktilde) -> dict:
    """Regime counts, failed edge ids and the fraction of stiffness left.

    The fraction is ``sum(min(k, k0)) / sum(k0)`` with ``k0`` the pristine
    stiffness, so regimes whose secant estimate exceeds the pristine one do
    not mask losses elsewhere.
    """
    k0 = np.asarray(initial_ktilde, dtype=float)
    k = np.asarray(state.ktilde, dtype=float)
    counts = np.bincount(state.regimes.astype(int), minlength=len(Regime))
    return {
        "regime_counts": {r.label: int(counts[r]) for r in Regime},
        "failed_count": int(state.failed.size),
        "softening_count": int(counts[Regime.SOFTENING]),
        "failed_edges": state.failed.tolist(),
        "stiffness_remaining": float(np.minimum(k, k0).sum() / k0.sum()),
    }


def _stiffness(regimes, params, opts) -> np.ndarray:
    # compressive secant ratios are negative; the displacement form needs
    # the restoring magnitude
    return np.abs(ktilde_entry(regimes, params, opts.mode, opts.epsilon).value)


class _Context:
    def __init__(self, graph: LatticeGraph, params: BondParams, opts: SolveOptions):
        if params.size not in (1, graph.m):
            raise ValueError(f"bond params cover {params.size} edges, graph has {graph.m}")
        if params.size == 1:
            params = params[np.zeros(graph.m, dtype=int)]
        if not np.allclose(params.ref_length, graph.reference_lengths, rtol=1e-9, atol=0):
            raise ValueError("bond params reference lengths disagree with the graph geometry")
        self.graph = graph
        self.params = params
        self.opts = opts.resolved(graph, params)
        self.snap = self.opts.snap * graph.reference_lengths
        self.reg = RegularizerSpec(self.opts.theta)

    def geometry(self, U):
        g = self.graph
        X = g.positions + U
        y = g.gradient(X)
        length = np.linalg.norm(y, axis=1)
        return X, y, length - g.reference_lengths

    def classify(self, e, failed_mask):
        regimes, below = classify_regime(e, self.params, self.snap)
        regimes = np.asarray(regimes, dtype=np.int8).copy()
        regimes[failed_mask] = Regime.FAILED
        return regimes, np.asarray(below)


def _solve_step(ctx: _Context, mask: DofMask, U0, failed_mask, step: int, load_factor: float) -> StepState:
    opts = ctx.opts
    m = ctx.graph.m
    _, _, e_prev = ctx.geometry(U0)
    regimes, _ = ctx.classify(e_prev, failed_mask)

    prev2 = np.full(m, -1, dtype=np.int8)
    flips = np.zeros(m, dtype=int)
    pinned = np.zeros(m, dtype=bool)
    history = []
    best = None

    for it in range(1, opts.max_regime_iters + 1):
        k = _stiffness(regimes, ctx.params, opts)
        sol = solve_system(assemble(ctx.graph.incidence, k), mask, ctx.reg)
        U = sol.X
        X, y, e = ctx.geometry(U)
        new, below = ctx.classify(e, failed_mask)
        new[pinned] = regimes[pinned]
        changed = new != regimes
        de = float(np.max(np.abs(e - e_prev))) if m else 0.0
        history.append({"iteration": it, "regime_changes": int(changed.sum()), "max_delta_e": de})

        candidate = (int(changed.sum()), it, regimes.copy(), k, sol, U, X, y, e, below)
        if best is None or candidate[0] < best[0]:
            best = candidate
        if not changed.any() and de <= opts.tol_e:
            best = candidate
            converged = True
            break

        flipped_back = changed & (new == prev2)
        flips[flipped_back] += 1
        newly_pinned = (flips >= 2) & ~pinned
        if newly_pinned.any():
            log.info("step %d: pinning oscillating edges %s", step, np.flatnonzero(newly_pinned).tolist())
            pinned |= newly_pinned
        prev2 = np.where(changed, regimes, prev2)
        regimes = new
        e_prev = e
    else:
        converged = False
        log.warning("step %d did not converge in %d regime iterations", step, opts.max_regime_iters)

    _, _, used, k, sol, U, X, y, e, below = best
    axial = axial_force(e, ctx.params)
    axial = np.where(used == Regime.FAILED, 0.0, axial)
    length = np.linalg.norm(y, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(length[:, None] > 0, y / length[:, None], 0.0)
    return StepState(
        step=step,
        load_factor=load_factor,
        displacement=U,
        positions=X,
        edge_vectors=y,
        elongation=e,
        regimes=used,
        ktilde=k,
        axial=axial,
        forces=axial[:, None] * unit,
        nodal_forces=sol.B,
        internal_forces=ctx.graph.divergence(axial[:, None] * unit),
        failed=np.flatnonzero(used == Regime.FAILED),
        iterations=it,
        converged=converged,
        regularized=sol.flagged,
        pinned=np.flatnonzero(pinned),
        below_x0=below,
        history=history,
    )


def _check_schedule(schedule: list[DofMask]) -> None:
    if not schedule:
        raise ValueError("empty load schedule")
    pattern = schedule[0].prescribed
    for mk in schedule[1:]:
        if not np.array_equal(mk.prescribed, pattern):
            raise ValueError("all steps of a schedule must prescribe the same node axes")
    vals = np.stack([np.zeros_like(schedule[0].values)] + [mk.values for mk in schedule])
    d = np.diff(vals, axis=0)
    if not ((d >= 0).all(axis=0) | (d <= 0).all(axis=0)).all():
        raise ValueError("load schedule must be monotone in every prescribed entry")


def run_load_steps(
    graph: LatticeGraph,
    params: BondParams,
    schedule: list[DofMask],
    options: SolveOptions | None = None,
) -> SolveResult:
    """Solve each boundary state of ``schedule`` in order, warm-starting each.

    Bonds that failed at a converged step stay failed afterwards when
    ``options.irreversible`` is set.
    """
    _check_schedule(schedule)
    ctx = _Context(graph, params, options or SolveOptions())
    pristine = np.full(graph.m, Regime.TENSILE_ELASTIC, dtype=np.int8)
    k0 = _stiffness(pristine, ctx.params, ctx.opts)

    U = np.zeros((graph.n, 3))
    failed_mask = np.zeros(graph.m, dtype=bool)
    failed_step = np.full(graph.m, -1, dtype=int)
    steps = []
    nsteps = len(schedule)
    for i, mk in enumerate(schedule, start=1):
        state = _solve_step(ctx, mk, U, failed_mask, i, i / nsteps)
        steps.append(state)
        U = state.displacement
        newly = (state.regimes == Regime.FAILED) & (failed_step < 0)
        failed_step[newly] = i
        if ctx.opts.irreversible and state.converged:
            failed_mask |= state.regimes == Regime.FAILED
    return SolveResult(steps, ctx.opts, schedule[-1], k0, failed_step)


def linear_schedule(mask: DofMask, load_steps: int) -> list[DofMask]:
    """Boundary values ramped linearly from zero to ``mask`` in ``load_steps`` steps."""
    return [mask.scaled(i / load_steps) for i in range(1, load_steps + 1)]


def solve_nonlinear(
    graph: LatticeGraph,
    params: BondParams,
    mask: DofMask,
    options: SolveOptions | None = None,
) -> SolveResult:
    """Ramp ``mask`` over ``options.load_steps`` steps and solve each."""
    options = options or SolveOptions()
    return run_load_steps(graph, params, linear_schedule(mask, options.load_steps), options)
