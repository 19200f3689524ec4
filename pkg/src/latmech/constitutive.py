"""Piecewise force-elongation law of a bond and its regime-wise secant stiffness.

The law in elongation ``e = |y| - |b|``::

    (f0/x0) e                 x0 <= e < 0      compressive elastic
    (f1/x1) e                  0 <= e < x1     tensile elastic
    f1                        x1 <= e < x2     plastic plateau
    f1 (x3 - e) / (x3 - x2)   x2 <= e < x3     softening
    0                         x3 <= e          failed

Every function here is vectorised: parameters and elongations may be
scalars or per-edge arrays that broadcast together.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from enum import IntEnum

import numpy as np


class Regime(IntEnum):
    COMPRESSIVE_ELASTIC = 0
    TENSILE_ELASTIC = 1
    PLASTIC_PLATEAU = 2
    SOFTENING = 3
    FAILED = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "Regime":
        for r, name in _LABELS.items():
            if name == label:
                return r
        raise ValueError(f"unknown regime {label!r}")


_LABELS = {
    Regime.COMPRESSIVE_ELASTIC: "compressive_elastic",
    Regime.TENSILE_ELASTIC: "tensile_elastic",
    Regime.PLASTIC_PLATEAU: "plastic_plateau",
    Regime.SOFTENING: "softening",
    Regime.FAILED: "failed",
}

MIDPOINT = "midpoint"
PAPER_LITERAL = "paper-literal"
KTILDE_MODES = (MIDPOINT, PAPER_LITERAL)


class InvalidBondParams(ValueError):
    pass


@dataclass(frozen=True)
class BondParams:
    """Breakpoints and force levels of the bond law, scalar or one per edge.

    Parameters
    ----------
    x0 : compressive elastic limit (negative elongation)
    x1 : onset of the plastic plateau
    x2 : onset of softening
    x3 : elongation at which the bond carries no force
    f0 : compressive force at ``x0`` (negative)
    f1 : plateau force (positive)
    ref_length : reference bond length ``|b|``
    """

    x0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    ref_length: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, np.asarray(getattr(self, f.name), dtype=float))
        self.validate()

    def validate(self) -> None:
        checks = (
            (self.x0 < 0, "x0 < 0"),
            (self.x1 > 0, "x1 > 0"),
            (self.x2 > self.x1, "x2 > x1"),
            (self.x3 > self.x2, "x3 > x2"),
            (self.f0 < 0, "f0 < 0"),
            (self.f1 > 0, "f1 > 0"),
            (self.ref_length > 0, "|b| > 0"),
            (self.ref_length + self.x0 > 0, "|b| + x0 > 0"),
        )
        for ok, what in checks:
            ok = np.asarray(ok)
            if not ok.all():
                where = np.flatnonzero(~ok.reshape(-1))
                raise InvalidBondParams(f"bond law requires {what}; violated at index {where[:5].tolist()}")

    @property
    def size(self) -> int:
        return int(np.broadcast(*(getattr(self, f.name) for f in fields(self))).size)

    def __getitem__(self, idx) -> "BondParams":
        """Parameters of a subset of edges."""
        m = self.size
        return BondParams(
            **{f.name: np.broadcast_to(getattr(self, f.name), (m,))[idx] for f in fields(self)}
        )

    def with_ref_length(self, ref_length) -> "BondParams":
        return replace(self, ref_length=ref_length)

    @classmethod
    def uniform(cls, ref_length, *, x0, x1, x2, x3, f0, f1) -> "BondParams":
        """Same law for every edge, with per-edge reference lengths."""
        L = np.asarray(ref_length, dtype=float)
        full = lambda v: np.full(L.shape, float(v))  # noqa: E731
        return cls(full(x0), full(x1), full(x2), full(x3), full(f0), full(f1), L)


def axial_force(e, p: BondParams) -> np.ndarray:
    """Signed axial force at elongation ``e`` (tension positive).

    Below ``x0`` the compressive line is extended; use
    :func:`classify_regime` to detect that case.
    """
    e = np.asarray(e, dtype=float)
    soft = p.f1 * (p.x3 - e) / (p.x3 - p.x2)
    out = np.select(
        [e < 0, e < p.x1, e < p.x2, e < p.x3],
        [(p.f0 / p.x0) * e, (p.f1 / p.x1) * e, np.broadcast_to(p.f1, np.shape(soft)), soft],
        default=0.0,
    )
    return out if out.ndim else out[()]


def _snap(e, p: BondParams, snap):
    if not np.any(snap):
        return e
    e = np.array(e, dtype=float, copy=True)
    for bp in (np.zeros_like(p.x1), p.x1, p.x2, p.x3):
        bp = np.broadcast_to(bp, e.shape)
        hit = np.abs(e - bp) <= snap
        e[hit] = bp[hit]
    return e


def classify_regime(e, p: BondParams, snap=0.0):
    """Regime of each elongation under half-open intervals ``[left, right)``.

    Parameters
    ----------
    e : array_like
        Elongations.
    p : BondParams
    snap : float or array_like, optional
        Elongations within ``snap`` of a breakpoint (0, x1, x2, x3) are
        treated as lying exactly on it.

    Returns
    -------
    regimes : ndarray of int
        :class:`Regime` codes.
    below_x0 : ndarray of bool
        True where ``e < x0``; such elongations are classified
        compressive elastic.
    """
    e = _snap(np.asarray(e, dtype=float), p, snap)
    regimes = np.select(
        [e < 0, e < p.x1, e < p.x2, e < p.x3],
        [Regime.COMPRESSIVE_ELASTIC, Regime.TENSILE_ELASTIC, Regime.PLASTIC_PLATEAU, Regime.SOFTENING],
        default=Regime.FAILED,
    ).astype(np.int8)
    below = np.asarray(e < p.x0)
    if regimes.ndim == 0:
        return Regime(int(regimes)), bool(below)
    return regimes, below


def secant_ratio_bounds(regime, p: BondParams):
    """Infimum and supremum of the signed ratio ``force / |y|`` over a regime.

    The ratio is ``axial_force(e) / (|b| + e)``.  On each interval it is
    monotone, so the bounds are its values at the interval ends.
    """
    r = np.asarray(regime)
    b = p.ref_length
    comp_lo = (p.f0 / p.x0) * (1.0 - b / (b + p.x0))
    elastic_hi = (p.f1 / p.x1) * (1.0 - b / (b + p.x1))
    plat_lo = p.f1 / (b + p.x2)
    plat_hi = p.f1 / (b + p.x1)
    zero = np.zeros(np.broadcast(r, b).shape)

    lower = np.select(
        [r == Regime.COMPRESSIVE_ELASTIC, r == Regime.PLASTIC_PLATEAU],
        [comp_lo + zero, plat_lo + zero],
        default=0.0,
    )
    upper = np.select(
        [r == Regime.TENSILE_ELASTIC, r == Regime.PLASTIC_PLATEAU, r == Regime.SOFTENING],
        [elastic_hi + zero, plat_hi + zero, plat_lo + zero],
        default=0.0,
    )
    if lower.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


def _paper_literal(r, p: BondParams):
    b = p.ref_length
    return np.select(
        [
            r == Regime.COMPRESSIVE_ELASTIC,
            r == Regime.TENSILE_ELASTIC,
            r == Regime.PLASTIC_PLATEAU,
            r == Regime.SOFTENING,
        ],
        [
            p.f0 / (2 * p.x0) * (1 - b / (b + p.x0)),
            p.f1 / (2 * p.x1) * (1 - b / (b + p.x1)),
            p.f1 * (p.x2 - p.x1) / (2 * (b + p.x1) * (b + p.x2)),
            # the softening form is kept as stated, including x3 - |b|
            p.f1 * (p.x3 - b) / (2 * (p.x3 + b) * (p.x2 + b)),
        ],
        default=0.0,
    )


@dataclass(frozen=True)
class StiffnessEntry:
    regime: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    value: np.ndarray
    epsilon: float


def ktilde_entry(regime, p: BondParams, mode: str = MIDPOINT, epsilon: float = 0.0) -> StiffnessEntry:
    """Regime-wise constant stand-in for the secant ratio.

    ``midpoint`` takes the centre of :func:`secant_ratio_bounds`;
    ``paper-literal`` uses the closed forms of the linearization theorem,
    which for the plateau and softening branches are half-widths rather than
    centres.  In both modes ``|value|`` is raised to at least ``epsilon``
    with the sign kept (zero becomes ``+epsilon``).
    """
    if mode not in KTILDE_MODES:
        raise ValueError(f"mode must be one of {KTILDE_MODES}, got {mode!r}")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    r = np.asarray(regime)
    lower, upper = secant_ratio_bounds(r, p)
    lower = np.asarray(lower)
    upper = np.asarray(upper)
    raw = 0.5 * (lower + upper) if mode == MIDPOINT else _paper_literal(r, p)
    raw = np.asarray(raw, dtype=float)
    sign = np.where(raw < 0, -1.0, 1.0)
    value = sign * np.maximum(np.abs(raw), epsilon)
    if value.ndim == 0:
        return StiffnessEntry(Regime(int(r)), float(lower), float(upper), float(value), epsilon)
    return StiffnessEntry(r, lower, upper, value, epsilon)


def default_epsilon(p: BondParams, scale: float = 1e-9) -> float:
    """Stiffness floor: ``scale`` times the largest tensile elastic slope."""
    return float(scale * np.max(p.f1 / p.x1))
