"""Dense reference path for checking the sparse engine.

Everything here is rebuilt from plain edge lists and numbers with dense
numpy arithmetic; nothing is imported from the engine's assembly or solve
code, so agreement between the two is a meaningful check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class DenseSnapshot:
    A: np.ndarray
    K: np.ndarray
    At: np.ndarray

    @classmethod
    def build(cls, edges, n: int, ktilde) -> "DenseSnapshot":
        edges = np.asarray(edges, dtype=int)
        A = np.zeros((len(edges), n))
        for i, (first, second) in enumerate(edges):
            A[i, first] = 1.0
            A[i, second] = -1.0
        K = np.diag(np.asarray(ktilde, dtype=float))
        return cls(A, K, A.T @ K @ A)


def _split(prescribed_axis):
    pres = np.asarray(prescribed_axis, dtype=bool)
    return np.flatnonzero(~pres), np.flatnonzero(pres)


def dense_solve(snapshot: DenseSnapshot, prescribed, values):
    """Partitioned dense solve, axis by axis.

    Parameters
    ----------
    prescribed : (n, 3) bool
    values : (n, 3)
        Prescribed positions where ``prescribed``, applied forces elsewhere.

    Returns
    -------
    X, B : (n, 3) arrays
        Full unknown and force fields.
    """
    At = snapshot.At
    prescribed = np.asarray(prescribed, dtype=bool)
    values = np.asarray(values, dtype=float)
    n = At.shape[0]
    X = np.zeros((n, 3))
    B = np.zeros((n, 3))
    for a in range(3):
        p, q = _split(prescribed[:, a])
        X_q = values[q, a]
        B_p = values[p, a]
        if p.size:
            X_p = np.linalg.solve(At[np.ix_(p, p)], B_p - At[np.ix_(p, q)] @ X_q)
        else:
            X_p = np.zeros(0)
        X[p, a], X[q, a] = X_p, X_q
        B[p, a] = B_p
        B[q, a] = At[np.ix_(q, p)] @ X_p + At[np.ix_(q, q)] @ X_q
    return X, B


def dense_regularized(A11, rhs, theta: float) -> np.ndarray:
    """``(A11^T A11 + theta^2 I)^-1 A11^T rhs`` formed literally."""
    A11 = np.atleast_2d(np.asarray(A11, dtype=float))
    rhs = np.asarray(rhs, dtype=float)
    E = theta * np.eye(A11.shape[1])
    return np.linalg.solve(A11.T @ A11 + E.T @ E, A11.T @ rhs)


def svd_regularized(A11, rhs, theta: float) -> np.ndarray:
    """Same minimizer through SVD filter factors; stable when A11 is singular."""
    U, s, Vt = np.linalg.svd(np.atleast_2d(np.asarray(A11, dtype=float)))
    filt = s / (s**2 + theta**2)
    return Vt.T @ np.diag(filt) @ U.T @ np.asarray(rhs, dtype=float)


LABELS = ("compressive_elastic", "tensile_elastic", "plastic_plateau", "softening", "failed")


def single_bond_closed_form(x0, x1, x2, x3, f0, f1, e):
    """Force, regime label and support forces of a bond held at elongation ``e``.

    The support forces are those needed at (pulled end, anchored end),
    measured along the bond direction from anchor to pulled end.
    """
    if e < 0:
        force, label = f0 / x0 * e, LABELS[0]
    elif e < x1:
        force, label = f1 / x1 * e, LABELS[1]
    elif e < x2:
        force, label = f1, LABELS[2]
    elif e < x3:
        force, label = f1 - f1 * (e - x2) / (x3 - x2), LABELS[3]
    else:
        force, label = 0.0, LABELS[4]
    return force, label, (force, -force)
