"""Cyclic pentadiagonal linear systems.

The matrix is given by its five diagonals ``diags[j]`` (offsets -2..2), with
``A[i, (i + j - 2) % N] = diags[j, i]``.  The non-periodic banded part is
factored with LAPACK ``gbtrf``; the four wrap-around corner rows are handled
as a low-rank update through the Woodbury identity.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

OFFSETS = (-2, -1, 0, 1, 2)
KL = KU = 2
CAP_COND_MAX = 1e13


class LinearSolveError(RuntimeError):
    def __init__(self, message: str, condition: float = float("nan")):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


def cyclic_matvec(diags: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = x.size
    xp = np.concatenate((x[-2:], x, x[:2]))
    out = diags[2] * x
    for j, off in enumerate(OFFSETS):
        if off:
            out += diags[j] * xp[2 + off : 2 + off + n]
    return out


def to_dense(diags: np.ndarray) -> np.ndarray:
    n = diags.shape[1]
    A = np.zeros((n, n))
    rows = np.arange(n)
    for j, off in enumerate(OFFSETS):
        A[rows, (rows + off) % n] += diags[j]
    return A


def condition_estimate(diags: np.ndarray) -> float:
    n = diags.shape[1]
    if n > 512:
        return float("nan")
    with np.errstate(all="ignore"):
        return float(np.linalg.cond(to_dense(diags), 1))


class CyclicPentaSolver:
    """Factor once, solve many right-hand sides."""

    def __init__(self, diags: np.ndarray):
        diags = np.asarray(diags, dtype=float)
        n = diags.shape[1]
        if diags.shape != (5, n) or n < 5:
            raise ValueError("need five diagonals of length >= 5")
        self.diags = diags
        self.n = n
        # LAPACK band storage with KL extra rows for fill-in: ab[KL+KU+i-j, j] = A[i, j]
        ab = np.zeros((2 * KL + KU + 1, n))
        for j, off in enumerate(OFFSETS):
            # entry (i, i+off) for rows whose column stays inside [0, n)
            lo, hi = max(0, -off), n - max(0, off)
            ab[KL + KU - off, lo + off : hi + off] = diags[j, lo:hi]
        lu, piv, info = lapack.dgbtrf(ab, KL, KU)
        if info != 0:
            raise LinearSolveError(f"banded factorization failed (info={info})", condition_estimate(diags))
        self._lu, self._piv = lu, piv

        # corner entries: A = B + U V with U selecting rows {0, 1, n-2, n-1}
        self._rows = np.array([0, 1, n - 2, n - 1])
        V = np.zeros((4, n))
        V[0, n - 2] = diags[0, 0]
        V[0, n - 1] = diags[1, 0]
        V[1, n - 1] = diags[0, 1]
        V[2, 0] = diags[4, n - 2]
        V[3, 0] = diags[3, n - 1]
        V[3, 1] = diags[4, n - 1]
        self._V = V
        self._Z = None

    def _band_solve(self, b):
        x, info = lapack.dgbtrs(self._lu, KL, KU, b, self._piv)
        if info != 0:
            raise LinearSolveError(f"banded back-substitution failed (info={info})")
        return x

    def _prepare(self, b=None):
        # one back-substitution for the corner columns and (optionally) b
        cols = np.zeros((self.n, 5 if b is not None else 4))
        cols[self._rows, np.arange(4)] = 1.0
        if b is not None:
            cols[:, 4] = b
        sol = self._band_solve(cols)
        self._Z = sol[:, :4]
        cap = np.eye(4) + self._V @ self._Z
        # det A = det B det cap, so a singular A shows up here even when B is fine
        if not (np.all(np.isfinite(cap)) and np.linalg.cond(cap) < CAP_COND_MAX):
            raise LinearSolveError("singular periodic correction", condition_estimate(self.diags))
        self._cap_lu = np.linalg.inv(cap)
        return sol[:, 4] if b is not None else None

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self._Z is None:
            y = self._prepare(b)
        else:
            y = self._band_solve(b)
        return y - self._Z @ (self._cap_lu @ (self._V @ y))

    def backward_error(self, x: np.ndarray, b: np.ndarray) -> float:
        r = b - cyclic_matvec(self.diags, x)
        norm_a = float(np.max(np.sum(np.abs(self.diags), axis=0)))
        denom = norm_a * np.max(np.abs(x)) + np.max(np.abs(b))
        return float(np.max(np.abs(r)) / denom) if denom > 0 else 0.0


def solve_cyclic_penta(diags, b, *, method: str = "woodbury", tol: float = 1e-12) -> np.ndarray:
    """Solve ``A x = b`` for cyclic pentadiagonal ``A``; ``method="dense"`` uses LU on the full matrix."""
    b = np.asarray(b, dtype=float)
    if method == "dense":
        return np.linalg.solve(to_dense(np.asarray(diags, dtype=float)), b)
    solver = CyclicPentaSolver(diags)
    x = solver.solve(b)
    err = solver.backward_error(x, b)
    if not np.all(np.isfinite(x)) or err > tol:
        raise LinearSolveError(f"backward error {err:.2e} above tolerance {tol:.1e}", condition_estimate(diags))
    return x
