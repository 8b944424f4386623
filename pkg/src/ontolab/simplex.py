"""Dense phase-1 simplex with Bland's rule for ``A x = b, x >= 0``.

The auxiliary problem is

    minimize 1^T a   subject to   A x + a = b,  x >= 0,  a >= 0

(rows with negative b are sign-flipped first). Its optimum is the smallest
L1 constraint violation reachable with x >= 0. The optimal dual y satisfies
A^T y <= 0 and b^T y = optimum, so a positive optimum is a Farkas certificate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_EPS = 1e-11
RATIO_TIE = 1e-13


class IterationLimitError(RuntimeError):
    """The pivot cap was hit before phase 1 terminated; the answer is indeterminate."""


@dataclass
class PhaseOneResult:
    x: np.ndarray
    objective: float        # sum of artificial variables at the optimum
    dual: np.ndarray        # y in the original (unflipped) row orientation
    basis: np.ndarray
    iterations: int


def phase_one(A, b, max_iter: int = 50_000, eps: float = PIVOT_EPS) -> PhaseOneResult:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A * sign[:, None]
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b * sign
    # reduced costs of phase 1 with the artificials basic
    T[m, :n] = -T[:m, :n].sum(axis=0)
    T[m, -1] = -T[:m, -1].sum()
    basis = np.arange(n, n + m)

    it = 0
    while True:
        entering = np.flatnonzero(T[m, :-1] < -eps)
        if entering.size == 0:
            break
        if it >= max_iter:
            raise IterationLimitError(f"phase 1 did not terminate within {max_iter} pivots")
        e = entering[0]  # Bland: lowest index
        col = T[:m, e]
        rows = np.flatnonzero(col > eps)
        # phase 1 is bounded below by 0, so some row always qualifies
        ratios = T[rows, -1] / col[rows]
        tied = rows[ratios <= ratios.min() + RATIO_TIE]
        r = tied[np.argmin(basis[tied])]  # Bland: lowest basic index leaves

        T[r] /= T[r, e]
        f = T[:, e].copy()
        f[r] = 0.0
        nz = np.flatnonzero(f)
        T[nz] -= np.outer(f[nz], T[r])
        T[r, e] = 1.0
        T[nz, e] = 0.0
        basis[r] = e
        it += 1

    full = np.zeros(n + m)
    full[basis] = np.maximum(T[:m, -1], 0.0)
    # reduced cost of artificial j is 1 - y_j
    y = (1.0 - T[m, n:n + m]) * sign
    return PhaseOneResult(x=full[:n], objective=float(-T[m, -1]), dual=y,
                          basis=basis.copy(), iterations=it)
