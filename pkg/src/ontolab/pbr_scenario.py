"""The two-qubit scenario: preparations |0>, |+> and an antidistinguishing basis.

Outcome xi_i must annihilate one of the four product preparations; the
assignment follows ``CONDITION_MAP``: xi_1 _|_ psi1.psi1, xi_2 _|_ psi1.psi2,
xi_3 _|_ psi2.psi1, xi_4 _|_ psi2.psi2.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import expm

from .hilbert import (
    NORM_TOL,
    RankDeficientError,
    ORTHO_TOL,
    ProjectiveMeasurement,
    StateVector,
    born_probability,
    inner_product,
    orthonormal_extension,
    tensor_product,
)

# (j, k) preparation pair, 0-based, annihilated by outcome i
CONDITION_MAP: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))
PREPARATION_LABELS = ("psi1", "psi2")
ZERO_SNAP = 1e-12


class MeasurementConstructionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PBRScenario:
    psi1: StateVector
    psi2: StateVector
    measurement: ProjectiveMeasurement
    condition_map: tuple[tuple[int, int], ...] = CONDITION_MAP

    @property
    def states(self) -> tuple[StateVector, StateVector]:
        return (self.psi1, self.psi2)

    def product_state(self, j: int, k: int) -> StateVector:
        return tensor_product(self.states[j], self.states[k])

    def condition_residuals(self) -> np.ndarray:
        """|<xi_i | psi_j psi_k>| for each assigned (i, j, k)."""
        return np.array([abs(inner_product(self.measurement[i], self.product_state(j, k)))
                         for i, (j, k) in enumerate(self.condition_map)])

    def to_dict(self) -> dict:
        def cplx(v: StateVector):
            return [[float(a.real), float(a.imag)] for a in v.amplitudes]

        stats = quantum_statistics(self)
        return {
            "states": {"psi1": cplx(self.psi1), "psi2": cplx(self.psi2)},
            "basis": [cplx(xi) for xi in self.measurement],
            "condition_map": [list(c) for c in self.condition_map],
            "statistics": stats.reshape(len(self.measurement), -1).tolist(),
            "statistics_columns": [f"{PREPARATION_LABELS[j]}*{PREPARATION_LABELS[k]}"
                                   for j in range(2) for k in range(2)],
            "max_condition_residual": float(self.condition_residuals().max()),
            "completeness_residual": self.measurement.completeness_residual(),
        }


def build_states() -> tuple[StateVector, StateVector]:
    s = 1 / np.sqrt(2)
    return StateVector([1.0, 0.0]), StateVector([s, s])


def _condition_vectors(psi1: StateVector, psi2: StateVector) -> np.ndarray:
    states = (psi1, psi2)
    return np.array([tensor_product(states[j], states[k]).amplitudes for j, k in CONDITION_MAP])


def _refine(rows: np.ndarray, targets: np.ndarray, max_iter: int, tol: float) -> np.ndarray:
    """Gauss-Newton on the orthogonal group: rows <- expm(A) rows, A skew.

    Minimum-norm steps drive r_i = <row_i|target_i> to zero while every
    iterate stays exactly orthonormal (up to rounding).
    """
    n = rows.shape[0]
    generators = []
    for a, b in combinations(range(n), 2):
        g = np.zeros((n, n))
        g[a, b], g[b, a] = 1.0, -1.0
        generators.append(g)
    for _ in range(max_iter):
        r = np.einsum("ij,ij->i", rows.conj(), targets)
        if np.abs(r).max() < tol:
            return rows
        jac = np.array([np.einsum("ij,ij->i", (g @ rows).conj(), targets) for g in generators]).T
        step = -np.linalg.pinv(jac) @ r
        rows = expm(np.tensordot(step.real, generators, axes=1)) @ rows
    r = np.einsum("ij,ij->i", rows.conj(), targets)
    if np.abs(r).max() >= tol:
        raise MeasurementConstructionError(
            f"orthogonality refinement stalled at residual {np.abs(r).max():.3e}")
    return rows


def build_measurement(psi1: StateVector | None = None, psi2: StateVector | None = None,
                      max_iter: int = 200) -> ProjectiveMeasurement:
    """Four orthonormal outcomes, each orthogonal to its assigned product preparation.

    Seeds: outcome i starts from the first standard basis vector e_k (in index
    order) whose projection onto the orthogonal complement of its product
    state is independent of the seeds already chosen. The seeds are completed
    to an orthonormal basis by Gram-Schmidt, then rotated by real Gauss-Newton
    steps until all four conditions hold to 1e-15. Fully deterministic.
    """
    if psi1 is None or psi2 is None:
        psi1, psi2 = build_states()
    targets = _condition_vectors(psi1, psi2)
    dim = targets.shape[1]
    seeds: list[StateVector] = []
    for v in targets:
        for k in range(dim):
            e = np.zeros(dim, dtype=np.complex128)
            e[k] = 1.0
            w = e - v * np.vdot(v, e)
            if np.linalg.norm(w) < 0.5:
                continue
            try:
                orthonormal_extension(seeds + [StateVector.normalized(w)], dim)
            except RankDeficientError:
                continue
            seeds.append(StateVector.normalized(w))
            break
        else:
            raise MeasurementConstructionError("no independent seed for an outcome")
    basis = orthonormal_extension(seeds, dim)
    rows = np.array([b.amplitudes for b in basis])
    if np.abs(rows.imag).max() == 0 and np.abs(targets.imag).max() == 0:
        rows = rows.real
    rows = _refine(rows, targets.real if np.isrealobj(rows) else targets, max_iter, 1e-15)
    measurement = ProjectiveMeasurement.from_rows(rows)

    residual = max(abs(np.vdot(measurement[i].amplitudes, v)) for i, v in enumerate(targets))
    if residual >= NORM_TOL or measurement.completeness_residual() >= ORTHO_TOL:
        raise MeasurementConstructionError(
            f"no orthonormal completion met the conditions (residual {residual:.3e})")
    return measurement


def build_scenario() -> PBRScenario:
    psi1, psi2 = build_states()
    return PBRScenario(psi1, psi2, build_measurement(psi1, psi2))


def quantum_statistics(scenario: PBRScenario, snap: float = ZERO_SNAP) -> np.ndarray:
    """Born table ``P[i, j, k] = |<xi_i | psi_j (x) psi_k>|^2``.

    Entries below ``snap`` are set to exactly 0: they are analytic zeros.
    """
    m = len(scenario.measurement)
    table = np.zeros((m, 2, 2))
    for j in range(2):
        for k in range(2):
            prep = scenario.product_state(j, k)
            for i in range(m):
                table[i, j, k] = born_probability(scenario.measurement[i], prep)
    table[table < snap] = 0.0
    return table
