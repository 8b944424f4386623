"""Forced zeros, disjoint supports, the psi-dependent escape, and LP feasibility.

Statistics are arrays ``stats[i, j, k]``: probability of outcome i for the
product preparation (j, k), j, k in {0, 1}. Feasibility can also be asked
for a subset of preparations by passing a mapping ``{(j, k): probs}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

import numpy as np

from .ontic_models import (
    EpistemicDensity,
    OnticSpace,
    OntologicalModel,
    PsiDependentResponse,
    ResponseFunction,
    overlap_mass,
    predict,
    support,
    support_mask,
)
from .pbr_scenario import CONDITION_MAP, PREPARATION_LABELS, ZERO_SNAP
from .simplex import IterationLimitError, phase_one

DEFAULT_TOL = 1e-9


class InapplicableError(ValueError):
    """Inputs do not satisfy the premises of the argument being run."""


class IndeterminateError(RuntimeError):
    """The LP could not be decided (iteration cap); never reported as a verdict."""


@dataclass
class ForcingReport:
    zero_sets: dict[int, frozenset]             # outcome -> pairs (lam, lam') with P forced to 0
    simultaneous_set: frozenset                 # pairs where every outcome is forced
    contradiction: bool
    witness: tuple | None = None
    zero_conditions: list[tuple[int, int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "zero_conditions": [list(c) for c in self.zero_conditions],
            "zero_set_sizes": {str(i): len(s) for i, s in sorted(self.zero_sets.items())},
            "simultaneous_set": sorted([list(p) for p in self.simultaneous_set]),
            "contradiction": self.contradiction,
            "witness": list(self.witness) if self.witness is not None else None,
        }


@dataclass
class FeasibilityResult:
    status: str                                 # "feasible" | "infeasible"
    residual: float                             # max |A x - b| of the returned point
    phase_one_objective: float
    solution: ResponseFunction | None = None
    certificate: np.ndarray | None = None       # Farkas vector y: A^T y <= 0, b^T y > tol
    certificate_gap: float | None = None        # b^T y
    iterations: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "residual": self.residual,
            "phase_one_objective": self.phase_one_objective,
            "certificate_gap": self.certificate_gap,
            "certificate": None if self.certificate is None else self.certificate.tolist(),
            "iterations": self.iterations,
        }


def snap_zeros(statistics, snap: float = ZERO_SNAP) -> np.ndarray:
    stats = np.array(statistics, dtype=float)
    stats[np.abs(stats) < snap] = 0.0
    return stats


def _constraints(statistics) -> dict[tuple[int, int], np.ndarray]:
    if isinstance(statistics, Mapping):
        return {tuple(prep): snap_zeros(p) for prep, p in statistics.items()}
    stats = snap_zeros(statistics)
    if stats.ndim != 3 or stats.shape[1:] != (2, 2):
        raise ValueError(f"statistics must have shape (m, 2, 2), got {stats.shape}")
    return {(j, k): stats[:, j, k] for j, k in product(range(2), repeat=2)}


def forced_zeros(rho1: EpistemicDensity, rho2: EpistemicDensity, statistics,
                 eps: float = 0.0) -> ForcingReport:
    """Which response values are pinned to zero by the vanishing statistics.

    A vanishing statistic for (i, j, k) is a zero integral of a non-negative
    integrand, so P(xi_i | lam, lam') = 0 wherever rho_j(lam) rho_k(lam') > 0.
    Where every outcome is pinned, completeness cannot hold.
    """
    if rho1.space != rho2.space:
        raise ValueError("densities must share an ontic space")
    stats = snap_zeros(statistics)
    if stats.ndim != 3 or stats.shape[1:] != (2, 2):
        raise InapplicableError(f"statistics must have shape (m, 2, 2), got {stats.shape}")
    m = stats.shape[0]
    if m != len(CONDITION_MAP) or any(stats[i, j, k] != 0.0 for i, (j, k) in enumerate(CONDITION_MAP)):
        raise InapplicableError("statistics lack the four exact antidistinguishing zeros")
    zero_conds = [tuple(int(v) for v in c) for c in np.argwhere(stats == 0.0)]

    supports = (support(rho1, eps), support(rho2, eps))
    zero_sets: dict[int, frozenset] = {i: frozenset() for i in range(m)}
    for i, j, k in zero_conds:
        zero_sets[i] = zero_sets[i] | frozenset(product(supports[j], supports[k]))

    simultaneous = frozenset.intersection(*zero_sets.values())
    order = {lab: n for n, lab in enumerate(rho1.space.points)}
    witness = min(simultaneous, key=lambda p: (order[p[0]], order[p[1]])) if simultaneous else None
    return ForcingReport(zero_sets=zero_sets, simultaneous_set=simultaneous,
                         contradiction=bool(simultaneous), witness=witness,
                         zero_conditions=zero_conds)


def _lp_system(densities, constraints, m: int, L: int, active_pairs: np.ndarray):
    """Rows: completeness for each active pair, then one row per (i, j, k) statistic.

    Variables are P[i, pair] for active pairs only; inactive pairs carry no
    weight under any preparation and decouple from the statistics.
    """
    n_pairs = int(active_pairs.sum())
    n_var = m * n_pairs
    rows = []
    rhs = []
    for p in range(n_pairs):
        row = np.zeros(n_var)
        row[p::n_pairs] = 1.0
        rows.append(row)
        rhs.append(1.0)
    for (j, k), probs in constraints.items():
        w = np.outer(densities[j].weights, densities[k].weights).ravel()[active_pairs]
        for i in range(m):
            row = np.zeros(n_var)
            row[i * n_pairs:(i + 1) * n_pairs] = w
            rows.append(row)
            rhs.append(probs[i])
    return np.array(rows), np.array(rhs)


def _assemble(rho1, rho2, statistics):
    constraints = _constraints(statistics)
    m = len(next(iter(constraints.values())))
    L = len(rho1.space)
    densities = (rho1, rho2)
    used = np.zeros((L, L), dtype=bool)
    for j, k in constraints:
        used |= np.outer(support_mask(densities[j]), support_mask(densities[k]))
    active = used.ravel()
    A, b = _lp_system(densities, constraints, m, L, active)
    return A, b, active, m


def feasibility_lp(rho1: EpistemicDensity, rho2: EpistemicDensity, statistics,
                   tol: float = DEFAULT_TOL, max_iter: int = 50_000) -> FeasibilityResult:
    """Is there a psi-independent response reproducing ``statistics``?

    Unknowns are P(xi_i | lam, lam') >= 0 with completeness on every pair and
    one equality per statistic. Decided by phase-1 simplex; an equality counts
    as met when violated by at most ``tol``.
    """
    if rho1.space != rho2.space:
        raise ValueError("densities must share an ontic space")
    space = rho1.space
    L = len(space)
    A, b, active, m = _assemble(rho1, rho2, statistics)
    try:
        res = phase_one(A, b, max_iter=max_iter)
    except IterationLimitError as exc:
        raise IndeterminateError(str(exc)) from exc

    residual = float(np.abs(A @ res.x - b).max()) if A.size else 0.0
    if res.objective <= tol and residual <= tol:
        n_pairs = int(active.sum())
        table = np.full((m, L * L), 1.0 / m)
        x = res.x.reshape(m, n_pairs)
        # clean rounding so each pair is exactly a distribution
        x = np.clip(x, 0.0, None)
        x /= x.sum(axis=0, keepdims=True)
        table[:, active] = x
        solution = ResponseFunction((space, space), table.reshape(m, L, L))
        return FeasibilityResult("feasible", residual, res.objective, solution=solution,
                                 iterations=res.iterations)
    gap = float(b @ res.dual)
    return FeasibilityResult("infeasible", residual, res.objective, certificate=res.dual,
                             certificate_gap=gap, iterations=res.iterations)


def verify_certificate(rho1, rho2, statistics, y: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """Farkas check: A^T y <= tol entrywise and b^T y > tol."""
    A, b, _, _ = _assemble(rho1, rho2, statistics)
    return bool((A.T @ y <= tol).all() and b @ y > tol)


def reproduction_error(model: OntologicalModel, statistics) -> float:
    """max over constrained (i, j, k) of |predict - statistic|."""
    worst = 0.0
    for (j, k), probs in _constraints(statistics).items():
        prep = (PREPARATION_LABELS[j], PREPARATION_LABELS[k])
        for i, p in enumerate(probs):
            worst = max(worst, abs(predict(model, prep, i) - p))
    return worst


def model_from_solution(rho1, rho2, response) -> OntologicalModel:
    return OntologicalModel({PREPARATION_LABELS[0]: rho1, PREPARATION_LABELS[1]: rho2}, response)


def labeling_assignment(rho1: EpistemicDensity, rho2: EpistemicDensity, statistics) -> ResponseFunction:
    """The deterministic response available when supports are disjoint.

    Each ontic point is read as a label of the preparation whose support
    contains it, and P(xi_i | lam, lam') = stats[i, j(lam), k(lam')].
    """
    if overlap_mass(rho1, rho2) > 0:
        raise InapplicableError("supports overlap; no labeling exists")
    stats = snap_zeros(statistics)
    m = stats.shape[0]
    L = len(rho1.space)
    label = np.where(support_mask(rho2), 1, 0)
    table = np.empty((m, L, L))
    for a, b in product(range(L), repeat=2):
        table[:, a, b] = stats[:, label[a], label[b]]
    return ResponseFunction((rho1.space, rho1.space), table)


def psi_dependent_escape(statistics, space: OnticSpace | None = None) -> PsiDependentResponse:
    """Response reproducing every statistic by reading the preparation directly.

    P(xi_i | Psi_j, Psi_k, lam, lam') = stats[i, j, k] whatever lam is, so any
    densities work, including identical ones.
    """
    stats = snap_zeros(statistics)
    if space is None:
        space = OnticSpace(("lam",))
    L = len(space)
    tables = {}
    for j, k in product(range(2), repeat=2):
        prep = (PREPARATION_LABELS[j], PREPARATION_LABELS[k])
        tables[prep] = np.broadcast_to(stats[:, j, k][:, None, None], (stats.shape[0], L, L))
    return PsiDependentResponse((space, space), tables)


def escape_model(statistics, density: EpistemicDensity | None = None) -> OntologicalModel:
    """psi-dependent model where both preparations share one density."""
    if density is None:
        density = EpistemicDensity.uniform(OnticSpace(("lam",)))
    response = psi_dependent_escape(statistics, density.space)
    return OntologicalModel({PREPARATION_LABELS[0]: density, PREPARATION_LABELS[1]: density},
                            response, "psi_dependent")


@dataclass
class PoorMansReport:
    response_vanishes_on_support: bool
    inclusion_holds: bool
    contradiction: bool
    inclusion_refuted: bool
    predicted_p_psi1: float
    mass_outside: float
    witness: object | None

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["witness"] = None if self.witness is None else str(self.witness)
        return d


def poor_mans_check(rho_psi: EpistemicDensity, rho_psi1: EpistemicDensity,
                    response: ResponseFunction, x0_index: int, p_psi: float, p_psi1: float,
                    tol: float = DEFAULT_TOL) -> PoorMansReport:
    """Support inclusion against an interference null.

    With P(x0 | Psi) = 0 reproduced by a psi-independent response, the
    response vanishes on supp(rho_Psi). If supp(rho_Psi1) sat inside it, the
    predicted P(x0 | Psi1) would be 0, contradicting p_psi1 > 0.
    """
    if abs(p_psi) > ZERO_SNAP or p_psi1 <= 0:
        raise InapplicableError("need p_psi = 0 and p_psi1 > 0")
    if rho_psi.space != rho_psi1.space or len(response.spaces) != 1 or response.spaces[0] != rho_psi.space:
        raise InapplicableError("densities and single-system response must share one ontic space")
    r = response.table[x0_index]
    predicted_psi = float(r @ rho_psi.weights)
    if abs(predicted_psi - p_psi) > tol:
        raise InapplicableError(f"response predicts {predicted_psi:.3e} for Psi, not the null")

    on_psi = support_mask(rho_psi)
    vanishes = bool(np.all(r[on_psi] <= tol))
    outside = support_mask(rho_psi1) & ~on_psi
    inclusion = not outside.any()
    predicted_psi1 = float(r @ rho_psi1.weights)
    contradiction = inclusion and p_psi1 > tol
    witness = rho_psi.space.points[int(np.flatnonzero(outside)[0])] if outside.any() else None
    return PoorMansReport(
        response_vanishes_on_support=vanishes,
        inclusion_holds=inclusion,
        contradiction=contradiction,
        inclusion_refuted=contradiction or not inclusion,
        predicted_p_psi1=predicted_psi1,
        mass_outside=float(rho_psi1.weights[outside].sum()),
        witness=witness,
    )


def random_density_pair(space: OnticSpace, rng: np.random.Generator, overlapping: bool,
                        min_weight: float = 0.05) -> tuple[EpistemicDensity, EpistemicDensity]:
    """Two random densities with either disjoint or intersecting supports.

    Nonzero weights are drawn from U(min_weight, 1) before normalizing, so
    every support point carries a non-negligible share of mass.
    """
    L = len(space)
    perm = rng.permutation(L)
    w1 = np.zeros(L)
    w2 = np.zeros(L)
    if overlapping:
        common = perm[:rng.integers(1, L + 1)]
        rest = perm[len(common):]
        extra = rng.random(len(rest))
        s1 = np.concatenate([common, rest[extra < 1 / 3]])
        s2 = np.concatenate([common, rest[extra > 2 / 3]])
    else:
        if L < 2:
            raise ValueError("disjoint supports need at least two ontic points")
        cut = rng.integers(1, L)
        s1, s2 = perm[:cut], perm[cut:]
        # optionally leave some points in neither support
        s2 = s2[: max(1, rng.integers(1, len(s2) + 1))]
    w1[s1] = rng.uniform(min_weight, 1.0, len(s1))
    w2[s2] = rng.uniform(min_weight, 1.0, len(s2))
    return EpistemicDensity.normalized(space, w1), EpistemicDensity.normalized(space, w2)


@dataclass
class TrialRecord:
    size: int
    trial: int
    overlap: float
    status: str
    contradiction: bool
    residual: float
    reproduction_error: float | None

    @property
    def theorem_pattern_ok(self) -> bool:
        if self.overlap > 1e-9:
            return self.status == "infeasible"
        if self.overlap == 0:
            return self.status == "feasible" and self.reproduction_error is not None \
                and self.reproduction_error <= DEFAULT_TOL
        return True

    @property
    def forcing_agrees(self) -> bool:
        return self.contradiction == (self.status == "infeasible")


def theorem_sweep(statistics, sizes=(2, 4, 8, 16), trials: int = 100, seed: int = 0,
                  tol: float = DEFAULT_TOL) -> list[TrialRecord]:
    """Random density pairs per grid size, alternating overlapping and disjoint supports."""
    records = []
    for size in sizes:
        space = OnticSpace.grid(size)
        rng = np.random.default_rng([seed, size])
        for t in range(trials):
            rho1, rho2 = random_density_pair(space, rng, overlapping=(t % 2 == 0))
            res = feasibility_lp(rho1, rho2, statistics, tol=tol)
            forcing = forced_zeros(rho1, rho2, statistics)
            err = None
            if res.feasible:
                err = reproduction_error(model_from_solution(rho1, rho2, res.solution), statistics)
            records.append(TrialRecord(size, t, overlap_mass(rho1, rho2), res.status,
                                       forcing.contradiction, res.residual, err))
    return records
