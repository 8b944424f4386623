"""Ontological models over finite ontic spaces.

Integrals over hidden variables become sums over grid points. A response
table has one leading outcome axis followed by one axis per subsystem, so a
two-system response ``P(xi_i | lam, lam')`` has shape ``(m, L, L')``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

SUM_TOL = 1e-12
NUMERIC_EPS = 1e-12


class UnknownPreparationError(KeyError):
    pass


@dataclass(frozen=True)
class OnticSpace:
    points: tuple[Hashable, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        if len(pts) < 1:
            raise ValueError("ontic space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("ontic labels must be unique")
        object.__setattr__(self, "points", pts)

    @classmethod
    def grid(cls, size: int, prefix: str = "l") -> "OnticSpace":
        return cls(tuple(f"{prefix}{n}" for n in range(size)))

    def __len__(self):
        return len(self.points)

    def index(self, label) -> int:
        return self.points.index(label)


def _readonly(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EpistemicDensity:
    space: OnticSpace
    weights: np.ndarray

    def __post_init__(self):
        w = _readonly(self.weights)
        if w.shape != (len(self.space),):
            raise ValueError(f"expected {len(self.space)} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or (w < 0).any():
            raise ValueError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, space: OnticSpace, weights) -> "EpistemicDensity":
        w = np.asarray(weights, dtype=float)
        return cls(space, w / w.sum())

    @classmethod
    def point_mass(cls, space: OnticSpace, label) -> "EpistemicDensity":
        w = np.zeros(len(space))
        w[space.index(label)] = 1.0
        return cls(space, w)

    @classmethod
    def uniform(cls, space: OnticSpace) -> "EpistemicDensity":
        return cls(space, np.full(len(space), 1.0 / len(space)))

    def mix(self, other: "EpistemicDensity", alpha: float) -> "EpistemicDensity":
        """alpha*self + (1-alpha)*other."""
        _same_space(self, other)
        return EpistemicDensity.normalized(self.space, alpha * self.weights + (1 - alpha) * other.weights)


def _same_space(a: EpistemicDensity, b: EpistemicDensity) -> None:
    if a.space != b.space:
        raise ValueError("densities live on different ontic spaces")


def _check_response_table(table: np.ndarray) -> None:
    if table.ndim < 2:
        raise ValueError("response table needs an outcome axis and at least one ontic axis")
    if not np.all(np.isfinite(table)) or (table < -SUM_TOL).any() or (table > 1 + SUM_TOL).any():
        raise ValueError("response entries must lie in [0, 1]")
    dev = np.abs(table.sum(axis=0) - 1.0).max()
    if dev > SUM_TOL:
        raise ValueError(f"response is not complete: max |sum_i P - 1| = {dev:.3e}")


@dataclass(frozen=True, eq=False)
class ResponseFunction:
    """psi-independent response ``P(xi_i | lam_1, ..., lam_n)``."""

    spaces: tuple[OnticSpace, ...]
    table: np.ndarray

    def __post_init__(self):
        t = _readonly(self.table)
        object.__setattr__(self, "spaces", tuple(self.spaces))
        if t.shape[1:] != tuple(len(s) for s in self.spaces):
            raise ValueError(f"table shape {t.shape} does not match ontic spaces")
        _check_response_table(t)
        object.__setattr__(self, "table", t)

    @property
    def n_outcomes(self) -> int:
        return self.table.shape[0]

    def table_for(self, preparation) -> np.ndarray:
        return self.table


@dataclass(frozen=True, eq=False)
class PsiDependentResponse:
    """Response ``P(xi_i | Psi_j, Psi_k, lam, lam')``, one table per preparation label."""

    spaces: tuple[OnticSpace, ...]
    tables: Mapping[tuple, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "spaces", tuple(self.spaces))
        shape = tuple(len(s) for s in self.spaces)
        tables = {}
        for prep, t in dict(self.tables).items():
            t = _readonly(t)
            if t.shape[1:] != shape:
                raise ValueError(f"table for {prep} has shape {t.shape}, expected (m, *{shape})")
            _check_response_table(t)
            tables[tuple(prep)] = t
        if len({t.shape[0] for t in tables.values()}) > 1:
            raise ValueError("all preparations must share the outcome count")
        object.__setattr__(self, "tables", tables)

    @property
    def n_outcomes(self) -> int:
        return next(iter(self.tables.values())).shape[0]

    def table_for(self, preparation) -> np.ndarray:
        try:
            return self.tables[tuple(preparation)]
        except KeyError:
            raise UnknownPreparationError(preparation) from None


@dataclass(frozen=True, eq=False)
class OntologicalModel:
    densities: Mapping[str, EpistemicDensity]
    response: ResponseFunction | PsiDependentResponse
    kind: str = field(default="")

    def __post_init__(self):
        dens = dict(self.densities)
        spaces = {d.space for d in dens.values()}
        if len(spaces) != 1:
            raise ValueError("all densities must share one ontic space")
        (space,) = spaces
        if any(s != space for s in self.response.spaces):
            raise ValueError("response is defined on a different ontic space")
        expected = "psi_dependent" if isinstance(self.response, PsiDependentResponse) else "psi_independent"
        if self.kind and self.kind != expected:
            raise ValueError(f"kind {self.kind!r} inconsistent with {type(self.response).__name__}")
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "kind", expected)

    @property
    def space(self) -> OnticSpace:
        return next(iter(self.densities.values())).space

    def density(self, label: str) -> EpistemicDensity:
        try:
            return self.densities[label]
        except KeyError:
            raise UnknownPreparationError(label) from None

    def predict(self, preparation: Sequence[str], outcome: int) -> float:
        return predict(self, preparation, outcome)

    def to_dict(self) -> dict:
        return model_to_dict(self)


def product_density(rho_j: EpistemicDensity, rho_k: EpistemicDensity) -> np.ndarray:
    """Joint weights over (lam, lam') for independently prepared systems."""
    return np.outer(rho_j.weights, rho_k.weights)


def predict(model: OntologicalModel, preparation: Sequence[str], outcome: int) -> float:
    """Outcome probability for the product preparation ``preparation``."""
    preparation = tuple(preparation)
    densities = [model.density(label) for label in preparation]
    table = model.response.table_for(preparation)
    if len(densities) != table.ndim - 1:
        raise ValueError(f"preparation {preparation} has the wrong number of systems")
    p = float(np.dot(table[outcome].ravel(), _joint(densities).ravel()))
    return min(max(p, 0.0), 1.0)


def _joint(densities: Sequence[EpistemicDensity]) -> np.ndarray:
    joint = np.ones(())
    for rho in densities:
        joint = np.multiply.outer(joint, rho.weights)
    return joint


def support(rho: EpistemicDensity, eps: float = 0.0) -> frozenset:
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return frozenset(lab for lab, w in zip(rho.space.points, rho.weights) if w > eps)


def support_mask(rho: EpistemicDensity, eps: float = 0.0) -> np.ndarray:
    return rho.weights > eps


def overlap_mass(rho1: EpistemicDensity, rho2: EpistemicDensity) -> float:
    """sum_lam min(rho1, rho2); zero exactly when the supports are disjoint."""
    _same_space(rho1, rho2)
    return float(np.minimum(rho1.weights, rho2.weights).sum())


# -- serialization: labels, weights, response table flattened row-major over (i, lam, lam') --

def model_to_dict(model: OntologicalModel) -> dict:
    resp = model.response
    doc = {
        "kind": model.kind,
        "ontic_labels": [str(p) for p in model.space.points],
        "n_systems": len(resp.spaces),
        "n_outcomes": resp.n_outcomes,
        "densities": {lab: d.weights.tolist() for lab, d in model.densities.items()},
    }
    if isinstance(resp, PsiDependentResponse):
        doc["response"] = [{"preparation": list(prep), "table": t.ravel().tolist()}
                           for prep, t in resp.tables.items()]
    else:
        doc["response"] = resp.table.ravel().tolist()
    return doc


def model_from_dict(doc: Mapping) -> OntologicalModel:
    space = OnticSpace(tuple(doc["ontic_labels"]))
    shape = (int(doc["n_outcomes"]),) + (len(space),) * int(doc["n_systems"])
    spaces = (space,) * int(doc["n_systems"])
    densities = {lab: EpistemicDensity(space, w) for lab, w in doc["densities"].items()}
    if doc["kind"] == "psi_dependent":
        tables = {tuple(e["preparation"]): np.reshape(e["table"], shape) for e in doc["response"]}
        response = PsiDependentResponse(spaces, tables)
    elif doc["kind"] == "psi_independent":
        response = ResponseFunction(spaces, np.reshape(doc["response"], shape))
    else:
        raise ValueError(f"unknown model kind {doc['kind']!r}")
    return OntologicalModel(densities, response, doc["kind"])


def dumps_model(model: OntologicalModel) -> str:
    return json.dumps(model_to_dict(model), indent=2)


def loads_model(text: str) -> OntologicalModel:
    return model_from_dict(json.loads(text))
