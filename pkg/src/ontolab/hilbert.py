"""Small dense complex linear algebra for finite-dimensional pure states.

Everything here is immutable: arrays are copied on construction and marked
read-only, so values can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
ORTHO_TOL = 1e-10


class DimensionError(ValueError):
    pass


class RankDeficientError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError(f"state must be a non-empty 1-d vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim: int, k: int) -> "StateVector":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[k] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __len__(self):
        return self.dim

    def same_ray(self, other: "StateVector", tol: float = NORM_TOL) -> bool:
        """Equality up to global phase."""
        return self.dim == other.dim and abs(abs(inner_product(self, other)) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"unitary must be square, got shape {mat.shape}")
        dev = np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max()
        if dev > ORTHO_TOL:
            raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {dev:.3e}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryOperator":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, psi: StateVector) -> StateVector:
        _check_dims(self.dim, psi.dim)
        return StateVector.normalized(self.matrix @ psi.amplitudes)


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Rank-one projective measurement given by orthonormal outcome vectors."""

    outcomes: tuple[StateVector, ...] = field()

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        if not outcomes:
            raise ValueError("measurement needs at least one outcome")
        dim = outcomes[0].dim
        for o in outcomes:
            _check_dims(dim, o.dim)
        gram = self._rows(outcomes) @ self._rows(outcomes).conj().T
        dev = np.abs(gram - np.eye(len(outcomes))).max()
        if dev > ORTHO_TOL:
            raise ValueError(f"outcomes are not orthonormal: max deviation {dev:.3e}")
        object.__setattr__(self, "outcomes", outcomes)

    @staticmethod
    def _rows(outcomes) -> np.ndarray:
        return np.array([o.amplitudes for o in outcomes])

    @classmethod
    def from_rows(cls, rows) -> "ProjectiveMeasurement":
        return cls(tuple(StateVector(r) for r in np.asarray(rows)))

    @property
    def dim(self) -> int:
        return self.outcomes[0].dim

    @property
    def matrix(self) -> np.ndarray:
        """Outcome vectors stacked as rows."""
        return self._rows(self.outcomes)

    @property
    def is_complete(self) -> bool:
        return len(self.outcomes) == self.dim

    def completeness_residual(self) -> float:
        """max |sum_i |xi_i><xi_i| - I|, entrywise."""
        m = self.matrix
        return float(np.abs(m.conj().T @ m - np.eye(self.dim)).max())

    def probabilities(self, psi: StateVector) -> np.ndarray:
        return np.array([born_probability(o, psi) for o in self.outcomes])

    def __len__(self):
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)

    def __getitem__(self, i):
        return self.outcomes[i]


def _check_dims(da: int, db: int) -> None:
    if da != db:
        raise DimensionError(f"dimension mismatch: {da} != {db}")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in the first argument."""
    _check_dims(a.dim, b.dim)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker composite a (x) b; index n*b.dim + p for the pair (n, p)."""
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def born_probability(xi: StateVector, psi: StateVector) -> float:
    p = abs(inner_product(xi, psi)) ** 2
    return min(max(p, 0.0), 1.0)


def orthonormal_extension(vectors: Sequence[StateVector], dim: int | None = None,
                          tol: float = 1e-10) -> list[StateVector]:
    """Complete ``vectors`` to an orthonormal basis of the whole space.

    Uses modified Gram-Schmidt with one reorthogonalization pass. The i-th output
    spans the same flag as the first i+1 inputs, so the span of the inputs is
    contained in the output. Completion candidates are the standard basis
    vectors, tried in index order, which makes the result deterministic.
    """
    if dim is None:
        if not vectors:
            raise ValueError("dim is required when no vectors are given")
        dim = vectors[0].dim
    for v in vectors:
        _check_dims(dim, v.dim)
    if len(vectors) > dim:
        raise RankDeficientError(f"{len(vectors)} vectors cannot be independent in dim {dim}")

    basis: list[np.ndarray] = []

    def _reduce(v: np.ndarray) -> np.ndarray:
        for _ in range(2):
            for q in basis:
                v = v - q * np.vdot(q, v)
        return v

    for idx, v in enumerate(vectors):
        w = _reduce(np.array(v.amplitudes))
        norm = np.linalg.norm(w)
        if norm < tol:
            raise RankDeficientError(f"input vector {idx} is linearly dependent on the previous ones")
        basis.append(w / norm)

    for k in range(dim):
        if len(basis) == dim:
            break
        e = np.zeros(dim, dtype=np.complex128)
        e[k] = 1.0
        w = _reduce(e)
        norm = np.linalg.norm(w)
        # a standard vector always retains >= 1/sqrt(dim) of its norm for some k
        if norm > 0.5 / np.sqrt(dim):
            basis.append(w / norm)
    return [StateVector(q) for q in basis]


def random_state(dim: int, seed) -> StateVector:
    """Haar-random pure state: normalized vector of i.i.d. complex Gaussians."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.normalized(z)


def random_unitary(dim: int, seed) -> UnitaryOperator:
    """Haar-random unitary via QR of a complex Ginibre matrix, diagonal phases fixed."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return UnitaryOperator(q)


def random_measurement(dim: int, seed) -> ProjectiveMeasurement:
    """Complete projective measurement in a Haar-random basis."""
    return ProjectiveMeasurement.from_rows(random_unitary(dim, seed).matrix.T)
