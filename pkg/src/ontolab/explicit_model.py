"""Hidden variables that are the real and imaginary parts of the amplitudes.

A preparation |psi> puts a point mass at lambda = Re(psi), mu = Im(psi), and
the response P(xi | lambda, mu) = |sum_k <xi|U|k> (lambda_k + i mu_k)|^2 takes
no state argument at all.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hilbert import (
    NORM_TOL,
    DimensionError,
    ProjectiveMeasurement,
    StateVector,
    UnitaryOperator,
    born_probability,
    random_measurement,
    random_state,
    random_unitary,
    tensor_product,
)
from .ontic_models import EpistemicDensity, OnticSpace, overlap_mass


@dataclass(frozen=True, eq=False)
class AmplitudeHiddenVariables:
    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float)
        mu = np.array(self.mu, dtype=float)
        if lam.shape != mu.shape or lam.ndim != 1:
            raise ValueError("lambda and mu must be 1-d vectors of equal length")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(mu))):
            raise ValueError("hidden variables must be finite")
        lam.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    def __len__(self):
        return self.lam.size

    @property
    def amplitudes(self) -> np.ndarray:
        return self.lam + 1j * self.mu

    @property
    def norm2(self) -> float:
        return float(np.sum(self.lam ** 2 + self.mu ** 2))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def key(self) -> tuple:
        """Hashable ontic label for this point."""
        return tuple(self.lam.tolist()) + tuple(self.mu.tolist())

    def max_deviation(self, other: "AmplitudeHiddenVariables") -> float:
        if len(self) != len(other):
            raise DimensionError(f"{len(self)} != {len(other)}")
        return float(max(np.abs(self.lam - other.lam).max(), np.abs(self.mu - other.mu).max()))


@dataclass(frozen=True)
class ExplicitModel:
    dim: int

    def response(self, xi: StateVector, U: UnitaryOperator, hv: AmplitudeHiddenVariables) -> float:
        return response(self, xi, U, hv)


def hv_of_state(psi: StateVector) -> AmplitudeHiddenVariables:
    return AmplitudeHiddenVariables(psi.amplitudes.real, psi.amplitudes.imag)


def response(model: ExplicitModel, xi: StateVector, U: UnitaryOperator,
             hv: AmplitudeHiddenVariables) -> float:
    """|sum_k <xi|U|k> (lam_k + i mu_k)|^2."""
    if not (xi.dim == U.dim == len(hv) == model.dim):
        raise DimensionError(f"model dim {model.dim}, xi {xi.dim}, U {U.dim}, hv {len(hv)}")
    row = xi.amplitudes.conj() @ U.matrix   # <xi|U|k> for every k
    return float(abs(row @ hv.amplitudes) ** 2)


def compose(hv1: AmplitudeHiddenVariables, hv2: AmplitudeHiddenVariables) -> AmplitudeHiddenVariables:
    """Composite variables lam12 + i mu12 = (lam1 + i mu1)(lam2 + i mu2), row-major in (n, p)."""
    z = np.kron(hv1.amplitudes, hv2.amplitudes)
    return AmplitudeHiddenVariables(z.real, z.imag)


@dataclass
class FactorizationReport:
    dims: tuple[int, int]
    max_deviation: float
    exact: bool

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "max_deviation": self.max_deviation, "exact": self.exact}


def verify_factorization(psi1: StateVector, psi2: StateVector) -> FactorizationReport:
    """Joint point mass of psi1 (x) psi2 against the product of the marginal point masses."""
    joint = hv_of_state(tensor_product(psi1, psi2))
    product = compose(hv_of_state(psi1), hv_of_state(psi2))
    dev = joint.max_deviation(product)
    return FactorizationReport((psi1.dim, psi2.dim), dev, dev == 0.0)


def point_mass_densities(states: Sequence[StateVector]) -> tuple[OnticSpace, list[EpistemicDensity]]:
    """One ontic point per distinct hidden-variable vector, one point mass per state."""
    keys: list[tuple] = []
    for psi in states:
        k = hv_of_state(psi).key()
        if k not in keys:
            keys.append(k)
    space = OnticSpace(tuple(keys))
    return space, [EpistemicDensity.point_mass(space, hv_of_state(psi).key()) for psi in states]


def state_overlap(psi_a: StateVector, psi_b: StateVector) -> float:
    space, (rho_a, rho_b) = point_mass_densities([psi_a, psi_b])
    return overlap_mass(rho_a, rho_b)


@dataclass
class ExplicitCheckReport:
    trials: int
    max_dim: int
    born_max_deviation: float
    completeness_max_deviation: float
    factorization_max_deviation: float
    composition_max_deviation: float
    pbr_overlap: float

    def passed(self, tol: float = 1e-12) -> bool:
        return (self.born_max_deviation < tol and self.completeness_max_deviation < tol
                and self.factorization_max_deviation < tol and self.composition_max_deviation < tol
                and self.pbr_overlap == 0.0)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def born_deviation(dim: int, seed) -> tuple[float, float]:
    """Random (state, unitary, complete measurement) triple.

    Returns the max |model - Born| over outcomes and |sum_xi model - 1|.
    """
    ss = np.random.SeedSequence(seed)
    s_psi, s_u, s_m = ss.spawn(3)
    psi = random_state(dim, s_psi)
    U = random_unitary(dim, s_u)
    meas = random_measurement(dim, s_m)
    model = ExplicitModel(dim)
    hv = hv_of_state(psi)
    evolved = U.apply(psi)
    vals = np.array([response(model, xi, U, hv) for xi in meas])
    born = np.array([born_probability(xi, evolved) for xi in meas])
    return float(np.abs(vals - born).max()), float(abs(vals.sum() - 1.0))


def composition_deviation(d1: int, d2: int, seed) -> tuple[float, float]:
    """Factorization deviation and response deviation through ``compose`` for a random product state."""
    s1, s2, s_u, s_m = np.random.SeedSequence(seed).spawn(4)
    psi1, psi2 = random_state(d1, s1), random_state(d2, s2)
    fact = verify_factorization(psi1, psi2)
    joint = tensor_product(psi1, psi2)
    d = d1 * d2
    U = random_unitary(d, s_u)
    meas: ProjectiveMeasurement = random_measurement(d, s_m)
    model = ExplicitModel(d)
    hv_joint = hv_of_state(joint)
    hv_comp = compose(hv_of_state(psi1), hv_of_state(psi2))
    resp = max(abs(response(model, xi, U, hv_comp) - response(model, xi, U, hv_joint)) for xi in meas)
    return fact.max_deviation, float(resp)


def explicit_check(trials: int = 100, max_dim: int = 8, product_dims=None, seed: int = 0) -> ExplicitCheckReport:
    """Born equivalence, factorization and composition over seeded random instances.

    ``product_dims``, when given, fixes (d1, d2) for the product-state checks;
    otherwise they are drawn from 1..min(4, max_dim).
    """
    from .pbr_scenario import build_states

    rng = np.random.default_rng(seed)
    born = comp_sum = fact = comp = 0.0
    for t in range(trials):
        dim = int(rng.integers(1, max_dim + 1))
        b, c = born_deviation(dim, [seed, t, 0])
        born, comp_sum = max(born, b), max(comp_sum, c)
        if product_dims is None:
            hi = min(4, max_dim)
            d1, d2 = int(rng.integers(1, hi + 1)), int(rng.integers(1, hi + 1))
        else:
            d1, d2 = product_dims
        f, r = composition_deviation(d1, d2, [seed, t, 1])
        fact, comp = max(fact, f), max(comp, r)
    psi1, psi2 = build_states()
    return ExplicitCheckReport(trials, max_dim, born, comp_sum, fact, comp, state_overlap(psi1, psi2))
