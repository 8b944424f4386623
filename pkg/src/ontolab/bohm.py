"""One-dimensional pilot-wave dynamics (hbar = m = 1).

The wave is propagated by split-step Fourier; particles follow the guidance
field v = Im(psi* d_x psi) / |psi|^2, integrated with RK4 against the wave
sampled at whole and half steps. A beam blocker is an absorbing mask applied
once, at its activation time, followed by renormalization.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .ontic_models import NUMERIC_EPS, EpistemicDensity, OnticSpace, overlap_mass

NORM_TOL = 1e-8
DENSITY_FLOOR = 1e-14


class NormDriftError(RuntimeError):
    pass


class InapplicableError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 256, got {n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def mask(self, lo: float, hi: float) -> np.ndarray:
        x = self.x
        return (x >= lo) & (x <= hi)


@dataclass(frozen=True, eq=False)
class WaveField:
    grid: Grid1D
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise ValueError("amplitudes do not match the grid")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if abs(self.norm - 1.0) > NORM_TOL:
            raise NormDriftError(f"wave norm {self.norm!r} is not 1 within {NORM_TOL}")

    @classmethod
    def normalized(cls, grid: Grid1D, amplitudes, time: float = 0.0) -> "WaveField":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        return cls(grid, amps / np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dx), time)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mass(self, lo: float, hi: float) -> float:
        """Probability of [lo, hi] under the piecewise-linear (trapezoidal) CDF."""
        c = self.cdf()
        x = self.grid.x
        return float(np.interp(hi, x, c) - np.interp(lo, x, c))

    def cdf(self) -> np.ndarray:
        """Cumulative distribution at the grid points, trapezoidal, ending at exactly 1."""
        rho = self.density
        c = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * self.grid.dx)])
        return c / c[-1]

    def mean_position(self) -> float:
        return float(np.sum(self.grid.x * self.density) * self.grid.dx)

    def width(self) -> float:
        x = self.grid.x
        mu = self.mean_position()
        return float(np.sqrt(np.sum((x - mu) ** 2 * self.density) * self.grid.dx))

    def current(self) -> np.ndarray:
        """Probability current Im(psi* d_x psi), spectral derivative."""
        dpsi = np.fft.ifft(1j * self.grid.k * np.fft.fft(self.amplitudes))
        return np.imag(np.conj(self.amplitudes) * dpsi)


def gaussian_packet(grid: Grid1D, x0: float, sigma: float, k0: float = 0.0) -> WaveField:
    """(2 pi sigma^2)^(-1/4) exp(-(x-x0)^2 / (4 sigma^2) + i k0 x); |psi|^2 has std sigma."""
    x = grid.x
    amps = np.exp(-((x - x0) ** 2) / (4 * sigma ** 2) + 1j * k0 * x)
    return WaveField.normalized(grid, amps)


def superpose(fields, coeffs) -> WaveField:
    grid = fields[0].grid
    amps = sum(c * f.amplitudes for c, f in zip(coeffs, fields))
    return WaveField.normalized(grid, amps, fields[0].time)


class SplitStep:
    """Strang splitting exp(-iV dt/2) exp(-i k^2 dt/2) exp(-iV dt/2)."""

    def __init__(self, grid: Grid1D, potential, dt: float):
        self.grid = grid
        self.dt = dt
        v = np.zeros(grid.n_points) if potential is None else np.asarray(potential, dtype=float)
        self.half_potential = np.exp(-0.5j * v * dt)
        self.kinetic = np.exp(-0.5j * grid.k ** 2 * dt)

    def __call__(self, amps: np.ndarray) -> np.ndarray:
        amps = self.half_potential * amps
        amps = np.fft.ifft(self.kinetic * np.fft.fft(amps))
        return self.half_potential * amps


def evolve(psi: WaveField, potential=None, dt: float = 1e-3, steps: int = 0) -> WaveField:
    if steps == 0:
        return psi
    stepper = SplitStep(psi.grid, potential, dt)
    amps = np.array(psi.amplitudes)
    for _ in range(steps):
        amps = stepper(amps)
    drift = abs(np.sum(np.abs(amps) ** 2) * psi.grid.dx - psi.norm)
    if drift > NORM_TOL:
        raise NormDriftError(f"norm drifted by {drift:.3e} over {steps} steps of dt={dt}")
    return WaveField(psi.grid, amps, psi.time + steps * dt)


def free_gaussian_width(sigma0: float, t: float) -> float:
    return sigma0 * np.sqrt(1 + (t / (2 * sigma0 ** 2)) ** 2)


@dataclass
class NodeCounter:
    capped: int = 0


def _velocity(grid: Grid1D, rho: np.ndarray, cur: np.ndarray, x: np.ndarray, cap: float,
              counter: NodeCounter | None) -> np.ndarray:
    r = np.interp(x, grid.x, rho)
    j = np.interp(x, grid.x, cur)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(r > DENSITY_FLOOR, j / r, 0.0)
    bad = (r <= DENSITY_FLOOR) | (np.abs(v) > cap)
    if bad.any():
        v = np.where(r <= DENSITY_FLOOR, 0.0, np.clip(v, -cap, cap))
        if counter is not None:
            counter.capped += int(bad.sum())
    return v


def guidance_velocity(psi: WaveField, x, cap: float = np.inf,
                      counter: NodeCounter | None = None) -> np.ndarray:
    """Pilot-wave velocity at positions ``x`` (linear interpolation of current and density).

    In node regions (density <= 1e-14) the velocity is set to 0; anywhere it
    exceeds ``cap`` it is clipped. Both events increment ``counter``.
    """
    x = np.asarray(x, dtype=float)
    return _velocity(psi.grid, psi.density, psi.current(), x, cap, counter)


@dataclass(frozen=True)
class BlockerConfig:
    enabled: bool = False
    region: tuple[float, float] = (0.0, np.inf)
    activation_time: float = 0.0

    def __post_init__(self):
        if self.activation_time < 0:
            raise ValueError("activation_time must be >= 0")
        if self.region[0] >= self.region[1]:
            raise ValueError("blocker region must have lo < hi")

    def validate(self, grid: Grid1D) -> None:
        lo, hi = self.region
        if lo < grid.x_min or lo > grid.x_max:
            raise ValueError("blocker region starts outside the grid")


@dataclass
class TrajectoryEnsemble:
    initial_positions: np.ndarray
    times: np.ndarray
    paths: np.ndarray                 # (n_saved, n_traj); NaN after absorption
    absorbed: np.ndarray              # bool per trajectory
    absorbed_by_blocker: np.ndarray
    escaped: np.ndarray
    final_wave: WaveField
    snapshots: np.ndarray             # (n_saved, n_points) densities at ``times``
    seed: int
    capped_velocities: int = 0
    blocker: BlockerConfig = field(default_factory=BlockerConfig)

    @property
    def final_positions(self) -> np.ndarray:
        return self.paths[-1][~self.absorbed]

    @property
    def alive(self) -> np.ndarray:
        return ~self.absorbed

    def positions_at(self, t: float) -> np.ndarray:
        return self.paths[int(np.argmin(np.abs(self.times - t)))]


def sample_positions(psi: WaveField, n: int, seed) -> np.ndarray:
    """Inverse-CDF samples of |psi|^2 (piecewise-linear CDF on the grid)."""
    u = np.random.default_rng(seed).random(n)
    return np.interp(u, psi.cdf(), psi.grid.x)


def run_ensemble(psi0: WaveField, blocker: BlockerConfig | None = None, n_traj: int = 10_000,
                 dt: float = 2e-3, t_final: float = 2.0, seed: int = 0, save_every: int = 10,
                 potential=None) -> TrajectoryEnsemble:
    blocker = blocker or BlockerConfig()
    grid = psi0.grid
    if blocker.enabled:
        blocker.validate(grid)
    n_steps = int(round(t_final / dt))
    if n_steps < 1 or abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be a positive multiple of dt")
    activation_step = int(round(blocker.activation_time / dt)) if blocker.enabled else None
    cap = grid.dx / dt
    counter = NodeCounter()
    half = SplitStep(grid, potential, dt / 2)
    block_mask = grid.mask(*blocker.region) if blocker.enabled else None

    x = sample_positions(psi0, n_traj, seed)
    x0 = x.copy()
    absorbed = np.zeros(n_traj, dtype=bool)
    by_blocker = np.zeros(n_traj, dtype=bool)
    escaped = np.zeros(n_traj, dtype=bool)
    amps = np.array(psi0.amplitudes)
    norm0 = psi0.norm

    def field_at(a):
        w = WaveField(grid, a, 0.0)
        return w.density, w.current()

    times, paths, snaps = [psi0.time], [x.copy()], [psi0.density]
    rho, cur = field_at(amps)
    for step in range(n_steps):
        if activation_step is not None and step == activation_step:
            inside = (x >= blocker.region[0]) & (x <= blocker.region[1]) & ~absorbed
            by_blocker |= inside
            absorbed |= inside
            amps = np.where(block_mask, 0.0, amps)
            amps = amps / np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dx)
            norm0 = 1.0
            rho, cur = field_at(amps)
        amps_half = half(amps)
        amps_next = half(amps_half)
        rho_h, cur_h = field_at(amps_half)
        rho_n, cur_n = field_at(amps_next)

        live = ~absorbed
        xl = x[live]
        k1 = _velocity(grid, rho, cur, xl, cap, counter)
        k2 = _velocity(grid, rho_h, cur_h, xl + 0.5 * dt * k1, cap, counter)
        k3 = _velocity(grid, rho_h, cur_h, xl + 0.5 * dt * k2, cap, counter)
        k4 = _velocity(grid, rho_n, cur_n, xl + dt * k3, cap, counter)
        x[live] = xl + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

        out = live & ((x < grid.x_min) | (x > grid.x_max))
        escaped |= out
        absorbed |= out

        amps, rho, cur = amps_next, rho_n, cur_n
        if (step + 1) % save_every == 0 or step + 1 == n_steps:
            times.append(psi0.time + (step + 1) * dt)
            paths.append(np.where(absorbed, np.nan, x))
            snaps.append(rho.copy())

    drift = abs(np.sum(np.abs(amps) ** 2) * grid.dx - norm0)
    if drift > NORM_TOL:
        raise NormDriftError(f"norm drifted by {drift:.3e} during the ensemble run")
    final = WaveField(grid, amps, psi0.time + n_steps * dt)
    return TrajectoryEnsemble(
        initial_positions=x0, times=np.array(times), paths=np.array(paths), absorbed=absorbed,
        absorbed_by_blocker=by_blocker, escaped=escaped, final_wave=final,
        snapshots=np.array(snaps), seed=seed, capped_velocities=counter.capped, blocker=blocker,
    )


def ks_statistic(positions: np.ndarray, psi: WaveField) -> float:
    """One-sample KS distance between ``positions`` and the CDF of |psi|^2."""
    cdf = psi.cdf()
    x = psi.grid.x
    return float(sps.kstest(positions, lambda q: np.interp(q, x, cdf)).statistic)


# -- scenario ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoPacketConfig:
    """Two Gaussians launched toward each other from -d and +d with momenta +k0, -k0.

    At t = d / k0 the envelopes coincide and (Psi1 + Psi2) has exact nodes at
    x = pi / (2 k0) + n pi / k0; (Psi1 - Psi2) has them at n pi / k0.
    """

    x_min: float = -40.0
    x_max: float = 40.0
    n_points: int = 2048
    sigma: float = 1.0
    half_separation: float = 10.0
    k0: float = 5.0
    dt: float = 2e-3
    blocker_time: float = 0.5

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.x_min, self.x_max, self.n_points)

    @property
    def t_overlap(self) -> float:
        return self.half_separation / self.k0

    def packets(self) -> tuple[WaveField, WaveField]:
        g = self.grid
        return (gaussian_packet(g, -self.half_separation, self.sigma, self.k0),
                gaussian_packet(g, self.half_separation, self.sigma, -self.k0))

    def superposition(self, sign: float = 1.0) -> WaveField:
        p1, p2 = self.packets()
        return superpose([p1, p2], [1.0, sign])

    def null_position(self, sign: float = 1.0) -> float:
        return np.pi / (2 * self.k0) if sign > 0 else 0.0

    def null_window(self, sign: float = 1.0, fraction: float = 0.1) -> tuple[float, float]:
        """Window of half-width ``fraction`` * fringe spacing around a node."""
        x0 = self.null_position(sign)
        w = fraction * np.pi / self.k0
        return (x0 - w, x0 + w)

    def blocker(self, enabled: bool = True) -> BlockerConfig:
        """Absorber over the half-line of path 2, switched on while the packets are still apart."""
        return BlockerConfig(enabled, (0.0, self.x_max), self.blocker_time)


def _window_fraction(positions: np.ndarray, window) -> float:
    lo, hi = window
    if positions.size == 0:
        return float("nan")
    return float(np.mean((positions >= lo) & (positions <= hi)))


@dataclass
class NullReport:
    window: tuple[float, float]
    fraction_off: float
    fraction_on: float
    expected_on: float
    sigma_on: float
    identical_initial_positions: bool
    passed: bool

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["window"] = list(self.window)
        return d


def interference_null_check(ensemble_on: TrajectoryEnsemble, ensemble_off: TrajectoryEnsemble,
                            x0_window, reference: WaveField | None = None,
                            max_off: float = 0.01, n_sigma: float = 3.0) -> NullReport:
    """Fraction of final positions in a dark-fringe window, blocker off against on.

    ``reference`` is the single-packet wave at the final time; default is the
    blocker-on final wave itself.
    """
    ref = reference if reference is not None else ensemble_on.final_wave
    f_off = _window_fraction(ensemble_off.final_positions, x0_window)
    on = ensemble_on.final_positions
    f_on = _window_fraction(on, x0_window)
    expected = ref.mass(*x0_window)
    sigma = np.sqrt(max(expected * (1 - expected), 1e-300) / max(on.size, 1))
    same_x0 = bool(np.array_equal(ensemble_on.initial_positions, ensemble_off.initial_positions))
    ok = f_off < max_off and f_on > 0 and abs(f_on - expected) <= n_sigma * sigma
    return NullReport(tuple(x0_window), f_off, f_on, expected, float(sigma), same_x0, bool(ok))


@dataclass
class DivergenceReport:
    max_divergence: float
    packet_width: float
    divergence_before_activation: float
    identical_initial_positions: bool
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def path_divergence(ensemble_on: TrajectoryEnsemble, ensemble_off: TrajectoryEnsemble) -> DivergenceReport:
    """Compare paths of the same initial points with and without the blocker."""
    if not np.array_equal(ensemble_on.times, ensemble_off.times):
        raise InapplicableError("ensembles were saved at different times")
    both = ensemble_on.alive & ensemble_off.alive
    diff = np.abs(ensemble_on.paths[:, both] - ensemble_off.paths[:, both])
    t_act = ensemble_on.blocker.activation_time
    before = ensemble_on.times <= t_act
    pre = float(np.nanmax(diff[before])) if before.any() and both.any() else 0.0
    worst = float(np.nanmax(diff)) if both.any() else 0.0
    width = ensemble_on.final_wave.width()
    same = bool(np.array_equal(ensemble_on.initial_positions, ensemble_off.initial_positions))
    return DivergenceReport(worst, width, pre, same, bool(same and worst > width and pre < 1e-12))


def cross_mass(psi_a: WaveField, psi_b: WaveField) -> float:
    return float(np.sum(np.abs(psi_a.amplitudes) * np.abs(psi_b.amplitudes)) * psi_a.grid.dx)


@dataclass
class PhaseFlipReport:
    cross_mass: float
    region1_max_density_difference: float
    region2_max_density_difference: float
    region1_mass: float
    initial_subensemble_max_shift: float
    region1_counts: tuple[int, int]
    passed: bool

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["region1_counts"] = list(self.region1_counts)
        return d


def phase_flip_marginal(psi_plus: WaveField, psi_minus: WaveField, region1, n_samples: int = 10_000,
                        seed: int = 0, tol: float = 1e-10) -> PhaseFlipReport:
    """Local statistics in region 1 for Psi1 + Psi2 against Psi1 - Psi2.

    The individual packets are recovered as (psi_plus +/- psi_minus) / sqrt 2.
    """
    grid = psi_plus.grid
    a, b = psi_plus.amplitudes, psi_minus.amplitudes
    p1 = WaveField.normalized(grid, (a + b) / np.sqrt(2))
    p2 = WaveField.normalized(grid, (a - b) / np.sqrt(2))
    cm = cross_mass(p1, p2)
    if cm >= tol:
        raise InapplicableError(f"packets are not disjoint: cross-mass {cm:.3e}")
    in1 = grid.mask(*region1)
    if p1.mass(*region1) < 1 - 1e-8:
        raise InapplicableError("region 1 does not contain packet 1")
    d1 = float(np.abs(psi_plus.density - psi_minus.density)[in1].max())
    d2 = float(np.abs(psi_plus.density - psi_minus.density)[~in1].max())

    xp = sample_positions(psi_plus, n_samples, seed)
    xm = sample_positions(psi_minus, n_samples, seed)
    lo, hi = region1
    sel_p = (xp >= lo) & (xp <= hi)
    sel_m = (xm >= lo) & (xm <= hi)
    shift = float(np.abs(xp[sel_p] - xm[sel_m]).max()) if sel_p.sum() == sel_m.sum() and sel_p.any() else np.inf
    ok = d1 < tol and shift < 1e-8
    return PhaseFlipReport(cm, d1, d2, p1.mass(*region1), shift,
                           (int(sel_p.sum()), int(sel_m.sum())), bool(ok))


def grid_density(psi: WaveField) -> EpistemicDensity:
    """|psi|^2 dx as a density over the grid points, one ontic point per node."""
    space = OnticSpace(tuple(range(psi.grid.n_points)))
    return EpistemicDensity.normalized(space, psi.density * psi.grid.dx)


@dataclass
class OverlapReport:
    overlap: float
    positive: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def density_overlap_demo(psi: WaveField, psi1: WaveField, eps: float = NUMERIC_EPS) -> OverlapReport:
    ov = overlap_mass(grid_density(psi), grid_density(psi1))
    return OverlapReport(ov, ov > eps)


# -- CSV --------------------------------------------------------------------------------

def write_density_csv(path, ensemble: TrajectoryEnsemble, grid: Grid1D) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "density"])
        for t, rho in zip(ensemble.times, ensemble.snapshots):
            for xv, r in zip(grid.x, rho):
                w.writerow([f"{t:.17g}", f"{xv:.17g}", f"{r:.17g}"])


def write_paths_csv(path, ensemble: TrajectoryEnsemble) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trajectory_id", "t", "x"])
        for tid in range(ensemble.paths.shape[1]):
            for t, xv in zip(ensemble.times, ensemble.paths[:, tid]):
                if np.isfinite(xv):
                    w.writerow([tid, f"{t:.17g}", f"{xv:.17g}"])


def write_histogram_csv(path, positions: np.ndarray, bins: int = 200, range_=None) -> None:
    counts, edges = np.histogram(positions, bins=bins, range=range_)
    width = np.diff(edges)
    dens = counts / max(counts.sum(), 1) / width
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count", "density"])
        for lo, hi, c, d in zip(edges[:-1], edges[1:], counts, dens):
            w.writerow([f"{lo:.17g}", f"{hi:.17g}", int(c), f"{d:.17g}"])
