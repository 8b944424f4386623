"""Command-line entry point: ``ontolab pbr verify | pbr lp | explicit check | bohm run``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bohm, reporting
from .explicit_model import explicit_check
from .ontic_models import EpistemicDensity, OnticSpace, overlap_mass
from .pbr_checker import (
    DEFAULT_TOL,
    IndeterminateError,
    InapplicableError,
    escape_model,
    feasibility_lp,
    forced_zeros,
    model_from_solution,
    reproduction_error,
    theorem_sweep,
)
from .pbr_scenario import build_scenario, quantum_statistics
from .reporting import ConfigError, dumps, envelope, load_config

DENSITY_FAMILIES = ("overlapping", "disjoint", "both")
SCENARIOS = ("interference", "delayed-choice", "phase-flip", "overlap-demo")


@dataclass(frozen=True)
class PbrVerifyConfig:
    seed: int = 0
    tol: float = DEFAULT_TOL
    densities: str = "both"
    sizes: tuple[int, ...] = (2, 4, 8, 16)
    trials: int = 20
    psi_dependent: bool = False

    def validate(self):
        if self.densities not in DENSITY_FAMILIES:
            raise ConfigError(f"densities must be one of {DENSITY_FAMILIES}")
        if self.trials < 1 or not self.sizes or min(self.sizes) < 2 or max(self.sizes) > 64:
            raise ConfigError("need trials >= 1 and grid sizes in [2, 64]")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")


@dataclass(frozen=True)
class PbrLpConfig:
    rho1: tuple[float, ...] = (0.5, 0.5, 0.0)
    rho2: tuple[float, ...] = (0.0, 0.5, 0.5)
    tol: float = DEFAULT_TOL
    seed: int = 0  # recorded only; the LP is deterministic

    def validate(self):
        if len(self.rho1) != len(self.rho2) or not 1 <= len(self.rho1) <= 64:
            raise ConfigError("rho1 and rho2 need equal length between 1 and 64")
        if min(self.rho1 + self.rho2) < 0 or sum(self.rho1) <= 0 or sum(self.rho2) <= 0:
            raise ConfigError("densities must be non-negative with positive mass")


@dataclass(frozen=True)
class ExplicitConfig:
    seed: int = 0
    trials: int = 100
    max_dim: int = 8
    dims: Optional[tuple[int, ...]] = None
    tol: float = 1e-12

    def validate(self):
        if self.trials < 1 or not 1 <= self.max_dim <= 64:
            raise ConfigError("need trials >= 1 and 1 <= max_dim <= 64")
        if self.dims is not None and (len(self.dims) != 2 or min(self.dims) < 1):
            raise ConfigError("dims takes two positive integers")


@dataclass(frozen=True)
class BohmConfig:
    scenario: str = "interference"
    blocker: str = "both"
    seed: int = 0
    n_traj: int = 10_000
    n_points: int = 2048
    x_min: float = -40.0
    x_max: float = 40.0
    sigma: float = 1.0
    half_separation: float = 10.0
    k0: float = 5.0
    dt: float = 2e-3
    blocker_time: float = 0.5
    sign: int = 1
    save_every: int = 25
    ks_max: float = 0.05

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if self.blocker not in ("on", "off", "both"):
            raise ConfigError("blocker must be on, off or both")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        if self.n_traj < 1 or self.dt <= 0 or self.save_every < 1:
            raise ConfigError("n_traj, dt and save_every must be positive")
        try:
            self.packets().grid
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def packets(self) -> bohm.TwoPacketConfig:
        return bohm.TwoPacketConfig(self.x_min, self.x_max, self.n_points, self.sigma,
                                    self.half_separation, self.k0, self.dt, self.blocker_time)


def _check(name: str, ok: bool, **details) -> dict:
    return {"name": name, **details, "passed": bool(ok)}


def cmd_pbr_verify(cfg: PbrVerifyConfig, out_dir: Path | None) -> dict:
    scenario = build_scenario()
    stats = quantum_statistics(scenario)
    checks = [_check("orthogonality", scenario.condition_residuals().max() < 1e-12
                     and scenario.measurement.completeness_residual() < 1e-10,
                     max_residual=float(scenario.condition_residuals().max()))]
    records = theorem_sweep(stats, sizes=cfg.sizes, trials=cfg.trials * (1 if cfg.densities == "both" else 2),
                            seed=cfg.seed, tol=cfg.tol)
    if cfg.densities == "overlapping":
        records = [r for r in records if r.trial % 2 == 0]
    elif cfg.densities == "disjoint":
        records = [r for r in records if r.trial % 2 == 1]
    checks.append(_check("theorem_pattern", all(r.theorem_pattern_ok for r in records),
                         trials=len(records)))
    checks.append(_check("forcing_agrees_with_lp", all(r.forcing_agrees for r in records)))
    body = {
        "scenario": scenario.to_dict(),
        "trials": [r.__dict__ for r in records],
        "summary": {
            "overlapping": sum(r.overlap > 0 for r in records),
            "disjoint": sum(r.overlap == 0 for r in records),
            "contradictions": sum(r.contradiction for r in records),
            "feasible": sum(r.status == "feasible" for r in records),
        },
    }
    if cfg.psi_dependent:
        model = escape_model(stats)
        rho = model.density("psi1")
        err = reproduction_error(model, stats)
        checks.append(_check("psi_dependent_escape", err == 0.0 and overlap_mass(rho, model.density("psi2")) == 1.0,
                             reproduction_error=err))
    return envelope("pbr verify", cfg, checks, body)


def cmd_pbr_lp(cfg: PbrLpConfig, out_dir: Path | None) -> dict:
    stats = quantum_statistics(build_scenario())
    space = OnticSpace.grid(len(cfg.rho1))
    rho1 = EpistemicDensity.normalized(space, cfg.rho1)
    rho2 = EpistemicDensity.normalized(space, cfg.rho2)
    res = feasibility_lp(rho1, rho2, stats, tol=cfg.tol)
    forcing = forced_zeros(rho1, rho2, stats)
    ov = overlap_mass(rho1, rho2)
    body = {"overlap_mass": ov, "feasibility": res.to_dict(), "forcing": forcing.to_dict()}
    if res.feasible:
        body["reproduction_error"] = reproduction_error(model_from_solution(rho1, rho2, res.solution), stats)
    expected = "infeasible" if ov > 0 else "feasible"
    checks = [_check("theorem_pattern", res.status == expected, expected=expected),
              _check("forcing_agrees_with_lp", forcing.contradiction == (res.status == "infeasible"))]
    return envelope("pbr lp", cfg, checks, body)


def cmd_explicit_check(cfg: ExplicitConfig, out_dir: Path | None) -> dict:
    rep = explicit_check(cfg.trials, cfg.max_dim, cfg.dims, cfg.seed)
    checks = [
        _check("born_equivalence", rep.born_max_deviation < cfg.tol, max_deviation=rep.born_max_deviation),
        _check("completeness", rep.completeness_max_deviation < cfg.tol),
        _check("factorization", rep.factorization_max_deviation < cfg.tol,
               max_deviation=rep.factorization_max_deviation),
        _check("composition", rep.composition_max_deviation < cfg.tol,
               max_deviation=rep.composition_max_deviation),
        _check("pbr_states_disjoint", rep.pbr_overlap == 0.0),
    ]
    return envelope("explicit check", cfg, checks, {"results": rep.to_dict()})


def _write_ensemble(out_dir: Path | None, tag: str, ens: bohm.TrajectoryEnsemble, grid: bohm.Grid1D):
    if out_dir is None:
        return []
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"density": out_dir / f"{tag}_density.csv", "paths": out_dir / f"{tag}_paths.csv",
             "histogram": out_dir / f"{tag}_final_histogram.csv"}
    bohm.write_density_csv(files["density"], ens, grid)
    bohm.write_paths_csv(files["paths"], ens)
    bohm.write_histogram_csv(files["histogram"], ens.final_positions, range_=(grid.x_min, grid.x_max))
    return [str(p) for p in files.values()]


def cmd_bohm(cfg: BohmConfig, out_dir: Path | None) -> dict:
    two = cfg.packets()
    grid = two.grid
    checks: list[dict] = []
    body: dict = {"files": []}
    t_final = two.t_overlap
    steps = int(round(t_final / two.dt))

    if cfg.scenario in ("interference", "delayed-choice"):
        psi = two.superposition(cfg.sign)
        runs = {}
        modes = ("off", "on") if cfg.scenario == "delayed-choice" or cfg.blocker == "both" else (cfg.blocker,)
        for mode in modes:
            ens = bohm.run_ensemble(psi, two.blocker(mode == "on"), cfg.n_traj, two.dt, t_final,
                                    seed=cfg.seed, save_every=cfg.save_every)
            runs[mode] = ens
            ks = bohm.ks_statistic(ens.final_positions, ens.final_wave)
            checks.append(_check(f"equivariance_blocker_{mode}", ks < cfg.ks_max, ks=ks,
                                 survivors=int(ens.alive.sum()), capped_velocities=ens.capped_velocities))
            body["files"] += _write_ensemble(out_dir, f"{cfg.scenario}_{mode}", ens, grid)
        window = two.null_window(cfg.sign)
        ref = bohm.evolve(two.packets()[0], None, two.dt, steps)
        if "off" in runs:
            f_off = float(np.mean((runs["off"].final_positions >= window[0])
                                  & (runs["off"].final_positions <= window[1])))
            checks.append(_check("null_window_off", f_off < 0.01, fraction=f_off, window=list(window)))
        if "on" in runs and "off" in runs:
            null = bohm.interference_null_check(runs["on"], runs["off"], window, ref)
            checks.append(_check("null_window_on", null.passed, **null.to_dict()))
        if cfg.scenario == "delayed-choice":
            div = bohm.path_divergence(runs["on"], runs["off"])
            checks.append(_check("trajectories_diverge", div.passed, **div.to_dict()))
    elif cfg.scenario == "phase-flip":
        rep = bohm.phase_flip_marginal(two.superposition(1.0), two.superposition(-1.0),
                                       (grid.x_min, 0.0), n_samples=cfg.n_traj, seed=cfg.seed)
        checks.append(_check("region1_marginal_equal", rep.passed, **rep.to_dict()))
    else:
        p1, p2 = two.packets()
        psi = two.superposition(1.0)
        demos = {"superposition_vs_psi1": (psi, p1, lambda o: abs(o - 0.5) < 1e-10),
                 "psi1_vs_psi1": (p1, p1, lambda o: abs(o - 1.0) < 1e-10),
                 "psi2_vs_psi1": (p2, p1, lambda o: o < 1e-10)}
        for name, (a, b, ok) in demos.items():
            rep = bohm.density_overlap_demo(a, b)
            checks.append(_check(name, ok(rep.overlap), **rep.to_dict()))
    return envelope("bohm run", cfg, checks, body)


COMMANDS = {
    ("pbr", "verify"): (PbrVerifyConfig, "pbr.verify", cmd_pbr_verify),
    ("pbr", "lp"): (PbrLpConfig, "pbr.lp", cmd_pbr_lp),
    ("explicit", "check"): (ExplicitConfig, "explicit.check", cmd_explicit_check),
    ("bohm", "run"): (BohmConfig, "bohm.run", cmd_bohm),
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ontolab", description=__doc__)
    groups = parser.add_subparsers(dest="group", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="INI file; section named after the command")
        p.add_argument("--out-dir", type=Path, help="write report.json (and CSVs) here")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)

    pbr = groups.add_parser("pbr").add_subparsers(dest="action", required=True)
    p = pbr.add_parser("verify", help="theorem pattern over random density families")
    common(p)
    p.add_argument("--densities", choices=DENSITY_FAMILIES)
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--psi-dependent", action="store_true", default=None)
    p = pbr.add_parser("lp", help="feasibility LP for one density pair")
    common(p)
    p.add_argument("--rho1", type=_floats)
    p.add_argument("--rho2", type=_floats)

    ex = groups.add_parser("explicit").add_subparsers(dest="action", required=True)
    p = ex.add_parser("check", help="amplitude hidden-variable model checks")
    common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--max-dim", type=int)
    p.add_argument("--dims", type=int, nargs=2)

    bh = groups.add_parser("bohm").add_subparsers(dest="action", required=True)
    p = bh.add_parser("run", help="pilot-wave scenarios")
    common(p)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--blocker", choices=("on", "off", "both"))
    p.add_argument("--n-traj", type=int)
    p.add_argument("--n-points", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--sign", type=int, choices=(1, -1))
    p.add_argument("--save-every", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cls, section, fn = COMMANDS[(args.group, args.action)]
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("group", "action", "config", "out_dir")}
    if "dims" in overrides and overrides["dims"] is not None:
        overrides["dims"] = tuple(overrides["dims"])
    if "sizes" in overrides and overrides["sizes"] is not None:
        overrides["sizes"] = tuple(overrides["sizes"])
    try:
        cfg = load_config(cls, section, args.config, overrides)
        report = fn(cfg, args.out_dir)
    except (ConfigError, InapplicableError, IndeterminateError, bohm.NormDriftError, ValueError) as exc:
        err = {"schema_version": reporting.SCHEMA_VERSION, "tool": "ontolab",
               "command": f"{args.group} {args.action}", "passed": False,
               "error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stdout.write(dumps(err))
        return 2
    text = dumps(report)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "report.json").write_text(text)
    sys.stdout.write(text)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
