"""Command line entry point.

    mzbw <command> --config run.json [--out DIR] [--backend spectral|fd2]
                   [--seed N] [--threads N]

Commands: decompose, spin, evolve, trajectories, verify.  The MZBW_OUT
environment variable overrides --out.  --seed overrides the trajectory seed
from the config.  --threads is accepted for scheduler compatibility and has
no effect on results.

Exit codes: 0 success, 1 config or usage error, 2 numerical failure
(non-finite values, unusable input data), 3 a verification constraint failed
(battery check, spin-constraint violation, equivariance).

Outputs are deterministic: rerunning a command with the same config writes
byte-identical files.  No timestamps, sorted JSON keys, fixed float
formatting.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import config as cfgmod
from . import fieldio, trajectories, verify
from .config import ConfigError
from .evolve import EvolutionConfig, propagate
from .fields import integrate
from .madelung import continuity_residual, decompose, hj_residual, quantum_potential
from .spinhydro import (
    hestenes_residual,
    koenig_energy,
    pauli_current,
    rho_total_current,
    spin_density,
    velocity_decomposition,
)
from .states import attach_spinor, spin_vector

SPIN_CONSTRAINT_TOL = 1e-10  # max residual before `spin` reports a violation


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mzbw", description="Hydrodynamic wavefunction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("decompose", "density, phase gradient, and quantum potential of a state"),
        ("spin", "spin density, Pauli current, and the velocity decomposition"),
        ("evolve", "split-step time evolution, writing a snapshot series"),
        ("trajectories", "transport an ensemble along the velocity field"),
        ("verify", "run the identity battery and write a report"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="JSON run configuration")
        cmd.add_argument("--out", default="mzbw_out", help="output directory (default mzbw_out)")
        cmd.add_argument("--backend", choices=("spectral", "fd2"), default="spectral")
        cmd.add_argument("--seed", type=int, default=None, help="override the trajectory seed")
        cmd.add_argument("--threads", type=int, default=None, help="accepted; no effect on results")
    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0

    out_dir = os.environ.get("MZBW_OUT", args.out)
    try:
        cfg = cfgmod.load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    handler = {
        "decompose": _cmd_decompose,
        "spin": _cmd_spin,
        "evolve": _cmd_evolve,
        "trajectories": _cmd_trajectories,
        "verify": _cmd_verify,
    }[args.command]
    try:
        return handler(cfg, out_dir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def _grid_summary(grid) -> dict:
    return {"points": list(grid.points), "extent": [float(e) for e in grid.extents]}


def _cmd_decompose(cfg: dict, out_dir: str, args) -> int:
    grid = cfgmod.build_grid(cfg)
    params = cfgmod.build_params(cfg)
    psi = cfgmod.build_state(cfg, grid, params)
    potential = cfgmod.build_potential(cfg, grid, params)

    md = decompose(psi, params, args.backend)
    qp = quantum_potential(md.rho, params, args.backend)
    budget = koenig_energy(psi, potential, params, chi=cfgmod.build_spinor(cfg), backend=args.backend)

    os.makedirs(out_dir, exist_ok=True)
    outputs = {
        "rho.mzbw": md.rho,
        "phase.mzbw": md.phase,
        "momentum.mzbw": md.momentum,
        "qpotential.mzbw": qp.q,
    }
    for name, field in outputs.items():
        fieldio.write_field(os.path.join(out_dir, name), field)
    fieldio.write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "command": "decompose",
            "backend": args.backend,
            "grid": _grid_summary(grid),
            "norm": float(integrate(md.rho)),
            "masked_fraction": float(np.mean(md.node_mask)),
            "energies": {
                "translational": budget.translational,
                "internal": budget.internal,
                "potential": budget.potential,
                "total": budget.total,
            },
            "outputs": sorted(outputs),
        },
    )
    return 0


def _cmd_spin(cfg: dict, out_dir: str, args) -> int:
    grid = cfgmod.build_grid(cfg)
    params = cfgmod.build_params(cfg)
    psi = cfgmod.build_state(cfg, grid, params)
    chi = cfgmod.build_spinor(cfg)
    vector_potential = cfgmod.build_vector_potential(cfg, grid)

    spinor = attach_spinor(psi, chi)
    sv = spin_density(spinor, params)
    current = pauli_current(spinor, params, vector_potential, args.backend)
    decomp = velocity_decomposition(spinor, params, vector_potential, args.backend)
    hest = hestenes_residual(sv.rho, sv.s, args.backend)
    consistency = float(
        np.max(np.abs(rho_total_current(decomp, sv.rho).values - current.total.values))
    )
    constraints_pass = max(hest.div_max, hest.dot_max) <= SPIN_CONSTRAINT_TOL

    os.makedirs(out_dir, exist_ok=True)
    outputs = {
        "spin.mzbw": sv.s,
        "current.mzbw": current.total,
        "drift.mzbw": decomp.drift,
        "zbw.mzbw": decomp.zbw,
        "total.mzbw": decomp.total,
    }
    for name, field in outputs.items():
        fieldio.write_field(os.path.join(out_dir, name), field)
    fieldio.write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "command": "spin",
            "backend": args.backend,
            "grid": _grid_summary(grid),
            "spin_vector": [float(c) for c in spin_vector(chi, params)],
            "constraints": {
                "div_rho_s_max": hest.div_max,
                "div_rho_s_weighted": hest.div_weighted,
                "grad_rho_dot_s_max": hest.dot_max,
                "grad_rho_dot_s_weighted": hest.dot_weighted,
                "tolerance": SPIN_CONSTRAINT_TOL,
                "passed": bool(constraints_pass),
            },
            "current_consistency_max": consistency,
            "masked_fraction": float(np.mean(decomp.node_mask)),
            "outputs": sorted(outputs),
        },
    )
    if not constraints_pass:
        print(
            f"spin constraints violated: max |grad(rho).s| = {hest.dot_max:.3e}, "
            f"max |div(rho s)| = {hest.div_max:.3e} (tolerance {SPIN_CONSTRAINT_TOL})",
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_evolve(cfg: dict, out_dir: str, args) -> int:
    grid = cfgmod.build_grid(cfg)
    params = cfgmod.build_params(cfg)
    psi = cfgmod.build_state(cfg, grid, params)
    potential = cfgmod.build_potential(cfg, grid, params)
    if "evolution" not in cfg:
        raise ConfigError("evolve requires an evolution section")
    evo = cfg["evolution"]
    series = propagate(
        psi,
        EvolutionConfig(
            dt=float(evo["dt"]),
            steps=int(evo["steps"]),
            snapshot_stride=int(evo.get("snapshot_stride", 1)),
            potential=potential,
            params=params,
        ),
    )

    os.makedirs(out_dir, exist_ok=True)
    snap_dir = os.path.join(out_dir, "snapshots")
    fieldio.write_snapshot_series(snap_dir, series, config_echo=cfg)

    summary = {
        "command": "evolve",
        "backend": args.backend,
        "grid": _grid_summary(grid),
        "snapshots": len(series.states),
        "time_range": [float(series.times[0]), float(series.times[-1])],
        "norm_drift_max": float(np.max(np.abs(series.norms - series.norms[0]))),
        "energy_drift_max": float(np.max(np.abs(series.energies - series.energies[0]))),
    }
    if evo.get("residuals", False) and len(series.states) >= 3:
        # equation residuals on the interior snapshots, sup over the region
        # where rho >= 1e-6 max so tail roundoff does not dominate
        hj_sup, ct_sup = [], []
        for i in range(1, len(series.states) - 1):
            triple, dt = series.triple(i)
            rho = np.abs(triple[1].values) ** 2
            keep = rho >= verify.REGION_EPS * rho.max()
            hj = hj_residual(triple, dt, potential, params, args.backend)
            ct = continuity_residual(triple, dt, params, args.backend)
            hj_sup.append(float(np.max(np.abs(hj.values.values[keep]))))
            ct_sup.append(float(np.max(np.abs(ct.values.values[keep]))))
        summary["residuals"] = {
            "phase_sup": hj_sup,
            "continuity_sup": ct_sup,
            "region_eps": verify.REGION_EPS,
        }
    fieldio.write_json(os.path.join(out_dir, "summary.json"), summary)
    return 0


def _cmd_trajectories(cfg: dict, out_dir: str, args) -> int:
    grid = cfgmod.build_grid(cfg)
    params = cfgmod.build_params(cfg)
    psi = cfgmod.build_state(cfg, grid, params)
    if "trajectories" not in cfg:
        raise ConfigError("trajectories requires a trajectories section")
    section = cfg["trajectories"]
    mode = section.get("mode", "drift")
    source_kind = section.get("source", "static")
    seed = int(section.get("seed", 0)) if args.seed is None else int(args.seed)
    spin = spin_vector(cfgmod.build_spinor(cfg), params) if mode == "total" else None

    if source_kind == "evolve":
        evo = cfg["evolution"]
        potential = cfgmod.build_potential(cfg, grid, params)
        source = propagate(
            psi,
            EvolutionConfig(
                dt=float(evo["dt"]),
                steps=int(evo["steps"]),
                snapshot_stride=int(evo.get("snapshot_stride", 1)),
                potential=potential,
                params=params,
            ),
        )
        advect_kwargs = {"substeps": int(section.get("substeps", 4))}
        rho_final = decompose(source.states[-1], params, args.backend).rho
    else:
        source = psi
        advect_kwargs = {
            "duration": float(section["time"]),
            "rk_steps": int(section.get("rk_steps", 200)),
        }
        rho_final = decompose(psi, params, args.backend).rho

    rho0 = decompose(psi, params, args.backend).rho
    seeds = trajectories.sample_initial(rho0, int(section["n"]), seed)
    traj = trajectories.advect(
        seeds,
        source,
        mode,
        spin=spin,
        params=params,
        backend=args.backend,
        rng_seed=seed,
        **advect_kwargs,
    )

    os.makedirs(out_dir, exist_ok=True)
    fmt = section.get("format", "csv")
    if fmt == "csv":
        data_file = "trajectories.csv"
        fieldio.write_trajectories_csv(
            os.path.join(out_dir, data_file), traj, int(section.get("record_stride", 1))
        )
    else:
        data_file = "trajectories.bin"
        fieldio.write_trajectories_binary(os.path.join(out_dir, data_file), traj)

    manifest = {
        "command": "trajectories",
        "backend": args.backend,
        "grid": _grid_summary(grid),
        "n": int(section["n"]),
        "seed": seed,
        "mode": mode,
        "source": source_kind,
        "frozen": int(np.sum(traj.frozen)),
        "time_range": [float(traj.times[0]), float(traj.times[-1])],
        "files": [data_file],
    }
    equiv_failed = False
    if section.get("equivariance", False):
        report = trajectories.equivariance_check(traj, rho_final)
        manifest["equivariance"] = {
            "statistic": report.statistic,
            "critical_1pct": report.critical_1pct,
            "per_axis": [float(s) for s in report.per_axis],
            "passed": bool(report.passed),
        }
        equiv_failed = not report.passed
    fieldio.write_json(os.path.join(out_dir, "manifest.json"), manifest)

    if equiv_failed:
        print(
            f"equivariance check failed: statistic {manifest['equivariance']['statistic']:.4f} "
            f">= critical {manifest['equivariance']['critical_1pct']:.4f}",
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_verify(cfg: dict, out_dir: str, args) -> int:
    refinements = cfg.get("verify", {}).get("refinements", 2)
    report = verify.run_battery(backend=args.backend, refinements=refinements)
    os.makedirs(out_dir, exist_ok=True)
    fieldio.write_json(os.path.join(out_dir, "report.json"), report)
    for line in verify.format_report(report):
        print(line)
    return 0 if report["passed"] else 3


if __name__ == "__main__":
    sys.exit(main())
