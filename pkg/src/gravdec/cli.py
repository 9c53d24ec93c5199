"""Command-line driver: run a sweep from a config or preset and write CSV/JSON.

Exit status: 0 on success, 1 for invalid input, 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .config import PRESETS, ConfigError, RunConfig, load_config, load_preset
from .decoherence import coherence_length, gamma_mode_abs, gamma_mode_oracle
from .distinguish import distinguishability_length, fidelity_mode_abs, fidelity_oracle
from .ensemble import RNG_ALGORITHM, EnvironmentPartition, SweepResult, characteristic_times, make_time_grid, run_sweep
from .states import energy_variance, fock_energy_variance, number_operator_energies, qfi, qfi_generic, to_fock

log = logging.getLogger("gravdec")

CSV_NAME = "sweep.csv"
SUMMARY_NAME = "summary.json"
ORACLE_NAME = "oracle_report.json"


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    return x


def time_grid_for(config: RunConfig, partition: EnvironmentPartition) -> np.ndarray:
    if config.t_max is not None:
        t_max = config.t_max
    else:
        tau_dec, tau_dst = characteristic_times(partition, config.scenario)
        finite = [t for t in tau_dst if math.isfinite(t)]
        span = max(finite) if finite else tau_dec
        if not math.isfinite(span):
            raise ConfigError("time_grid.t_max is required when neither decoherence nor distinguishability times are finite")
        t_max = config.t_max_factor * span
    return make_time_grid(t_max, config.grid_points, config.grid_kind, config.t_min)


def summarize(result: SweepResult, config: RunConfig, seed: int) -> dict:
    sc = config.scenario
    tau_dst = min(result.tau_dst)
    t_ref = config.reference_time
    if t_ref is None:
        t_ref = tau_dst if math.isfinite(tau_dst) else result.tau_dec
    gamma, b = result.gamma, result.b_mac
    return _jsonable({
        "seed": seed,
        "config_hash": config.config_hash,
        "config": config.normalized,
        "rng": RNG_ALGORITHM,
        "backend": result.backend,
        "n_perp": config.n_perp,
        "n_mac": config.n_mac,
        "n_fractions": config.n_fractions,
        "points": int(result.times.size),
        "tau_dec": result.tau_dec,
        "tau_dst": tau_dst,
        "tau_dst_per_fraction": result.tau_dst,
        "sum_variance": result.sum_variance,
        "sum_qfi": result.sum_qfi,
        "reference_time": t_ref,
        "dx_c": coherence_length(result.sum_variance, t_ref, sc) if math.isfinite(t_ref) else None,
        "dx_d": [distinguishability_length(s, t_ref, sc) if math.isfinite(t_ref) else None for s in result.sum_qfi],
        "regime": result.regime,
        "gamma_min": float(gamma.min()),
        "b_mac_min": [float(row.min()) for row in b],
        "gamma_underflow_points": int(result.gamma_underflow.sum()),
        "b_mac_underflow_points": [int(row.sum()) for row in result.b_underflow],
        "csv": CSV_NAME,
    })


def _pick(modes, k):
    idx = np.unique(np.linspace(0, len(modes) - 1, min(k, len(modes))).round().astype(int))
    return [modes[i] for i in idx]


def oracle_report(partition: EnvironmentPartition, config: RunConfig, times, modes_per_fraction=4, n_times=5) -> dict:
    """Compare closed forms with truncated-Fock brute force on a subsample."""
    k = config.scenario.constants
    sc = config.scenario
    t_idx = np.unique(np.linspace(0, len(times) - 1, n_times).round().astype(int))
    rows = []
    fractions = [("unobserved", partition.unobserved)] + [
        (f"mac_{j + 1}", m) for j, m in enumerate(partition.macrofractions)
    ]
    for name, modes in fractions:
        for m in _pick(modes, modes_per_fraction):
            rho = to_fock(m)
            H = number_operator_energies(rho.dim, m.omega, k)
            var_o, qfi_o = fock_energy_variance(rho, H), qfi_generic(rho, H)
            var_c, qfi_c = energy_variance(m, k), qfi(m, k)
            dg = db = 0.0
            for i in t_idx:
                dphi = sc.phase_rate(m.omega) * times[i]
                dg = max(dg, abs(abs(gamma_mode_oracle(rho, dphi)) - gamma_mode_abs(m, dphi)))
                db = max(db, abs(fidelity_oracle(rho, dphi) - fidelity_mode_abs(m, dphi)))
            rows.append({
                "fraction": name, "omega": m.omega, "nbar": m.nbar, "fock_dim": rho.dim,
                "variance_rel_dev": abs(var_o - var_c) / var_c if var_c else abs(var_o),
                "qfi_rel_dev": abs(qfi_o - qfi_c) / qfi_c if qfi_c else abs(qfi_o) / (k.hbar * m.omega) ** 2,
                "gamma_abs_dev": dg, "fidelity_abs_dev": db,
            })
    worst = {key: max(r[key] for r in rows) for key in ("variance_rel_dev", "qfi_rel_dev", "gamma_abs_dev", "fidelity_abs_dev")}
    return _jsonable({"modes": rows, "max": worst, "times": [times[i] for i in t_idx]})


def run(config: RunConfig, seed: int | None, out_dir, oracle=False) -> dict:
    """Execute a sweep and write ``sweep.csv`` and ``summary.json`` into ``out_dir``."""
    seed = config.seed if seed is None else seed
    partition = config.partition(seed)
    times = time_grid_for(config, partition)
    result = run_sweep(partition, config.scenario, times, margin=config.margin)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.write_csv(out / CSV_NAME)
    summary = summarize(result, config, seed)
    if oracle:
        report = oracle_report(partition, config, times)
        (out / ORACLE_NAME).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        summary["oracle_report"] = ORACLE_NAME
        summary["oracle_max"] = report["max"]
    (out / SUMMARY_NAME).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gravdec", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="TOML run description")
    src.add_argument("--preset", choices=PRESETS, help="bundled run description")
    p.add_argument("--seed", type=_u64, default=None, help="override the config seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, default=Path("gravdec-out"), help="output directory")
    p.add_argument("--oracle", action="store_true", help="cross-check closed forms against Fock matrices")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_preset(args.preset) if args.preset else load_config(args.config)
    except (ConfigError, ValueError) as exc:
        print(f"gravdec: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"gravdec: cannot read configuration: {exc}", file=sys.stderr)
        return 1
    try:
        summary = run(config, args.seed, args.out, oracle=args.oracle)
    except ConfigError as exc:
        print(f"gravdec: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surfaced with context, mapped to exit 2
        print(f"gravdec: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    log.info("backend=%s tau_dec=%s tau_dst=%s", _kernels.BACKEND, summary["tau_dec"], summary["tau_dst"])
    print(f"wrote {Path(args.out) / CSV_NAME} and {Path(args.out) / SUMMARY_NAME}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
