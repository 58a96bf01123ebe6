"""Command-line driver for simulations, sweeps, and fitters.

Every command reads an optional JSON/TOML config, writes CSV (or JSON for
fitters) under --out, and is fully deterministic for a given config and
seed. Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 fit non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, bath, dynamics, fitting
from . import orbach_singlet as singlet
from . import orbach_triplet as triplet
from .config import ConfigError, RunConfig, load_config
from .constants import CONSTANTS
from .spin_core import GTensor, ZfsTensor, esr_spectrum_111

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NONCONVERGED = 4

_TRANSITION_NAMES = {(0, 1): "-1<->0", (1, 2): "0<->+1", (0, 2): "-1<->+1"}


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _write_csv(path: Path, cfg: RunConfig, command: str, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# sivspin {__version__} | command={command} | {cfg.provenance()}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([x if isinstance(x, str) else _fmt(x) for x in row])


def _pmap(fn, items, threads: int):
    """Order-preserving map, optionally threaded."""
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _gtensor(cfg: RunConfig) -> GTensor:
    return GTensor(g_parallel=cfg.g_parallel, g_perpendicular=cfg.g_perpendicular)


def _orbach_params(cfg: RunConfig) -> singlet.OrbachParams:
    return singlet.OrbachParams(
        rate_coefficient_c=cfg.c_rate,
        activation_energy_mev=cfg.ea_mev,
        temperature_k=cfg.temperature_k,
        zeeman_freq_ghz=cfg.zeeman_freq_ghz,
    )


def cmd_esr_spectrum(cfg: RunConfig, out_dir: Path) -> int:
    """Stick spectrum of the four <111> sites at the configured misalignment."""
    sticks = esr_spectrum_111(
        ZfsTensor(axial_d=cfg.d_g_ghz),
        _gtensor(cfg),
        cfg.zeeman_freq_ghz,
        misalignment=math.radians(cfg.misalignment_deg),
        window_mt=(cfg.window_min_mt, cfg.window_max_mt),
    )
    rows = [
        (s.field_mt, s.moment * s.weight, s.site, _TRANSITION_NAMES[s.levels])
        for s in sticks
    ]
    _write_csv(
        out_dir / "esr_spectrum.csv", cfg, "esr-spectrum",
        ["field_mT", "intensity", "site", "transition"], rows,
    )
    return EXIT_OK


def _singlet_sweep_row(cfg: RunConfig, theta: float):
    p = _orbach_params(cfg)
    zf = singlet.ZeroFieldOverlaps.from_ratio(cfg.ratio)
    ov = singlet.mixed_overlaps(zf, theta)
    r = singlet.singlet_rate_matrix(ov, p)
    t1a, t1b = singlet.labeled_relaxation_times(r, p.boltzmann_mu)
    t2 = singlet.t2_singlet(zf, theta, p, cfg.t2_id_s, cfg.t2_sd_s, cfg.transition)
    return math.degrees(theta), t1a, t1b, t2


def _triplet_sweep_row(cfg: RunConfig, theta: float):
    params = triplet.coaxial_triplet_params(
        cfg.d_e_ghz, theta, _orbach_params(cfg),
        d_g_ghz=cfg.d_g_ghz, field_mt=cfg.field_mt, g=_gtensor(cfg),
    )
    t1a, t1b = triplet.triplet_labeled_times(params)
    tau_e = cfg.triplet_tau_e_s if cfg.triplet_t2_mode == "partial-coherence" else None
    t2 = triplet.triplet_t2_model(
        params, cfg.transition, cfg.triplet_t2_mode, tau_e, cfg.t2_id_s, cfg.t2_sd_s
    )
    return math.degrees(theta), t1a, t1b, t2


def cmd_orientation_sweep(cfg: RunConfig, out_dir: Path) -> int:
    """T1_a, T1_b, and T2 versus field angle for the selected model."""
    thetas = np.radians(
        np.linspace(cfg.theta_min_deg, cfg.theta_max_deg, cfg.theta_points)
    )
    row_fn = _singlet_sweep_row if cfg.model == "singlet" else _triplet_sweep_row
    rows = _pmap(lambda th: row_fn(cfg, float(th)), thetas, cfg.threads)
    _write_csv(
        out_dir / "orientation_sweep.csv", cfg, "orientation-sweep",
        ["theta_deg", "t1a_s", "t1b_s", "t2_s"], rows,
    )
    return EXIT_OK


def cmd_temperature_sweep(cfg: RunConfig, out_dir: Path) -> int:
    """Arrhenius decay times versus temperature for both orientations."""
    temps = np.linspace(cfg.temp_min_k, cfg.temp_max_k, cfg.temp_points)
    rows = []
    for t_k in temps:
        boltz = CONSTANTS.arrhenius_factor(cfg.ea_mev, float(t_k))
        t2 = 1.0 / (1.0 / cfg.t2_sat_s + cfg.a_t2_hz * boltz)
        for label, a_hz in (
            ("on_axis", cfg.a_t1_on_axis_hz),
            ("off_axis", cfg.a_t1_off_axis_hz),
        ):
            t1 = 1.0 / (1.0 / cfg.t1_sat_s + a_hz * boltz)
            rows.append((float(t_k), label, t1, t2))
    _write_csv(
        out_dir / "temperature_sweep.csv", cfg, "temperature-sweep",
        ["temperature_K", "orientation", "t1_s", "t2_s"], rows,
    )
    return EXIT_OK


def cmd_decay(cfg: RunConfig, out_dir: Path) -> int:
    """Synthesize an inversion-recovery curve at one orientation."""
    p = _orbach_params(cfg)
    theta = math.radians(cfg.theta_deg)
    if cfg.model == "singlet":
        zf = singlet.ZeroFieldOverlaps.from_ratio(cfg.ratio)
        r = singlet.singlet_rate_matrix(singlet.mixed_overlaps(zf, theta), p)
    else:
        r = triplet.triplet_rate_matrix(
            triplet.coaxial_triplet_params(
                cfg.d_e_ghz, theta, p,
                d_g_ghz=cfg.d_g_ghz, field_mt=cfg.field_mt, g=_gtensor(cfg),
            )
        )
    times = np.geomspace(cfg.time_min_s, cfg.time_max_s, cfg.time_points)
    curve = dynamics.inversion_recovery_curve(r, cfg.transition, cfg.polarization, times)
    curve = dynamics.synthesize_noisy(curve, cfg.noise, cfg.seed)
    rows = (
        zip(curve.times_s, curve.signal, curve.sigma)
        if curve.sigma is not None
        else zip(curve.times_s, curve.signal)
    )
    header = ["time_s", "signal"] + (["sigma"] if curve.sigma is not None else [])
    _write_csv(out_dir / "decay.csv", cfg, "decay", header, rows)
    return EXIT_OK


def cmd_bath_sweep(cfg: RunConfig, out_dir: Path) -> int:
    """Neighbor-bath limited T2 over density and temperature grids."""
    rows = []
    for t_k in cfg.bath_temps_k:
        boltz = CONSTANTS.arrhenius_factor(cfg.ea_mev, float(t_k))
        flip_rate = 1.0 / cfg.t1_sat_s + cfg.a_t1_off_axis_hz * boltz

        def one(density: float, w=flip_rate) -> float:
            p = bath.PairBathParams(
                density_per_cm3=density,
                flip_rate_hz=w,
                g1z=cfg.g_parallel,
                g2z=cfg.g_parallel,
                t2_sd_background_s=cfg.t2_sd_s,
            )
            return bath.bath_limited_t2(p)

        t2s = _pmap(one, [float(n) for n in cfg.densities_cm3], cfg.threads)
        rows.extend(
            (float(n), float(t_k), t2)
            for n, t2 in zip(cfg.densities_cm3, t2s)
        )
    _write_csv(
        out_dir / "bath_sweep.csv", cfg, "bath-sweep",
        ["density_cm3", "temperature_K", "t2_s"], rows,
    )
    return EXIT_OK


def _write_fit(out_dir: Path, name: str, result: fitting.FitResult) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}.json").write_text(result.to_json() + "\n")
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def cmd_fit_biexp(cfg: RunConfig, out_dir: Path, input_path: str) -> int:
    curve = dynamics.DecayCurve.from_csv(input_path)
    return _write_fit(out_dir, "fit_biexp", fitting.fit_biexponential(curve))


def _read_table(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"empty input file {path}")
    return [h.strip() for h in rows[0]], rows[1:]


def cmd_fit_arrhenius(cfg: RunConfig, out_dir: Path, input_path: str, share_ea: bool) -> int:
    header, body = _read_table(input_path)
    required = {"temperature_k", "time_s"}
    if not required.issubset(set(header)):
        raise ValueError(f"arrhenius input needs columns {sorted(required)}")
    idx = {name: header.index(name) for name in header}
    groups: dict[str, list[tuple[float, float, float | None]]] = {}
    for row in body:
        label = row[idx["label"]].strip() if "label" in idx else ""
        sigma = float(row[idx["sigma"]]) if "sigma" in idx else None
        groups.setdefault(label, []).append(
            (float(row[idx["temperature_k"]]), float(row[idx["time_s"]]), sigma)
        )
    datasets = []
    for label, pts in sorted(groups.items()):
        temps = np.array([p[0] for p in pts])
        times = np.array([p[1] for p in pts])
        sigmas = (
            np.array([p[2] for p in pts]) if all(p[2] is not None for p in pts) else None
        )
        datasets.append(
            fitting.ArrheniusDataset(temps, times, sigmas, label=label or "data")
        )
    return _write_fit(
        out_dir, "fit_arrhenius", fitting.fit_arrhenius(datasets, share_ea=share_ea)
    )


def cmd_fit_id(cfg: RunConfig, out_dir: Path, input_path: str) -> int:
    header, body = _read_table(input_path)
    if header[:2] != ["theta2_rad", "rate_per_s"]:
        raise ValueError("instantaneous-diffusion input needs columns theta2_rad, rate_per_s")
    points = [(float(r[0]), float(r[1])) for r in body]
    return _write_fit(out_dir, "fit_id", fitting.fit_instantaneous_diffusion(points))


def cmd_fit_orientation(cfg: RunConfig, out_dir: Path, input_path: str) -> int:
    header, body = _read_table(input_path)
    required = {"observable", "theta_deg", "time_s"}
    if not required.issubset(set(header)):
        raise ValueError(f"orientation input needs columns {sorted(required)}")
    idx = {name: header.index(name) for name in header}
    blocks: dict[str, list[list[float]]] = {"t1a": [], "t1b": [], "t2": []}
    for row in body:
        obs = row[idx["observable"]].strip()
        if obs not in blocks:
            raise ValueError(f"unknown observable {obs!r}; expected t1a, t1b, or t2")
        rec = [math.radians(float(row[idx["theta_deg"]])), float(row[idx["time_s"]])]
        if "sigma" in idx:
            rec.append(float(row[idx["sigma"]]))
        blocks[obs].append(rec)
    result = fitting.global_orientation_fit(
        blocks["t1a"], blocks["t1b"], blocks["t2"],
        ea_mev=cfg.ea_mev,
        temperature_k=cfg.temperature_k,
        zeeman_ghz=cfg.zeeman_freq_ghz,
        t2_id_s=cfg.t2_id_s,
        t2_sd_s=cfg.t2_sd_s,
    )
    return _write_fit(out_dir, "fit_orientation", result)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sivspin",
        description="Spin-relaxation model simulations, sweeps, and fitters",
    )
    parser.add_argument("--config", help="JSON or TOML configuration file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--model", choices=("singlet", "triplet"), help="override the config model"
    )
    parser.add_argument("--threads", type=int, help="override the config thread count")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("esr-spectrum", "orientation-sweep", "temperature-sweep",
                 "decay", "bath-sweep"):
        sub.add_parser(name)
    for name in ("fit-biexp", "fit-arrhenius", "fit-id", "fit-orientation"):
        fit_parser = sub.add_parser(name)
        fit_parser.add_argument("--input", required=True, help="input data CSV")
        if name == "fit-arrhenius":
            fit_parser.add_argument(
                "--independent-ea", action="store_true",
                help="fit one activation energy per dataset instead of sharing",
            )
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.model is not None:
            overrides["model"] = args.model
        if args.threads is not None:
            overrides["threads"] = args.threads
        if overrides:
            merged = dict(cfg.values)
            merged.update(overrides)
            cfg = RunConfig(values=merged)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out)
    try:
        if args.command == "esr-spectrum":
            return cmd_esr_spectrum(cfg, out_dir)
        if args.command == "orientation-sweep":
            return cmd_orientation_sweep(cfg, out_dir)
        if args.command == "temperature-sweep":
            return cmd_temperature_sweep(cfg, out_dir)
        if args.command == "decay":
            return cmd_decay(cfg, out_dir)
        if args.command == "bath-sweep":
            return cmd_bath_sweep(cfg, out_dir)
        if args.command == "fit-biexp":
            return cmd_fit_biexp(cfg, out_dir, args.input)
        if args.command == "fit-arrhenius":
            return cmd_fit_arrhenius(
                cfg, out_dir, args.input, share_ea=not args.independent_ea
            )
        if args.command == "fit-id":
            return cmd_fit_id(cfg, out_dir, args.input)
        if args.command == "fit-orientation":
            return cmd_fit_orientation(cfg, out_dir, args.input)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, OSError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    raise AssertionError("unhandled command")  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
