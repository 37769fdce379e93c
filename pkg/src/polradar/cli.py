"""Command-line surface.

Subcommands: simulate, detect, image, mc-detect, mc-dipole, threshold.
Every run writes its outputs plus run_manifest.json (resolved config, config
hash, seed, versions, wall time) into --out, enough to re-run bit-identically.

Exit codes: 0 success, 1 runtime failure (machine-readable JSON record on
stderr), 2 usage.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import build_scene, config_sha256, load_config, noise_cov, save_config
from .detector import dipole_angle_error, glrt, receive_stack, steering
from .forward import SignalSet, synthesize
from .montecarlo import (
    MODES,
    build_engine,
    calibrate_threshold,
    mc_dipole,
    mode_pols,
    mode_uses_dp,
    statistic_image,
    sweep_snr,
)
from .noise import sample_noise
from .tables import (
    DPHI_CURVE_COLUMNS,
    PD_CURVE_COLUMNS,
    STAT_IMAGE_COLUMNS,
    THRESHOLDS_COLUMNS,
    write_csv,
    write_image_targets,
)

SUBCOMMANDS = ("simulate", "detect", "image", "mc-detect", "mc-dipole", "threshold")


def _parser():
    parser = argparse.ArgumentParser(
        prog="polradar",
        description="Passive polarimetric multistatic radar simulator and detector",
    )
    parser.add_argument("--version", action="version", version=f"polradar {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default="paper-vi",
        help="config file path or builtin name (paper-vi, paper-vi-3targets)",
    )
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    common.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("POLRADAR_THREADS", "1")),
        help="worker threads for Monte-Carlo chunks (env POLRADAR_THREADS)",
    )
    common.add_argument(
        "--receivers", type=int, default=None, help="receiver count for builtin configs"
    )
    common.add_argument("--verbose", action="store_true", help="progress lines to stderr")
    sub.add_parser("simulate", parents=[common], help="synthesize signal spectra to CSV")
    p = sub.add_parser("detect", parents=[common], help="one-shot GLRT at the hypothesis")
    p.add_argument("--mode", default="DP-POL", choices=MODES)
    p = sub.add_parser("image", parents=[common], help="test-statistic image over the scene")
    p.add_argument("--mode", default="DP-POL", choices=MODES)
    p = sub.add_parser("mc-detect", parents=[common], help="Pd vs SNR curves with CFAR thresholds")
    p.add_argument("--modes", default=None, help="comma-separated subset of modes")
    p = sub.add_parser("mc-dipole", parents=[common], help="mean dipole angle error vs SNR")
    p.add_argument("--modes", default=None, help="comma-separated subset of modes")
    sub.add_parser("threshold", parents=[common], help="CFAR thresholds only")
    return parser


def _signal_rows(stack_mpn, pols):
    rows = []
    for k in range(stack_mpn.shape[0]):
        for p, pol in enumerate(pols):
            for i in range(stack_mpn.shape[2]):
                val = stack_mpn[k, p, i]
                rows.append(
                    {
                        "receiver": k,
                        "polarization": pol.upper(),
                        "omega_index": i,
                        "re": float(val.real),
                        "im": float(val.imag),
                    }
                )
    return rows


def _run_simulate(cfg, scene, waveform, spec, out, args):
    signals = synthesize(scene, waveform)
    cov = noise_cov(cfg, signals)
    if cov is not None:
        n_tp, n_dp = sample_noise(waveform.grid, cov, spec.seed)
        signals = SignalSet(
            tp=signals.tp + n_tp.reshape(signals.tp.shape),
            dp=None if n_dp is None else signals.dp + n_dp.reshape(signals.dp.shape),
            grid=signals.grid,
            pols=signals.pols,
        )
    columns = ("receiver", "polarization", "omega_index", "re", "im")
    files = [write_csv(out / "tp_signal.csv", columns, _signal_rows(signals.tp, signals.pols))]
    if signals.dp is not None:
        files.append(
            write_csv(out / "dp_signal.csv", columns, _signal_rows(signals.dp, signals.pols))
        )
    return files


def _run_detect(cfg, scene, waveform, spec, out, args):
    pols = mode_pols(args.mode)
    use_dp = mode_uses_dp(args.mode)
    signals = synthesize(scene, waveform, pols=pols, with_dp=use_dp)
    cov = noise_cov(cfg, signals)
    if cov is not None:
        n_tp, n_dp = sample_noise(waveform.grid, cov, spec.seed)
        signals = SignalSet(
            tp=signals.tp + n_tp.reshape(signals.tp.shape),
            dp=None if n_dp is None else signals.dp + n_dp.reshape(signals.dp.shape),
            grid=signals.grid,
            pols=signals.pols,
        )
    else:
        from .noise import NoiseCov

        c = signals.n_channels
        cov = NoiseCov.common(c, 1.0, 1.0 if use_dp else None)
    hyp = spec.resolved_hypothesis(scene)
    out_det = glrt(
        signals,
        cov,
        steering(scene, waveform, hyp, pols=pols),
        use_dp=use_dp,
        receive=receive_stack(scene, hyp, pols=pols),
    )
    record = {
        "mode": args.mode,
        "lambda": out_det.lam,
        "e_est": [float(x) for x in out_det.e_est],
        "degenerate": bool(out_det.degenerate),
        "rank_deficient": bool(out_det.rank_deficient),
    }
    if scene.targets:
        record["dphi_rad"] = dipole_angle_error(out_det.e_est, scene.targets[0].e_sc)
    print(f"lambda = {out_det.lam:.10g}")
    print(f"e_est  = ({record['e_est'][0]:+.6f}, {record['e_est'][1]:+.6f}, {record['e_est'][2]:+.6f})")
    if "dphi_rad" in record:
        print(f"dphi   = {record['dphi_rad']:.6g} rad")
    path = out / "detection.json"
    with path.open("w") as f:
        json.dump(record, f, indent=2)
        f.write("\n")
    return [path]


def _run_image(cfg, scene, waveform, spec, out, args):
    tp_snr = cfg.get("noise", {}).get("tp_snr_db")
    img = statistic_image(scene, waveform, spec, mode=args.mode, tp_snr_db=tp_snr)
    files = [
        write_csv(out / "stat_image.csv", STAT_IMAGE_COLUMNS, img.rows()),
        write_image_targets(out / "image_targets.csv", img.targets),
    ]
    return files


def _progress(args):
    if not args.verbose:
        return None
    return lambda msg: print(msg, file=sys.stderr)


def _run_mc_detect(cfg, scene, waveform, spec, out, args):
    modes = args.modes.split(",") if args.modes else None
    pd_rows, thr_rows = sweep_snr(
        scene, waveform, spec, modes=modes, threads=args.threads, progress=_progress(args)
    )
    return [
        write_csv(out / "pd_curve.csv", PD_CURVE_COLUMNS, pd_rows),
        write_csv(out / "thresholds.csv", THRESHOLDS_COLUMNS, thr_rows),
    ]


def _run_mc_dipole(cfg, scene, waveform, spec, out, args):
    modes = args.modes.split(",") if args.modes else None
    rows = mc_dipole(
        scene, waveform, spec, modes=modes, threads=args.threads, progress=_progress(args)
    )
    return [write_csv(out / "dphi_curve.csv", DPHI_CURVE_COLUMNS, rows)]


def _run_threshold(cfg, scene, waveform, spec, out, args):
    hyp = spec.resolved_hypothesis(scene)
    rows = []
    for mode in spec.modes:
        m_idx = MODES.index(mode)
        for s_idx, snr_db in enumerate(spec.snr_grid_db):
            engine = build_engine(scene, waveform, hyp, mode, snr_db, spec.dp_snr_db, spec.seed)
            thr = calibrate_threshold(
                engine, spec.cfar, spec.trials_h0, m_idx, s_idx, threads=args.threads
            )
            rows.append({"mode": mode, "snr_db": snr_db, "threshold": thr})
    return [write_csv(out / "thresholds.csv", THRESHOLDS_COLUMNS, rows)]


_RUNNERS = {
    "simulate": _run_simulate,
    "detect": _run_detect,
    "image": _run_image,
    "mc-detect": _run_mc_detect,
    "mc-dipole": _run_mc_dipole,
    "threshold": _run_threshold,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    started = time.time()
    try:
        cfg = load_config(args.config, receivers=args.receivers)
        if args.seed is not None:
            cfg["experiment"]["seed"] = args.seed
        scene, waveform, spec = build_scene(cfg)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        files = _RUNNERS[args.subcommand](cfg, scene, waveform, spec, out, args)
        save_config(cfg, out / "config.json")
        manifest = {
            "subcommand": args.subcommand,
            "config_sha256": config_sha256(cfg),
            "config": cfg,
            "seed": cfg["experiment"]["seed"],
            "threads": args.threads,
            "versions": {
                "polradar": __version__,
                "numpy": np.__version__,
                "python": sys.version.split()[0],
            },
            "wall_time_s": round(time.time() - started, 3),
            "outputs": sorted(str(p.name) for p in files) + ["config.json"],
        }
        with (out / "run_manifest.json").open("w") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
        return 0
    except Exception as exc:  # runtime failures: machine-readable record, exit 1
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
