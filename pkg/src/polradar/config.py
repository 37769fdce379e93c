"""Scene/experiment configuration: a JSON tree, validated and resolved.

``load_config`` accepts a path or a builtin name. ``paper-vi`` generates the
reference scene used throughout the bundled experiments: a transmitter at
(15, 15, 5) km, receivers equally spaced on a 10 km circle at 5 km altitude
with H dipoles (sin t, -cos t, 0) and V dipoles (0, 0, 1), a 2 GHz center
frequency, 8 MHz bandwidth, 256 samples, and a 400 x 400 m flat scene.
``paper-vi-3targets`` is the same scene with the three-target image setup.
"""

import copy
import hashlib
import json
import warnings
from pathlib import Path

import numpy as np

from .detector import Hypothesis
from .forward import DOPPLER_SPEED_LIMIT
from .geometry import Topography
from .montecarlo import MODES, ExperimentSpec
from .noise import NoiseCov, snr_to_variance
from .scene import C0, Receiver, Scene, Transmitter, Waveform
from .targets import PointTarget

BUILTIN_CONFIGS = ("paper-vi", "paper-vi-3targets", "paper-vi-dipole")

# single-target dipole per receiver count, tuned so the H/V channel-energy
# split matches the reference detection experiments
_DETECTION_DIPOLES = {
    1: (0.0, 0.607, 0.795),
    2: (0.0, 0.569, 0.823),
    6: (0.0, 0.804, 0.595),
}

# SNR windows bracketing the Pd = 0.9 crossings per receiver count (the
# two-receiver window also covers the no-direct-path modes, which sit several
# dB to the right of the direct-path ones)
_SNR_GRIDS = {
    1: tuple(np.round(np.arange(-19.0, -8.9, 1.0), 6)),
    2: tuple(np.round(np.arange(-22.0, -4.9, 1.0), 6)),
    6: tuple(np.round(np.arange(-25.0, -15.9, 1.0), 6)),
}


class ConfigError(ValueError):
    """Invalid configuration; the message lists every violation found."""


def _unit(vec):
    v = np.asarray(vec, dtype=float)
    return (v / np.linalg.norm(v)).tolist()


def paper_vi_config(receivers=6, variant="detect", seed=20260808):
    """Resolved config dict for the reference simulation scene.

    Variants: "detect" (single tuned target at the scene center),
    "3targets" (the three-target statistic-image setup), "dipole" (vertical
    dipole at the center for the moment-estimation experiment).
    """
    thetas = [2.0 * np.pi * k / receivers for k in range(receivers)]
    rx_list = [
        {
            "position_m": [1e4 * np.cos(t), 1e4 * np.sin(t), 5e3],
            "dipole_h": [np.sin(t), -np.cos(t), 0.0],
            "dipole_v": [0.0, 0.0, 1.0],
            "gain_h": 1.0,
            "gain_v": 1.0,
            "gain_dp_h": 1.0,
            "gain_dp_v": 1.0,
        }
        for t in thetas
    ]
    if variant == "3targets":
        # widely separated cell-centered targets; the dipoles form an
        # orthonormal triad with equal projections onto the incident
        # transverse field, so the three returns are equally strong and
        # couple minimally into each other's image peaks
        targets = [
            {"x2_m": [-140.0, -140.0], "v2_mps": [10.0, 5.0], "rho": 1.0,
             "dipole": _unit((-0.128321, -0.983861, -0.124708))},
            {"x2_m": [150.0, -50.0], "v2_mps": [10.0, 5.0], "rho": 1.0,
             "dipole": _unit((0.578619, 0.027853, -0.815122))},
            {"x2_m": [-60.0, 140.0], "v2_mps": [10.0, 5.0], "rho": 1.0,
             "dipole": _unit((0.80544, -0.176755, 0.565706))},
        ]
    elif variant == "dipole":
        targets = [
            {"x2_m": [0.0, 0.0], "v2_mps": [10.0, 5.0], "rho": 1.0, "dipole": [0.0, 0.0, 1.0]}
        ]
    elif variant == "detect":
        dipole = _DETECTION_DIPOLES.get(receivers, (0.0, 0.6, 0.8))
        targets = [
            {"x2_m": [0.0, 0.0], "v2_mps": [10.0, 5.0], "rho": 1.0, "dipole": _unit(dipole)}
        ]
    else:
        raise ConfigError(f"unknown paper-vi variant {variant!r}")
    snr_grid = _SNR_GRIDS.get(receivers, _SNR_GRIDS[6])
    dp_snr_db = 4.0 if variant == "dipole" else 10.0
    return {
        "constants": {"c0": C0},
        "transmitter": {"position_m": [15e3, 15e3, 5e3], "dipole": [1.0, 0.0, 0.0], "gain": 1.0},
        "receivers": rx_list,
        "targets": targets,
        "waveform": {
            "f0_hz": 2e9,
            "bandwidth_hz": 8e6,
            "n_samples": 256,
            "kind": "random_phase",
            "seed": 1,
        },
        "topography": {"kind": "flat", "height_m": 0.0},
        "noise": {"tp_snr_db": 0.0, "dp_snr_db": dp_snr_db},
        "experiment": {
            "cfar": 1e-3,
            "trials_h0": 10000,
            "trials_h1": 2000,
            "snr_grid_db": [float(s) for s in snr_grid],
            "modes": list(MODES),
            "dp_snr_db": dp_snr_db,
            "image_grid": {"nx": 41, "ny": 41, "extent_m": 400.0},
            "dphi_trials": 1000,
            "dphi_snr_grid_db": [float(s) for s in range(-20, 21, 5)],
            "seed": int(seed),
        },
    }


def load_config(source, receivers=None):
    """Load and validate a config from a file path or builtin name.

    ``receivers`` regenerates a builtin with that receiver count; it is
    rejected for file-based configs (edit the file instead).
    """
    if isinstance(source, (str, Path)) and str(source) in BUILTIN_CONFIGS:
        variant = {"paper-vi": "detect", "paper-vi-3targets": "3targets",
                   "paper-vi-dipole": "dipole"}[str(source)]
        cfg = paper_vi_config(receivers=receivers or 6, variant=variant)
    else:
        if receivers is not None:
            raise ConfigError("--receivers only applies to builtin configs")
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with path.open() as f:
                cfg = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error at line {exc.lineno}: {exc.msg}") from exc
    return validate_config(cfg)


def save_config(cfg, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def config_sha256(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _check_unit(vec, label, errors):
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        errors.append(f"{label}: expected a 3-vector")
        return vec
    n = np.linalg.norm(v)
    if n == 0.0:
        errors.append(f"{label}: zero vector cannot be normalized")
        return vec
    if abs(n - 1.0) > 1e-6:
        warnings.warn(f"{label} renormalized (|v| = {n:.8f})", stacklevel=3)
    return (v / n).tolist()


def validate_config(cfg):
    """Validate and resolve a config dict in place-free fashion.

    Returns a deep copy with defaults filled and unit vectors normalized.
    Raises ConfigError listing every violation.
    """
    cfg = copy.deepcopy(cfg)
    errors = []

    constants = cfg.setdefault("constants", {})
    constants.setdefault("c0", C0)
    if constants["c0"] <= 0:
        errors.append("constants.c0: must be positive")

    tx = cfg.get("transmitter")
    if not isinstance(tx, dict):
        errors.append("transmitter: missing")
    else:
        tx.setdefault("gain", 1.0)
        if "position_m" not in tx or len(tx["position_m"]) != 3:
            errors.append("transmitter.position_m: expected a 3-vector")
        if "dipole" in tx:
            tx["dipole"] = _check_unit(tx["dipole"], "transmitter.dipole", errors)
        else:
            errors.append("transmitter.dipole: missing")

    rx_list = cfg.get("receivers")
    if not rx_list:
        errors.append("receivers: at least one receiver is required")
    else:
        for i, rx in enumerate(rx_list):
            rx.setdefault("gain_h", 1.0)
            rx.setdefault("gain_v", 1.0)
            rx.setdefault("gain_dp_h", 1.0)
            rx.setdefault("gain_dp_v", 1.0)
            if "position_m" not in rx or len(rx["position_m"]) != 3:
                errors.append(f"receivers[{i}].position_m: expected a 3-vector")
            for key in ("dipole_h", "dipole_v"):
                if key in rx:
                    rx[key] = _check_unit(rx[key], f"receivers[{i}].{key}", errors)
                else:
                    errors.append(f"receivers[{i}].{key}: missing")

    c0 = constants.get("c0", C0)
    for i, tgt in enumerate(cfg.get("targets", [])):
        tgt.setdefault("rho", 1.0)
        if tgt["rho"] <= 0:
            errors.append(f"targets[{i}].rho: must be positive")
        if "dipole" in tgt:
            tgt["dipole"] = _check_unit(tgt["dipole"], f"targets[{i}].dipole", errors)
        else:
            errors.append(f"targets[{i}].dipole: missing")
        if "x2_m" not in tgt or len(tgt["x2_m"]) != 2:
            errors.append(f"targets[{i}].x2_m: expected a 2-vector")
        tgt.setdefault("v2_mps", [0.0, 0.0])
        if np.linalg.norm(tgt["v2_mps"]) >= DOPPLER_SPEED_LIMIT * c0:
            errors.append(f"targets[{i}].v2_mps: speed violates |v| << c0")

    wf = cfg.get("waveform")
    if not isinstance(wf, dict):
        errors.append("waveform: missing")
    else:
        wf.setdefault("kind", "random_phase")
        wf.setdefault("seed", 1)
        if wf.get("n_samples", 0) < 2:
            errors.append("waveform.n_samples: need at least 2 samples")
        if wf.get("f0_hz", 0) <= 0:
            errors.append("waveform.f0_hz: must be positive")
        if wf.get("bandwidth_hz", 0) <= 0:
            errors.append("waveform.bandwidth_hz: must be positive")
        if wf.get("kind") not in ("random_phase", "flat", "lfm"):
            errors.append(f"waveform.kind: unknown kind {wf.get('kind')!r}")

    topo = cfg.setdefault("topography", {"kind": "flat", "height_m": 0.0})
    topo.setdefault("kind", "flat")
    topo.setdefault("height_m", 0.0)
    if topo["kind"] not in ("flat", "plane"):
        errors.append(f"topography.kind: unknown kind {topo['kind']!r}")
    if topo["kind"] == "plane":
        topo.setdefault("slope", [0.0, 0.0])

    cfg.setdefault("noise", {})

    exp = cfg.setdefault("experiment", {})
    exp.setdefault("cfar", 1e-3)
    exp.setdefault("trials_h0", 10000)
    exp.setdefault("trials_h1", 2000)
    exp.setdefault("snr_grid_db", [])
    exp.setdefault("modes", list(MODES))
    exp.setdefault("dp_snr_db", 10.0)
    exp.setdefault("image_grid", {"nx": 41, "ny": 41, "extent_m": 400.0})
    exp.setdefault("dphi_trials", 1000)
    exp.setdefault("dphi_snr_grid_db", [float(s) for s in range(-20, 21, 5)])
    exp.setdefault("seed", 0)
    if not (0.0 < exp["cfar"] <= 1.0):
        errors.append("experiment.cfar: must lie in (0, 1]")
    elif exp["cfar"] * exp["trials_h0"] < 10:
        errors.append("experiment.cfar * trials_h0 < 10: null quantile not estimable")
    for m in exp["modes"]:
        if m not in MODES:
            errors.append(f"experiment.modes: unknown mode {m!r}")
    grid = exp["image_grid"]
    if grid.get("nx", 0) < 1 or grid.get("ny", 0) < 1 or grid.get("extent_m", 0) <= 0:
        errors.append("experiment.image_grid: nx, ny >= 1 and extent_m > 0 required")

    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    return cfg


def build_scene(cfg):
    """Instantiate (Scene, Waveform, ExperimentSpec) from a validated config."""
    topo_cfg = cfg["topography"]
    topo = Topography(
        height=topo_cfg.get("height_m", 0.0), slope=topo_cfg.get("slope", (0.0, 0.0))
    )
    tx_cfg = cfg["transmitter"]
    receivers = tuple(
        Receiver(
            position=rx["position_m"],
            dipole_h=rx["dipole_h"],
            dipole_v=rx["dipole_v"],
            gain_h=rx["gain_h"],
            gain_v=rx["gain_v"],
            gain_dp_h=rx["gain_dp_h"],
            gain_dp_v=rx["gain_dp_v"],
        )
        for rx in cfg["receivers"]
    )
    targets = tuple(
        PointTarget(x2=t["x2_m"], v2=t["v2_mps"], rho=t["rho"], e_sc=t["dipole"])
        for t in cfg.get("targets", [])
    )
    scene = Scene(
        transmitter=Transmitter(
            position=tx_cfg["position_m"], dipole=tx_cfg["dipole"], gain=tx_cfg["gain"]
        ),
        receivers=receivers,
        targets=targets,
        topography=topo,
        c0=cfg["constants"]["c0"],
    )
    wf_cfg = cfg["waveform"]
    waveform = Waveform(
        omega0=2.0 * np.pi * wf_cfg["f0_hz"],
        bandwidth=2.0 * np.pi * wf_cfg["bandwidth_hz"],
        n_samples=wf_cfg["n_samples"],
        kind=wf_cfg["kind"],
        seed=wf_cfg["seed"],
    )
    exp = cfg["experiment"]
    hyp = None
    if "hypothesis" in exp:
        hyp = Hypothesis(x2=exp["hypothesis"]["x2_m"], v2=exp["hypothesis"]["v2_mps"])
    spec = ExperimentSpec(
        cfar=exp["cfar"],
        trials_h0=exp["trials_h0"],
        trials_h1=exp["trials_h1"],
        snr_grid_db=tuple(exp["snr_grid_db"]),
        modes=tuple(exp["modes"]),
        dp_snr_db=exp["dp_snr_db"],
        hypothesis=hyp,
        image_shape=(exp["image_grid"]["nx"], exp["image_grid"]["ny"]),
        image_extent_m=exp["image_grid"]["extent_m"],
        dphi_trials=exp["dphi_trials"],
        dphi_snr_grid_db=tuple(exp["dphi_snr_grid_db"]),
        seed=exp["seed"],
    )
    return scene, waveform, spec


def noise_cov(cfg, signals):
    """NoiseCov for one realization, from explicit sigma2 lists or SNRs.

    Returns None when the config requests a noise-free run (no sigma2 lists
    and null/absent SNRs).
    """
    noise_cfg = cfg.get("noise", {})
    c = signals.n_channels
    dw = signals.dw
    sigma2_tp = None
    if noise_cfg.get("tp_sigma2") is not None:
        sigma2_tp = np.asarray(noise_cfg["tp_sigma2"], dtype=float)
        if sigma2_tp.size != c:
            raise ConfigError(f"noise.tp_sigma2: expected {c} entries, got {sigma2_tp.size}")
    elif noise_cfg.get("tp_snr_db") is not None:
        sigma2_tp = np.full(c, snr_to_variance(signals.tp_stack(), dw, noise_cfg["tp_snr_db"]))
    sigma2_dp = None
    if signals.dp is not None:
        if noise_cfg.get("dp_sigma2") is not None:
            sigma2_dp = np.asarray(noise_cfg["dp_sigma2"], dtype=float)
            if sigma2_dp.size != c:
                raise ConfigError(f"noise.dp_sigma2: expected {c} entries, got {sigma2_dp.size}")
        elif noise_cfg.get("dp_snr_db") is not None:
            sigma2_dp = np.full(
                c, snr_to_variance(signals.dp_stack(), dw, noise_cfg["dp_snr_db"])
            )
    if sigma2_tp is None:
        return None
    return NoiseCov(sigma2_tp=sigma2_tp, sigma2_dp=sigma2_dp)
