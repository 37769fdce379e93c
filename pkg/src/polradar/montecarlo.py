"""Monte-Carlo experiment harness: CFAR threshold calibration, probability of
detection, SNR sweeps, test-statistic images, and dipole-error curves.

Trials are keyed individually from (seed, stream, indices, trial) so any
worker can generate any trial and reductions are schedule independent. The
four experiment modes differ in which channels exist:

- DP-POL:    H+V channels, direct path used
- DP-NOPOL:  H channels only, direct path used
- POL:       H+V channels, target path only
- NOPOL:     H channels only, target path only

NOPOL removes the V channels from both data and model dimensions (M x 1
instead of M x 2); it never zeroes them. One sigma^2 per path is calibrated
from the full dual-polarized array and shared by all modes so that mode
curves are comparable at the same nominal SNR.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detector import (
    Hypothesis,
    PINV_RTOL,
    estimate_dipole,
    phase_normalize,
    receive_stack,
    steering,
)
from .forward import synthesize
from .noise import snr_to_variance, standard_complex, trial_rng
from .scene import BOTH_POLS, POL_H

MODES = ("DP-POL", "DP-NOPOL", "POL", "NOPOL")

# RNG stream tags
STREAM_H0 = 1
STREAM_H1 = 2
STREAM_IMAGE = 3
STREAM_DIPOLE = 4
STREAM_HOLDOUT = 5

_Z95 = 1.959963984540054


class ExperimentError(ValueError):
    """Raised for invalid experiment configurations."""


def mode_pols(mode):
    if mode not in MODES:
        raise ExperimentError(f"unknown mode {mode!r} (choose from {MODES})")
    return BOTH_POLS if mode.endswith("-POL") or mode == "POL" else (POL_H,)


def mode_uses_dp(mode):
    if mode not in MODES:
        raise ExperimentError(f"unknown mode {mode!r} (choose from {MODES})")
    return mode.startswith("DP-")


@dataclass
class ExperimentSpec:
    """Knobs for the bundled experiments (thresholds, sweeps, images, dipoles)."""

    cfar: float = 1e-3
    trials_h0: int = 10000
    trials_h1: int = 2000
    snr_grid_db: tuple = ()
    modes: tuple = MODES
    dp_snr_db: float = 10.0
    hypothesis: Hypothesis | None = None
    image_shape: tuple = (41, 41)
    image_extent_m: float = 400.0
    dphi_trials: int = 1000
    dphi_snr_grid_db: tuple = tuple(range(-20, 21, 5))
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.cfar <= 1.0):
            raise ExperimentError("cfar must lie in (0, 1]")
        if self.cfar * self.trials_h0 < 10:
            raise ExperimentError(
                f"cfar * trials_h0 = {self.cfar * self.trials_h0:.1f} < 10: "
                "the null quantile is not estimable"
            )
        for m in self.modes:
            mode_pols(m)

    def resolved_hypothesis(self, scene):
        if self.hypothesis is not None:
            return self.hypothesis
        if not scene.targets:
            raise ExperimentError("no hypothesis given and the scene has no targets")
        t = scene.targets[0]
        return Hypothesis(x2=t.x2, v2=t.v2)


def wilson_interval(successes, n, z=_Z95):
    """Wilson 95% score interval for a binomial proportion."""
    if n <= 0:
        raise ExperimentError("need at least one trial")
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def isotonic_fit(y, increasing=True):
    """Pool-adjacent-violators fit of an isotonic sequence to y."""
    y = np.asarray(y, dtype=float)
    if not increasing:
        return -isotonic_fit(-y, increasing=True)
    levels = [[y[0], 1.0]]
    for val in y[1:]:
        levels.append([val, 1.0])
        while len(levels) > 1 and levels[-2][0] > levels[-1][0]:
            v2, w2 = levels.pop()
            v1, w1 = levels.pop()
            levels.append([(v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2])
    out = np.empty_like(y)
    i = 0
    for val, w in levels:
        out[i : i + int(w)] = val
        i += int(w)
    return out


def pd_crossing_snr(snr_db, pd, level=0.9):
    """SNR where the (isotonically smoothed) Pd curve crosses ``level``.

    Linear interpolation between the bracketing grid points; raises if the
    curve never reaches the level inside the grid.
    """
    snr_db = np.asarray(snr_db, dtype=float)
    fit = isotonic_fit(np.asarray(pd, dtype=float), increasing=True)
    above = np.nonzero(fit >= level)[0]
    if above.size == 0 or above[0] == 0:
        raise ExperimentError(f"Pd curve does not cross {level} inside the SNR grid")
    hi = above[0]
    lo = hi - 1
    span = fit[hi] - fit[lo]
    frac = 0.5 if span == 0 else (level - fit[lo]) / span
    return float(snr_db[lo] + frac * (snr_db[hi] - snr_db[lo]))


@dataclass
class TrialEngine:
    """Per-(scene, hypothesis, mode, noise level) trial machinery.

    Holds the whitened steered noise-free signal rows so a trial only draws
    standard complex noise, adds, and takes a Gram eigenvalue. Channel count
    c is the target-path dimension; with the direct path the stacked
    dimension is c + c.
    """

    v_tp_sig: np.ndarray  # (c, N) whitened steered TP signal
    v_dp_sig: np.ndarray | None
    dw: float
    receive: np.ndarray  # (c, 3)
    sigma2_tp: np.ndarray
    sigma2_dp: np.ndarray | None
    seed: int
    estimator: np.ndarray = field(init=False)  # (3, c): pinv(A_r) sqrt(sigma)
    rank: int = field(init=False)

    def __post_init__(self):
        u, s, vt = np.linalg.svd(self.receive, full_matrices=False)
        self.rank = int(np.sum(s > PINV_RTOL * s[0])) if s.size and s[0] > 0 else 0
        inv = np.zeros_like(s)
        inv[: self.rank] = 1.0 / s[: self.rank]
        pinv = vt.T @ np.diag(inv) @ u.T
        self.estimator = pinv * np.sqrt(self.sigma2_tp)[None, :]

    @property
    def use_dp(self):
        return self.v_dp_sig is not None

    @property
    def n_channels(self):
        return self.v_tp_sig.shape[0]

    @property
    def n_freq(self):
        return self.v_tp_sig.shape[1]

    def _trial_rows(self, rng, h1):
        """Whitened steered data rows for one trial: (c or 2c, N)."""
        c, n = self.v_tp_sig.shape
        total = 2 * c if self.use_dp else c
        z = standard_complex(rng, (total, n)) / np.sqrt(self.dw)
        rows = z
        if h1:
            rows[:c] += self.v_tp_sig
        if self.use_dp:
            rows[c:] += self.v_dp_sig  # direct path present under both hypotheses
        return rows

    def _grams(self, rows_batch):
        g = self.dw * np.einsum("bcn,bdn->bcd", rows_batch, rows_batch.conj())
        return g

    def stats(self, h1, trials, stream, *key, chunk=512, threads=1, want_vectors=False):
        """Test statistics for ``trials`` independent realizations.

        Returns lambdas (trials,) or, with want_vectors, (lambdas, w1) where
        w1 holds the target-path partition of the dominant eigenvector per
        trial.
        """
        c = self.n_channels

        def run_chunk(t0, t1):
            rows = np.stack(
                [
                    self._trial_rows(trial_rng(self.seed, stream, *key, t), h1)
                    for t in range(t0, t1)
                ]
            )
            g = self._grams(rows)
            if want_vectors:
                evals, evecs = np.linalg.eigh(g)
                lam1 = evals[:, -1]
                w = evecs[:, :, -1]
            else:
                lam1 = np.linalg.eigvalsh(g)[:, -1]
                w = None
            if self.use_dp:
                lam0 = np.linalg.eigvalsh(g[:, c:, c:])[:, -1]
                lam = lam1 - lam0
            else:
                lam = lam1
            return lam, (None if w is None else w[:, :c])

        bounds = [(t0, min(t0 + chunk, trials)) for t0 in range(0, trials, chunk)]
        if threads > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda b: run_chunk(*b), bounds))
        else:
            parts = [run_chunk(*b) for b in bounds]
        lams = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
        if not want_vectors:
            return lams
        w1 = np.concatenate([p[1] for p in parts]) if parts else np.empty((0, c))
        return lams, w1

    def dipole_errors(self, e_true, trials, stream, *key, chunk=512, threads=1):
        """Angles between estimated and true dipole lines over H1 trials."""
        _, w1 = self.stats(
            True, trials, stream, *key, chunk=chunk, threads=threads, want_vectors=True
        )
        z = w1 @ self.estimator.T  # (trials, 3) complex
        psi = 0.5 * np.angle(np.sum(z * z, axis=1))
        e = np.real(z * np.exp(-1j * psi)[:, None])
        norms = np.linalg.norm(e, axis=1)
        norms[norms == 0] = 1.0
        cosines = np.abs(e @ np.asarray(e_true, dtype=float)) / norms
        return np.arccos(np.clip(cosines, 0.0, 1.0))


def build_engine(
    scene,
    waveform,
    hyp,
    mode,
    tp_snr_db,
    dp_snr_db,
    seed,
    tp_sigma2=None,
    dp_sigma2=None,
):
    """Assemble the trial engine for one mode and noise level.

    sigma^2 for each path comes from the full array (all polarizations the
    scene carries; all modes share it) unless given explicitly via
    tp_sigma2/dp_sigma2. The mode then selects which channels exist. Passing
    None for tp_snr_db (and no explicit sigma) builds a noise-free engine
    with unit whitening.
    """
    pols = mode_pols(mode)
    use_dp = mode_uses_dp(mode)
    dw = waveform.dw
    full = None
    if tp_sigma2 is not None:
        sigma2_tp_val = float(tp_sigma2)
    elif tp_snr_db is None:
        sigma2_tp_val = 1.0
    else:
        full = synthesize(scene, waveform, pols=scene.available_pols(), with_dp=use_dp)
        sigma2_tp_val = snr_to_variance(full.tp_stack(), dw, tp_snr_db)
    sigma2_dp_val = None
    if use_dp:
        if dp_sigma2 is not None:
            sigma2_dp_val = float(dp_sigma2)
        elif dp_snr_db is None:
            sigma2_dp_val = 1.0
        else:
            if full is None:
                full = synthesize(scene, waveform, pols=scene.available_pols(), with_dp=True)
            sigma2_dp_val = snr_to_variance(full.dp_stack(), dw, dp_snr_db)

    sliced = synthesize(scene, waveform, pols=pols, with_dp=use_dp)
    steer = steering(scene, waveform, hyp, pols=pols)
    c = sliced.n_channels
    sigma2_tp = np.full(c, sigma2_tp_val)
    v_tp = np.conj(steer.tp) * sliced.tp_stack() / np.sqrt(sigma2_tp)[:, None]
    v_dp = None
    sigma2_dp = None
    if use_dp:
        sigma2_dp = np.full(c, sigma2_dp_val)
        v_dp = np.conj(steer.dp) * sliced.dp_stack() / np.sqrt(sigma2_dp)[:, None]
    return TrialEngine(
        v_tp_sig=v_tp,
        v_dp_sig=v_dp,
        dw=dw,
        receive=receive_stack(scene, hyp, pols=pols),
        sigma2_tp=sigma2_tp,
        sigma2_dp=sigma2_dp,
        seed=seed,
    )


def calibrate_threshold(engine, cfar, trials, *key, threads=1):
    """Empirical (1 - cfar) quantile of the statistic under the null.

    Null realizations carry noise-only target paths; direct-path channels
    keep their signal (it is present under both hypotheses).
    """
    if cfar * trials < 10:
        raise ExperimentError("cfar * trials < 10; the quantile is not estimable")
    lams = engine.stats(False, trials, STREAM_H0, *key, threads=threads)
    return float(np.quantile(lams, 1.0 - cfar, method="higher"))


def false_alarm_rate(engine, threshold, trials, *key, threads=1):
    """Holdout false-alarm rate of a threshold on fresh null draws."""
    lams = engine.stats(False, trials, STREAM_HOLDOUT, *key, threads=threads)
    return float(np.mean(lams > threshold))


def estimate_pd(engine, threshold, trials, *key, threads=1):
    """Detection probability with a Wilson 95% interval."""
    lams = engine.stats(True, trials, STREAM_H1, *key, threads=threads)
    hits = int(np.sum(lams > threshold))
    lo, hi = wilson_interval(hits, trials)
    return hits / trials, lo, hi


def sweep_snr(scene, waveform, spec, modes=None, threads=1, progress=None):
    """Pd-vs-SNR curves: per point, recalibrate the noise variance, calibrate
    the CFAR threshold on trials_h0 null draws, estimate Pd on trials_h1.

    Returns (pd_rows, threshold_rows) as lists of dicts matching the CSV
    contracts.
    """
    modes = tuple(modes or spec.modes)
    if not spec.snr_grid_db:
        raise ExperimentError("snr_grid_db is empty")
    hyp = spec.resolved_hypothesis(scene)
    pd_rows = []
    thr_rows = []
    for mode in modes:
        m_idx = MODES.index(mode)
        for s_idx, snr_db in enumerate(spec.snr_grid_db):
            engine = build_engine(
                scene, waveform, hyp, mode, snr_db, spec.dp_snr_db, spec.seed
            )
            thr = calibrate_threshold(
                engine, spec.cfar, spec.trials_h0, m_idx, s_idx, threads=threads
            )
            pd, lo, hi = estimate_pd(
                engine, thr, spec.trials_h1, m_idx, s_idx, threads=threads
            )
            pd_rows.append(
                {"mode": mode, "snr_db": snr_db, "pd": pd, "ci_lo": lo, "ci_hi": hi}
            )
            thr_rows.append({"mode": mode, "snr_db": snr_db, "threshold": thr})
            if progress:
                progress(f"{mode} snr={snr_db:+.1f} dB: threshold={thr:.4g} pd={pd:.3f}")
    return pd_rows, thr_rows


@dataclass
class StatImage:
    """Test-statistic image over hypothesized positions at fixed velocity."""

    x_m: np.ndarray  # (nx,)
    y_m: np.ndarray  # (ny,)
    lam: np.ndarray  # (ny, nx)
    targets: list  # dicts: x2, e_true, e_est

    def rows(self):
        out = []
        for iy, y in enumerate(self.y_m):
            for ix, x in enumerate(self.x_m):
                out.append(
                    {"ix": ix, "iy": iy, "x_m": x, "y_m": y, "lambda": self.lam[iy, ix]}
                )
        return out


def statistic_image(
    scene,
    waveform,
    spec,
    mode="DP-POL",
    tp_snr_db=None,
    run_index=0,
    cell_chunk=128,
    tp_sigma2=None,
    dp_sigma2=None,
):
    """Evaluate the statistic on an image grid of position hypotheses.

    One data realization (seeded by (spec.seed, run_index)) is scanned over
    all grid hypotheses at the fixed velocity spec.hypothesis.v2. A noise
    level comes from tp_snr_db or an explicit tp_sigma2; both None means
    noise-free. Per-target dipole estimates are attached at the true target
    cells.
    """
    pols = mode_pols(mode)
    use_dp = mode_uses_dp(mode)
    hyp0 = spec.resolved_hypothesis(scene)
    v2 = hyp0.v2
    engine = build_engine(
        scene,
        waveform,
        hyp0,
        mode,
        tp_snr_db,
        spec.dp_snr_db if use_dp else None,
        spec.seed,
        tp_sigma2=tp_sigma2,
        dp_sigma2=dp_sigma2,
    )
    c, n = engine.v_tp_sig.shape
    noisy = tp_snr_db is not None or tp_sigma2 is not None

    # one whitened (not steered) data realization shared by every cell
    sliced = synthesize(scene, waveform, pols=pols, with_dp=use_dp)
    data_tp = sliced.tp_stack() / np.sqrt(engine.sigma2_tp)[:, None]
    data_dp = None
    if use_dp:
        data_dp = sliced.dp_stack() / np.sqrt(engine.sigma2_dp)[:, None]
    if noisy:
        rng = trial_rng(spec.seed, STREAM_IMAGE, run_index)
        total = 2 * c if use_dp else c
        z = standard_complex(rng, (total, n)) / np.sqrt(engine.dw)
        data_tp = data_tp + z[:c]
        if use_dp:
            data_dp = data_dp + z[c:]

    nx, ny = spec.image_shape
    half = spec.image_extent_m / 2.0
    xs = np.linspace(-half, half, nx)
    ys = np.linspace(-half, half, ny)
    dw = engine.dw

    lam0 = 0.0
    g_dd = None
    if use_dp:
        steer0 = steering(scene, waveform, hyp0, pols=pols)
        v_dp = np.conj(steer0.dp) * data_dp
        g_dd = dw * (v_dp @ v_dp.conj().T)
        lam0 = float(np.linalg.eigvalsh(g_dd)[-1])

    cells = [(ix, iy) for iy in range(ny) for ix in range(nx)]
    lam_img = np.empty((ny, nx))

    # steer cells in chunks; the Gram/eigen work is batched per chunk
    for start in range(0, len(cells), cell_chunk):
        batch = cells[start : start + cell_chunk]
        v_rows = np.empty((len(batch), c, n), dtype=complex)
        for b, (ix, iy) in enumerate(batch):
            steer = steering(
                scene, waveform, Hypothesis(x2=(xs[ix], ys[iy]), v2=v2), pols=pols
            )
            v_rows[b] = np.conj(steer.tp) * data_tp
        if use_dp:
            g_tt = dw * np.einsum("bcn,bdn->bcd", v_rows, v_rows.conj())
            g_td = dw * np.einsum("bcn,dn->bcd", v_rows, v_dp.conj())
            g = np.empty((len(batch), 2 * c, 2 * c), dtype=complex)
            g[:, :c, :c] = g_tt
            g[:, :c, c:] = g_td
            g[:, c:, :c] = g_td.conj().transpose(0, 2, 1)
            g[:, c:, c:] = g_dd[None]
            lam = np.linalg.eigvalsh(g)[:, -1] - lam0
        else:
            g = dw * np.einsum("bcn,bdn->bcd", v_rows, v_rows.conj())
            lam = np.linalg.eigvalsh(g)[:, -1]
        for b, (ix, iy) in enumerate(batch):
            lam_img[iy, ix] = lam[b]

    annotations = []
    for target in scene.targets:
        steer = steering(scene, waveform, Hypothesis(x2=target.x2, v2=v2), pols=pols)
        rows = np.conj(steer.tp) * data_tp
        if use_dp:
            full = np.vstack([rows, np.conj(steer.dp) * data_dp])
        else:
            full = rows
        g = dw * (full @ full.conj().T)
        _, vecs = np.linalg.eigh(g)
        w1 = phase_normalize(vecs[:, -1])[:c]
        rx_stack = receive_stack(scene, Hypothesis(x2=target.x2, v2=v2), pols=pols)
        e_est, _ = estimate_dipole(w1, rx_stack, engine.sigma2_tp)
        annotations.append({"x2": target.x2.copy(), "e_true": target.e_sc.copy(), "e_est": e_est})

    return StatImage(x_m=xs, y_m=ys, lam=lam_img, targets=annotations)


def mc_dipole(scene, waveform, spec, modes=None, threads=1, progress=None):
    """Mean dipole-line angle error versus target-path SNR per mode."""
    modes = tuple(modes or spec.modes)
    hyp = spec.resolved_hypothesis(scene)
    e_true = scene.targets[0].e_sc
    rows = []
    for mode in modes:
        m_idx = MODES.index(mode)
        for s_idx, snr_db in enumerate(spec.dphi_snr_grid_db):
            engine = build_engine(
                scene, waveform, hyp, mode, snr_db, spec.dp_snr_db, spec.seed
            )
            errs = engine.dipole_errors(
                e_true, spec.dphi_trials, STREAM_DIPOLE, m_idx, s_idx, threads=threads
            )
            rows.append({"mode": mode, "snr_db": snr_db, "dphi_rad": float(errs.mean())})
            if progress:
                progress(f"{mode} snr={snr_db:+.1f} dB: mean dphi={errs.mean():.4f} rad")
    return rows
