"""White circularly-symmetric Gaussian measurement noise.

The continuous model has per-channel spectral variance sigma^2 (a density, so
discrete frequency bins carry variance sigma^2 / dw and Riemann-sum statistics
stay consistent across grid resolutions). SNR follows the band-averaged
per-bin power ratio: at snr_db the mean per-bin signal power over the used
channels is 10^(snr_db/10) times the per-bin noise power.
"""

from dataclasses import dataclass

import numpy as np


class UndefinedSnrError(ValueError):
    """Raised when an SNR is requested against an identically zero signal."""


@dataclass(frozen=True)
class NoiseCov:
    """Diagonal noise covariances for the target- and direct-path channels."""

    sigma2_tp: np.ndarray
    sigma2_dp: np.ndarray | None = None

    def __post_init__(self):
        tp = np.atleast_1d(np.asarray(self.sigma2_tp, dtype=float))
        object.__setattr__(self, "sigma2_tp", tp)
        if np.any(tp <= 0):
            raise ValueError("sigma2_tp entries must be positive (non-singular noise)")
        if self.sigma2_dp is not None:
            dp = np.atleast_1d(np.asarray(self.sigma2_dp, dtype=float))
            object.__setattr__(self, "sigma2_dp", dp)
            if np.any(dp <= 0):
                raise ValueError("sigma2_dp entries must be positive (non-singular noise)")

    @classmethod
    def common(cls, n_channels, sigma2_tp, sigma2_dp=None):
        """Common per-path variance across all channels (the experiments' case)."""
        dp = None if sigma2_dp is None else np.full(n_channels, float(sigma2_dp))
        return cls(np.full(n_channels, float(sigma2_tp)), dp)


def trial_rng(seed, *key):
    """Deterministic per-trial generator.

    Streams are keyed by (seed, *key); any worker may generate any trial
    independently, so reductions over trials are schedule independent.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def standard_complex(rng, shape):
    """Circularly-symmetric unit-variance complex normal samples."""
    z = rng.standard_normal(size=shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def sample_noise_stack(rng, sigma2, n_freq, dw):
    """Noise block of shape (len(sigma2), n_freq), bin variance sigma2 / dw."""
    sigma2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    z = standard_complex(rng, (sigma2.size, n_freq))
    return np.sqrt(sigma2 / dw)[:, None] * z


def sample_noise(grid, cov, seed):
    """Noise realization matching a SignalSet's stacked shape.

    Draws the target-path block first, then the direct-path block, from a
    single generator keyed by ``seed``; the same draw order is used everywhere
    so batched and one-shot paths see identical realizations.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray or None)
        (channels, N) arrays for the target path and, if cov carries it, the
        direct path.
    """
    grid = np.asarray(grid, dtype=float)
    dw = float(grid[1] - grid[0])
    rng = seed if isinstance(seed, np.random.Generator) else trial_rng(seed)
    tp = sample_noise_stack(rng, cov.sigma2_tp, grid.size, dw)
    dp = None
    if cov.sigma2_dp is not None:
        dp = sample_noise_stack(rng, cov.sigma2_dp, grid.size, dw)
    return tp, dp


def channel_energies(stack, dw):
    """Per-channel energy dw * sum_w |d(w)|^2 of a (channels, N) stack."""
    stack = np.asarray(stack)
    return dw * np.sum(np.abs(stack) ** 2, axis=-1)


def snr_to_variance(stack, dw, snr_db):
    """Spectral noise variance realizing an average SNR against a signal.

    sigma^2 = mean-channel energy / (N * 10^(snr_db/10)): the per-bin noise
    power sigma^2/dw then sits 10^(snr_db/10) below the per-bin signal power
    averaged over channels and frequencies.

    Raises
    ------
    UndefinedSnrError
        If the signal is identically zero.
    """
    stack = np.asarray(stack)
    energies = channel_energies(stack, dw)
    mean_energy = float(np.mean(energies))
    if mean_energy == 0.0:
        raise UndefinedSnrError("cannot set an SNR against an identically zero signal")
    n_freq = stack.shape[-1]
    return mean_energy / (n_freq * 10.0 ** (snr_db / 10.0))
