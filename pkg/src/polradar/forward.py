"""Forward model: ideal target-path and direct-path baseband spectra.

The synthesized model is the narrowband post-approximation form: Doppler cube
terms dropped, (omega + alpha*omega0)^2 ~ omega0^2, waveform envelope
invariant under the Doppler time scaling. Amplitude factors are isotropic
beam patterns times free-space spreading, gain/(4*pi*range).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import transverse_project, unit_toward
from .scene import BOTH_POLS, AntennaPose
from .targets import scatter_coupling

DOPPLER_SPEED_LIMIT = 1e-3  # |v|/c0 above this breaks the alpha^3 ~ 1 model


class ModelValidityError(ValueError):
    """Raised when inputs leave the regime the signal model was derived in."""


def doppler_factors(x, v, rx_position, tx_position, c0):
    """Doppler scale factors for a target state and a bistatic antenna pair.

    Parameters
    ----------
    x, v : array_like, shape (3,)
        Target position (m) and velocity (m/s).
    rx_position, tx_position : array_like, shape (3,)
    c0 : float
        Wave speed (m/s).

    Returns
    -------
    (float, float, float)
        alpha_r = 1 - (x - a_r)^ . v / c0,
        alpha_t = 1 + (x - a_t)^ . v / c0,
        alpha   = alpha_t / alpha_r.
    """
    v = np.asarray(v, dtype=float)
    speed = np.linalg.norm(v)
    if speed >= DOPPLER_SPEED_LIMIT * c0:
        raise ModelValidityError(
            f"|v| = {speed:.3g} m/s violates |v| << c0 (limit {DOPPLER_SPEED_LIMIT * c0:.3g})"
        )
    alpha_r = 1.0 - float(np.dot(unit_toward(rx_position, x), v)) / c0
    alpha_t = 1.0 + float(np.dot(unit_toward(tx_position, x), v)) / c0
    return alpha_r, alpha_t, alpha_t / alpha_r


def bistatic_phase(x, v, rx_position, tx_position, c0):
    """Effective bistatic path length |x - a_r| + |x - a_t| / alpha, meters."""
    x = np.asarray(x, dtype=float)
    _, _, alpha = doppler_factors(x, v, rx_position, tx_position, c0)
    r_rx = np.linalg.norm(x - np.asarray(rx_position, dtype=float))
    r_tx = np.linalg.norm(x - np.asarray(tx_position, dtype=float))
    if r_rx == 0.0 or r_tx == 0.0:
        raise ModelValidityError("target coincides with an antenna")
    return r_rx + r_tx / alpha


def tp_phase_exponent(x, v, rx_position, tx_position, omega, omega0, c0):
    """Target-path phase (omega + alpha*omega0) * phi / c0 over the grid.

    Shared by the synthesizer and the detector steering so that a hypothesis
    matching the true state cancels the model phase exactly.
    """
    _, _, alpha = doppler_factors(x, v, rx_position, tx_position, c0)
    phi = bistatic_phase(x, v, rx_position, tx_position, c0)
    return (np.asarray(omega, dtype=float) + alpha * omega0) * (phi / c0)


def dp_phase_exponent(rx_position, tx_position, omega, omega0, c0):
    """Direct-path phase (omega + omega0) * |a_r - a_t| / c0 over the grid."""
    baseline = np.linalg.norm(
        np.asarray(rx_position, dtype=float) - np.asarray(tx_position, dtype=float)
    )
    if baseline == 0.0:
        raise ModelValidityError("transmitter coincides with a receiver")
    return (np.asarray(omega, dtype=float) + omega0) * (baseline / c0)


def spreading(gain, distance):
    """Free-space amplitude factor gain / (4 pi distance)."""
    return gain / (4.0 * np.pi * distance)


def receive_matrix(x, receiver, pols=BOTH_POLS, direct_path=False):
    """Receive polarization matrix at a field point.

    Row p is the receive amplitude times the transverse projection of the
    p-polarized dipole along the look direction from the receiver to x. For
    the target path the amplitude includes the target-receiver spreading; the
    direct path carries only the antenna gain (its spreading sits with the
    transmitter term).

    Returns
    -------
    numpy.ndarray, shape (len(pols), 3)
    """
    x = np.asarray(x, dtype=float)
    look = unit_toward(receiver.position, x)
    dist = np.linalg.norm(x - receiver.position)
    rows = []
    for pol in pols:
        gain = receiver.gain(pol, direct_path=direct_path)
        amp = gain if direct_path else spreading(gain, dist)
        rows.append(amp * transverse_project(receiver.dipole(pol), look))
    return np.array(rows)


@dataclass
class SignalSet:
    """Complex baseband spectra per receiver, polarization, and frequency.

    tp/dp have shape (M, P, N); dp is None when no direct path was modeled.
    Channels stack in receiver-major order: (rx0, pol0), (rx0, pol1), (rx1,
    pol0), ... matching the vectorized measurement convention everywhere else.
    """

    tp: np.ndarray
    dp: np.ndarray | None
    grid: np.ndarray
    pols: tuple

    @property
    def dw(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def n_receivers(self):
        return self.tp.shape[0]

    @property
    def n_channels(self):
        return self.tp.shape[0] * self.tp.shape[1]

    def tp_stack(self):
        """Target-path data as a (channels, N) array."""
        return self.tp.reshape(self.n_channels, -1)

    def dp_stack(self):
        if self.dp is None:
            return None
        return self.dp.reshape(self.n_channels, -1)


def target_path_signal(scene, waveform, pols=BOTH_POLS):
    """Noise-free target-path spectra, shape (M, len(pols), N).

    Superposition over point targets of

        omega0^2 * exp(i (omega + alpha_k omega0) phi_k / c0)
        * A_t * p_tilde(omega) * A_k^r q_e
    """
    omega = waveform.grid
    p_tilde = waveform.spectrum()
    omega0 = waveform.omega0
    out = np.zeros((scene.n_receivers, len(pols), omega.size), dtype=complex)
    tx = scene.transmitter
    for target in scene.targets:
        x3, v3 = target.lifted(scene.topography)
        q_vec = scatter_coupling(target, tx.pose, scene.topography)
        a_t = spreading(tx.gain, np.linalg.norm(x3 - tx.position))
        for k, rx in enumerate(scene.receivers):
            exponent = tp_phase_exponent(
                x3, v3, rx.position, tx.position, omega, omega0, scene.c0
            )
            coupling = receive_matrix(x3, rx, pols) @ q_vec  # (P,)
            phasor = omega0**2 * a_t * p_tilde * np.exp(1j * exponent)
            out[k] += coupling[:, None] * phasor[None, :]
    return out


def direct_path_signal(scene, waveform, pols=BOTH_POLS):
    """Noise-free direct-path spectra, shape (M, len(pols), N).

    The coupling uses the receiver-side transverse projections evaluated at
    the transmitter location, which by reciprocity equals projecting the
    transmit dipole at the receiver.
    """
    omega = waveform.grid
    p_tilde = waveform.spectrum()
    tx = scene.transmitter
    out = np.zeros((scene.n_receivers, len(pols), omega.size), dtype=complex)
    for k, rx in enumerate(scene.receivers):
        baseline = np.linalg.norm(rx.position - tx.position)
        exponent = dp_phase_exponent(
            rx.position, tx.position, omega, waveform.omega0, scene.c0
        )
        a_t_dp = spreading(tx.gain, baseline)
        coupling = receive_matrix(tx.position, rx, pols, direct_path=True) @ tx.dipole
        out[k] = coupling[:, None] * (a_t_dp * p_tilde * np.exp(1j * exponent))[None, :]
    return out


def synthesize(scene, waveform, pols=BOTH_POLS, with_dp=True):
    """Noise-free SignalSet for the scene."""
    tp = target_path_signal(scene, waveform, pols)
    dp = direct_path_signal(scene, waveform, pols) if with_dp else None
    return SignalSet(tp=tp, dp=dp, grid=waveform.grid, pols=tuple(pols))
