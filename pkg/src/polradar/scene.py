"""Scene description: antennas, waveform, and the full simulation scene."""

from dataclasses import dataclass, field

import numpy as np

from .geometry import Topography, normalized
from .targets import PointTarget

C0 = 2.99792458e8  # free-space wave speed, m/s

POL_H = "h"
POL_V = "v"
BOTH_POLS = (POL_H, POL_V)


@dataclass(frozen=True)
class AntennaPose:
    """A dipole antenna: position, unit dipole moment, scalar gain."""

    position: np.ndarray
    dipole: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "dipole", normalized(self.dipole, "dipole"))
        object.__setattr__(self, "gain", float(self.gain))


@dataclass(frozen=True)
class Transmitter:
    position: np.ndarray
    dipole: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "dipole", normalized(self.dipole, "transmit dipole"))
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def pose(self):
        return AntennaPose(self.position, self.dipole, self.gain)


@dataclass(frozen=True)
class Receiver:
    """A receive site with up to two orthogonally polarized dipole antennas.

    dipole_v may be None for a single-polarization site (used to cross-check
    the no-polarization-diversity mode against a genuinely V-less scene); the
    serialized config format always carries both.

    Separate gains apply to the target-path and direct-path channels since the
    two paths see different spreading and beam patterns.
    """

    position: np.ndarray
    dipole_h: np.ndarray
    dipole_v: np.ndarray | None = None
    gain_h: float = 1.0
    gain_v: float = 1.0
    gain_dp_h: float = 1.0
    gain_dp_v: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "dipole_h", normalized(self.dipole_h, "H dipole"))
        if self.dipole_v is not None:
            object.__setattr__(self, "dipole_v", normalized(self.dipole_v, "V dipole"))

    @property
    def pols(self):
        return BOTH_POLS if self.dipole_v is not None else (POL_H,)

    def dipole(self, pol):
        if pol == POL_H:
            return self.dipole_h
        if self.dipole_v is None:
            raise ValueError("receiver has no V antenna")
        return self.dipole_v

    def gain(self, pol, direct_path=False):
        if direct_path:
            return self.gain_dp_h if pol == POL_H else self.gain_dp_v
        return self.gain_h if pol == POL_H else self.gain_v


@dataclass(frozen=True)
class Waveform:
    """Baseband description of the transmitted waveform.

    The spectrum p_tilde lives on the uniform grid [-B/2, B/2] (rad/s) with
    N samples. Kinds:

    - "random_phase": unit magnitude, per-sample uniformly random phase drawn
      from ``seed`` (default; avoids accidental structure since the detector
      treats the waveform as unknown)
    - "flat": identically one
    - "lfm": unit magnitude with quadratic spectral phase (sampled chirp)
    """

    omega0: float
    bandwidth: float
    n_samples: int
    kind: str = "random_phase"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "n_samples", int(self.n_samples))
        if self.n_samples < 2:
            raise ValueError("waveform needs at least 2 samples")
        if self.omega0 <= 0 or self.bandwidth <= 0:
            raise ValueError("center frequency and bandwidth must be positive")
        if self.bandwidth >= 2 * self.omega0:
            raise ValueError("bandwidth exceeds the narrowband model validity")
        if self.kind not in ("random_phase", "flat", "lfm"):
            raise ValueError(f"unknown waveform kind {self.kind!r}")

    @property
    def grid(self):
        """Baseband frequency grid, N points on [-B/2, B/2] (rad/s)."""
        return np.linspace(-self.bandwidth / 2.0, self.bandwidth / 2.0, self.n_samples)

    @property
    def dw(self):
        """Quadrature weight for integrals over the grid."""
        return self.bandwidth / (self.n_samples - 1)

    def spectrum(self):
        """Complex samples of p_tilde on the grid."""
        n = self.n_samples
        if self.kind == "flat":
            return np.ones(n, dtype=complex)
        if self.kind == "lfm":
            u = self.grid / (self.bandwidth / 2.0)
            return np.exp(1j * np.pi * (n / 8.0) * u * u)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=int(self.seed), spawn_key=(0x57A7,))
        )
        return np.exp(2j * np.pi * rng.random(n))


@dataclass(frozen=True)
class Scene:
    """Immutable simulation scene."""

    transmitter: Transmitter
    receivers: tuple
    targets: tuple
    topography: Topography = field(default_factory=Topography)
    c0: float = C0

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(self.receivers))
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.receivers:
            raise ValueError("scene needs at least one receiver")
        for t in self.targets:
            if not isinstance(t, PointTarget):
                raise TypeError("targets must be PointTarget instances")

    @property
    def n_receivers(self):
        return len(self.receivers)

    def pols(self, polarimetric=True):
        """Polarization tuple shared by all receivers for the requested mode."""
        if not polarimetric:
            return (POL_H,)
        for rx in self.receivers:
            if POL_V not in rx.pols:
                raise ValueError("polarimetric mode requires V antennas at every receiver")
        return BOTH_POLS

    def available_pols(self):
        """Every polarization present at all receivers."""
        if all(POL_V in rx.pols for rx in self.receivers):
            return BOTH_POLS
        return (POL_H,)
