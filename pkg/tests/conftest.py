import numpy as np
import pytest

from polradar.geometry import Topography
from polradar.scene import Receiver, Scene, Transmitter, Waveform
from polradar.targets import PointTarget


def ring_receiver(theta_deg, radius=10e3, height=5e3, **gains):
    th = np.deg2rad(theta_deg)
    return Receiver(
        position=(radius * np.cos(th), radius * np.sin(th), height),
        dipole_h=(np.sin(th), -np.cos(th), 0.0),
        dipole_v=(0.0, 0.0, 1.0),
        **gains,
    )


def small_scene(n_receivers=2, targets=None, tx_dipole=(1, 0, 0)):
    """Compact test scene: ring receivers, one oblique transmitter."""
    if targets is None:
        targets = [
            PointTarget(
                x2=(40.0, -30.0),
                v2=(10.0, 5.0),
                rho=1.0,
                e_sc=np.array([0.0, 0.6, 0.8]),
            )
        ]
    thetas = np.arange(n_receivers) * (360.0 / n_receivers)
    return Scene(
        transmitter=Transmitter(position=(15e3, 15e3, 5e3), dipole=tx_dipole),
        receivers=tuple(ring_receiver(t) for t in thetas),
        targets=tuple(targets),
        topography=Topography(),
    )


@pytest.fixture
def scene2():
    return small_scene(2)


@pytest.fixture
def waveform32():
    return Waveform(omega0=2 * np.pi * 2e9, bandwidth=2 * np.pi * 8e6, n_samples=32, seed=4)
