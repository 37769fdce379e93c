"""Dipole target model: reduce a symmetric permittivity-perturbation dyad to
its dominant dipole, and the polarization coupling of a point target to the
illuminating field.
"""

from dataclasses import dataclass, field

import numpy as np

from .eig import jacobi_eigh
from .geometry import lift_state, normalized, transverse_project, unit_toward

_DEGENERACY_RTOL = 1e-9


def _fix_sign(e, tol=1e-12):
    """Flip e so its first component larger than tol in magnitude is positive."""
    for comp in e:
        if abs(comp) > tol:
            return e if comp > 0 else -e
    return e


def dominant_dipole(dyad):
    """Dominant dipole of a symmetric scattering dyad.

    The 3x3 real symmetric dyad decomposes into three colocated dipoles (one
    per eigenpair); the scatterer is approximated by the one with the
    largest-magnitude eigenvalue.

    Parameters
    ----------
    dyad : array_like, shape (3, 3)
        Real symmetric matrix (symmetric within 1e-12 relative).

    Returns
    -------
    (float, numpy.ndarray, bool)
        Largest-magnitude eigenvalue, its unit eigenvector with the first
        nonzero component made positive, and a degeneracy flag set when the
        top eigenvalue magnitude is tied within 1e-9 relative. Ties are broken
        toward the eigenvector whose absolute-component pattern is
        lexicographically largest, so repeated eigenvalues still give a
        deterministic answer.
    """
    dyad = np.asarray(dyad, dtype=float)
    if dyad.shape != (3, 3):
        raise ValueError("dyad must be 3x3")
    scale = np.abs(dyad).max()
    if scale > 0 and np.abs(dyad - dyad.T).max() > 1e-12 * scale:
        raise ValueError("dyad must be symmetric")
    w, v = jacobi_eigh(dyad)
    mags = np.abs(w)
    top = mags.max()
    if top == 0.0:
        return 0.0, np.array([1.0, 0.0, 0.0]), True
    tied = np.nonzero(mags >= top * (1.0 - _DEGENERACY_RTOL))[0]
    degenerate = tied.size > 1
    best = max(tied, key=lambda i: tuple(np.abs(v[:, i])))
    e = _fix_sign(normalized(v[:, best]))
    return float(w[best]), e, degenerate


@dataclass(frozen=True)
class PointTarget:
    """Point scatterer on the ground: 2-D state plus dipole reflectivity.

    rho absorbs the physical constants that only rescale the received signal
    (permeability, the delta-smoothing value at zero); e_sc is the unit dipole
    moment, meaningful up to sign.
    """

    x2: np.ndarray
    v2: np.ndarray
    rho: float
    e_sc: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "x2", np.asarray(self.x2, dtype=float).reshape(2))
        object.__setattr__(self, "v2", np.asarray(self.v2, dtype=float).reshape(2))
        object.__setattr__(self, "rho", float(self.rho))
        if self.rho <= 0:
            raise ValueError("rho must be positive for a present target")
        e = np.asarray(self.e_sc, dtype=float).reshape(3)
        n = np.linalg.norm(e)
        if n == 0.0:
            raise ValueError("e_sc must be nonzero")
        if abs(n - 1.0) > 1e-6:
            raise ValueError("e_sc must be a unit vector (normalize it first)")
        object.__setattr__(self, "e_sc", e / n)

    def lifted(self, topo):
        """3-D position and velocity on the given topography."""
        return lift_state(self.x2, self.v2, topo)


def scatter_coupling(target, tx_pose, topo):
    """Polarization coupling vector of a point target.

    The incident field at the target is polarized along the transmit dipole's
    transverse projection; the target re-radiates along its own dipole with
    amplitude rho times the inner product of the two.

    Parameters
    ----------
    target : PointTarget
    tx_pose : object with ``position`` and ``dipole`` attributes
        Transmitting antenna.
    topo : Topography

    Returns
    -------
    numpy.ndarray, shape (3,)
        rho * <transverse_project(e_t, look), e_sc> * e_sc, where look is the
        unit vector from the transmitter to the target.
    """
    x3, _ = target.lifted(topo)
    look = unit_toward(tx_pose.position, x3)
    r_perp = transverse_project(tx_pose.dipole, look)
    return target.rho * float(np.dot(r_perp, target.e_sc)) * target.e_sc
