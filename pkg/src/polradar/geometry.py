"""Scene geometry: look directions, transverse dipole projections, and lifting
2-D ground states to 3-D through a known topography.

All positions are in meters with the scene center at the origin; velocities in
m/s. Vectors are plain float64 numpy arrays of shape (3,).
"""

import numpy as np


class DegenerateGeometryError(ValueError):
    """Raised when two scene points coincide where a direction is required."""


def unit_toward(origin, target):
    """Unit vector pointing from ``origin`` to ``target``.

    Parameters
    ----------
    origin, target : array_like, shape (3,)
        Points in meters.

    Returns
    -------
    numpy.ndarray, shape (3,)
        (target - origin) / |target - origin|.

    Raises
    ------
    DegenerateGeometryError
        If the points coincide.
    """
    d = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    n = np.linalg.norm(d)
    if n == 0.0:
        raise DegenerateGeometryError(
            f"cannot form a look direction between coincident points {origin!r}"
        )
    return d / n


def transverse_project(e, look):
    """Project ``e`` onto the plane with normal ``look``.

    Evaluates the triple cross product -look x look x e in its algebraic form
    e - (e . look) look. The result is the component of a dipole moment that
    radiates transverse to the propagation direction ``look``.

    Parameters
    ----------
    e : array_like, shape (3,)
        Dipole moment (any length, zero allowed).
    look : array_like, shape (3,)
        Unit propagation direction; must have norm 1 within 1e-6.

    Returns
    -------
    numpy.ndarray, shape (3,)
        Transverse component, orthogonal to ``look``.
    """
    look = np.asarray(look, dtype=float)
    if abs(np.linalg.norm(look) - 1.0) > 1e-6:
        raise ValueError("look direction must be a unit vector")
    e = np.asarray(e, dtype=float)
    return e - np.dot(e, look) * look


class Topography:
    """Ground height field over 2-D scene coordinates.

    Only affine surfaces are supported: height(x2) = height + slope . x2.
    A flat plane at altitude h is ``Topography(height=h)``; its gradient is
    identically zero.
    """

    def __init__(self, height=0.0, slope=(0.0, 0.0)):
        self.height = float(height)
        self.slope = np.asarray(slope, dtype=float)
        if self.slope.shape != (2,):
            raise ValueError("slope must be a 2-vector")

    @property
    def kind(self):
        return "flat" if not self.slope.any() else "plane"

    def height_at(self, x2):
        """Height psi(x2) in meters."""
        return self.height + float(np.dot(self.slope, np.asarray(x2, dtype=float)))

    def gradient_at(self, x2):
        """Gradient of psi at x2 (constant for affine surfaces)."""
        return self.slope.copy()

    def __eq__(self, other):
        return (
            isinstance(other, Topography)
            and self.height == other.height
            and np.array_equal(self.slope, other.slope)
        )

    def __repr__(self):
        return f"Topography(height={self.height!r}, slope={tuple(self.slope)!r})"


def lift_state(x2, v2, topo):
    """Lift a 2-D ground position/velocity pair onto the topography.

    Parameters
    ----------
    x2, v2 : array_like, shape (2,)
        Ground coordinates (m) and ground velocity (m/s).
    topo : Topography

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        3-D position (x2, psi(x2)) and 3-D velocity (v2, grad psi . v2).
    """
    x2 = np.asarray(x2, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    g = topo.gradient_at(x2)
    x3 = np.array([x2[0], x2[1], topo.height_at(x2)])
    v3 = np.array([v2[0], v2[1], float(np.dot(g, v2))])
    return x3, v3


def normalized(v, name="vector"):
    """Return v scaled to unit norm; raise if v is (numerically) zero."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return v / n
