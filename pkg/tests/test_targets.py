import numpy as np
import pytest

from polradar.geometry import Topography, transverse_project, unit_toward
from polradar.scene import AntennaPose
from polradar.targets import PointTarget, dominant_dipole, scatter_coupling


def test_dominant_dipole_rank_one():
    e = np.array([0.0, 0.0, 1.0])
    rho, e_out, degen = dominant_dipole(2.0 * np.outer(e, e))
    assert abs(rho - 2.0) < 1e-12
    assert np.allclose(e_out, e, atol=1e-12)
    assert not degen


def test_dominant_dipole_diagonal():
    rho, e_out, degen = dominant_dipole(np.diag([3.0, 2.0, 1.0]))
    assert abs(rho - 3.0) < 1e-12
    assert np.allclose(e_out, (1, 0, 0), atol=1e-12)
    assert not degen


def test_dominant_dipole_isotropic_degenerate():
    rho, e_out, degen = dominant_dipole(np.eye(3))
    assert abs(rho - 1.0) < 1e-12
    assert degen
    assert abs(np.linalg.norm(e_out) - 1) < 1e-12
    # deterministic tie-break: lexicographically largest |component| pattern
    assert np.allclose(e_out, (1, 0, 0))


def test_dominant_dipole_largest_magnitude_wins():
    rho, e_out, _ = dominant_dipole(np.diag([-5.0, 2.0, 1.0]))
    assert abs(rho + 5.0) < 1e-12
    assert np.allclose(np.abs(e_out), (1, 0, 0))


def test_dominant_dipole_sign_convention():
    e = np.array([-0.6, 0.0, 0.8])
    _, e_out, _ = dominant_dipole(4.0 * np.outer(e, e))
    first = e_out[np.flatnonzero(np.abs(e_out) > 1e-12)[0]]
    assert first > 0


def test_dominant_dipole_rejects_asymmetric():
    bad = np.eye(3)
    bad[0, 1] = 1e-3
    with pytest.raises(ValueError):
        dominant_dipole(bad)


def test_rank_one_reconstruction():
    rng = np.random.default_rng(21)
    for _ in range(50):
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        c = rng.uniform(0.1, 10)
        dyad = c * np.outer(e, e)
        rho, e_out, _ = dominant_dipole(dyad)
        rebuilt = rho * np.outer(e_out, e_out)
        assert np.linalg.norm(rebuilt - dyad) < 1e-9 * np.linalg.norm(dyad)


def test_eigenvalue_scales_eigenvector_does_not():
    rng = np.random.default_rng(22)
    a = rng.normal(size=(3, 3))
    dyad = a + a.T + 4 * np.eye(3)
    rho1, e1, _ = dominant_dipole(dyad)
    rho2, e2, _ = dominant_dipole(3.5 * dyad)
    assert abs(rho2 - 3.5 * rho1) < 1e-9 * abs(rho1)
    assert np.allclose(e1, e2, atol=1e-10)


def _pose(position, dipole):
    return AntennaPose(np.asarray(position, float), np.asarray(dipole, float))


def test_scatter_coupling_annihilated_polarization():
    # transmit dipole along the look direction: no transverse field, zero coupling
    tx = _pose((0, 0, 1000), (0, 0, 1))
    target = PointTarget(x2=(0, 0), v2=(0, 0), rho=1.0, e_sc=(1, 0, 0))
    q = scatter_coupling(target, tx, Topography())
    assert np.allclose(q, 0, atol=1e-12)


def test_scatter_coupling_aligned_dipole():
    tx = _pose((0, 0, 1000), (1, 0, 0))
    topo = Topography()
    target = PointTarget(x2=(0, 0), v2=(0, 0), rho=1.0, e_sc=(1, 0, 0))
    # look is straight down, e_t = x-hat is fully transverse
    q = scatter_coupling(target, tx, topo)
    assert np.allclose(q, (1, 0, 0), atol=1e-12)


def test_scatter_coupling_matches_cross_product_oracle():
    rng = np.random.default_rng(33)
    topo = Topography()
    for _ in range(200):
        pos = rng.normal(size=3) * 5e3
        pos[2] = abs(pos[2]) + 1e3
        e_t = rng.normal(size=3)
        e_t /= np.linalg.norm(e_t)
        e_sc = rng.normal(size=3)
        e_sc /= np.linalg.norm(e_sc)
        rho = rng.uniform(0.1, 5)
        target = PointTarget(x2=rng.normal(size=2) * 100, v2=(0, 0), rho=rho, e_sc=e_sc)
        q = scatter_coupling(target, _pose(pos, e_t), topo)
        x3 = np.array([target.x2[0], target.x2[1], 0.0])
        g = unit_toward(pos, x3)
        r_perp = -np.cross(g, np.cross(g, e_t))
        expected = rho * np.dot(r_perp, e_sc) * e_sc
        assert np.allclose(q, expected, atol=1e-12)


def test_scatter_coupling_cauchy_schwarz_bound():
    rng = np.random.default_rng(34)
    topo = Topography()
    tx = _pose((2e3, -1e3, 4e3), (0.6, 0.8, 0.0))
    for _ in range(100):
        e_sc = rng.normal(size=3)
        e_sc /= np.linalg.norm(e_sc)
        rho = rng.uniform(0.1, 3)
        target = PointTarget(x2=rng.normal(size=2) * 200, v2=(0, 0), rho=rho, e_sc=e_sc)
        q = scatter_coupling(target, tx, topo)
        assert np.linalg.norm(q) <= rho * np.linalg.norm(tx.dipole) + 1e-12


def test_point_target_validation():
    with pytest.raises(ValueError):
        PointTarget(x2=(0, 0), v2=(0, 0), rho=0.0, e_sc=(0, 0, 1))
    with pytest.raises(ValueError):
        PointTarget(x2=(0, 0), v2=(0, 0), rho=1.0, e_sc=(0, 0, 0))
    with pytest.raises(ValueError):
        PointTarget(x2=(0, 0), v2=(0, 0), rho=1.0, e_sc=(0, 0, 2))


def test_transverse_project_of_unit_e_sc_is_shorter():
    # |scatter_coupling| uses <P e_t, e_sc>; P never lengthens e_t
    rng = np.random.default_rng(35)
    for _ in range(100):
        g = rng.normal(size=3)
        g /= np.linalg.norm(g)
        e = rng.normal(size=3)
        assert np.linalg.norm(transverse_project(e, g)) <= np.linalg.norm(e) + 1e-12
