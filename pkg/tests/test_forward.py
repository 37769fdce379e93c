import numpy as np
import pytest

from polradar.forward import (
    ModelValidityError,
    bistatic_phase,
    direct_path_signal,
    doppler_factors,
    dp_phase_exponent,
    receive_matrix,
    spreading,
    synthesize,
    target_path_signal,
    tp_phase_exponent,
)
from polradar.geometry import Topography, transverse_project, unit_toward
from polradar.scene import C0, Receiver, Waveform
from polradar.targets import PointTarget, scatter_coupling

from conftest import ring_receiver, small_scene


# --- Doppler factors -------------------------------------------------------


def test_doppler_static_target():
    out = doppler_factors((50, 20, 0), (0, 0, 0), (10e3, 0, 5e3), (0, 10e3, 5e3), C0)
    assert out == (1.0, 1.0, 1.0)


def test_doppler_axis_case():
    # receiver on +x, transmitter on +y, motion along +x: the receive look
    # direction is (-1,0,0) so alpha_r = 1 + 30/c0 and the transmit leg sees
    # no radial motion
    a_r, a_t, a = doppler_factors((0, 0, 0), (30, 0, 0), (10e3, 0, 0), (0, 10e3, 0), C0)
    assert abs(a_r - (1 + 30 / C0)) < 1e-16
    assert a_t == 1.0
    assert abs(a - 1 / (1 + 30 / C0)) < 1e-16


def test_doppler_orthogonal_motion():
    # motion orthogonal to both look directions
    a_r, a_t, a = doppler_factors((0, 0, 0), (0, 0, 30), (10e3, 0, 0), (0, 10e3, 0), C0)
    assert a_r == 1.0 and a_t == 1.0 and a == 1.0


def test_doppler_bounds_and_validity():
    rng = np.random.default_rng(8)
    for _ in range(200):
        x = rng.normal(size=3) * 100
        v = rng.normal(size=3) * 50
        a_r, a_t, a = doppler_factors(x, v, (10e3, 0, 5e3), (-7e3, 2e3, 5e3), C0)
        for val in (a_r, a_t, a):
            assert 1 - 1e-3 < val < 1 + 1e-3
    with pytest.raises(ModelValidityError):
        doppler_factors((0, 0, 0), (4e5, 0, 0), (10e3, 0, 0), (0, 10e3, 0), C0)


# --- Bistatic phase ---------------------------------------------------------


def test_bistatic_phase_static_is_bistatic_range():
    x = np.array([0.0, 0.0, 0.0])
    rx = np.array([0.0, 3e3, 4e3])
    tx = np.array([0.0, 0.0, 5e3])
    assert abs(bistatic_phase(x, (0, 0, 0), rx, tx, C0) - 10e3) < 1e-9


def test_bistatic_phase_moving_matches_two_line_oracle():
    x = np.zeros(3)
    v = np.array([30.0, 0, 0])
    rx = np.array([10e3, 0, 0])
    tx = np.array([0, 10e3, 0])
    _, _, alpha = doppler_factors(x, v, rx, tx, C0)
    expected = np.linalg.norm(x - rx) + np.linalg.norm(x - tx) / alpha
    assert abs(bistatic_phase(x, v, rx, tx, C0) - expected) < 1e-12 * expected


# --- Receive matrix ---------------------------------------------------------


def test_receive_matrix_overhead_receiver():
    rx = Receiver(position=(0, 0, 5e3), dipole_h=(1, 0, 0), dipole_v=(0, 1, 0))
    m = receive_matrix((0.0, 0.0, 0.0), rx)
    amp = spreading(1.0, 5e3)
    assert np.allclose(m[0], amp * np.array([1, 0, 0]), atol=1e-15)
    assert np.allclose(m[1], amp * np.array([0, 1, 0]), atol=1e-15)


def test_receive_matrix_annihilates_parallel_dipole():
    rx = Receiver(position=(0, 0, 5e3), dipole_h=(1, 0, 0), dipole_v=(0, 0, 1))
    m = receive_matrix((0.0, 0.0, 0.0), rx)
    assert np.allclose(m[1], 0, atol=1e-15)


def test_receive_matrix_ring_geometry_h_row():
    # azimuth 0 receiver: H dipole (sin 0, -cos 0, 0) = (0,-1,0), projected
    rx = ring_receiver(0.0)
    x = np.array([25.0, -40.0, 0.0])
    m = receive_matrix(x, rx)
    look = unit_toward(rx.position, x)
    dist = np.linalg.norm(x - rx.position)
    expected = spreading(1.0, dist) * transverse_project((0, -1, 0), look)
    assert np.allclose(m[0], expected, atol=1e-18)


# --- Target-path signal -----------------------------------------------------


def test_empty_scene_zero_spectra(waveform32):
    scene = small_scene(2, targets=[])
    tp = target_path_signal(scene, waveform32)
    assert tp.shape == (2, 2, 32)
    assert not tp.any()


def test_linearity_in_rho(waveform32, scene2):
    base = scene2.targets[0]
    doubled = small_scene(2, targets=[PointTarget(base.x2, base.v2, 2 * base.rho, base.e_sc)])
    assert np.allclose(
        target_path_signal(doubled, waveform32),
        2 * target_path_signal(scene2, waveform32),
        rtol=1e-12,
    )


def test_superposition_over_targets(waveform32):
    t1 = PointTarget((40.0, -30.0), (10.0, 5.0), 1.0, (0, 0.6, 0.8))
    t2 = PointTarget((-80.0, 10.0), (-5.0, 0.0), 0.7, (0.8, 0, 0.6))
    both = target_path_signal(small_scene(2, targets=[t1, t2]), waveform32)
    alone = target_path_signal(small_scene(2, targets=[t1]), waveform32) + target_path_signal(
        small_scene(2, targets=[t2]), waveform32
    )
    assert np.allclose(both, alone, rtol=1e-12)


def test_single_target_magnitude_factors(waveform32):
    # |d_kp(w)| = w0^2 A_t |p(w)| |(A_k^r q)_p| for a single static target
    scene = small_scene(
        1, targets=[PointTarget((40.0, -30.0), (0.0, 0.0), 1.3, (0, 0.6, 0.8))]
    )
    tp = target_path_signal(scene, waveform32)
    target = scene.targets[0]
    x3 = np.array([*target.x2, 0.0])
    q = scatter_coupling(target, scene.transmitter.pose, scene.topography)
    a_t = spreading(1.0, np.linalg.norm(x3 - scene.transmitter.position))
    coupling = receive_matrix(x3, scene.receivers[0]) @ q
    p_mag = np.abs(waveform32.spectrum())
    for pol in range(2):
        expected = waveform32.omega0**2 * a_t * p_mag * abs(coupling[pol])
        assert np.allclose(np.abs(tp[0, pol]), expected, rtol=1e-12)


def test_phase_only_steering_residual_proportional_to_spectrum(waveform32):
    # dividing by the propagation phasor leaves an omega dependence equal to
    # p_tilde times a constant, per channel
    scene = small_scene(2)
    tp = target_path_signal(scene, waveform32)
    target = scene.targets[0]
    x3, v3 = target.lifted(scene.topography)
    p = waveform32.spectrum()
    for k, rx in enumerate(scene.receivers):
        phase = np.exp(
            1j
            * tp_phase_exponent(
                x3, v3, rx.position, scene.transmitter.position,
                waveform32.grid, waveform32.omega0, scene.c0,
            )
        )
        for pol in range(2):
            resid = tp[k, pol] / (phase * p)
            assert np.max(np.abs(resid - resid[0])) < 1e-10 * abs(resid[0])


def test_bounded_by_triangle_inequality(waveform32, scene2):
    tp = target_path_signal(scene2, waveform32)
    target = scene2.targets[0]
    x3 = np.array([*target.x2, 0.0])
    a_t = spreading(1.0, np.linalg.norm(x3 - scene2.transmitter.position))
    p_max = np.abs(waveform32.spectrum()).max()
    for k, rx in enumerate(scene2.receivers):
        bound = (
            waveform32.omega0**2
            * a_t
            * p_max
            * target.rho
            * np.linalg.norm(receive_matrix(x3, rx), 2)
        )
        assert np.abs(tp[k]).max() <= bound * (1 + 1e-9)


# --- Direct-path signal -----------------------------------------------------


def test_direct_path_annihilation(waveform32):
    # transmit dipole along the receiver-transmitter baseline: zero DP signal
    scene = small_scene(1, targets=[], tx_dipole=(1, 0, 0))
    rx = scene.receivers[0]
    baseline = unit_toward(rx.position, scene.transmitter.position)
    scene_aligned = small_scene(1, targets=[], tx_dipole=baseline)
    dp = direct_path_signal(scene_aligned, waveform32)
    assert np.max(np.abs(dp)) < 1e-12 * waveform32.omega0


def test_direct_path_constant_magnitude(waveform32, scene2):
    wf = Waveform(waveform32.omega0, waveform32.bandwidth, 32, kind="flat")
    dp = direct_path_signal(scene2, wf)
    mags = np.abs(dp)
    assert np.allclose(mags, mags[..., :1], rtol=1e-12)


def test_direct_path_reciprocity_identity(scene2):
    # <P(e_r; look from tx), e_t> computed both ways around
    tx = scene2.transmitter
    for rx in scene2.receivers:
        for pol in ("h", "v"):
            e_r = rx.dipole(pol)
            lhs = np.dot(transverse_project(tx.dipole, unit_toward(tx.position, rx.position)), e_r)
            rhs = np.dot(transverse_project(e_r, unit_toward(rx.position, tx.position)), tx.dipole)
            assert abs(lhs - rhs) < 1e-12


def test_dp_phase_slope_is_baseline_delay(scene2, waveform32):
    rx = scene2.receivers[0]
    exponent = dp_phase_exponent(
        rx.position, scene2.transmitter.position, waveform32.grid, waveform32.omega0, scene2.c0
    )
    baseline = np.linalg.norm(rx.position - scene2.transmitter.position)
    slopes = np.diff(exponent) / np.diff(waveform32.grid)
    assert np.allclose(slopes, baseline / scene2.c0, rtol=1e-12)


def test_waveform_kinds():
    w0, bw = 2 * np.pi * 2e9, 2 * np.pi * 8e6
    flat = Waveform(w0, bw, 16, kind="flat").spectrum()
    assert np.array_equal(flat, np.ones(16, dtype=complex))
    lfm = Waveform(w0, bw, 16, kind="lfm").spectrum()
    assert np.allclose(np.abs(lfm), 1.0)
    assert not np.allclose(lfm, lfm[0])  # quadratic phase across the band
    rnd1 = Waveform(w0, bw, 16, seed=3).spectrum()
    rnd2 = Waveform(w0, bw, 16, seed=3).spectrum()
    assert np.array_equal(rnd1, rnd2)
    assert np.allclose(np.abs(rnd1), 1.0)
    with pytest.raises(ValueError):
        Waveform(w0, bw, 16, kind="wavelet")
    with pytest.raises(ValueError):
        Waveform(w0, bw, 1)


def test_synthesize_shapes(scene2, waveform32):
    ss = synthesize(scene2, waveform32)
    assert ss.tp.shape == (2, 2, 32)
    assert ss.dp.shape == (2, 2, 32)
    assert ss.n_channels == 4
    assert ss.tp_stack().shape == (4, 32)
    no_dp = synthesize(scene2, waveform32, with_dp=False)
    assert no_dp.dp is None and no_dp.dp_stack() is None


def test_nopol_slice_matches_h_rows(scene2, waveform32):
    full = synthesize(scene2, waveform32)
    h_only = synthesize(scene2, waveform32, pols=("h",))
    assert np.array_equal(h_only.tp, full.tp[:, :1])
    assert np.array_equal(h_only.dp, full.dp[:, :1])
