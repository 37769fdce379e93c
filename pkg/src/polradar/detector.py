"""GLRT detection and dipole estimation.

The test statistic whitens the steered data correlation matrices by the
diagonal noise covariances and takes largest eigenvalues:

- with direct path:  lambda = lam_max(S~^-1/2 Q1 S~^-1/2) - lam_max(S_dp^-1/2 Q0 S_dp^-1/2)
- without:           lambda = lam_max(S_tp^-1/2 R S_tp^-1/2)

Q1/Q0/R are frequency integrals of steered outer products; the whitened Q0
matrix is a principal submatrix of the whitened Q1 matrix, so the
with-direct-path statistic is nonnegative by eigenvalue interlacing.

Eigen work uses LAPACK's Hermitian solver; polradar.eig.jacobi_eigh is the
independent reference the tests check it against.
"""

from dataclasses import dataclass

import numpy as np

from .forward import dp_phase_exponent, receive_matrix, tp_phase_exponent
from .geometry import lift_state
from .scene import BOTH_POLS

EIGENGAP_DEGENERATE_RTOL = 1e-6
PINV_RTOL = 1e-10


@dataclass(frozen=True)
class Hypothesis:
    """Hypothesized 2-D target state driving the steering matrices."""

    x2: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x2", np.asarray(self.x2, dtype=float).reshape(2))
        object.__setattr__(self, "v2", np.asarray(self.v2, dtype=float).reshape(2))

    def lifted(self, topo):
        return lift_state(self.x2, self.v2, topo)


@dataclass
class SteeringSet:
    """Unit-modulus steering phasors, stacked per channel: (C, N) arrays."""

    tp: np.ndarray
    dp: np.ndarray | None
    grid: np.ndarray
    pols: tuple

    @property
    def dw(self):
        return float(self.grid[1] - self.grid[0])


@dataclass
class CorrelationSet:
    """Steered data correlation matrices (unwhitened, Hermitian PSD).

    r is always available (target path only); q1/q0 require direct-path data.
    """

    r: np.ndarray
    q1: np.ndarray | None
    q0: np.ndarray | None
    dw: float


@dataclass
class DetectionOutput:
    lam: float
    w: np.ndarray
    e_est: np.ndarray | None
    degenerate: bool
    rank_deficient: bool


def steering(scene, waveform, hyp, pols=BOTH_POLS):
    """Steering phasors for a hypothesized state.

    Target-path entries exp(i (omega + alpha_k omega0) phi_k / c0) repeated
    for each polarization of receiver k; direct-path entries
    exp(i (omega + omega0) |a_r - a_t| / c0). Uses the same phase routine as
    the synthesizer, so a matched hypothesis cancels the model phase exactly.
    """
    omega = waveform.grid
    x3, v3 = hyp.lifted(scene.topography)
    tx = scene.transmitter
    n_pols = len(pols)
    tp = np.empty((scene.n_receivers * n_pols, omega.size), dtype=complex)
    dp = np.empty_like(tp)
    for k, rx in enumerate(scene.receivers):
        tp_row = np.exp(
            1j * tp_phase_exponent(x3, v3, rx.position, tx.position, omega, waveform.omega0, scene.c0)
        )
        dp_row = np.exp(
            1j * dp_phase_exponent(rx.position, tx.position, omega, waveform.omega0, scene.c0)
        )
        for p in range(n_pols):
            tp[k * n_pols + p] = tp_row
            dp[k * n_pols + p] = dp_row
    return SteeringSet(tp=tp, dp=dp, grid=omega, pols=tuple(pols))


def rotated(stack, phasors):
    """Apply the conjugate steering to a data stack: D^H d per frequency."""
    return np.conj(phasors) * stack


def gram(rows, dw):
    """dw * sum_w v(w) v(w)^H for rows of shape (C, N)."""
    return dw * (rows @ rows.conj().T)


def correlations(signals, steer):
    """Steered correlation matrices from a SignalSet.

    R uses the target path alone; when direct-path data is present, Q1 stacks
    [TP; DP] into the full matrix and Q0 uses the direct path alone.
    """
    dw = signals.dw
    v_tp = rotated(signals.tp_stack(), steer.tp)
    r = gram(v_tp, dw)
    q1 = q0 = None
    if signals.dp is not None:
        v_dp = rotated(signals.dp_stack(), steer.dp)
        v_full = np.vstack([v_tp, v_dp])
        q1 = gram(v_full, dw)
        q0 = gram(v_dp, dw)
    return CorrelationSet(r=r, q1=q1, q0=q0, dw=dw)


def hermitian_lam_max(a):
    """Largest eigenvalue of a Hermitian matrix (LAPACK path)."""
    return float(np.linalg.eigvalsh(a)[-1])


def hermitian_eig_top(a):
    """(lam_max, top eigenvector, degeneracy flag) of a Hermitian matrix."""
    w, v = np.linalg.eigh(a)
    lam = float(w[-1])
    vec = v[:, -1]
    gap = lam - float(w[-2]) if w.size > 1 else np.inf
    degenerate = gap < EIGENGAP_DEGENERATE_RTOL * max(abs(lam), np.finfo(float).tiny)
    return lam, phase_normalize(vec), degenerate


def phase_normalize(vec):
    """Rotate a complex vector so its largest-magnitude entry is real positive."""
    idx = int(np.argmax(np.abs(vec)))
    pivot = vec[idx]
    if pivot == 0:
        return vec
    return vec * (np.conj(pivot) / abs(pivot))


def whitened_stacks(signals, steer, cov, use_dp):
    """Steered, noise-whitened data rows.

    Returns (tp_rows, dp_rows) where rows are (C, N) arrays of
    sigma_c^-1 conj(D_c) d_c; dp_rows is None without direct path.
    """
    dw = signals.dw
    tp = rotated(signals.tp_stack(), steer.tp) / np.sqrt(cov.sigma2_tp)[:, None]
    dp = None
    if use_dp:
        if signals.dp is None:
            raise ValueError("direct-path mode requested but the data has no direct path")
        if cov.sigma2_dp is None:
            raise ValueError("direct-path mode requires sigma2_dp")
        dp = rotated(signals.dp_stack(), steer.dp) / np.sqrt(cov.sigma2_dp)[:, None]
    return tp, dp, dw


def glrt(signals, cov, steer, use_dp=True, receive=None):
    """GLRT statistic, dominant eigenvector, and dipole estimate.

    Parameters
    ----------
    signals : SignalSet
    cov : NoiseCov
    steer : SteeringSet
        Built for the hypothesis under test.
    use_dp : bool
        Whether the direct-path channels participate (requires dp data and
        sigma2_dp).
    receive : numpy.ndarray, shape (C, 3), optional
        Receive stack at the hypothesized location; enables the dipole
        moment estimate.

    Returns
    -------
    DetectionOutput
        lam is the test statistic; w the dominant whitened eigenvector
        ([TP; DP] partitions in dp mode); e_est the unit dipole estimate
        (None when ``receive`` is absent).
    """
    tp_rows, dp_rows, dw = whitened_stacks(signals, steer, cov, use_dp)
    if use_dp:
        full = np.vstack([tp_rows, dp_rows])
        lam1, w, degen = hermitian_eig_top(gram(full, dw))
        lam0 = hermitian_lam_max(gram(dp_rows, dw))
        lam = lam1 - lam0
    else:
        lam, w, degen = hermitian_eig_top(gram(tp_rows, dw))
    e_est = None
    rank_deficient = False
    if receive is not None:
        w1 = w[: tp_rows.shape[0]]
        e_est, rank = estimate_dipole(w1, receive, cov.sigma2_tp)
        rank_deficient = rank < 3
    return DetectionOutput(
        lam=lam, w=w, e_est=e_est, degenerate=degen, rank_deficient=rank_deficient
    )


def receive_stack(scene, hyp, pols=BOTH_POLS):
    """Stacked receive matrices at the hypothesized location, shape (C, 3)."""
    x3, _ = hyp.lifted(scene.topography)
    return np.vstack([receive_matrix(x3, rx, pols) for rx in scene.receivers])


def estimate_dipole(w1, receive, sigma2_tp):
    """Target dipole estimate from the target-path eigenvector partition.

    w1 estimates (up to a complex scalar) the whitened coupling vector, so
    pinv(A_r) sigma^(1/2) w1 points along the dipole. The complex result is
    rotated to the phase maximizing its real part and reported as a real unit
    vector, sign-fixed; the direction is only meaningful as a line.

    Returns
    -------
    (numpy.ndarray, int)
        Unit estimate and the numerical rank of the receive stack. Rank < 3
        means the geometry cannot resolve all components and the estimate is
        confined to the receive row space.
    """
    receive = np.asarray(receive, dtype=float)
    u, s, vt = np.linalg.svd(receive, full_matrices=False)
    rank = int(np.sum(s > PINV_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if rank == 0:
        raise ValueError("receive stack is zero; no dipole estimate exists")
    inv = np.zeros_like(s)
    inv[:rank] = 1.0 / s[:rank]
    pinv = vt.conj().T @ np.diag(inv) @ u.conj().T
    z = pinv @ (np.sqrt(np.asarray(sigma2_tp, dtype=float)) * w1)
    # phase rotation maximizing the real part: 2*psi = angle(sum z_i^2)
    psi = 0.5 * np.angle(np.sum(z * z))
    e = np.real(z * np.exp(-1j * psi))
    norm = np.linalg.norm(e)
    if norm == 0.0:
        raise ValueError("degenerate dipole estimate (zero vector)")
    e = e / norm
    for comp in e:
        if abs(comp) > 1e-12:
            if comp < 0:
                e = -e
            break
    return e, rank


def dipole_angle_error(e_est, e_true):
    """Angle in [0, pi/2] between two dipole lines (sign-invariant)."""
    a = np.asarray(e_est, dtype=float)
    b = np.asarray(e_true, dtype=float)
    c = abs(float(np.dot(a, b))) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.arccos(min(c, 1.0)))


def stacked_sigma(cov, use_dp):
    if use_dp:
        return np.concatenate([cov.sigma2_tp, cov.sigma2_dp])
    return cov.sigma2_tp


def _rotated_full(signals, steer, use_dp):
    v_tp = rotated(signals.tp_stack(), steer.tp)
    if not use_dp:
        return v_tp
    return np.vstack([v_tp, rotated(signals.dp_stack(), steer.dp)])


def mle_waveform(s_tilde, signals, steer, cov, use_dp=True):
    """Maximum-likelihood waveform spectrum for a known coupling vector.

    p_hat(w) = s~^H S~^-1 D~(w)^H d~(w) / (s~^H S~^-1 s~), per frequency.
    """
    s_tilde = np.asarray(s_tilde, dtype=complex)
    if not np.any(s_tilde):
        raise ValueError("s_tilde must be nonzero")
    sigma2 = stacked_sigma(cov, use_dp)
    v = _rotated_full(signals, steer, use_dp)  # rows D^H d
    weights = np.conj(s_tilde) / sigma2
    den = float(np.real(np.sum(np.abs(s_tilde) ** 2 / sigma2)))
    return (weights @ v) / den


def objective_j(s_tilde, signals, steer, cov, use_dp=True):
    """Reduced GLRT objective J and its gradient in the coupling vector.

    J(s~) = dw * sum_w |d~(w)^H D~(w) S~^-1 s~|^2 / (s~^H S~^-1 s~)

    The gradient is returned as a complex vector g packing the real-coordinate
    gradient of the real-valued J: dJ/dRe(s_i) = Re(g_i) and
    dJ/dIm(s_i) = Im(g_i) (twice the conjugate Wirtinger derivative).
    """
    s_tilde = np.asarray(s_tilde, dtype=complex)
    if not np.any(s_tilde):
        raise ValueError("s_tilde must be nonzero")
    sigma2 = stacked_sigma(cov, use_dp)
    v = _rotated_full(signals, steer, use_dp)
    dw = signals.dw
    u = s_tilde / sigma2
    a = v.conj().T @ u  # a(w) = d~^H D~ S~^-1 s~ per frequency
    den = float(np.real(np.sum(np.abs(s_tilde) ** 2 / sigma2)))
    j_val = dw * float(np.sum(np.abs(a) ** 2)) / den
    # Q1 S^-1 s = dw * sum_w a(w) v(w), folded without forming Q1
    q1_u = dw * (v @ a)
    grad = (2.0 / den) * (q1_u / sigma2 - j_val * u)
    return j_val, grad
