"""Dense Hermitian eigendecomposition by cyclic Jacobi rotations.

This is the slow-but-sure reference solver: it annihilates off-diagonal
entries one unitary plane rotation at a time until the off-diagonal Frobenius
mass is below tolerance. The detector's hot path uses LAPACK
(numpy.linalg.eigh); this routine exists so the two results can be checked
against each other, and it also handles the 3x3 real-symmetric target dyads
(a real symmetric matrix is Hermitian).
"""

import numpy as np


def _offdiag_norm(a):
    mask = ~np.eye(a.shape[0], dtype=bool)
    return np.linalg.norm(a[mask])


def jacobi_eigh(a, tol=1e-13, max_sweeps=100):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian (or real symmetric) matrix. Hermiticity is enforced by
        symmetrizing (a + a^H)/2 before iterating.
    tol : float
        Convergence threshold on off-diagonal Frobenius norm relative to the
        full Frobenius norm.
    max_sweeps : int
        Safety cap on full cyclic sweeps.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        Eigenvalues ascending (real, shape (n,)) and unitary eigenvector
        matrix (columns, shape (n, n)) such that a @ v[:, i] = w[i] * v[:, i].
    """
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    work = 0.5 * (a + a.conj().T)
    work = work.astype(complex)
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(work)
    if scale == 0.0:
        return np.zeros(n), v

    for _ in range(max_sweeps):
        if _offdiag_norm(work) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                r = abs(apq)
                if r <= tol * scale * 1e-2:
                    continue
                phi = np.angle(apq)
                app = work[p, p].real
                aqq = work[q, q].real
                # rotation angle zeroing the (p, q) entry: tan(2*theta) = 2r/(aqq-app)
                tau = (aqq - app) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                ep = np.exp(1j * phi)
                # columns: [p, q] <- [c*p - conj(s*ep)*q ...] via U = [[c, s*ep], [-s*conj(ep), c]]
                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * np.conj(ep) * col_q
                work[:, q] = s * ep * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * ep * row_q
                work[q, :] = s * np.conj(ep) * row_p + c * row_q
                # exact zeros on the annihilated pair keep the iteration stable
                work[p, q] = 0.0
                work[q, p] = 0.0
                col_p = v[:, p].copy()
                col_q = v[:, q].copy()
                v[:, p] = c * col_p - s * np.conj(ep) * col_q
                v[:, q] = s * ep * col_p + c * col_q
    else:
        raise RuntimeError("jacobi_eigh failed to converge")

    w = np.diag(work).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    if np.isrealobj(a):
        v = v.real.copy()
    return w, v


def jacobi_lam_max(a, tol=1e-13):
    """Largest eigenvalue of a Hermitian matrix via jacobi_eigh."""
    w, _ = jacobi_eigh(a, tol=tol)
    return float(w[-1])
