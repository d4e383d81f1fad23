"""Dense complex linear algebra for the small matrices used here (up to 9x9).

Matrices are plain ``numpy`` complex arrays. The Hermitian eigensolver is a
cyclic Jacobi rotation method written out by hand; it accepts a stack of
matrices ``(..., n, n)`` and rotates every member of the stack in lock-step,
which keeps sweeps over channel parameters cheap.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import DimensionError, PhysicalityError, ConvergenceError

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
OFFDIAG_TOL = 1e-14
MAX_SWEEPS = 60


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise PhysicalityError("matrix contains NaN or Inf entries")
    return a


def _check_bipartite(rho: np.ndarray, dims) -> tuple[int, int]:
    d_a, d_b = (int(d) for d in dims)
    n = d_a * d_b
    if rho.shape[-2:] != (n, n):
        raise DimensionError(f"matrix of shape {rho.shape[-2:]} does not match dims {d_a}x{d_b}")
    return d_a, d_b


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product, (a⊗b)[i*rb+k, j*cb+l] = a[i,j] b[k,l]."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def partial_transpose(rho, dims, subsystem: str = "B") -> np.ndarray:
    """Transpose one tensor factor. Works on stacks ``(..., n, n)``."""
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = _check_bipartite(rho, dims)
    lead = rho.shape[:-2]
    t = rho.reshape(*lead, d_a, d_b, d_a, d_b)
    k = len(lead)
    axes = list(range(k))
    if subsystem.upper() == "B":
        axes += [k, k + 3, k + 2, k + 1]
    elif subsystem.upper() == "A":
        axes += [k + 2, k + 1, k, k + 3]
    else:
        raise ValueError("subsystem must be 'A' or 'B'")
    return t.transpose(axes).reshape(*lead, d_a * d_b, d_a * d_b)


def partial_trace(rho, dims, traced: str = "B") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = _check_bipartite(rho, dims)
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if traced.upper() == "B":
        return np.einsum("ikjk->ij", t)
    if traced.upper() == "A":
        return np.einsum("kikj->ij", t)
    raise ValueError("traced must be 'A' or 'B'")


def realign(rho, dims) -> np.ndarray:
    """Realigned matrix of shape (dA², dB²).

    Row ``i + j*dA`` holds the column-major vec of block (i, j), so that
    R[i + j*dA, k + l*dB] = rho[i*dB + k, j*dB + l].
    """
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = _check_bipartite(rho, dims)
    t = rho.reshape(d_a, d_b, d_a, d_b)          # [i, k, j, l]
    return t.transpose(2, 0, 3, 1).reshape(d_a * d_a, d_b * d_b)


def unrealign(r, dims) -> np.ndarray:
    """Inverse index map of :func:`realign`."""
    d_a, d_b = (int(d) for d in dims)
    r = np.asarray(r, dtype=complex)
    if r.shape != (d_a * d_a, d_b * d_b):
        raise DimensionError(f"realigned matrix shape {r.shape} does not match dims {d_a}x{d_b}")
    t = r.reshape(d_a, d_a, d_b, d_b)            # [j, i, l, k]
    return t.transpose(1, 3, 0, 2).reshape(d_a * d_b, d_a * d_b)


def hermitian_defect(h) -> float:
    h = np.asarray(h, dtype=complex)
    return float(np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2))))) if h.size else 0.0


def _symmetrize(h: np.ndarray) -> np.ndarray:
    defect = hermitian_defect(h)
    if defect > HERMITIAN_TOL:
        raise PhysicalityError(f"matrix is not Hermitian (max |h - h†| = {defect:.3e})")
    if defect > 1e-12:
        log.debug("symmetrizing input with Hermitian defect %.3e", defect)
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def _jacobi(h: np.ndarray, want_vectors: bool):
    """Cyclic Jacobi on a stack of Hermitian matrices (already symmetrized)."""
    a = np.array(h, dtype=complex, copy=True)
    n = a.shape[-1]
    lead = a.shape[:-2]
    a = a.reshape(-1, n, n)
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy() if want_vectors else None
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    thresh = OFFDIAG_TOL * scale
    iu = np.triu_indices(n, 1)

    for _ in range(MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.all(off < thresh):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                g = np.abs(apq)
                active = g > 1e-300
                if not np.any(active):
                    continue
                app_ = a[:, p, p].real
                aqq = a[:, q, q].real
                safe_g = np.where(active, g, 1.0)
                tau = (aqq - app_) / (2.0 * safe_g)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                e = np.where(active, apq / safe_g, 1.0)
                se = (s * e)[:, None]
                sec = (s * np.conj(e))[:, None]
                cc = c[:, None]
                # columns: A <- A J
                col_p = a[:, :, p].copy()
                col_q = a[:, :, q]
                a[:, :, p] = cc * col_p - sec * col_q
                a[:, :, q] = se * col_p + cc * col_q
                # rows: A <- J† A
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :]
                a[:, p, :] = cc * row_p - se * row_q
                a[:, q, :] = sec * row_p + cc * row_q
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                if want_vectors:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q]
                    v[:, :, p] = cc * vp - sec * vq
                    v[:, :, q] = se * vp + cc * vq
    else:
        off = np.sqrt(2.0 * np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.any(off >= thresh * 1e3):
            raise ConvergenceError("Jacobi eigensolver did not converge")

    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(w, axis=1)
    w = np.take_along_axis(w, order, axis=1).reshape(*lead, n)
    if want_vectors:
        v = np.take_along_axis(v, order[:, None, :], axis=2).reshape(*lead, n, n)
    return w, v


def hermitian_eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvector columns (stack-aware)."""
    h = _symmetrize(np.asarray(h, dtype=complex))
    if h.shape[-1] != h.shape[-2]:
        raise DimensionError("eigensolver needs square matrices")
    return _jacobi(h, want_vectors=True)


def hermitian_eigenvalues(h) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix or stack."""
    h = _symmetrize(np.asarray(h, dtype=complex))
    if h.shape[-1] != h.shape[-2]:
        raise DimensionError("eigensolver needs square matrices")
    return _jacobi(h, want_vectors=False)[0]


def singular_values(m) -> np.ndarray:
    """Descending singular values via the eigenvalues of m†m."""
    m = np.asarray(m, dtype=complex)
    g = np.conj(np.swapaxes(m, -1, -2)) @ m
    w = hermitian_eigenvalues(g)
    w = np.where((w < 0) & (w > -1e-12), 0.0, w)
    if np.any(w < 0):
        raise PhysicalityError("m†m has a significantly negative eigenvalue")
    return np.sqrt(w)[..., ::-1]


def trace_norm(m) -> float:
    return float(np.sum(singular_values(m)))


def psd_sqrt(h) -> np.ndarray:
    """Square root of a Hermitian positive semidefinite matrix."""
    w, v = hermitian_eigh(h)
    if np.min(w) < -1e-9:
        raise PhysicalityError(f"matrix is not PSD (min eigenvalue {np.min(w):.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def pauli(i: int) -> np.ndarray:
    """σ0..σ3 = I, σx, σy, σz."""
    return _PAULI[i].copy()


_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
