"""Dense symmetric linear algebra.

The eigensolver is a cyclic Jacobi method compiled with numba. It is only
meant for the small, dense, symmetric matrices that show up as window
covariances (a few hundred rows at most).
"""
from dataclasses import dataclass
import math

import numpy as np
from numba import njit

from .errors import (
    AsymmetryTooLarge,
    NoConvergence,
    NonFiniteMatrix,
    NotPSD,
    NotSquare,
    ShapeMismatch,
)

MAX_SWEEPS = 100
CONVERGENCE_RTOL = 1e-12
ASYMMETRY_ATOL = 1e-8
PSD_CLAMP_RTOL = 1e-8


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def as_matrix(a, name="matrix"):
    """Coerce ``a`` into a finite 2-D float64 array."""
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteMatrix(f"{name} contains NaN or Inf")
    return m


def _check_square(m):
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")


def _symmetrized(a):
    m = as_matrix(a)
    _check_square(m)
    asym = float(np.max(np.abs(m - m.T)))
    if asym > ASYMMETRY_ATOL:
        raise AsymmetryTooLarge(f"max |a_ij - a_ji| = {asym:.3e} exceeds {ASYMMETRY_ATOL:g}")
    return 0.5 * (m + m.T)


@njit(cache=True, nogil=True)
def _jacobi(a, v, want_vectors, tol, max_sweeps):
    # In-place cyclic Jacobi on the full symmetric matrix ``a``.
    # Returns the number of sweeps performed, or -1 if the cap was hit.
    n = a.shape[0]
    sweep = 0
    while True:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = math.sqrt(2.0 * off)
        if off <= tol:
            return sweep
        if sweep == max_sweeps:
            return -1
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq


def _run_jacobi(m, want_vectors):
    n = m.shape[0]
    work = np.ascontiguousarray(m.copy())
    v = np.eye(n) if want_vectors else np.empty((1, 1))
    tol = CONVERGENCE_RTOL * max(float(np.linalg.norm(m)), 1.0)
    sweeps = _jacobi(work, v, want_vectors, tol, MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")
    return np.diag(work).copy(), v


def sym_eigen(a):
    """Eigendecomposition of a symmetric matrix.

    The input is symmetrized as ``(A + A.T) / 2`` first. Eigenvalues come back
    in descending order; each eigenvector is sign-fixed so its first
    non-negligible component is positive.
    """
    m = _symmetrized(a)
    w, v = _run_jacobi(m, True)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        scale = np.max(np.abs(col))
        lead = np.flatnonzero(np.abs(col) > 1e-12 * scale)
        if lead.size and col[lead[0]] < 0:
            v[:, j] = -col
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def sym_eigvals(a):
    """Descending eigenvalues only; skips eigenvector accumulation."""
    m = _symmetrized(a)
    w, _ = _run_jacobi(m, False)
    return np.sort(w)[::-1]


def _clamped_spectrum(w):
    lam_max = float(w.max())
    if lam_max < 0.0:
        raise NotPSD(f"largest eigenvalue {lam_max:.3e} is negative")
    floor = -PSD_CLAMP_RTOL * lam_max
    if w.min() < floor:
        raise NotPSD(f"eigenvalue {float(w.min()):.3e} below clamp threshold {floor:.3e}")
    return np.clip(w, 0.0, None)


def psd_sqrt(a):
    """Symmetric PSD square root via the eigendecomposition."""
    eig = sym_eigen(a)
    w = _clamped_spectrum(eig.eigenvalues)
    v = eig.eigenvectors
    s = (v * np.sqrt(w)) @ v.T
    return 0.5 * (s + s.T)


def trace_sqrt(a):
    """``tr(psd_sqrt(a))``, i.e. the sum of square roots of the eigenvalues."""
    w = _clamped_spectrum(sym_eigvals(a))
    return float(np.sum(np.sqrt(w)))


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    out = a @ b
    if not np.all(np.isfinite(out)):
        raise NonFiniteMatrix("product overflowed")
    return out


def trace(a):
    m = as_matrix(a)
    _check_square(m)
    return float(np.trace(m))
