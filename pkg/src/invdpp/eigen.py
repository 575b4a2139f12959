"""Dense complex eigenvalues: Householder Hessenberg reduction + shifted QR."""
from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Unitarily similar upper Hessenberg form (Householder reflections)."""
    h = np.array(a, dtype=complex, copy=True)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _wilkinson_shift(a, b, c, d):
    """Eigenvalue of [[a, b], [c, d]] closest to d."""
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = d - (b * c) / (half + disc) if half + disc != 0 else d
    mu2 = d - (b * c) / (half - disc) if half - disc != 0 else d
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_step(block: np.ndarray, mu: complex) -> np.ndarray:
    m = block.shape[0]
    b = block - mu * np.eye(m)
    rots = []
    for k in range(m - 1):
        x, y = b[k, k], b[k + 1, k]
        r = np.hypot(abs(x), abs(y))
        if r == 0.0:
            g = np.eye(2, dtype=complex)
        else:
            c, s = x / r, y / r
            g = np.array([[np.conj(c), np.conj(s)], [-s, c]])
        b[k:k + 2, k:] = g @ b[k:k + 2, k:]
        rots.append(g)
    for k, g in enumerate(rots):
        b[:k + 2, k:k + 2] = b[:k + 2, k:k + 2] @ g.conj().T
    b += mu * np.eye(m)
    for k in range(m - 2):
        b[k + 2:, k] = 0.0
    return b


def hessenberg_eigvals(h: np.ndarray, max_iter: int | None = None) -> tuple[np.ndarray, int]:
    """Eigenvalues of an upper Hessenberg matrix and the QR iteration count.

    Wilkinson shifts with deflation on small subdiagonals; an exceptional
    shift is used every 10 stalled iterations.
    """
    h = np.array(h, dtype=complex, copy=True)
    n = h.shape[0]
    max_iter = 100 * max(n, 1) if max_iter is None else max_iter
    eps = np.finfo(float).eps
    scale = np.abs(h).max() if n else 0.0
    eig = np.empty(n, dtype=complex)
    hi = n - 1
    total = 0
    stall = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            ref = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if sub <= eps * (ref if ref > 0 else scale):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            stall = 0
            continue
        total += 1
        stall += 1
        if total > max_iter:
            raise ConvergenceError(f"QR iteration did not converge in {max_iter} steps")
        blk = h[lo:hi + 1, lo:hi + 1]
        if stall % 10 == 0:
            mu = blk[-1, -1] + 0.75 * abs(blk[-1, -2]) * (1 + 1j)
        else:
            mu = _wilkinson_shift(blk[-2, -2], blk[-2, -1], blk[-1, -2], blk[-1, -1])
        h[lo:hi + 1, lo:hi + 1] = _qr_step(blk, mu)
    return eig, total


def eigvals(a: np.ndarray, max_iter: int | None = None) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    return hessenberg_eigvals(hessenberg(a), max_iter)[0]
