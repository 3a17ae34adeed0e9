"""Dense non-Hermitian eigenvalues: Householder Hessenberg reduction + shifted QR.

Used as an independent cross-check of LAPACK's ``zgeev`` (which runs the same
algorithm family) at small and moderate n.
"""

from __future__ import annotations

import numpy as np

from .core import RigidPointsError

_EPS = np.finfo(float).eps


class NoConvergence(RigidPointsError):
    pass


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Unitarily similar upper Hessenberg form (Householder reflections)."""
    h = np.array(a, dtype=complex, copy=True)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _givens(a: complex, b: complex):
    # returns (c, s, r) with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0], c real
    if b == 0:
        return 1.0, 0j, a
    if a == 0:
        return 0.0, np.conj(b) / abs(b), abs(b)
    na, nb = abs(a), abs(b)
    norm = np.hypot(na, nb)
    c = na / norm
    s = (a / na) * np.conj(b) / norm
    return c, s, (a / na) * norm


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4 - det)
    l1, l2 = tr / 2 + disc, tr / 2 - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def qr_eigenvalues(a: np.ndarray, max_sweeps: int | None = None) -> np.ndarray:
    """Eigenvalues of a square complex matrix by single-shift QR on its Hessenberg form.

    Deflation when ``|H[k+1,k]| <= eps * (|H[k,k]| + |H[k+1,k+1]|)``. Raises
    :class:`NoConvergence` after ``30 n`` QR sweeps in total.
    """
    h = hessenberg(a)
    n = h.shape[0]
    if n == 1:
        return h.diagonal().copy()
    if max_sweeps is None:
        max_sweeps = 30 * n
    eig = np.empty(n, dtype=complex)
    hi = n - 1
    sweeps = 0
    since_deflation = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            scale = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if scale == 0.0:
                scale = np.linalg.norm(h[: hi + 1, : hi + 1], 1)
            if abs(h[lo, lo - 1]) <= _EPS * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            since_deflation = 0
            continue
        sweeps += 1
        since_deflation += 1
        if sweeps > max_sweeps:
            raise NoConvergence(f"QR iteration exceeded {max_sweeps} sweeps (n={n})")
        if since_deflation % 11 == 10:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h, hi)
        blk = slice(lo, hi + 1)
        idx = np.arange(lo, hi + 1)
        h[idx, idx] -= mu
        rots = []
        for k in range(lo, hi):
            c, s, _ = _givens(h[k, k], h[k + 1, k])
            rows = h[[k, k + 1], k:hi + 1]
            top = c * rows[0] + s * rows[1]
            bot = -np.conj(s) * rows[0] + c * rows[1]
            h[k, k:hi + 1] = top
            h[k + 1, k:hi + 1] = bot
            h[k + 1, k] = 0.0
            rots.append((c, s))
        for k, (c, s) in zip(range(lo, hi), rots):
            top = min(k + 2, hi) + 1
            cols = h[lo:top, [k, k + 1]]
            left = c * cols[:, 0] + np.conj(s) * cols[:, 1]
            right = -s * cols[:, 0] + c * cols[:, 1]
            h[lo:top, k] = left
            h[lo:top, k + 1] = right
        h[idx, idx] += mu
        del blk
    return eig
