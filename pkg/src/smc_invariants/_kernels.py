"""Hot inner loops for the curvilinear projection, with backend selection.

The per-epoch stochastic update sweep dominates the nonlinear pipeline's
runtime (K pinned points x K partners per epoch). Two implementations are
kept in lockstep:

* a numba @njit kernel (default when numba is importable), and
* a pure-numpy fallback vectorized over partners.

Both apply identical floating-point operations in identical order, so they
produce bit-equal embeddings. Set the environment variable
``SMC_INVARIANTS_NUMBA=0`` before import to force the numpy path; the
``backend`` argument of :func:`cca_epoch` overrides per call.
``benchmarks/bench_cca.py`` times one against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import InvalidConfigError

ENV_FLAG = "SMC_INVARIANTS_NUMBA"


def _env_allows_numba() -> bool:
    value = os.environ.get(ENV_FLAG, "1").strip().lower()
    return value not in {"0", "false", "off", "no"}


def _pinned_sweep_full(pts, dist_x, order, lam, rate):
    """One epoch of pinned-point updates against every partner.

    For each pinned index i (in the given order), every other point j with
    current embedded distance d_y in (0, lam] moves along (y_j - y_i) by
    rate * (d_x - d_y) / d_y, which matches input-space distances for the
    currently-near pairs while leaving far pairs free to unfold.
    """
    n, p = pts.shape
    for pin in range(order.shape[0]):
        i = order[pin]
        for j in range(n):
            if j == i:
                continue
            d2 = 0.0
            for d in range(p):
                t = pts[j, d] - pts[i, d]
                d2 += t * t
            d_y = math.sqrt(d2)
            if d_y > 0.0 and d_y <= lam:
                fac = rate * (dist_x[i, j] - d_y) / d_y
                for d in range(p):
                    pts[j, d] += fac * (pts[j, d] - pts[i, d])


def _pinned_sweep_sub(pts, dist_x, order, partners, lam, rate):
    """Subsampled epoch: each pinned point updates a sampled partner set.

    partners[i] holds candidate indices (drawn with replacement); each
    distinct partner is updated once per sweep, matching the numpy path.
    """
    n, p = pts.shape
    for pin in range(order.shape[0]):
        i = order[pin]
        row = np.sort(partners[i])
        prev = -1
        for idx in range(row.shape[0]):
            j = row[idx]
            if j == prev or j == i:
                continue
            prev = j
            d2 = 0.0
            for d in range(p):
                t = pts[j, d] - pts[i, d]
                d2 += t * t
            d_y = math.sqrt(d2)
            if d_y > 0.0 and d_y <= lam:
                fac = rate * (dist_x[i, j] - d_y) / d_y
                for d in range(p):
                    pts[j, d] += fac * (pts[j, d] - pts[i, d])


try:  # pragma: no cover - exercised indirectly through backend tests
    if _env_allows_numba():
        from numba import njit

        _sweep_full_jit = njit(cache=True, nogil=True)(_pinned_sweep_full)
        _sweep_sub_jit = njit(cache=True, nogil=True)(_pinned_sweep_sub)
        _HAVE_NUMBA = True
    else:
        _HAVE_NUMBA = False
except ImportError:
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA


def active_backend() -> str:
    """Name of the backend used when none is forced."""
    return "numba" if NUMBA_ENABLED else "numpy"


def _sweep_full_numpy(pts, dist_x, order, lam, rate):
    n, p = pts.shape
    for i in order:
        diff = pts - pts[i]
        d2 = diff[:, 0] * diff[:, 0]
        for d in range(1, p):
            d2 = d2 + diff[:, d] * diff[:, d]
        d_y = np.sqrt(d2)
        mask = (d_y > 0.0) & (d_y <= lam)
        mask[i] = False
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            continue
        fac = rate * (dist_x[i, idx] - d_y[idx]) / d_y[idx]
        pts[idx] += fac[:, None] * diff[idx]


def _sweep_sub_numpy(pts, dist_x, order, partners, lam, rate):
    n, p = pts.shape
    for i in order:
        js = np.unique(partners[i])
        js = js[js != i]
        if js.size == 0:
            continue
        diff = pts[js] - pts[i]
        d2 = diff[:, 0] * diff[:, 0]
        for d in range(1, p):
            d2 = d2 + diff[:, d] * diff[:, d]
        d_y = np.sqrt(d2)
        keep = (d_y > 0.0) & (d_y <= lam)
        if not np.any(keep):
            continue
        js, diff, d_y = js[keep], diff[keep], d_y[keep]
        fac = rate * (dist_x[i, js] - d_y) / d_y
        pts[js] += fac[:, None] * diff


def cca_epoch(
    pts: np.ndarray,
    dist_x: np.ndarray,
    order: np.ndarray,
    lam: float,
    rate: float,
    partners: np.ndarray | None = None,
    backend: str | None = None,
) -> None:
    """Run one update epoch in place on pts (K x p, C-contiguous float64).

    order is the pinned-point schedule for the epoch; partners, when given,
    restricts each pinned point's updates to a sampled candidate set.
    backend forces "numba" or "numpy"; default follows NUMBA_ENABLED.
    """
    if backend is None:
        backend = active_backend()
    if backend == "numba":
        if not _HAVE_NUMBA:
            raise InvalidConfigError(
                "numba backend unavailable (not installed or disabled via "
                f"{ENV_FLAG}=0)"
            )
        if partners is None:
            _sweep_full_jit(pts, dist_x, order, lam, rate)
        else:
            _sweep_sub_jit(pts, dist_x, order, partners, lam, rate)
    elif backend == "numpy":
        if partners is None:
            _sweep_full_numpy(pts, dist_x, order, lam, rate)
        else:
            _sweep_sub_numpy(pts, dist_x, order, partners, lam, rate)
    else:
        raise InvalidConfigError(f"unknown kernel backend: {backend!r}")
