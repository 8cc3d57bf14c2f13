"""Hot loops for gate application on state vectors.

Two interchangeable implementations: a numba ``@njit`` kernel and a pure-numpy
tensordot path. Set ``QSYM_DISABLE_NUMBA=1`` (or run without numba installed)
to select the numpy path. Both take a flat complex128 state of ``n`` qubits,
a ``2^k x 2^k`` block acting on ``targets`` (first target = most significant
bit of the block index) and optional ``controls`` that must all be 1.
"""

from __future__ import annotations

import os

import numpy as np

try:  # numba is optional
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

_DISABLED = os.environ.get("QSYM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def apply_matrix_numpy(state: np.ndarray, u: np.ndarray, targets, controls, n: int) -> np.ndarray:
    targets = [int(t) for t in targets]
    controls = [int(c) for c in controls]
    k = len(targets)
    psi = state.reshape((2,) * n)
    if controls:
        out = psi.copy()
        idx = tuple(1 if w in controls else slice(None) for w in range(n))
        free = [w for w in range(n) if w not in controls]
        sub_targets = [free.index(t) for t in targets]
        out[idx] = apply_matrix_numpy(psi[idx].copy(), u, sub_targets, [], len(free)).reshape(psi[idx].shape)
        return out.reshape(-1)
    ut = np.asarray(u, dtype=np.complex128).reshape((2,) * (2 * k))
    moved = np.tensordot(ut, psi, axes=(list(range(k, 2 * k)), targets))
    return np.moveaxis(moved, list(range(k)), targets).reshape(-1)


if HAVE_NUMBA:

    @_numba.njit(cache=True, nogil=True)
    def _apply_nb(state, u, tpos, sorted_pos, cmask, n):  # pragma: no cover - compiled
        k = tpos.shape[0]
        dk = 1 << k
        out = state.copy()
        offs = np.zeros(dk, dtype=np.int64)
        for a in range(dk):
            o = 0
            for j in range(k):
                if (a >> (k - 1 - j)) & 1:
                    o |= np.int64(1) << tpos[j]
            offs[a] = o
        vin = np.empty(dk, dtype=np.complex128)
        count = np.int64(1) << (n - k)
        for r in range(count):
            base = np.int64(r)
            for p in sorted_pos:
                base = ((base >> p) << (p + 1)) | (base & ((np.int64(1) << p) - 1))
            if (base & cmask) != cmask:
                continue
            for a in range(dk):
                vin[a] = state[base | offs[a]]
            for a in range(dk):
                acc = 0j
                for b in range(dk):
                    acc += u[a, b] * vin[b]
                out[base | offs[a]] = acc
        return out

    def apply_matrix_numba(state: np.ndarray, u: np.ndarray, targets, controls, n: int) -> np.ndarray:
        tpos = np.array([n - 1 - int(t) for t in targets], dtype=np.int64)
        sorted_pos = np.sort(tpos)
        cmask = np.int64(0)
        for c in controls:
            cmask |= np.int64(1) << (n - 1 - int(c))
        return _apply_nb(
            np.ascontiguousarray(state, dtype=np.complex128),
            np.ascontiguousarray(u, dtype=np.complex128),
            tpos,
            sorted_pos,
            cmask,
            n,
        )

else:  # pragma: no cover
    apply_matrix_numba = None


def apply_matrix(state: np.ndarray, u: np.ndarray, targets, controls, n: int) -> np.ndarray:
    """Return a new flat state with ``u`` applied; the input is not modified."""
    if USE_NUMBA:
        return apply_matrix_numba(state, u, targets, controls, n)
    return apply_matrix_numpy(state, u, targets, controls, n)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
