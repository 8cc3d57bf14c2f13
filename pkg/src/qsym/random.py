"""Random states, unitaries and channels over a pluggable entropy source.

Gaussians come from uniforms by Marsaglia's polar method, so the number of
uniforms consumed is a deterministic function of the uniform stream itself.
This keeps file-backed entropy consumption reproducible byte for byte.
"""

from __future__ import annotations

import math
import os
import threading
from collections import deque

import numpy as np

from .channel import Channel
from .errors import EntropyExhausted, ShapeError, SingularMarginal
from .qstate import QState, RegisterShape
from .symlinalg import SymMatrix

ENV_RANDOM_FILE = "QSYM_RANDOM_FILE"
_WORD = 8
_SCALE = 2.0 ** -53


class EntropySource:
    """Stream of uniforms in [0, 1) with derived standard normals.

    Subclasses implement :meth:`_draw` returning ``n`` fresh uniforms. Access is
    serialised with a lock; share one source between threads only if you
    accept an interleaving-dependent stream.
    """

    def __init__(self):
        self._pending: deque[float] = deque()
        self._spare: float | None = None
        self._lock = threading.RLock()

    def _draw(self, n: int) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def uniforms(self, n: int) -> np.ndarray:
        with self._lock:
            out = np.empty(n, dtype=np.float64)
            k = 0
            while k < n and self._pending:
                out[k] = self._pending.popleft()
                k += 1
            if k < n:
                out[k:] = self._draw(n - k)
            return out

    def next_uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def _unread(self, values) -> None:
        self._pending.extendleft(reversed(list(values)))

    def gaussians(self, n: int) -> np.ndarray:
        """``n`` standard normals; equals ``n`` successive :meth:`next_gaussian` calls."""
        with self._lock:
            out = np.empty(n, dtype=np.float64)
            k = 0
            if n and self._spare is not None:
                out[0] = self._spare
                self._spare = None
                k = 1
            while k < n:
                pairs = (n - k + 1) // 2
                batch = max(8, int(pairs * 1.35) + 4)
                u = self.uniforms(2 * batch).reshape(batch, 2)
                v = 2.0 * u - 1.0
                s = v[:, 0] ** 2 + v[:, 1] ** 2
                ok = np.flatnonzero((s < 1.0) & (s > 0.0))
                if len(ok) > pairs:
                    # hand back the uniforms after the last pair we need
                    cut = ok[pairs - 1] + 1
                    self._unread(u[cut:].reshape(-1))
                    ok = ok[:pairs]
                f = np.sqrt(-2.0 * np.log(s[ok]) / s[ok])
                z = (v[ok] * f[:, None]).reshape(-1)
                take = min(len(z), n - k)
                out[k : k + take] = z[:take]
                if take < len(z):
                    self._spare = float(z[take])
                k += take
            return out

    def next_gaussian(self) -> float:
        return float(self.gaussians(1)[0])


class SeededPRNG(EntropySource):
    """Deterministic source: numpy PCG64 seeded with ``seed``, doubles via ``random()``."""

    def __init__(self, seed: int = 0):
        super().__init__()
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def _draw(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def __repr__(self):
        return f"SeededPRNG({self.seed})"


class RandomFile(EntropySource):
    """Uniforms from a file of 8-byte big-endian words, ``(w >> 11) * 2^-53``.

    The byte offset of the next unread word lives in a sidecar ledger file
    (default ``path + ".ledger"``), rewritten atomically before any value is
    returned, so no byte is served twice even across processes.
    """

    def __init__(self, path: str, ledger_path: str | None = None):
        super().__init__()
        self.path = os.fspath(path)
        self.ledger_path = os.fspath(ledger_path) if ledger_path else self.path + ".ledger"
        self.size = os.path.getsize(self.path)

    @property
    def offset(self) -> int:
        try:
            with open(self.ledger_path, encoding="ascii") as fh:
                return int(fh.read().strip() or 0)
        except FileNotFoundError:
            return 0

    def _write_offset(self, off: int) -> None:
        tmp = f"{self.ledger_path}.tmp{os.getpid()}"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write(f"{off}\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.ledger_path)

    @property
    def remaining_words(self) -> int:
        return (self.size - self.offset) // _WORD

    def _draw(self, n: int) -> np.ndarray:
        off = self.offset
        need = n * _WORD
        if off + need > self.size:
            raise EntropyExhausted(f"{self.path}: need {need} bytes at offset {off}, file has {self.size}")
        with open(self.path, "rb") as fh:
            fh.seek(off)
            raw = fh.read(need)
        if len(raw) != need:
            raise EntropyExhausted(f"{self.path}: short read at offset {off}")
        self._write_offset(off + need)
        words = np.frombuffer(raw, dtype=">u8")
        return (words >> np.uint64(11)).astype(np.float64) * _SCALE

    def __repr__(self):
        return f"RandomFile({self.path!r})"


def default_source(seed: int | None = None) -> EntropySource:
    """``RandomFile`` when ``QSYM_RANDOM_FILE`` is set, else ``SeededPRNG(seed or 0)``."""
    path = os.environ.get(ENV_RANDOM_FILE)
    if path:
        return RandomFile(path)
    return SeededPRNG(0 if seed is None else seed)


def _src(src) -> EntropySource:
    if src is None:
        return default_source()
    if isinstance(src, EntropySource):
        return src
    return SeededPRNG(int(src))


def ginibre(rows: int, cols: int, src=None, count: int | None = None) -> np.ndarray:
    """Complex Gaussian matrix with entries ``(g1 + i g2)/sqrt(2)``.

    Real and imaginary parts are consumed interleaved in row-major order. With
    ``count`` a stack of independent matrices is drawn in sequence.
    """
    s = _src(src)
    k = 1 if count is None else count
    g = s.gaussians(2 * rows * cols * k).reshape(k, rows, cols, 2)
    out = (g[..., 0] + 1j * g[..., 1]) / math.sqrt(2.0)
    return out[0] if count is None else out


def random_ket(dim: int, src=None, shape=None) -> QState:
    """Haar-random pure state: normalised Ginibre column."""
    if dim < 2:
        raise ShapeError("random_ket needs dim >= 2")
    v = ginibre(dim, 1, src).reshape(-1)
    v = v / np.linalg.norm(v)
    return QState(v, shape if shape is not None else RegisterShape.for_dim(dim), "pure", validate=False)


def haar_unitaries(dim: int, count: int, src=None, correct_phases: bool = True) -> np.ndarray:
    """Stack of ``count`` unitaries from QR of Ginibre matrices.

    With ``correct_phases`` (default) Q is multiplied by ``diag(r_kk/|r_kk|)``,
    which makes the distribution Haar; without it, the output inherits the
    sign convention of the QR routine and is not Haar.
    """
    if dim < 2:
        raise ShapeError("random unitaries need dim >= 2")
    z = ginibre(dim, dim, src, count=count)
    q, r = np.linalg.qr(z)
    if correct_phases:
        d = np.diagonal(r, axis1=-2, axis2=-1)
        ph = d / np.abs(d)
        q = q * ph[..., None, :]
    return q


def random_unitary(dim: int, src=None, correct_phases: bool = True) -> SymMatrix:
    return SymMatrix(haar_unitaries(dim, 1, src, correct_phases)[0])


def random_density(dim: int, src=None, rank: int | None = None) -> QState:
    """Random mixed state ``G G^dag / tr`` with ``G`` a dim x rank Ginibre matrix."""
    g = ginibre(dim, rank or dim, src)
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return QState(rho, RegisterShape.for_dim(dim), "mixed", validate=False)


def _inv_sqrt_psd(y: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((y + y.conj().T) / 2)
    if w.min() < 1e-12:
        raise SingularMarginal(f"marginal eigenvalue {w.min():.3e} below 1e-12")
    return (v / np.sqrt(w)) @ v.conj().T


def random_dynamical_matrix(dim: int, kraus_rank: int, src=None, max_attempts: int = 8) -> Channel:
    """Random CPTP channel (Choi form) from the Ginibre-induced measure.

    ``W = G G^dag`` on output (x) input with ``G`` of shape dim^2 x kraus_rank;
    the Choi matrix is ``(I (x) Y^-1/2) W (I (x) Y^-1/2)`` with ``Y = tr_out W``.
    """
    if dim < 2:
        raise ShapeError("random_dynamical_matrix needs dim >= 2")
    if not 1 <= kraus_rank <= dim * dim:
        raise ShapeError(f"kraus_rank must lie in 1..{dim * dim}")
    s = _src(src)
    last = None
    for _ in range(max_attempts):
        g = ginibre(dim * dim, kraus_rank, s)
        w = g @ g.conj().T
        y = np.einsum("akal->kl", w.reshape(dim, dim, dim, dim))
        try:
            yi = _inv_sqrt_psd(y)
        except SingularMarginal as exc:
            last = exc
            continue
        big = np.kron(np.eye(dim), yi)
        choi = big @ w @ big
        choi = (choi + choi.conj().T) / 2
        return Channel.from_choi(SymMatrix(choi), dim, dim, trace_preserving=True)
    raise SingularMarginal(f"no well-conditioned sample in {max_attempts} attempts: {last}")


__all__ = [
    "ENV_RANDOM_FILE", "EntropySource", "RandomFile", "SeededPRNG", "default_source", "ginibre",
    "haar_unitaries", "random_density", "random_dynamical_matrix", "random_ket", "random_unitary",
]
