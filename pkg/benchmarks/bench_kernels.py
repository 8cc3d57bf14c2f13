"""Compare the numba and numpy gate-application kernels.

    python3 benchmarks/bench_kernels.py [--qubits 10 14 18 20] [--repeat 5]

Reports the median wall time per gate for a 1-qubit H, a 2-qubit CNOT block
and a controlled 1-qubit gate, plus the max deviation between the two paths.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qsym import _kernels as K

H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
CX = np.eye(4, dtype=np.complex128)[[0, 1, 3, 2]]


def _time(fn, repeat: int) -> float:
    fn()  # warm-up (and JIT compile)
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[10, 14, 18, 20])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
    rng = np.random.default_rng(0)
    cases = [("H t=0", H, [0], []), ("CX 0,n-1", CX, None, []), ("H ctrl=0 t=1", H, [1], [0])]
    print(f"{'n':>3} {'case':<14} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max|diff|':>10}")
    for n in args.qubits:
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        for label, u, tg, ct in cases:
            tg = [0, n - 1] if tg is None else tg
            t_np = _time(lambda: K.apply_matrix_numpy(psi, u, tg, ct, n), args.repeat)
            if K.HAVE_NUMBA:
                t_nb = _time(lambda: K.apply_matrix_numba(psi, u, tg, ct, n), args.repeat)
                diff = np.max(np.abs(K.apply_matrix_numpy(psi, u, tg, ct, n) - K.apply_matrix_numba(psi, u, tg, ct, n)))
                print(f"{n:>3} {label:<14} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>8.2f} {diff:>10.1e}")
            else:
                print(f"{n:>3} {label:<14} {1e3 * t_np:>10.3f} {'-':>10} {'-':>8} {'-':>10}")


if __name__ == "__main__":
    main()
