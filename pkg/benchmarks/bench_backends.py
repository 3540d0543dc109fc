"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_backends.py [--rounds 20000] [--repeat 3]

Reports per-call kernel timings and end-to-end session wall time for each
available backend, and checks both backends produce the same session report.
"""

import argparse
import timeit

import numpy as np

from dfsqkd import _backend, _kernels_py
from dfsqkd.adversary import AdversaryStrategy
from dfsqkd.protocol import Encoding
from dfsqkd.qstate import MeasurementBasis
from dfsqkd.session import SessionConfig, run_session


def kernel_cases(rng):
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    u2 = np.ascontiguousarray(np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0])
    u4 = np.ascontiguousarray(np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0])
    bases = np.stack([MeasurementBasis.Y.vectors] * 3)
    bits = rng.integers(0, 2, 20_000, dtype=np.uint8)
    seed = rng.integers(0, 2, 20_000 + 15_000 - 1, dtype=np.uint8)
    return {
        "apply_1q (3 qubits)": (lambda k: k.apply_1q(psi, 3, u2, 1), 20_000),
        "apply_2q (3 qubits)": (lambda k: k.apply_2q(psi, 3, u4, 1, 2), 20_000),
        "measure_2q (Bell)": (lambda k: k.measure_2q(psi, 3, u4, 0, 1, 0.4), 20_000),
        "measure_seq (3 steps)": (lambda k: k.measure_seq(psi, 3, bases, [1, 2, 0], [0.1, 0.5, 0.9]), 20_000),
        "toeplitz 20000->15000": (lambda k: k.toeplitz_hash(bits, seed, 15_000), 3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rounds", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = _backend.available()
    modules = {"python": _kernels_py}
    if "cython" in backends:
        from dfsqkd import _ckernels

        modules["cython"] = _ckernels

    print(f"{'kernel':<24}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for label, (fn, number) in kernel_cases(np.random.default_rng(0)).items():
        per_call = {b: min(timeit.repeat(lambda: fn(modules[b]), number=number, repeat=args.repeat)) / number for b in backends}
        speed = per_call["python"] / per_call["cython"] if "cython" in per_call else 1.0
        print(f"{label:<24}" + "".join(f"{per_call[b] * 1e6:>11.2f} us" for b in backends) + f"{speed:>9.1f}x")

    configs = {
        "qkd session, no Eve": SessionConfig(Encoding.ROTATION, rounds=args.rounds, loss_probability=0.1, seed=1),
        "check-heavy, ir-rand": SessionConfig(
            Encoding.DEPHASING, rounds=args.rounds, check1_fraction=0.99, adversary=AdversaryStrategy.from_name("ir-rand"), seed=2
        ),
    }
    print(f"\n{'session (' + str(args.rounds) + ' rounds)':<24}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for label, config in configs.items():
        wall, reports = {}, {}
        for b in backends:
            previous = _backend.use(b)
            try:
                wall[b] = min(timeit.repeat(lambda: run_session(config), number=1, repeat=args.repeat))
                reports[b] = run_session(config).canonical_json()
            finally:
                _backend.use(previous)
        same = len(set(reports.values())) == 1
        speed = wall["python"] / wall["cython"] if "cython" in wall else 1.0
        print(f"{label:<24}" + "".join(f"{wall[b]:>12.2f} s" for b in backends) + f"{speed:>9.1f}x" + ("" if same else "  REPORTS DIFFER"))


if __name__ == "__main__":
    main()
