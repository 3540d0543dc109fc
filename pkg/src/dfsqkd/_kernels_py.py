"""Pure numpy fallback for the state-vector kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``_backend`` picks one at import.
Qubit 0 is the most significant bit of the amplitude index.
"""

import numpy as np

# branches at or below this Born weight are never sampled
ZERO_BRANCH = 1e-14


def apply_1q(psi, n, u, t):
    view = psi.reshape((2,) * n)
    out = np.tensordot(u, view, axes=([1], [t]))
    return np.ascontiguousarray(np.moveaxis(out, 0, t)).reshape(-1)


def apply_2q(psi, n, u, t0, t1):
    view = psi.reshape((2,) * n)
    out = np.tensordot(u.reshape(2, 2, 2, 2), view, axes=([2, 3], [t0, t1]))
    return np.ascontiguousarray(np.moveaxis(out, [0, 1], [t0, t1])).reshape(-1)


def _pick(probs, r):
    cum = 0.0
    last = -1
    for k, p in enumerate(probs):
        if p <= ZERO_BRANCH:
            continue
        last = k
        cum += p
        if r < cum:
            return k
    return last


def measure_1q(psi, n, basis, t, r):
    """Project qubit ``t`` onto the rows of ``basis``; return (k, p_k, collapsed)."""
    view = np.moveaxis(psi.reshape((2,) * n), t, 0).reshape(2, -1)
    amps = basis.conj() @ view
    probs = np.einsum("ij,ij->i", amps.conj(), amps).real
    k = _pick(probs, r)
    p = float(probs[k])
    rest = amps[k] / np.sqrt(p)
    out = np.multiply.outer(basis[k], rest).reshape((2,) + (2,) * (n - 1))
    out = np.moveaxis(out, 0, t)
    return k, p, np.ascontiguousarray(out).reshape(-1)


def measure_2q(psi, n, basis, t0, t1, r):
    """Project qubits ``(t0, t1)`` onto the four rows of ``basis``."""
    view = np.moveaxis(psi.reshape((2,) * n), [t0, t1], [0, 1]).reshape(4, -1)
    amps = basis.conj() @ view
    probs = np.einsum("ij,ij->i", amps.conj(), amps).real
    k = _pick(probs, r)
    p = float(probs[k])
    rest = amps[k] / np.sqrt(p)
    out = np.multiply.outer(basis[k], rest).reshape((2, 2) + (2,) * (n - 2))
    out = np.moveaxis(out, [0, 1], [t0, t1])
    return k, p, np.ascontiguousarray(out).reshape(-1)


def toeplitz_hash(bits, seed, m):
    """GF(2) product of the m x n Toeplitz matrix T[i, j] = seed[i - j + n - 1] with ``bits``.

    Row sums are integer entries of the full convolution of ``seed`` and
    ``bits``, taken exactly via FFT and reduced mod 2.
    """
    n = bits.shape[0]
    if m <= 0 or n == 0:
        return np.zeros(max(m, 0), dtype=np.uint8)
    size = 1 << int(seed.shape[0] + n - 1).bit_length()
    conv = np.fft.irfft(np.fft.rfft(seed.astype(np.float64), size) * np.fft.rfft(bits.astype(np.float64), size), size)
    sums = np.rint(conv[n - 1 : n - 1 + m]).astype(np.int64)
    return (sums & 1).astype(np.uint8)


def measure_seq(psi, n, bases, targets, rs):
    """Measure ``targets[i]`` in ``bases[i]`` with uniform ``rs[i]``, in order.

    Returns (outcome indices, collapsed state).
    """
    ks = []
    for basis, t, r in zip(bases, targets, rs):
        k, _p, psi = measure_1q(psi, n, basis, t, r)
        ks.append(k)
    return ks, psi
