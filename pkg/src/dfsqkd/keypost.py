"""Classical post-processing: QBER estimation, abort logic, sifting, reconciliation, hashing."""

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from dfsqkd import _backend, _kernels_py

logger = logging.getLogger(__name__)

DEFAULT_QBER_THRESHOLD = 0.11
DEFAULT_CHECK_FRACTION = 0.25
DEFAULT_SAFETY_MARGIN = 20

# above this m*n the FFT convolution beats the bit-packed compiled product
TOEPLITZ_FFT_CROSSOVER = 100_000


class EmptySampleError(RuntimeError):
    """No measured check round survived loss."""


class ReconciliationError(RuntimeError):
    def __init__(self, message, leaked):
        super().__init__(message)
        self.leaked = leaked


class Phase(Enum):
    CHECK1 = "check1"
    MESSAGE = "message"
    CHECK2 = "check2"


class Decision(Enum):
    CONTINUE = "continue"
    ABORT = "abort"


@dataclass
class RoundTranscript:
    round_index: int
    encoding: str
    phase: Phase = None
    lost_forward: bool = False
    lost_backward: bool = False
    discarded: str = None
    check_basis: str = None
    alice_outcome: int = None
    bob_outcomes: tuple = None
    consistent: bool = None
    encoded_code: int = None
    decoded_code: int = None
    bell: str = None
    x_outcome: int = None
    payload: bool = False

    @property
    def category(self):
        """Accounting bucket: check1, message (kept for the key), check2 or discarded."""
        if self.discarded is not None or self.phase is None:
            return "discarded"
        return self.phase.value

    def to_dict(self):
        d = asdict(self)
        d["phase"] = self.phase.value if self.phase else None
        d["bob_outcomes"] = list(self.bob_outcomes) if self.bob_outcomes else None
        return d


@dataclass
class KeyMaterial:
    raw_bits: np.ndarray
    corrected_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    final_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    leaked_bit_count: int = 0


def estimate_qber(transcripts):
    """Error rate over the measured check rounds in ``transcripts``.

    Check1 rounds count an error when the correlation test failed; Check2
    rounds when Alice's decoded code differs from Bob's announced one.
    Returns ``(rate, sample_size)``.
    """
    errors = measured = 0
    for t in transcripts:
        if t.discarded is not None:
            continue
        if t.phase is Phase.CHECK1:
            measured += 1
            errors += not t.consistent
        elif t.phase is Phase.CHECK2:
            measured += 1
            errors += t.decoded_code != t.encoded_code
    if measured == 0:
        raise EmptySampleError("no check rounds left after discarding lost ones")
    return errors / measured, measured


def abort_decision(rate, threshold=DEFAULT_QBER_THRESHOLD):
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    return Decision.ABORT if rate > threshold else Decision.CONTINUE


def code_bits(codes):
    """Two bits per code, high bit first."""
    codes = np.asarray(codes, dtype=np.uint8)
    return np.stack([(codes >> 1) & 1, codes & 1], axis=1).reshape(-1).astype(np.uint8)


def bits_to_str(bits):
    return "".join("1" if b else "0" for b in bits)


def sift(transcripts):
    """Raw keys from kept message rounds: ``(alice_raw, bob_raw)`` as uint8 arrays."""
    kept = [t for t in transcripts if t.category == "message"]
    bob = code_bits([t.encoded_code for t in kept])
    alice = code_bits([t.decoded_code for t in kept])
    return alice, bob


def _parity(bits, idx):
    return int(np.bitwise_xor.reduce(bits[idx])) if len(idx) else 0


def error_correct(alice_raw, bob_raw, block_size=16, max_passes=4, seed=0):
    """Parity-block bisection; Alice's copy is corrected towards Bob's.

    Pass ``k`` uses blocks of ``block_size * 2**k`` bits (capped at the key
    length) over a seeded shuffle (identity on the first pass). Every
    announced parity counts as leaked. Stops after the first pass that finds
    no mismatching block; if the budget runs out, or the copies still differ,
    raises :class:`ReconciliationError`.

    Returns ``((alice_corrected, bob), leaked)``.
    """
    alice = np.array(alice_raw, dtype=np.uint8)
    bob = np.array(bob_raw, dtype=np.uint8)
    if alice.shape != bob.shape:
        raise ValueError(f"length mismatch: {alice.size} vs {bob.size}")
    if block_size < 1:
        raise ValueError("block_size must be positive")
    n = alice.size
    leaked = 0
    if n == 0:
        return (alice, bob), 0
    shuffle = np.random.Generator(np.random.PCG64(seed))
    clean = False
    for k in range(max_passes):
        size = min(block_size * 2**k, n)
        order = np.arange(n) if k == 0 else shuffle.permutation(n)
        dirty = 0
        for start in range(0, n, size):
            idx = order[start : start + size]
            leaked += 1
            if _parity(alice, idx) == _parity(bob, idx):
                continue
            dirty += 1
            while len(idx) > 1:
                half = idx[: len(idx) // 2]
                leaked += 1
                idx = half if _parity(alice, half) != _parity(bob, half) else idx[len(idx) // 2 :]
            alice[idx[0]] ^= 1
        if not dirty:
            clean = True
            break
    if not clean or not np.array_equal(alice, bob):
        raise ReconciliationError(f"residual mismatch after {max_passes} passes", leaked)
    return (alice, bob), leaked


def toeplitz_seed_bits(seed, length):
    return np.random.Generator(np.random.PCG64(seed)).integers(0, 2, size=length, dtype=np.uint8)


def privacy_amplify(bits, leaked_bit_count, safety_margin=DEFAULT_SAFETY_MARGIN, seed=0):
    """Compress ``bits`` to ``len - leaked - margin`` bits with a seeded Toeplitz hash."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    n = bits.size
    m = n - int(leaked_bit_count) - int(safety_margin)
    if m <= 0:
        logger.warning("no key left after privacy amplification (n=%d, leaked=%d, margin=%d)", n, leaked_bit_count, safety_margin)
        return np.zeros(0, dtype=np.uint8)
    kernel = _backend.kernels.toeplitz_hash if m * n <= TOEPLITZ_FFT_CROSSOVER else _kernels_py.toeplitz_hash
    return kernel(bits, toeplitz_seed_bits(seed, m + n - 1), m)
