import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfsqkd.keypost import (
    Decision,
    EmptySampleError,
    Phase,
    ReconciliationError,
    RoundTranscript,
    abort_decision,
    bits_to_str,
    code_bits,
    error_correct,
    estimate_qber,
    privacy_amplify,
    sift,
    toeplitz_seed_bits,
)


def check1(consistent, discarded=None):
    return RoundTranscript(0, "dephasing", phase=Phase.CHECK1, consistent=consistent, discarded=discarded)


def message(enc, dec, discarded=None, phase=Phase.MESSAGE):
    return RoundTranscript(0, "dephasing", phase=phase, encoded_code=enc, decoded_code=dec, discarded=discarded)


def test_qber_extremes():
    assert estimate_qber([check1(True)] * 5) == (0.0, 5)
    assert estimate_qber([check1(False)] * 5) == (1.0, 5)


def test_qber_counts_check2_code_mismatch_and_skips_lost():
    ts = [message(1, 1, phase=Phase.CHECK2), message(2, 3, phase=Phase.CHECK2), check1(False, discarded="lost-forward")]
    assert estimate_qber(ts) == (0.5, 2)


def test_qber_empty_sample():
    with pytest.raises(EmptySampleError):
        estimate_qber([check1(True, discarded="lost-forward")])
    with pytest.raises(EmptySampleError):
        estimate_qber([])


def test_abort_decision_boundaries():
    assert abort_decision(0.0, 0.11) is Decision.CONTINUE
    assert abort_decision(0.5, 0.11) is Decision.ABORT
    assert abort_decision(0.11, 0.11) is Decision.CONTINUE
    with pytest.raises(ValueError):
        abort_decision(1.5, 0.11)


def test_sift_concatenates_codes():
    ts = [message(0, 0), message(3, 3), message(1, 1)]
    alice, bob = sift(ts)
    assert bits_to_str(bob) == "001101"
    assert np.array_equal(alice, bob)


def test_sift_excludes_check_and_discarded_rounds():
    ts = [message(2, 2), message(1, 0, discarded="lost-backward"), message(3, 3, phase=Phase.CHECK2), check1(True)]
    alice, bob = sift(ts)
    assert bits_to_str(bob) == "10" and bits_to_str(alice) == "10"


def test_code_bits_high_bit_first():
    assert bits_to_str(code_bits([2, 1])) == "1001"
    assert code_bits([]).size == 0


def test_transcript_category_and_dict():
    assert message(0, 0).category == "message"
    assert message(0, 0, discarded="lost-backward").category == "discarded"
    assert RoundTranscript(4, "rotation").category == "discarded"
    d = RoundTranscript(4, "rotation", phase=Phase.CHECK1, bob_outcomes=(1, -1)).to_dict()
    assert d["phase"] == "check1" and d["bob_outcomes"] == [1, -1]


# ---- reconciliation


def test_identical_inputs_leak_one_parity_per_block():
    bits = np.random.default_rng(0).integers(0, 2, 64, dtype=np.uint8)
    (a, b), leaked = error_correct(bits, bits.copy(), block_size=16)
    assert np.array_equal(a, b)
    assert leaked == 4


def test_single_flip_block8_length16_leaks_six():
    bob = np.zeros(16, dtype=np.uint8)
    alice = bob.copy()
    alice[5] = 1
    (a, b), leaked = error_correct(alice, bob, block_size=8)
    assert np.array_equal(a, b)
    # 2 top-level parities + 3 bisection steps + 1 parity of the clean confirming pass
    assert leaked == 2 + 3 + 1


def test_half_mismatch_fails():
    rng = np.random.default_rng(1)
    bob = rng.integers(0, 2, 256, dtype=np.uint8)
    alice = bob.copy()
    flip = rng.choice(256, 128, replace=False)
    alice[flip] ^= 1
    with pytest.raises(ReconciliationError) as info:
        error_correct(alice, bob, block_size=16, max_passes=4)
    assert info.value.leaked > 0


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        error_correct(np.zeros(4), np.zeros(5))


def test_empty_key_reconciles_trivially():
    (a, b), leaked = error_correct(np.zeros(0), np.zeros(0))
    assert a.size == 0 and leaked == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), errors=st.integers(0, 6))
def test_sparse_errors_corrected(seed, errors):
    rng = np.random.default_rng(seed)
    bob = rng.integers(0, 2, 512, dtype=np.uint8)
    alice = bob.copy()
    alice[rng.choice(512, errors, replace=False)] ^= 1
    try:
        (a, b), leaked = error_correct(alice, bob, block_size=16, max_passes=6, seed=seed)
    except ReconciliationError:
        # two errors can hide in one block on every pass; never silently wrong
        return
    assert np.array_equal(a, b)
    assert leaked >= 32


# ---- privacy amplification


def explicit_toeplitz(bits, seed_bits, m):
    n = len(bits)
    t = np.array([[seed_bits[i - j + n - 1] for j in range(n)] for i in range(m)], dtype=np.int64)
    return (t @ bits.astype(np.int64)) % 2


def test_output_length_arithmetic():
    bits = np.random.default_rng(0).integers(0, 2, 160, dtype=np.uint8)
    assert privacy_amplify(bits, 40, 20, seed=1).size == 100


def test_pa_deterministic():
    bits = np.random.default_rng(0).integers(0, 2, 300, dtype=np.uint8)
    assert np.array_equal(privacy_amplify(bits, 10, 20, seed=9), privacy_amplify(bits, 10, 20, seed=9))
    assert not np.array_equal(privacy_amplify(bits, 10, 20, seed=9), privacy_amplify(bits, 10, 20, seed=10))


def test_pa_empty_when_nothing_left(caplog):
    with caplog.at_level(logging.WARNING):
        out = privacy_amplify(np.ones(30, dtype=np.uint8), 15, 20)
    assert out.size == 0
    assert "no key left" in caplog.text


@pytest.mark.parametrize("n,m", [(1, 1), (7, 3), (64, 10), (65, 64), (200, 129)])
def test_toeplitz_matches_explicit_matrix(backend, n, m):
    rng = np.random.default_rng(n * 1000 + m)
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    seed_bits = toeplitz_seed_bits(5, m + n - 1)
    leaked = n - m
    out = privacy_amplify(bits, leaked, 0, seed=5)
    assert np.array_equal(out, explicit_toeplitz(bits, seed_bits, m))


def test_toeplitz_is_linear():
    rng = np.random.default_rng(3)
    x, y = rng.integers(0, 2, (2, 128), dtype=np.uint8)
    hx, hy, hxy = (privacy_amplify(v, 30, 20, seed=2) for v in (x, y, x ^ y))
    assert np.array_equal(hx ^ hy, hxy)


def test_large_hash_matches_explicit_matrix(backend):
    # m * n above the FFT crossover
    rng = np.random.default_rng(8)
    n, m = 700, 500
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    out = privacy_amplify(bits, n - m, 0, seed=3)
    assert np.array_equal(out, explicit_toeplitz(bits, toeplitz_seed_bits(3, m + n - 1), m))
