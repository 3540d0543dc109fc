import numpy as np
import pytest

from dfsqkd.adversary import (
    NO_EVE,
    RANDOM_BASES,
    AdversaryStrategy,
    BasisPolicy,
    EveKind,
    Legs,
    MultiphotonStats,
    attack,
    logical_resend_state,
)
from dfsqkd.protocol import B_PAIR, Carrier, DenseCode, Encoding, apply_code, build_decode_table, check_round, code_for, decode, prepare_initial
from dfsqkd.qstate import MeasurementBasis, PureState, equal_up_to_global_phase, partial_trace
from frozen_values import CHECK_RATES, MESSAGE_RATES


def test_from_name_roundtrip():
    for name in ("none", "ir-z", "ir-x", "ir-y", "ir-rand", "ir-logical"):
        assert AdversaryStrategy.from_name(name).name == name
    s = AdversaryStrategy.from_name("ir-rand", "both")
    assert s.kind is EveKind.INTERCEPT_RESEND_PHYSICAL and s.basis_policy is BasisPolicy.RANDOM
    with pytest.raises(ValueError):
        AdversaryStrategy.from_name("mitm")
    with pytest.raises(ValueError):
        AdversaryStrategy(EveKind.INTERCEPT_RESEND_PHYSICAL)


def test_legs():
    fwd = AdversaryStrategy.from_name("ir-z", "fwd")
    both = AdversaryStrategy.from_name("ir-z", "both")
    assert fwd.acts_on(Legs.FORWARD) and not fwd.acts_on(Legs.BACKWARD)
    assert both.acts_on(Legs.FORWARD) and both.acts_on(Legs.BACKWARD)
    assert not NO_EVE.acts_on(Legs.FORWARD)


@pytest.mark.parametrize("encoding", list(Encoding))
def test_no_eve_is_identity(encoding):
    for c in Carrier:
        s = c.realize(encoding)
        out = attack(s, B_PAIR, NO_EVE, None)
        assert np.array_equal(out.amplitudes, s.amplitudes)


def test_physical_attack_leaves_product_on_pair(backend):
    s = prepare_initial(Encoding.ROTATION)
    out = attack(s, B_PAIR, AdversaryStrategy.from_name("ir-x"), np.random.default_rng(0))
    for q in (1, 2):
        assert partial_trace(out, (q,)).purity == pytest.approx(1.0)


def test_logical_resend_states():
    def same(a, b):
        return np.array_equal(a.amplitudes, b.amplitudes)

    assert same(logical_resend_state(Encoding.ROTATION, 0, 0), Encoding.ROTATION.logical_zero)
    assert same(logical_resend_state(Encoding.ROTATION, 0, 1), Encoding.ROTATION.logical_one)
    assert same(logical_resend_state(Encoding.ROTATION, 1, 1), Encoding.ROTATION.logical_zero)
    assert same(logical_resend_state(Encoding.DEPHASING, 1, 0), Encoding.DEPHASING.logical_one)
    assert equal_up_to_global_phase(logical_resend_state(Encoding.DEPHASING, 1, 1), PureState.basis("11"))


def test_logical_attack_needs_encoding():
    with pytest.raises(ValueError):
        attack(prepare_initial(Encoding.DEPHASING), B_PAIR, AdversaryStrategy.from_name("ir-logical"), np.random.default_rng())


def test_random_policy_covers_three_bases():
    assert set(RANDOM_BASES) == set(MeasurementBasis)


def _check_rate(encoding, name, basis, n, seed):
    strategy = AdversaryStrategy.from_name(name)
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n):
        s = attack(prepare_initial(encoding), B_PAIR, strategy, rng, encoding=encoding)
        bad += not check_round(s, encoding, basis, rng).consistent
    return bad / n


@pytest.mark.parametrize("key", sorted(CHECK_RATES))
def test_check_rates_per_basis_match_oracle(backend, key):
    encoding, name = Encoding(key[0]), key[1]
    n = 3000
    for basis in encoding.check_bases:
        p = CHECK_RATES[key][basis.value]
        got = _check_rate(encoding, name, basis, n, seed=sorted(CHECK_RATES).index(key))
        if p == 0.0:
            assert got == 0.0
        else:
            assert abs(got - p) < 4 * np.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("key", [("dephasing", "ir-y"), ("rotation", "ir-z"), ("rotation", "ir-rand"), ("dephasing", "ir-logical")])
def test_backward_message_errors_match_oracle(key):
    encoding, name = Encoding(key[0]), key[1]
    strategy = AdversaryStrategy.from_name(name, "bwd")
    table = build_decode_table(encoding)
    rng = np.random.default_rng(7)
    n = 4000
    wrong = 0
    for _ in range(n):
        code = DenseCode(int(rng.integers(4)))
        s = apply_code(prepare_initial(encoding), code, encoding)
        s = attack(s, B_PAIR, strategy, rng, encoding=encoding)
        carrier, _ = decode(s, encoding, table, rng)
        wrong += code_for(Carrier.PHI_PLUS, carrier) is not code
    p = MESSAGE_RATES[key]["dibit"]
    assert abs(wrong / n - p) < 4 * np.sqrt(p * (1 - p) / n)


def test_multiphoton_stats():
    stats = MultiphotonStats()
    assert stats.multiphoton_rate() == 0.0
    stats.record(2, times=95)
    stats.record(3, times=5)
    assert stats.signals == 100
    assert stats.multiphoton_rate() == pytest.approx(0.05)
    assert stats.exceeds(0.01) and not stats.exceeds(0.1)
    with pytest.raises(ValueError):
        stats.record(-1)
