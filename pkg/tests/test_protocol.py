import itertools

import numpy as np
import pytest

from dfsqkd import oracle
from dfsqkd.channel import dephase_unitary, rotate_unitary
from dfsqkd.protocol import (
    A,
    B1,
    B2,
    B_PAIR,
    Carrier,
    DecodeError,
    DenseCode,
    Encoding,
    _pre_measurement,
    apply_code,
    build_decode_table,
    carrier_gram_matrix,
    check_correlation_predicate,
    check_correlations,
    check_round,
    code_for,
    decode,
    decode_outcome_probabilities,
    encoding_unitary,
    expected_carrier,
    prepare_initial,
)
from dfsqkd.qstate import (
    BELL_VECTORS,
    BellOutcome,
    MeasurementBasis,
    PureState,
    apply_gate,
    equal_up_to_global_phase,
    partial_trace,
)

R = 1 / np.sqrt(2)
PHI_P, PHI_M, PSI_P, PSI_M = BELL_VECTORS
PLUS, MINUS = MeasurementBasis.X.vectors

# Table I and Table II: rows = initial carrier, columns = final carrier, entry = code
CODE_TABLE = [
    ["00", "01", "10", "11"],
    ["01", "00", "11", "10"],
    ["10", "11", "00", "01"],
    ["11", "10", "01", "00"],
]


def test_logical_states():
    assert np.allclose(Encoding.DEPHASING.logical_zero.amplitudes, [0, 1, 0, 0])
    assert np.allclose(Encoding.DEPHASING.logical_one.amplitudes, [0, 0, 1, 0])
    assert np.allclose(Encoding.ROTATION.logical_zero.amplitudes, PHI_P)
    assert np.allclose(Encoding.ROTATION.logical_one.amplitudes, PSI_M)


def test_carrier_definitions():
    zl, ol = Encoding.DEPHASING.logical_zero.amplitudes, Encoding.DEPHASING.logical_one.amplitudes
    k0, k1 = np.array([1, 0]), np.array([0, 1])
    want = R * (np.kron(k0, ol) - np.kron(k1, zl))
    assert np.allclose(Carrier.PSI_MINUS.realize(Encoding.DEPHASING).amplitudes, want)
    zl, ol = PHI_P, PSI_M
    want = R * (np.kron(k0, zl) + np.kron(k1, ol))
    assert np.allclose(Carrier.PHI_PLUS.realize(Encoding.ROTATION).amplitudes, want)


@pytest.mark.parametrize("encoding", list(Encoding))
def test_carriers_orthonormal(encoding):
    assert np.allclose(carrier_gram_matrix(encoding), np.eye(4), atol=1e-12)


@pytest.mark.parametrize("encoding", list(Encoding))
@pytest.mark.parametrize("initial", list(Carrier))
@pytest.mark.parametrize("final", list(Carrier))
def test_code_tables(encoding, initial, final):
    code = DenseCode(int(CODE_TABLE[initial][final], 2))
    assert code_for(initial, final) is code
    assert expected_carrier(initial, code) is final
    out = apply_code(initial.realize(encoding), code, encoding)
    assert equal_up_to_global_phase(out, final.realize(encoding), 1e-10)


def test_code_operators():
    assert np.allclose(encoding_unitary(DenseCode.C11, Encoding.DEPHASING).matrix, np.kron([[0, -1], [1, 0]], [[0, 1], [1, 0]]))
    assert np.allclose(encoding_unitary(DenseCode.C01, Encoding.ROTATION).matrix, np.diag([1, -1, -1, 1]))


def test_dense_code_bits():
    assert DenseCode.C10.bits == "10"
    assert DenseCode.from_bits(1, 1) is DenseCode.C11


# outcome supports of the pre-measurement carriers, read off their Bell x X expansions
EXPECTED_SUPPORT = {
    Encoding.DEPHASING: {
        Carrier.PHI_PLUS: {("phi+", 1), ("phi-", -1)},
        Carrier.PHI_MINUS: {("phi-", 1), ("phi+", -1)},
        Carrier.PSI_PLUS: {("psi+", 1), ("psi-", -1)},
        Carrier.PSI_MINUS: {("psi-", 1), ("psi+", -1)},
    },
    Encoding.ROTATION: {
        Carrier.PHI_PLUS: {("phi+", 1), ("psi-", -1)},
        Carrier.PHI_MINUS: {("phi-", 1), ("psi+", -1)},
        Carrier.PSI_PLUS: {("psi+", 1), ("phi-", -1)},
        Carrier.PSI_MINUS: {("psi-", 1), ("phi+", -1)},
    },
}


@pytest.mark.parametrize("encoding", list(Encoding))
def test_decode_table_matches_expansion(encoding):
    table = build_decode_table(encoding)
    assert len(table.entries) == 8
    for carrier, support in EXPECTED_SUPPORT[encoding].items():
        assert {(b.value, x) for b, x in table.preimage(carrier)} == support
        assert support == oracle.DECODE[encoding.value][oracle.CARRIERS[carrier]]


def _bx(bell, x):
    return np.kron(bell, PLUS if x == 1 else MINUS)


# exact expansions, relative signs included (computed, see decisions ledger on the rotation Phi rows)
EXPANSIONS = {
    (Encoding.DEPHASING, Carrier.PHI_PLUS): R * (_bx(PHI_P, 1) - _bx(PHI_M, -1)),
    (Encoding.DEPHASING, Carrier.PSI_MINUS): R * (_bx(PSI_M, 1) + _bx(PSI_P, -1)),
    (Encoding.ROTATION, Carrier.PHI_PLUS): R * (_bx(PHI_P, 1) + _bx(PSI_M, -1)),
    (Encoding.ROTATION, Carrier.PHI_MINUS): R * (_bx(PHI_M, 1) + _bx(PSI_P, -1)),
    (Encoding.ROTATION, Carrier.PSI_PLUS): R * (_bx(PSI_P, 1) - _bx(PHI_M, -1)),
    (Encoding.ROTATION, Carrier.PSI_MINUS): R * (_bx(PSI_M, 1) - _bx(PHI_P, -1)),
}


@pytest.mark.parametrize("key", list(EXPANSIONS))
def test_pre_measurement_expansions(key):
    encoding, carrier = key
    state = _pre_measurement(carrier.realize(encoding), encoding)
    assert abs(np.vdot(EXPANSIONS[key], state.amplitudes)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("encoding", list(Encoding))
def test_decode_outcome_probabilities_half_half(encoding):
    probs = decode_outcome_probabilities(Carrier.PSI_PLUS.realize(encoding), encoding)
    assert sorted(probs.values())[-2:] == pytest.approx([0.5, 0.5])
    assert sum(probs.values()) == pytest.approx(1.0)


def test_lookup_miss_raises():
    table = build_decode_table(Encoding.DEPHASING)
    with pytest.raises(DecodeError):
        table.lookup(BellOutcome.PSI_PLUS, 7)


@pytest.mark.parametrize("encoding", list(Encoding))
def test_decode_roundtrip_with_noise(backend, encoding):
    table = build_decode_table(encoding)
    noise = dephase_unitary if encoding is Encoding.DEPHASING else rotate_unitary
    rng = np.random.default_rng(2)
    for code in DenseCode:
        for _ in range(20):
            u1, u2 = noise(rng.uniform(0, 7)), noise(rng.uniform(0, 7))
            s = prepare_initial(encoding)
            s = apply_gate(apply_gate(s, u1, (B1,)), u1, (B2,))
            s = apply_code(s, code, encoding)
            s = apply_gate(apply_gate(s, u2, (B1,)), u2, (B2,))
            carrier, _ = decode(s, encoding, table, rng)
            assert code_for(Carrier.PHI_PLUS, carrier) is code


def test_decode_bsa_failure():
    table = build_decode_table(Encoding.ROTATION)

    class Low:
        def random(self):
            return 0.0

    carrier, outcome = decode(prepare_initial(Encoding.ROTATION), Encoding.ROTATION, table, Low(), 0.3)
    assert carrier is None and outcome == (None, None)


SIGNS = (1, -1)


@pytest.mark.parametrize("encoding", list(Encoding))
def test_check_correlation_tables(encoding):
    for basis in encoding.check_bases:
        table = check_correlations(encoding, basis)
        for a, b1, b2 in itertools.product(SIGNS, repeat=3):
            assert ((a, b1, b2) in table) == check_correlation_predicate(encoding, basis, a, (b1, b2))
            assert ((a, b1, b2) in table) == oracle.consistent(encoding.value, basis.value, a, b1, b2)


def test_check_correlations_frozen():
    assert check_correlations(Encoding.DEPHASING, MeasurementBasis.Z) == {(1, 1, -1), (-1, -1, 1)}
    assert check_correlations(Encoding.ROTATION, MeasurementBasis.Y) == {(1, 1, -1), (-1, -1, 1)}
    assert check_correlations(Encoding.DEPHASING, MeasurementBasis.X) == {(b1 * b2, b1, b2) for b1 in SIGNS for b2 in SIGNS}
    assert check_correlations(Encoding.ROTATION, MeasurementBasis.Z) == {(b1 * b2, b1, b2) for b1 in SIGNS for b2 in SIGNS}


def test_check_round_rejects_foreign_basis():
    with pytest.raises(ValueError):
        check_round(prepare_initial(Encoding.DEPHASING), Encoding.DEPHASING, MeasurementBasis.Y, np.random.default_rng())


@pytest.mark.parametrize("encoding", list(Encoding))
def test_check_rounds_consistent_without_eve(backend, encoding):
    rng = np.random.default_rng(4)
    for basis in encoding.check_bases:
        for _ in range(200):
            assert check_round(prepare_initial(encoding), encoding, basis, rng).consistent


@pytest.mark.parametrize("encoding", list(Encoding))
def test_reduced_state_hides_code(encoding):
    half = 0.5 * (np.outer(encoding.logical_zero.amplitudes, encoding.logical_zero.amplitudes.conj()) + np.outer(encoding.logical_one.amplitudes, encoding.logical_one.amplitudes.conj()))
    for code in DenseCode:
        rho = partial_trace(apply_code(prepare_initial(encoding), code, encoding), B_PAIR).matrix
        assert np.max(np.abs(rho - half)) < 1e-12
        assert np.max(np.abs(rho - oracle.reduced_logical_state(encoding.value, int(code)))) < 1e-12


def test_register_layout():
    assert (A, B1, B2) == (0, 1, 2)
    assert prepare_initial(Encoding.DEPHASING).qubit_count == 3
    assert isinstance(prepare_initial(Encoding.ROTATION), PureState)
