"""The two noise-immune dense-coding QKD protocols.

Register layout is always ``(A, B1, B2)``: Alice keeps ``A``; the logical
qubit ``B`` is the physical pair ``(B1, B2)``.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache
from itertools import product
from types import MappingProxyType

import numpy as np

from dfsqkd.channel import NoiseFamily
from dfsqkd.qstate import (
    BELL_VECTORS,
    HADAMARD,
    I2,
    MINUS_I_SIGMA_Y,
    PHI_PLUS,
    PSI_MINUS,
    SIGMA_X,
    SIGMA_Z,
    BellOutcome,
    MeasurementBasis,
    PureState,
    apply_gate,
    bell_measure,
    measure,
    measure_sequence,
)

A, B1, B2 = 0, 1, 2
B_PAIR = (B1, B2)

_SQRT_HALF = 1.0 / np.sqrt(2.0)


class DecodeError(RuntimeError):
    """The decode table is inconsistent or an outcome pair was never tabulated."""


class Encoding(Enum):
    DEPHASING = "dephasing"
    ROTATION = "rotation"

    @property
    def logical_zero(self):
        return PureState.basis("01") if self is Encoding.DEPHASING else PHI_PLUS

    @property
    def logical_one(self):
        return PureState.basis("10") if self is Encoding.DEPHASING else PSI_MINUS

    @property
    def noise_family(self):
        return NoiseFamily.DEPHASING if self is Encoding.DEPHASING else NoiseFamily.ROTATION

    @property
    def check_bases(self):
        """Bob's two product bases on (B1, B2); Alice measures A in the same Pauli basis."""
        if self is Encoding.DEPHASING:
            return (MeasurementBasis.Z, MeasurementBasis.X)
        return (MeasurementBasis.Z, MeasurementBasis.Y)


class Carrier(IntEnum):
    """Carrier states. Bit 1 of the value selects Psi, bit 0 the minus sign."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    def realize(self, encoding):
        zero = np.kron([1, 0], encoding.logical_zero.amplitudes)
        one = np.kron([0, 1], encoding.logical_one.amplitudes)
        sign = -1.0 if self & 1 else 1.0
        if self & 2:
            # |0>|1_L> +- |1>|0_L>
            zero = np.kron([1, 0], encoding.logical_one.amplitudes)
            one = np.kron([0, 1], encoding.logical_zero.amplitudes)
        return PureState((zero + sign * one) * _SQRT_HALF)


class DenseCode(IntEnum):
    C00 = 0
    C01 = 1
    C10 = 2
    C11 = 3

    @property
    def bits(self):
        return format(int(self), "02b")

    @classmethod
    def from_bits(cls, b1, b0):
        return cls(2 * int(b1) + int(b0))


_OMEGA = (
    (I2, I2),
    (SIGMA_Z, I2),
    (SIGMA_X, SIGMA_X),
    (MINUS_I_SIGMA_Y, SIGMA_X),
)
_THETA = (
    (I2, I2),
    (SIGMA_Z, SIGMA_Z),
    (SIGMA_Z, SIGMA_X),
    (I2, MINUS_I_SIGMA_Y),
)


@lru_cache(maxsize=None)
def encoding_unitary(code, encoding):
    """Bob's two-qubit operation on (B1, B2) for ``code``."""
    first, second = (_OMEGA if encoding is Encoding.DEPHASING else _THETA)[int(code)]
    return first.kron(second)


@lru_cache(maxsize=None)
def _carrier_state(carrier, encoding):
    return carrier.realize(encoding)


def prepare_initial(encoding):
    """Alice's initial three-qubit state, the Phi+ carrier of ``encoding``."""
    return _carrier_state(Carrier.PHI_PLUS, encoding)


def expected_carrier(initial, code):
    """Carrier reached from ``initial`` after Bob applies ``code`` (Tables I and II share this map)."""
    return Carrier(int(initial) ^ int(code))


def code_for(initial, final):
    """Inverse of :func:`expected_carrier`: which code turns ``initial`` into ``final``."""
    return DenseCode(int(initial) ^ int(final))


@dataclass(frozen=True)
class DecodeTable:
    encoding: Encoding
    entries: MappingProxyType

    def lookup(self, bell, x):
        try:
            return self.entries[(bell, x)]
        except KeyError:
            raise DecodeError(f"outcome pair ({bell}, {x:+d}) is not in the {self.encoding.value} table") from None

    def preimage(self, carrier):
        return frozenset(k for k, v in self.entries.items() if v is carrier)


def _pre_measurement(state, encoding):
    if encoding is Encoding.ROTATION:
        return apply_gate(state, HADAMARD, (B1,))
    return state


def decode_outcome_probabilities(state, encoding):
    """Exact Born probabilities of every (Bell on A-B1, X on B2) outcome pair."""
    psi = _pre_measurement(state, encoding).amplitudes.reshape(4, 2)
    x_vecs = MeasurementBasis.X.vectors
    amps = BELL_VECTORS.conj() @ psi @ x_vecs.conj().T
    probs = np.abs(amps) ** 2
    return {
        (bell, x): float(probs[i, j])
        for i, bell in enumerate(BellOutcome)
        for j, x in enumerate((1, -1))
    }


@lru_cache(maxsize=None)
def build_decode_table(encoding, tol=1e-12):
    """Tabulate (Bell outcome, X outcome) -> carrier by enumerating Born branches."""
    entries = {}
    for carrier in Carrier:
        for pair, p in decode_outcome_probabilities(_carrier_state(carrier, encoding), encoding).items():
            if p <= tol:
                continue
            if pair in entries and entries[pair] is not carrier:
                raise DecodeError(f"{pair} is claimed by both {entries[pair].name} and {carrier.name}")
            entries[pair] = carrier
    return DecodeTable(encoding, MappingProxyType(entries))


def decode(state, encoding, table, rng, bsa_failure_probability=0.0):
    """Alice's measurement chain: (H on B1 for rotation), Bell on (A, B1), X on B2.

    Returns ``(carrier, (bell, x))``; ``carrier`` is ``None`` when the Bell
    analyser reports an inconclusive result.
    """
    state = _pre_measurement(state, encoding)
    bell, state = bell_measure(state, (A, B1), rng, failure_probability=bsa_failure_probability)
    if bell is None:
        return None, (None, None)
    x, _state, _p = measure(state, MeasurementBasis.X, B2, rng)
    return table.lookup(bell, x), (bell, x)


def apply_code(state, code, encoding):
    return apply_gate(state, encoding_unitary(code, encoding), B_PAIR)


@dataclass(frozen=True)
class CheckOutcome:
    basis: MeasurementBasis
    alice: int
    bob: tuple
    consistent: bool


def check_correlation_predicate(encoding, basis, alice, bob):
    """The A-B correlation expected of the pristine Phi+ carrier, written out per basis."""
    b1, b2 = bob
    if basis is MeasurementBasis.Z and encoding is Encoding.DEPHASING:
        return (alice, b1, b2) in {(1, 1, -1), (-1, -1, 1)}
    if basis is MeasurementBasis.Y and encoding is Encoding.ROTATION:
        return (alice, b1, b2) in {(1, 1, -1), (-1, -1, 1)}
    # dephasing X and rotation Z: Alice's outcome is the parity of Bob's pair
    return alice == b1 * b2


@lru_cache(maxsize=None)
def check_correlations(encoding, basis, tol=1e-12):
    """Outcome triples (A, B1, B2) with nonzero probability on the pristine carrier.

    Generated by brute force; ``check_round`` uses it as the consistency table.
    """
    psi = prepare_initial(encoding).amplitudes.reshape(2, 2, 2)
    v = basis.vectors.conj()
    amps = np.einsum("ai,bj,ck,ijk->abc", v, v, v, psi)
    signs = (1, -1)
    return frozenset(
        (signs[a], signs[b], signs[c])
        for a, b, c in product(range(2), repeat=3)
        if abs(amps[a, b, c]) ** 2 > tol
    )


def check_round(state, encoding, basis, rng):
    """Bob measures B1 and B2 in ``basis``, then Alice measures A in the same basis."""
    if basis not in encoding.check_bases:
        raise ValueError(f"{basis.name} is not a check basis for {encoding.value}")
    (b1, b2, a), _ = measure_sequence(state, ((basis, B1), (basis, B2), (basis, A)), rng)
    consistent = (a, b1, b2) in check_correlations(encoding, basis)
    return CheckOutcome(basis=basis, alice=a, bob=(b1, b2), consistent=consistent)


def carrier_gram_matrix(encoding):
    vecs = np.array([_carrier_state(c, encoding).amplitudes for c in Carrier])
    return vecs.conj() @ vecs.T
