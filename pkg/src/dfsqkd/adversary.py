"""Eavesdropper models acting on the physical pair (B1, B2) while it is in transit."""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from dfsqkd.protocol import B1, B2, Encoding
from dfsqkd.qstate import MeasurementBasis, PureState, measure, measure_sequence


class EveKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND_PHYSICAL = "physical"
    INTERCEPT_RESEND_LOGICAL = "logical"


class BasisPolicy(Enum):
    Z = "z"
    X = "x"
    Y = "y"
    RANDOM = "rand"


class Legs(Enum):
    FORWARD = "fwd"
    BACKWARD = "bwd"
    BOTH = "both"


_POLICY_BASIS = {
    BasisPolicy.Z: MeasurementBasis.Z,
    BasisPolicy.X: MeasurementBasis.X,
    BasisPolicy.Y: MeasurementBasis.Y,
}
# a random-policy Eve picks uniformly from these, independently per qubit
RANDOM_BASES = (MeasurementBasis.Z, MeasurementBasis.X, MeasurementBasis.Y)


@dataclass(frozen=True)
class AdversaryStrategy:
    kind: EveKind = EveKind.NONE
    basis_policy: BasisPolicy = None
    legs: Legs = Legs.FORWARD

    def __post_init__(self):
        if self.kind is EveKind.INTERCEPT_RESEND_PHYSICAL and self.basis_policy is None:
            raise ValueError("physical intercept-resend needs a basis policy")

    @classmethod
    def from_name(cls, name, legs="fwd"):
        """Parse the CLI spelling: none, ir-z, ir-x, ir-y, ir-rand, ir-logical."""
        legs = Legs(legs)
        if name == "none":
            return cls(EveKind.NONE, None, legs)
        if name == "ir-logical":
            return cls(EveKind.INTERCEPT_RESEND_LOGICAL, None, legs)
        if name.startswith("ir-"):
            return cls(EveKind.INTERCEPT_RESEND_PHYSICAL, BasisPolicy(name[3:]), legs)
        raise ValueError(f"unknown adversary {name!r}")

    @property
    def name(self):
        if self.kind is EveKind.NONE:
            return "none"
        if self.kind is EveKind.INTERCEPT_RESEND_LOGICAL:
            return "ir-logical"
        return f"ir-{self.basis_policy.value}"

    def acts_on(self, leg):
        if self.kind is EveKind.NONE:
            return False
        return self.legs is Legs.BOTH or self.legs is leg


NO_EVE = AdversaryStrategy()


def _pick_basis(policy, rng):
    if policy is BasisPolicy.RANDOM:
        return RANDOM_BASES[min(int(rng.random() * 3), 2)]
    return _POLICY_BASIS[policy]


def logical_resend_state(encoding, b1, b2):
    """State Eve forwards after Z outcomes ``(b1, b2)`` (bits) on the pair."""
    if encoding is Encoding.ROTATION:
        # |phi+> has even Z parity, |psi-> odd
        return encoding.logical_zero if b1 == b2 else encoding.logical_one
    if (b1, b2) == (0, 1):
        return encoding.logical_zero
    if (b1, b2) == (1, 0):
        return encoding.logical_one
    # outside the logical subspace: forward the product state she saw
    return PureState.basis(f"{b1}{b2}")


def attack(state, qubits, strategy, rng, encoding=None):
    """Apply ``strategy`` to the in-transit pair ``qubits`` of ``state``.

    The logical intercept-resend variant needs ``encoding`` and the standard
    (A, B1, B2) layout.
    """
    if strategy.kind is EveKind.NONE:
        return state
    q1, q2 = qubits
    if strategy.kind is EveKind.INTERCEPT_RESEND_PHYSICAL:
        # basis draw then outcome draw per qubit, as in two separate measurements
        b = _pick_basis(strategy.basis_policy, rng)
        r1 = rng.random()
        b2 = _pick_basis(strategy.basis_policy, rng)
        _, state = measure_sequence(state, ((b, q1), (b2, q2)), uniforms=(r1, rng.random()))
        return state

    if encoding is None:
        raise ValueError("logical intercept-resend needs the encoding")
    if (q1, q2) != (B1, B2) or state.qubit_count != 3:
        raise ValueError("logical intercept-resend expects the (A, B1, B2) register")
    z1, state, _ = measure(state, MeasurementBasis.Z, q1, rng)
    z2, state, _ = measure(state, MeasurementBasis.Z, q2, rng)
    b1, b2 = (z1 == -1), (z2 == -1)
    # A's conditional state sits at the amplitudes with B fixed to (b1, b2)
    alice = state.amplitudes.reshape(2, 4)[:, 2 * b1 + b2]
    alice = alice / np.linalg.norm(alice)
    resend = logical_resend_state(encoding, int(b1), int(b2))
    return PureState._trusted(np.kron(alice, resend.amplitudes))


@dataclass
class MultiphotonStats:
    """Photon-number histogram of sampled logical-qubit signals at Bob's side.

    Only a hook: the state-vector simulator never produces multiphoton
    signals, so a physical layer would have to feed :meth:`record`.
    """

    photons_per_signal: int = 2
    histogram: Counter = field(default_factory=Counter)

    def record(self, photon_count, times=1):
        if photon_count < 0 or times < 0:
            raise ValueError("counts must be non-negative")
        self.histogram[int(photon_count)] += times

    @property
    def signals(self):
        return sum(self.histogram.values())

    def multiphoton_rate(self):
        if not self.signals:
            return 0.0
        excess = sum(c for n, c in self.histogram.items() if n > self.photons_per_signal)
        return excess / self.signals

    def exceeds(self, max_rate):
        return self.multiphoton_rate() > max_rate

