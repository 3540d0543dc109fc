"""Exact pure-state register engine for a handful of qubits.

Qubit 0 is the most significant bit of the amplitude index, so a ket written
left to right as ``|q0 q1 q2>`` sits at index ``4*q0 + 2*q1 + q2``. States are
immutable: every operation returns a fresh :class:`PureState`.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from dfsqkd import _backend

TOL = 1e-12
MAX_QUBITS = 8

SQRT_HALF = 1.0 / np.sqrt(2.0)


class StateError(ValueError):
    pass


def _frozen(array):
    array = np.ascontiguousarray(array, dtype=np.complex128)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise StateError(f"amplitude vector must have length 2^n, got {amps.shape}")
        if amps.size > 2**MAX_QUBITS:
            raise StateError(f"at most {MAX_QUBITS} qubits supported")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise StateError(f"state is not normalized (norm^2 = {norm})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=False):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(amps)

    @classmethod
    def basis(cls, bits):
        """Computational basis state from a bit string such as ``"011"``."""
        amps = np.zeros(2 ** len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @classmethod
    def _trusted(cls, amplitudes):
        # skips validation; kernels preserve the norm
        if amplitudes.dtype != np.complex128 or not amplitudes.flags.c_contiguous:
            amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.flags.writeable:
            amplitudes.setflags(write=False)
        obj = object.__new__(cls)
        object.__setattr__(obj, "amplitudes", amplitudes)
        return obj

    @property
    def qubit_count(self):
        return self.amplitudes.size.bit_length() - 1

    @property
    def norm(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self, other):
        return PureState(np.kron(self.amplitudes, other.amplitudes))

    def inner(self, other):
        """``<self|other>``."""
        if self.amplitudes.shape != other.amplitudes.shape:
            raise StateError("dimension mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __matmul__(self, other):
        return self.tensor(other)

    def __repr__(self):
        return f"PureState(n={self.qubit_count}, amplitudes={np.round(self.amplitudes, 6)})"


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1):
            raise StateError(f"unitary must be square of size 2^k, got {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=TOL, rtol=0):
            raise StateError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self):
        return self.matrix.shape[0].bit_length() - 1

    def kron(self, other):
        return Unitary(np.kron(self.matrix, other.matrix))

    def __matmul__(self, other):
        return Unitary(self.matrix @ other.matrix)

    @property
    def dagger(self):
        return Unitary(self.matrix.conj().T)


I2 = Unitary(np.eye(2))
SIGMA_X = Unitary(np.array([[0, 1], [1, 0]]))
SIGMA_Y = Unitary(np.array([[0, -1j], [1j, 0]]))
SIGMA_Z = Unitary(np.array([[1, 0], [0, -1]]))
HADAMARD = Unitary(np.array([[1, 1], [1, -1]]) * SQRT_HALF)
# -i sigma_y = |1><0| - |0><1|
MINUS_I_SIGMA_Y = Unitary(-1j * SIGMA_Y.matrix)

# dense-coding operators on a single qubit, indexed by the two-bit code
DENSE_CODE_OPS = (I2, SIGMA_Z, SIGMA_X, MINUS_I_SIGMA_Y)


class MeasurementBasis(Enum):
    """Single-qubit Pauli bases; row 0 is the +1 eigenvector, row 1 the -1."""

    Z = "Z"
    X = "X"
    Y = "Y"

    @property
    def vectors(self):
        return self._vectors

    def ket(self, outcome):
        return PureState(self.vectors[0 if outcome == 1 else 1])


_BASIS_VECTORS = {
    MeasurementBasis.Z: _frozen(np.eye(2)),
    MeasurementBasis.X: _frozen(np.array([[1, 1], [1, -1]]) * SQRT_HALF),
    MeasurementBasis.Y: _frozen(np.array([[1, 1j], [1, -1j]]) * SQRT_HALF),
}
for _b, _v in _BASIS_VECTORS.items():
    _b._vectors = _v


class BellOutcome(Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def vector(self):
        return BELL_VECTORS[list(BellOutcome).index(self)]

    @property
    def state(self):
        return PureState(self.vector)


BELL_VECTORS = _frozen(
    np.array(
        [
            [1, 0, 0, 1],
            [1, 0, 0, -1],
            [0, 1, 1, 0],
            [0, 1, -1, 0],
        ]
    )
    * SQRT_HALF
)
_BELL_LIST = tuple(BellOutcome)

PHI_PLUS = BellOutcome.PHI_PLUS.state
PHI_MINUS = BellOutcome.PHI_MINUS.state
PSI_PLUS = BellOutcome.PSI_PLUS.state
PSI_MINUS = BellOutcome.PSI_MINUS.state


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError("density matrix must be square")
        if abs(np.trace(m) - 1.0) > 1e-10:
            raise StateError(f"trace is {np.trace(m)}, expected 1")
        if not np.allclose(m, m.conj().T, atol=1e-10, rtol=0):
            raise StateError("density matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def purity(self):
        return float(np.trace(self.matrix @ self.matrix).real)

    def distance(self, other):
        """Largest absolute entry of the difference."""
        return float(np.max(np.abs(self.matrix - other.matrix)))


def _check_targets(n, targets):
    if len(targets) == 1 and 0 <= targets[0] < n:
        return
    if len(set(targets)) != len(targets):
        raise StateError(f"targets must be distinct, got {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise StateError(f"qubit index {t} out of range for {n} qubits")


def apply_gate(state, u, targets):
    """Apply ``u`` to the listed qubits (in order) and identity elsewhere."""
    targets = tuple(targets)
    n = state.qubit_count
    _check_targets(n, targets)
    matrix = u.matrix if isinstance(u, Unitary) else np.ascontiguousarray(u, dtype=np.complex128)
    arity = matrix.shape[0].bit_length() - 1
    if arity != len(targets):
        raise StateError(f"gate arity {arity} does not match {len(targets)} targets")
    k = _backend.kernels
    if arity == 1:
        out = k.apply_1q(state.amplitudes, n, matrix, targets[0])
    elif arity == 2:
        out = k.apply_2q(state.amplitudes, n, matrix, targets[0], targets[1])
    else:
        view = state.amplitudes.reshape((2,) * n)
        t = np.tensordot(matrix.reshape((2,) * (2 * arity)), view, axes=(list(range(arity, 2 * arity)), list(targets)))
        out = np.moveaxis(t, list(range(arity)), list(targets)).reshape(-1)
    return PureState._trusted(out)


def measure(state, basis, target, rng):
    """Projective single-qubit measurement.

    Returns ``(outcome, collapsed, probability)`` with ``outcome`` in ``{+1, -1}``
    (+1 for the first eigenvector of ``basis``). ``rng`` needs a ``random()`` method.
    """
    n = state.qubit_count
    _check_targets(n, (target,))
    k, p, out = _backend.kernels.measure_1q(state.amplitudes, n, basis.vectors, target, rng.random())
    return (1 if k == 0 else -1), PureState._trusted(out), p


@lru_cache(maxsize=None)
def _stacked(bases):
    return _frozen(np.stack([b.vectors for b in bases]))


def measure_sequence(state, steps, rng=None, uniforms=None):
    """Sequential single-qubit measurements ``steps = [(basis, target), ...]``.

    Same results and the same ``rng`` consumption as calling :func:`measure`
    once per step; returns ``(outcomes, collapsed)``. Pre-drawn ``uniforms``
    replace ``rng``.
    """
    n = state.qubit_count
    for _, t in steps:
        _check_targets(n, (t,))
    bases = _stacked(tuple(b for b, _ in steps))
    targets = [t for _, t in steps]
    rs = list(uniforms) if uniforms is not None else [rng.random() for _ in steps]
    ks, out = _backend.kernels.measure_seq(state.amplitudes, n, bases, targets, rs)
    return [1 if k == 0 else -1 for k in ks], PureState._trusted(out)


def bell_measure(state, targets, rng, failure_probability=0.0):
    """Bell-state measurement on two qubits.

    Returns ``(outcome, collapsed)``. With ``failure_probability`` > 0 the
    analyser may report ``None`` (inconclusive); the state is then returned
    untouched and the round should be discarded.
    """
    t0, t1 = targets
    n = state.qubit_count
    _check_targets(n, (t0, t1))
    if failure_probability > 0.0 and rng.random() < failure_probability:
        return None, state
    k, _p, out = _backend.kernels.measure_2q(state.amplitudes, n, BELL_VECTORS, t0, t1, rng.random())
    return _BELL_LIST[k], PureState._trusted(out)


def born_probabilities(state, basis, target):
    """Exact outcome probabilities ``{+1: p, -1: q}`` for a single-qubit measurement."""
    n = state.qubit_count
    _check_targets(n, (target,))
    view = np.moveaxis(state.amplitudes.reshape((2,) * n), target, 0).reshape(2, -1)
    amps = basis.vectors.conj() @ view
    p = np.sum(np.abs(amps) ** 2, axis=1)
    return {1: float(p[0]), -1: float(p[1])}


def partial_trace(state, keep):
    """Reduced density matrix over ``keep`` (in the given order)."""
    keep = tuple(keep)
    n = state.qubit_count
    if not keep:
        raise StateError("keep must be nonempty")
    _check_targets(n, keep)
    traced = [q for q in range(n) if q not in keep]
    psi = np.transpose(state.amplitudes.reshape((2,) * n), keep + tuple(traced))
    psi = psi.reshape(2 ** len(keep), -1)
    return DensityMatrix(psi @ psi.conj().T)


def equal_up_to_global_phase(a, b, tol=1e-10):
    if a.qubit_count != b.qubit_count:
        raise StateError("dimension mismatch")
    return abs(a.inner(b)) >= 1.0 - tol


def projector(vector):
    v = np.asarray(vector, dtype=np.complex128)
    return np.outer(v, v.conj())
