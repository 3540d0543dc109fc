"""Collective-noise channels and lossy transit of the two physical qubits of a logical qubit."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from dfsqkd import _backend
from dfsqkd.qstate import PureState, Unitary

TWO_PI = 2.0 * np.pi


class NoiseFamily(Enum):
    NONE = "none"
    DEPHASING = "dephasing"
    ROTATION = "rotation"


class ParameterKind(Enum):
    FIXED = "fixed"
    UNIFORM = "uniform"
    DRIFT = "drift"


@dataclass(frozen=True)
class ParameterDistribution:
    """How the noise angle is drawn per transit.

    ``FIXED`` always yields ``value``; ``UNIFORM`` draws from [0, 2pi);
    ``DRIFT`` is a Gaussian random walk with standard deviation ``step``
    per transit, started at ``value`` (see :func:`drift_path`).
    """

    kind: ParameterKind = ParameterKind.UNIFORM
    value: float = 0.0
    step: float = 0.0

    def __post_init__(self):
        if self.step < 0:
            raise ValueError("drift step must be non-negative")


@dataclass(frozen=True)
class NoiseChannelSpec:
    family: NoiseFamily = NoiseFamily.NONE
    distribution: ParameterDistribution = field(default_factory=ParameterDistribution)
    loss_probability: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError(f"loss_probability must lie in [0, 1], got {self.loss_probability}")


@dataclass(frozen=True)
class TransitResult:
    state: PureState
    lost: tuple
    sampled_parameter: float

    @property
    def any_lost(self):
        return any(self.lost)


def dephase_matrix(phi):
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=np.complex128)


def rotate_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def dephase_unitary(phi):
    """``|0><0| + e^{i phi}|1><1|``."""
    return Unitary(dephase_matrix(phi))


def rotate_unitary(theta):
    """Real rotation: ``|0> -> cos|0> + sin|1>``, ``|1> -> -sin|0> + cos|1>``."""
    return Unitary(rotate_matrix(theta))


def noise_matrix(family, parameter):
    if family is NoiseFamily.DEPHASING:
        return dephase_matrix(parameter)
    if family is NoiseFamily.ROTATION:
        return rotate_matrix(parameter)
    return None


def sample_parameter(distribution, rng):
    if distribution.kind is ParameterKind.FIXED:
        return float(distribution.value) % TWO_PI
    if distribution.kind is ParameterKind.UNIFORM:
        return TWO_PI * rng.random()
    raise ValueError("drift parameters depend on previous transits; use drift_path")


def drift_path(distribution, normals):
    """Random-walk noise angles, one per transit, from standard normal increments."""
    walk = distribution.value + distribution.step * np.cumsum(normals)
    return np.mod(walk, TWO_PI)


def transmit(state, qubits, spec, rng, parameter=None):
    """Send the two physical qubits of one logical qubit through ``spec``.

    The same single-qubit noise operator hits both qubits. ``parameter``
    overrides the draw from ``spec.distribution`` (used for drift paths). Loss
    is i.i.d. per qubit; a lost transit keeps the pre-loss state but must be
    discarded downstream.
    """
    q1, q2 = qubits
    if parameter is None:
        parameter = 0.0 if spec.family is NoiseFamily.NONE else sample_parameter(spec.distribution, rng)
    u = noise_matrix(spec.family, parameter)
    amps = state.amplitudes
    if u is not None:
        k = _backend.kernels
        n = state.qubit_count
        amps = k.apply_1q(k.apply_1q(amps, n, u, q1), n, u, q2)
        state = PureState._trusted(amps)
    p = spec.loss_probability
    if p > 0.0:
        lost = (rng.random() < p, rng.random() < p)
    else:
        lost = (False, False)
    return TransitResult(state=state, lost=lost, sampled_parameter=float(parameter))
