"""Decoherence-free-subspace two-way QKD / QSDC simulator."""

from dfsqkd._backend import name as backend
from dfsqkd.adversary import AdversaryStrategy, EveKind, Legs
from dfsqkd.channel import NoiseChannelSpec, NoiseFamily, ParameterDistribution, ParameterKind
from dfsqkd.keypost import ReconciliationError, RoundTranscript, error_correct, estimate_qber, privacy_amplify, sift
from dfsqkd.protocol import Carrier, DenseCode, Encoding, build_decode_table
from dfsqkd.qstate import DensityMatrix, MeasurementBasis, PureState, Unitary
from dfsqkd.session import ConfigError, RunReport, SessionConfig, qsdc_run, run_session, run_sweep

__version__ = "0.1.0"
