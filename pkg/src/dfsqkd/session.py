"""Session runner: the full protocol state machine over many rounds.

Order of a QKD session::

    prepare -> forward transit (+Eve) -> Check1 sample -> QBER1 / abort
    -> encode -> backward transit (+Eve) -> decode -> Check2 disclosure
    -> QBER2 / abort -> sift -> reconcile -> privacy amplification

Per-round randomness comes from counter-addressed rows (see :mod:`dfsqkd.rng`),
so results do not depend on how rounds are split across workers.
"""

import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from dfsqkd import rng as rngmod
from dfsqkd.adversary import NO_EVE, AdversaryStrategy, Legs, attack
from dfsqkd.channel import (
    TWO_PI,
    NoiseChannelSpec,
    NoiseFamily,
    ParameterDistribution,
    ParameterKind,
    drift_path,
    transmit,
)
from dfsqkd.keypost import (
    DEFAULT_CHECK_FRACTION,
    DEFAULT_QBER_THRESHOLD,
    DEFAULT_SAFETY_MARGIN,
    Decision,
    EmptySampleError,
    Phase,
    ReconciliationError,
    RoundTranscript,
    abort_decision,
    bits_to_str,
    error_correct,
    estimate_qber,
    privacy_amplify,
    sift,
)
from dfsqkd.protocol import (
    B_PAIR,
    Carrier,
    DecodeError,
    Encoding,
    apply_code,
    build_decode_table,
    check_round,
    code_for,
    decode,
    prepare_initial,
)
from dfsqkd.qstate import PureState

NOISE_FORWARD = 11
NOISE_BACKWARD = 12

SWEEPABLE = {
    "loss": "loss_probability",
    "loss_probability": "loss_probability",
    "bsa_failure_probability": "bsa_failure_probability",
    "bsa": "bsa_failure_probability",
    "drift_step": "drift_step",
    "check_fraction": "check_fraction",
}

CSV_COLUMNS = (
    "session_id",
    "encoding",
    "rounds",
    "noise_family",
    "loss",
    "adversary",
    "qber1",
    "qber2",
    "aborted",
    "raw_len",
    "final_len",
    "runtime_ms",
)
EXTRA_COLUMNS = (
    "abort_stage",
    "legs",
    "seed",
    "check1_size",
    "check2_size",
    "leaked",
    "sifted_mismatch_rate",
    "loss_discards",
    "bsa_discards",
    "keys_match",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    encoding: Encoding = Encoding.DEPHASING
    rounds: int = 1000
    # None: the collective noise the encoding is built for
    noise_family: NoiseFamily = None
    noise: ParameterDistribution = field(default_factory=ParameterDistribution)
    loss_probability: float = 0.0
    adversary: AdversaryStrategy = NO_EVE
    check1_fraction: float = DEFAULT_CHECK_FRACTION
    check2_fraction: float = DEFAULT_CHECK_FRACTION
    qber_threshold: float = DEFAULT_QBER_THRESHOLD
    safety_margin: int = DEFAULT_SAFETY_MARGIN
    ec_block_size: int = 16
    ec_max_passes: int = 4
    bsa_failure_probability: float = 0.0
    mode: str = "qkd"
    message_file: str = None
    seed: int = 0
    session_id: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        for name in ("check1_fraction", "check2_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        for name in ("loss_probability", "bsa_failure_probability", "qber_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.mode not in ("qkd", "qsdc"):
            raise ConfigError(f"mode must be qkd or qsdc, got {self.mode!r}")
        if self.safety_margin < 0 or self.ec_block_size < 1 or self.ec_max_passes < 1:
            raise ConfigError("post-processing parameters out of range")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def channel_family(self):
        return self.noise_family or self.encoding.noise_family

    def channel_spec(self):
        return NoiseChannelSpec(self.channel_family, self.noise, self.loss_probability)

    def with_axis(self, axis, value):
        """Copy with one sweepable scalar replaced."""
        try:
            target = SWEEPABLE[axis]
        except KeyError:
            raise ConfigError(f"{axis!r} is not sweepable; choose from {sorted(SWEEPABLE)}") from None
        if target == "drift_step":
            noise = ParameterDistribution(ParameterKind.DRIFT, self.noise.value, float(value))
            return dataclasses.replace(self, noise=noise)
        if target == "check_fraction":
            return dataclasses.replace(self, check1_fraction=float(value), check2_fraction=float(value))
        return dataclasses.replace(self, **{target: float(value)})

    def to_dict(self):
        return {
            "encoding": self.encoding.value,
            "rounds": self.rounds,
            "noise_family": self.channel_family.value,
            "noise_kind": self.noise.kind.value,
            "noise_value": self.noise.value,
            "drift_step": self.noise.step,
            "loss_probability": self.loss_probability,
            "adversary": self.adversary.name,
            "legs": self.adversary.legs.value,
            "check1_fraction": self.check1_fraction,
            "check2_fraction": self.check2_fraction,
            "qber_threshold": self.qber_threshold,
            "safety_margin": self.safety_margin,
            "ec_block_size": self.ec_block_size,
            "ec_max_passes": self.ec_max_passes,
            "bsa_failure_probability": self.bsa_failure_probability,
            "mode": self.mode,
            "message_file": self.message_file,
            "seed": self.seed,
            "session_id": self.session_id,
        }


@dataclass
class RunReport:
    session_id: int
    encoding: str
    rounds: int
    noise_family: str
    loss: float
    adversary: str
    legs: str
    seed: int
    qber1: float = None
    qber2: float = None
    aborted: bool = False
    abort_stage: str = None
    check1_size: int = 0
    check2_size: int = 0
    message_surviving: int = 0
    raw_len: int = 0
    corrected_len: int = 0
    leaked: int = 0
    final_len: int = 0
    sifted_mismatch_rate: float = None
    loss_discards: int = 0
    bsa_discards: int = 0
    keys_match: bool = None
    key_digest: str = None
    safety_margin: int = 0
    runtime_ms: float = 0.0
    alice_final: str = ""
    bob_final: str = ""
    transcript: list = field(default=None, repr=False)

    def summary(self):
        """Everything except timing and the per-round transcript."""
        skip = ("runtime_ms", "transcript")
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name not in skip}

    def canonical_json(self):
        return json.dumps(self.summary(), sort_keys=True)

    def csv_row(self, include_timing=True):
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        if not include_timing:
            d["runtime_ms"] = 0
        row = []
        for col in CSV_COLUMNS + EXTRA_COLUMNS:
            v = d[col]
            if v is None:
                row.append("")
            elif isinstance(v, float):
                row.append(f"{v:.6g}" if col != "runtime_ms" else f"{v:.1f}")
            else:
                row.append(str(v))
        return row

    def accounting_holds(self):
        """Final length = 2 * surviving message rounds - Check2 disclosure - leaked - margin."""
        if self.aborted:
            return self.final_len == 0
        expected = 2 * self.message_surviving - 2 * self.check2_size - self.leaked - self.safety_margin
        return self.final_len == max(expected, 0) and self.raw_len == 2 * (self.message_surviving - self.check2_size)


# ---------------------------------------------------------------- phases


def _noise_parameters(config, stream, drift_stream):
    n = config.rounds
    dist = config.noise
    if config.channel_family is NoiseFamily.NONE:
        return np.zeros(n)
    if dist.kind is ParameterKind.FIXED:
        return np.full(n, float(dist.value) % TWO_PI)
    if dist.kind is ParameterKind.UNIFORM:
        return TWO_PI * rngmod.generator(config.seed, stream).random(n)
    return drift_path(dist, rngmod.generator(config.seed, drift_stream).standard_normal(n))


def _chunks(n, workers):
    size = max(1, math.ceil(n / workers))
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def _run_chunks(fn, config, jobs):
    """Run ``fn(config, job)`` for each job, in-process or across workers, preserving order."""
    if config.workers == 1 or len(jobs) <= 1:
        return [fn(config, job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, [config] * len(jobs), jobs))


def _forward_chunk(config, job):
    start, stop, params = job
    rows = rngmod.round_rows(config.seed, rngmod.FORWARD, start, stop)
    spec = config.channel_spec()
    initial = prepare_initial(config.encoding)
    eve = config.adversary.acts_on(Legs.FORWARD)
    out = []
    for k in range(stop - start):
        rs = rngmod.RowStream(rows[k])
        tr = transmit(initial, B_PAIR, spec, rs, parameter=params[k])
        if tr.any_lost:
            out.append(None)
            continue
        state = tr.state
        if eve:
            state = attack(state, B_PAIR, config.adversary, rs, encoding=config.encoding)
        out.append(state.amplitudes)
    return out


def _rows_for(config, stream, indices):
    # one contiguous block covering the chunk; rows stay addressed by round index
    lo, hi = indices[0], indices[-1] + 1
    return lo, rngmod.round_rows(config.seed, stream, lo, hi)


def _check_chunk(config, job):
    out = []
    bases = config.encoding.check_bases
    lo, rows = _rows_for(config, rngmod.CHECK, [index for index, _ in job])
    for index, amps in job:
        rs = rngmod.RowStream(rows[index - lo])
        basis = bases[min(int(rs.random() * 2), 1)]
        out.append(check_round(PureState._trusted(amps), config.encoding, basis, rs))
    return out


def _backward_chunk(config, job):
    spec = config.channel_spec()
    table = build_decode_table(config.encoding)
    eve = config.adversary.acts_on(Legs.BACKWARD)
    out = []
    lo, rows = _rows_for(config, rngmod.BACKWARD, [item[0] for item in job])
    for index, amps, given_code, param in job:
        rs = rngmod.RowStream(rows[index - lo])
        drawn = min(int(rs.random() * 4), 3)
        code = drawn if given_code is None else given_code
        state = apply_code(PureState._trusted(amps), code, config.encoding)
        tr = transmit(state, B_PAIR, spec, rs, parameter=param)
        if tr.any_lost:
            out.append((code, "lost-backward", None, None, None))
            continue
        state = tr.state
        if eve:
            state = attack(state, B_PAIR, config.adversary, rs, encoding=config.encoding)
        try:
            carrier, (bell, x) = decode(state, config.encoding, table, rs, config.bsa_failure_probability)
        except DecodeError:
            out.append((code, "table-miss", None, None, None))
            continue
        if carrier is None:
            out.append((code, "bsa-inconclusive", None, None, None))
            continue
        out.append((code, None, int(code_for(Carrier.PHI_PLUS, carrier)), bell.value, x))
    return out


def _split(items, workers):
    return [items[s:e] for s, e in _chunks(len(items), workers)] if items else []


def _sample(gen, candidates, fraction):
    """Random subset of ``candidates`` of size round(fraction * len), at least 1 when nonempty."""
    if not candidates:
        return []
    size = min(len(candidates), max(1, int(round(fraction * len(candidates)))))
    picked = gen.choice(len(candidates), size=size, replace=False)
    return sorted(candidates[i] for i in picked)


@dataclass
class _Run:
    """Mutable state threaded through one session."""

    config: SessionConfig
    transcripts: list
    states: list
    session_gen: np.random.Generator
    params_bwd: np.ndarray
    report: RunReport


def _start(config):
    n = config.rounds
    transcripts = [RoundTranscript(round_index=i, encoding=config.encoding.value) for i in range(n)]
    params_fwd = _noise_parameters(config, NOISE_FORWARD, rngmod.DRIFT_FORWARD)
    params_bwd = _noise_parameters(config, NOISE_BACKWARD, rngmod.DRIFT_BACKWARD)
    jobs = [(s, e, params_fwd[s:e]) for s, e in _chunks(n, config.workers)]
    states = [a for chunk in _run_chunks(_forward_chunk, config, jobs) for a in chunk]
    for t, amps in zip(transcripts, states):
        if amps is None:
            t.lost_forward = True
            t.discarded = "lost-forward"
    report = RunReport(
        session_id=config.session_id,
        encoding=config.encoding.value,
        rounds=n,
        noise_family=config.channel_family.value,
        loss=config.loss_probability,
        adversary=config.adversary.name,
        legs=config.adversary.legs.value,
        seed=config.seed,
        safety_margin=config.safety_margin,
    )
    return _Run(config, transcripts, states, rngmod.generator(config.seed, rngmod.SESSION), params_bwd, report)


def _abort(run, stage):
    run.report.aborted = True
    run.report.abort_stage = stage
    for t in run.transcripts:
        if t.phase is None and t.discarded is None:
            t.discarded = "aborted"


def _check1(run):
    """Sample, measure and judge the first transmission. Returns survivors not used for checking."""
    config = run.config
    survivors = [t.round_index for t in run.transcripts if t.discarded is None]
    check_idx = _sample(run.session_gen, survivors, config.check1_fraction)
    jobs = _split([(i, run.states[i]) for i in check_idx], config.workers)
    outcomes = [o for chunk in _run_chunks(_check_chunk, config, jobs) for o in chunk]
    for i, o in zip(check_idx, outcomes):
        t = run.transcripts[i]
        t.phase = Phase.CHECK1
        t.check_basis = o.basis.value
        t.alice_outcome = o.alice
        t.bob_outcomes = o.bob
        t.consistent = o.consistent
    run.report.check1_size = len(check_idx)
    try:
        rate, _ = estimate_qber([run.transcripts[i] for i in check_idx])
    except EmptySampleError:
        _abort(run, "check1-empty")
        return None
    run.report.qber1 = rate
    if abort_decision(rate, config.qber_threshold) is Decision.ABORT:
        _abort(run, "check1")
        return None
    chosen = set(check_idx)
    return [i for i in survivors if i not in chosen]


def _transmit_back(run, message_idx, codes):
    config = run.config
    items = [(i, run.states[i], codes.get(i), float(run.params_bwd[i])) for i in message_idx]
    results = [r for chunk in _run_chunks(_backward_chunk, config, _split(items, config.workers)) for r in chunk]
    for i, (code, discarded, decoded, bell, x) in zip(message_idx, results):
        t = run.transcripts[i]
        t.phase = Phase.MESSAGE
        t.encoded_code = code
        t.decoded_code = decoded
        t.bell = bell
        t.x_outcome = x
        if discarded:
            t.discarded = discarded
            t.lost_backward = discarded == "lost-backward"


def _check2(run, check2_idx):
    for i in check2_idx:
        run.transcripts[i].phase = Phase.CHECK2
    run.report.check2_size = len(check2_idx)
    try:
        rate, _ = estimate_qber([run.transcripts[i] for i in check2_idx])
    except EmptySampleError:
        _abort(run, "check2-empty")
        return False
    run.report.qber2 = rate
    if abort_decision(rate, run.config.qber_threshold) is Decision.ABORT:
        _abort(run, "check2")
        return False
    return True


def _tally(run):
    r = run.report
    ts = run.transcripts
    r.loss_discards = sum(t.discarded in ("lost-forward", "lost-backward") for t in ts)
    r.bsa_discards = sum(t.discarded == "bsa-inconclusive" for t in ts)
    r.message_surviving = sum(t.phase in (Phase.MESSAGE, Phase.CHECK2) and t.discarded is None for t in ts)


def _postprocess(run):
    config, r = run.config, run.report
    alice_raw, bob_raw = sift(run.transcripts)
    r.raw_len = int(bob_raw.size)
    if bob_raw.size:
        r.sifted_mismatch_rate = float(np.mean(alice_raw != bob_raw))
    ec_seed, pa_seed = (int(s) for s in run.session_gen.integers(0, 2**63, size=2))
    try:
        (alice_c, bob_c), leaked = error_correct(alice_raw, bob_raw, config.ec_block_size, config.ec_max_passes, ec_seed)
    except ReconciliationError as exc:
        r.leaked = exc.leaked
        _abort(run, "reconciliation")
        return
    r.leaked = leaked
    r.corrected_len = int(alice_c.size)
    alice_final = privacy_amplify(alice_c, leaked, config.safety_margin, pa_seed)
    bob_final = privacy_amplify(bob_c, leaked, config.safety_margin, pa_seed)
    r.final_len = int(alice_final.size)
    r.alice_final = bits_to_str(alice_final)
    r.bob_final = bits_to_str(bob_final)
    r.keys_match = r.alice_final == r.bob_final
    r.key_digest = hashlib.sha256(r.bob_final.encode()).hexdigest()[:16]


def run_session(config, keep_transcript=False):
    """Run one QKD session; abort outcomes are reported, not raised."""
    if config.mode != "qkd":
        raise ConfigError("run_session runs QKD; use qsdc_run for direct messages")
    t0 = time.perf_counter()
    run = _start(config)
    message_idx = _check1(run)
    if message_idx is not None:
        _transmit_back(run, message_idx, {})
        conclusive = [i for i in message_idx if run.transcripts[i].discarded is None]
        if _check2(run, _sample(run.session_gen, conclusive, config.check2_fraction)):
            _postprocess(run)
    _tally(run)
    report = run.report
    if keep_transcript:
        report.transcript = run.transcripts
    report.runtime_ms = (time.perf_counter() - t0) * 1e3
    return report


# ---------------------------------------------------------------- QSDC


def message_to_bits(data):
    """Bytes to a bit array, most significant bit first."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


@dataclass
class QsdcReport:
    sent_bits: str
    check1_passed: bool
    qber1: float
    qber2: float
    integrity_ok: bool
    encoded_dibits: int
    delivered_dibits: int
    undelivered_dibits: list
    unsent_dibits: int
    lost_round_indices: list
    received: str
    transcript: list = field(default=None, repr=False)

    @property
    def delivered_fraction(self):
        return self.delivered_dibits / self.encoded_dibits if self.encoded_dibits else 0.0

    @property
    def verbatim(self):
        return self.received == self.sent_bits

    def summary(self):
        d = dataclasses.asdict(self)
        d.pop("transcript")
        return d


def qsdc_run(message_bits, config, keep_transcript=False):
    """Send ``message_bits`` directly on the carriers.

    Bob only encodes after Check1 passes. Check2 rounds are fixed before
    encoding and carry random codes; message dibits fill the remaining
    message rounds in index order. Dibits whose rounds are lost or
    inconclusive are reported undelivered (``?`` in ``received``).
    """
    bits = np.asarray(message_bits, dtype=np.uint8).reshape(-1)
    length = bits.size
    if bits.size % 2:
        bits = np.append(bits, 0)
    dibits = [int(2 * bits[j] + bits[j + 1]) for j in range(0, bits.size, 2)]
    config = dataclasses.replace(config, mode="qsdc")
    run = _start(config)
    message_idx = _check1(run)
    sent = bits_to_str(bits[:length])
    if message_idx is None:
        return QsdcReport(
            sent_bits=sent,
            check1_passed=False,
            qber1=run.report.qber1,
            qber2=None,
            integrity_ok=False,
            encoded_dibits=0,
            delivered_dibits=0,
            undelivered_dibits=list(range(len(dibits))),
            unsent_dibits=len(dibits),
            lost_round_indices=[t.round_index for t in run.transcripts if t.lost_forward],
            received="?" * length,
            transcript=run.transcripts if keep_transcript else None,
        )
    check2_idx = _sample(run.session_gen, message_idx, config.check2_fraction)
    chosen = set(check2_idx)
    payload_idx = [i for i in message_idx if i not in chosen][: len(dibits)]
    codes = dict(zip(payload_idx, dibits))
    _transmit_back(run, message_idx, codes)
    for i in payload_idx:
        run.transcripts[i].payload = True
    disclosed = [i for i in check2_idx if run.transcripts[i].discarded is None]
    _check2(run, disclosed)

    received = []
    undelivered = []
    for j in range(len(dibits)):
        t = run.transcripts[payload_idx[j]] if j < len(payload_idx) else None
        if t is None or t.discarded not in (None, "aborted") or t.decoded_code is None:
            undelivered.append(j)
            received.append("??")
        else:
            received.append(format(t.decoded_code, "02b"))
    return QsdcReport(
        sent_bits=sent,
        check1_passed=True,
        qber1=run.report.qber1,
        qber2=run.report.qber2,
        integrity_ok=not run.report.aborted,
        encoded_dibits=len(payload_idx),
        delivered_dibits=len(payload_idx) - sum(j < len(payload_idx) for j in undelivered),
        undelivered_dibits=undelivered,
        unsent_dibits=len(dibits) - len(payload_idx),
        lost_round_indices=[t.round_index for t in run.transcripts if t.lost_forward or t.lost_backward],
        received="".join(received)[:length],
        transcript=run.transcripts if keep_transcript else None,
    )


# ---------------------------------------------------------------- sweeps


def _sweep_one(job):
    config, keep = job
    return run_session(config, keep_transcript=keep)


def run_sweep(base, axis, values, workers=1, keep_transcript=False):
    """One session per value of ``axis``; session ``k`` gets seed ``sub_seed(base.seed, k)``."""
    if axis not in SWEEPABLE:
        raise ConfigError(f"{axis!r} is not sweepable; choose from {sorted(SWEEPABLE)}")
    configs = [
        dataclasses.replace(base.with_axis(axis, v), seed=rngmod.sub_seed(base.seed, k), session_id=k)
        for k, v in enumerate(values)
    ]
    jobs = [(c, keep_transcript) for c in configs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]
