"""Algebraic invariant suite behind ``dfsqkd selftest``."""

import numpy as np

from dfsqkd import oracle
from dfsqkd.channel import dephase_unitary, rotate_unitary
from dfsqkd.protocol import (
    B_PAIR,
    Carrier,
    DenseCode,
    Encoding,
    apply_code,
    build_decode_table,
    carrier_gram_matrix,
    check_correlation_predicate,
    check_correlations,
    decode,
    encoding_unitary,
    expected_carrier,
    prepare_initial,
)
from dfsqkd.qstate import BELL_VECTORS, apply_gate, equal_up_to_global_phase, partial_trace, projector

TOL = 1e-12


def _noise(encoding, angle):
    return dephase_unitary(angle) if encoding is Encoding.DEPHASING else rotate_unitary(angle)


def noise_immunity(samples=200, seed=0):
    rng = np.random.default_rng(seed)
    for encoding in Encoding:
        for angle in rng.uniform(0, 2 * np.pi, samples):
            u = _noise(encoding, angle)
            for c in Carrier:
                before = c.realize(encoding)
                after = apply_gate(apply_gate(before, u, (1,)), u, (2,))
                if not equal_up_to_global_phase(before, after, 1e-10):
                    return False
                if encoding is Encoding.ROTATION and np.max(np.abs(before.amplitudes - after.amplitudes)) > 1e-10:
                    return False
    return True


def table_closure():
    for encoding in Encoding:
        for s in Carrier:
            for code in DenseCode:
                out = apply_code(s.realize(encoding), code, encoding)
                if not equal_up_to_global_phase(out, expected_carrier(s, code).realize(encoding), 1e-10):
                    return False
    grid = [[expected_carrier(s, c) for c in DenseCode] for s in Carrier]
    rows_ok = all(len(set(row)) == 4 for row in grid)
    cols_ok = all(len({grid[r][c] for r in range(4)}) == 4 for c in range(4))
    return rows_ok and cols_ok


def carriers_orthonormal():
    return all(np.allclose(carrier_gram_matrix(e), np.eye(4), atol=TOL, rtol=0) for e in Encoding)


def decode_table_matches_transcription():
    for encoding in Encoding:
        table = build_decode_table(encoding)
        for c, name in zip(Carrier, oracle.CARRIERS):
            got = {(b.value, x) for b, x in table.preimage(c)}
            if got != oracle.DECODE[encoding.value][name]:
                return False
    return True


def decoding_deterministic(samples=50, seed=1):
    rng = np.random.default_rng(seed)
    for encoding in Encoding:
        table = build_decode_table(encoding)
        for code in DenseCode:
            for angle in rng.uniform(0, 2 * np.pi, samples):
                u = _noise(encoding, angle)
                state = apply_code(prepare_initial(encoding), code, encoding)
                state = apply_gate(apply_gate(state, u, (1,)), u, (2,))
                carrier, _ = decode(state, encoding, table, rng)
                if carrier is not expected_carrier(Carrier.PHI_PLUS, code):
                    return False
    return True


def security_witness():
    for encoding in Encoding:
        target = 0.5 * (projector(encoding.logical_zero.amplitudes) + projector(encoding.logical_one.amplitudes))
        for c in Carrier:
            rho = partial_trace(c.realize(encoding), B_PAIR).matrix
            if np.max(np.abs(rho - target)) > TOL:
                return False
        reduced = [partial_trace(apply_code(prepare_initial(encoding), code, encoding), B_PAIR).matrix for code in DenseCode]
        if any(np.max(np.abs(r - reduced[0])) > TOL for r in reduced):
            return False
    return True


def operators_unitary():
    ops = [encoding_unitary(c, e).matrix for c in DenseCode for e in Encoding]
    ops += [dephase_unitary(a).matrix for a in (0.3, 2.0)] + [rotate_unitary(a).matrix for a in (0.3, 2.0)]
    return all(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=TOL, rtol=0) for m in ops)


def bell_completeness():
    total = sum(projector(v) for v in BELL_VECTORS)
    return np.allclose(total, np.eye(4), atol=TOL, rtol=0)


def check_tables_match_predicates():
    signs = (1, -1)
    for encoding in Encoding:
        for basis in encoding.check_bases:
            table = check_correlations(encoding, basis)
            for a in signs:
                for b1 in signs:
                    for b2 in signs:
                        if ((a, b1, b2) in table) != check_correlation_predicate(encoding, basis, a, (b1, b2)):
                            return False
    return True


CHECKS = (
    ("noise immunity (dephasing and rotation)", noise_immunity),
    ("table closure and Latin-square structure", table_closure),
    ("carrier orthonormality", carriers_orthonormal),
    ("decode table equals transcribed decompositions", decode_table_matches_transcription),
    ("deterministic decoding under noise", decoding_deterministic),
    ("reduced state of B is the logical maximal mixture", security_witness),
    ("operators are unitary", operators_unitary),
    ("Bell projectors resolve the identity", bell_completeness),
    ("generated check tables match stated correlations", check_tables_match_predicates),
)


def run(out=print):
    ok = True
    for name, fn in CHECKS:
        passed = bool(fn())
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
