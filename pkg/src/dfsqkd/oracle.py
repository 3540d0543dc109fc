"""Exact error rates under intercept-resend, by exhaustive Born-branch enumeration.

Everything here is plain 8x8 density-matrix algebra with its own kets and
hand-written correlation and decoding tables; it shares no code with the
sampling path, so Monte Carlo estimates can be checked against it.

Channel noise is omitted: the carriers live in the decoherence-free subspace,
so noise before Eve only contributes a global phase (or nothing).
"""

from itertools import product

import numpy as np

_r = 1 / np.sqrt(2)
KETS = {
    "Z": (np.array([1, 0], complex), np.array([0, 1], complex)),
    "X": (np.array([_r, _r], complex), np.array([_r, -_r], complex)),
    "Y": (np.array([_r, 1j * _r], complex), np.array([_r, -1j * _r], complex)),
}
BELL = {
    "phi+": np.array([_r, 0, 0, _r], complex),
    "phi-": np.array([_r, 0, 0, -_r], complex),
    "psi+": np.array([0, _r, _r, 0], complex),
    "psi-": np.array([0, _r, -_r, 0], complex),
}
I2 = np.eye(2, dtype=complex)
H = np.array([[1, 1], [1, -1]], complex) * _r
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], complex),
    "Z": np.array([[1, 0], [0, -1]], complex),
    "-iY": np.array([[0, -1], [1, 0]], complex),
}
# code -> (op on B1, op on B2)
CODE_OPS = {
    "dephasing": {0: ("I", "I"), 1: ("Z", "I"), 2: ("X", "X"), 3: ("-iY", "X")},
    "rotation": {0: ("I", "I"), 1: ("Z", "Z"), 2: ("Z", "X"), 3: ("I", "-iY")},
}
LOGICAL = {
    "dephasing": (np.array([0, 1, 0, 0], complex), np.array([0, 0, 1, 0], complex)),
    "rotation": (BELL["phi+"], BELL["psi-"]),
}
CARRIERS = ("Phi+", "Phi-", "Psi+", "Psi-")
# decoding tables written out by hand from the carrier expansions (Bell on A-B1, X on B2)
DECODE = {
    "dephasing": {
        "Phi+": {("phi+", 1), ("phi-", -1)},
        "Phi-": {("phi-", 1), ("phi+", -1)},
        "Psi+": {("psi+", 1), ("psi-", -1)},
        "Psi-": {("psi-", 1), ("psi+", -1)},
    },
    "rotation": {
        "Phi+": {("phi+", 1), ("psi-", -1)},
        "Phi-": {("phi-", 1), ("psi+", -1)},
        "Psi+": {("psi+", 1), ("phi-", -1)},
        "Psi-": {("psi-", 1), ("phi+", -1)},
    },
}
CHECK_BASES = {"dephasing": ("Z", "X"), "rotation": ("Z", "Y")}


def consistent(encoding, basis, a, b1, b2):
    """Correlations of the pristine Phi+ carrier; outcomes are +1/-1."""
    if (encoding, basis) in {("dephasing", "Z"), ("rotation", "Y")}:
        return (a, b1, b2) in {(1, 1, -1), (-1, -1, 1)}
    # dephasing X (X-basis expansion) and rotation Z (A=0 <-> even parity)
    return a == b1 * b2


def carrier_vector(encoding, name):
    zero, one = LOGICAL[encoding]
    e0, e1 = KETS["Z"]
    sign = -1 if name.endswith("-") else 1
    if name.startswith("Phi"):
        return _r * (np.kron(e0, zero) + sign * np.kron(e1, one))
    return _r * (np.kron(e0, one) + sign * np.kron(e1, zero))


def _kron(*ms):
    out = np.eye(1, dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def _proj(v):
    return np.outer(v, v.conj())


def _outcome_sign(k):
    return 1 if k == 0 else -1


def eve_branches(rho, encoding, kind, basis=None):
    """Unnormalized post-attack density matrices ``(weight, rho_branch)``.

    ``kind`` is ``"physical"`` or ``"logical"``; for physical, ``basis`` is
    ``"z"``, ``"x"``, ``"y"`` or ``"rand"`` (uniform over Z, X, Y per qubit).
    Traces of the branch matrices sum to 1.
    """
    out = []
    if kind == "physical":
        choices = ["Z", "X", "Y"] if basis == "rand" else [basis.upper()]
        w = 1.0 / len(choices) ** 2
        for c1, c2 in product(choices, repeat=2):
            for k1, k2 in product(range(2), repeat=2):
                P = _kron(I2, _proj(KETS[c1][k1]), _proj(KETS[c2][k2]))
                out.append((w, P @ rho @ P))
        return out
    if kind == "logical":
        for k1, k2 in product(range(2), repeat=2):
            P = _kron(I2, _proj(KETS["Z"][k1]), _proj(KETS["Z"][k2]))
            branch = P @ rho @ P
            p = np.trace(branch).real
            if p < 1e-15:
                continue
            rho_a = np.einsum("ajbj->ab", branch.reshape(2, 4, 2, 4))
            zero, one = LOGICAL[encoding]
            if encoding == "rotation":
                resend = zero if k1 == k2 else one
            elif (k1, k2) == (0, 1):
                resend = zero
            elif (k1, k2) == (1, 0):
                resend = one
            else:
                resend = np.kron(KETS["Z"][k1], KETS["Z"][k2])
            out.append((1.0, np.kron(rho_a, _proj(resend))))
        return out
    raise ValueError(kind)


def _apply_eve(rho, encoding, kind, basis):
    if kind is None:
        return rho
    return sum(w * b for w, b in eve_branches(rho, encoding, kind, basis))


def check_error_rates(encoding, kind, basis=None):
    """Inconsistency probability of a check round after a forward-leg attack.

    Returns ``{basis: rate}`` for each of Bob's check bases plus ``"average"``
    over his uniform basis choice.
    """
    psi = carrier_vector(encoding, "Phi+")
    rho = _apply_eve(_proj(psi), encoding, kind, basis)
    rates = {}
    for cb in CHECK_BASES[encoding]:
        p_ok = 0.0
        for ka, k1, k2 in product(range(2), repeat=3):
            P = _kron(_proj(KETS[cb][ka]), _proj(KETS[cb][k1]), _proj(KETS[cb][k2]))
            if consistent(encoding, cb, _outcome_sign(ka), _outcome_sign(k1), _outcome_sign(k2)):
                p_ok += np.trace(P @ rho).real
        rates[cb] = float(1.0 - p_ok)
    rates["average"] = float(np.mean([rates[cb] for cb in CHECK_BASES[encoding]]))
    return rates


def decode_distribution(rho, encoding):
    """Probability of Alice inferring each carrier from ``rho``."""
    if encoding == "rotation":
        U = _kron(I2, H, I2)
        rho = U @ rho @ U.conj().T
    probs = {}
    for name in CARRIERS:
        p = 0.0
        for bell, x in DECODE[encoding][name]:
            v = np.kron(BELL[bell], KETS["X"][0 if x == 1 else 1])
            p += (v.conj() @ rho @ v).real
        probs[name] = p
    return probs


def message_error_rates(encoding, kind, basis=None, legs="bwd"):
    """Mismatch rates of message rounds under attack on ``legs``.

    Codes are uniform. Returns ``{"dibit": P(decoded code != sent code),
    "bit": expected fraction of differing raw key bits}``.
    """
    forward = legs in ("fwd", "both")
    backward = legs in ("bwd", "both")
    rho0 = _proj(carrier_vector(encoding, "Phi+"))
    if forward:
        rho0 = _apply_eve(rho0, encoding, kind, basis)
    dibit = bit = 0.0
    for code in range(4):
        o1, o2 = CODE_OPS[encoding][code]
        U = _kron(I2, PAULI[o1], PAULI[o2])
        rho = U @ rho0 @ U.conj().T
        if backward:
            rho = _apply_eve(rho, encoding, kind, basis)
        dist = decode_distribution(rho, encoding)
        for idx, name in enumerate(CARRIERS):
            # Phi+ initial: decoded code index equals the carrier index
            if idx != code:
                dibit += 0.25 * dist[name]
                bit += 0.25 * dist[name] * bin(idx ^ code).count("1") / 2
    return {"dibit": float(dibit), "bit": float(bit)}


def reduced_logical_state(encoding, code, attack=None):
    """Density matrix of (B1, B2) on the backward leg after Bob's ``code``."""
    psi = carrier_vector(encoding, "Phi+")
    o1, o2 = CODE_OPS[encoding][code]
    psi = _kron(I2, PAULI[o1], PAULI[o2]) @ psi
    rho = _proj(psi)
    if attack is not None:
        rho = _apply_eve(rho, encoding, *attack)
    return np.einsum("aiaj->ij", rho.reshape(2, 4, 2, 4))
