"""Session configuration files.

A TOML file with top-level session keys and three optional sections::

    encoding = "rotation"
    rounds = 20000
    seed = 7
    mode = "qkd"                  # or "qsdc" (needs message_file)
    bsa_failure_probability = 0.0

    [noise]
    family = "auto"               # auto | none | dephasing | rotation
    distribution = "uniform"      # uniform | fixed | drift
    value = 0.0                   # fixed angle, or drift start
    step = 0.05                   # drift standard deviation per transit
    loss = 0.1

    [adversary]
    eve = "ir-z"                  # none | ir-z | ir-x | ir-y | ir-rand | ir-logical
    legs = "fwd"                  # fwd | bwd | both

    [postprocessing]
    check1_fraction = 0.25
    check2_fraction = 0.25
    qber_threshold = 0.11
    safety_margin = 20
    ec_block_size = 16
    ec_max_passes = 4
"""

import sys

from dfsqkd.adversary import AdversaryStrategy
from dfsqkd.channel import NoiseFamily, ParameterDistribution, ParameterKind
from dfsqkd.protocol import Encoding
from dfsqkd.session import ConfigError, SessionConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_TOP = {"encoding", "rounds", "seed", "mode", "bsa_failure_probability", "message_file", "workers"}
_NOISE = {"family", "distribution", "value", "step", "loss"}
_ADVERSARY = {"eve", "legs"}
_POST = {"check1_fraction", "check2_fraction", "qber_threshold", "safety_margin", "ec_block_size", "ec_max_passes"}


def _check_keys(section, data, allowed):
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(sorted(unknown))}")


def flatten(doc):
    """Section-qualified TOML document -> flat override mapping."""
    flat = {}
    top = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    _check_keys("top level", top, _TOP)
    flat.update(top)
    sections = {k: v for k, v in doc.items() if isinstance(v, dict)}
    for name, allowed in (("noise", _NOISE), ("adversary", _ADVERSARY), ("postprocessing", _POST)):
        data = sections.pop(name, {})
        _check_keys(f"[{name}]", data, allowed)
        flat.update({("loss_probability" if k == "loss" else k): v for k, v in data.items()})
    if sections:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(sections))}")
    return flat


def load_file(path):
    with open(path, "rb") as fh:
        try:
            return flatten(tomllib.load(fh))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def build_config(values):
    """SessionConfig from a flat mapping (file values merged with CLI overrides)."""
    v = dict(values)
    try:
        family = v.pop("family", "auto")
        kind = ParameterKind(v.pop("distribution", "uniform"))
        noise = ParameterDistribution(kind, float(v.pop("value", 0.0)), float(v.pop("step", 0.0)))
        adversary = AdversaryStrategy.from_name(v.pop("eve", "none"), v.pop("legs", "fwd"))
        kwargs = {
            "encoding": Encoding(v.pop("encoding", "dephasing")),
            "noise_family": None if family == "auto" else NoiseFamily(family),
            "noise": noise,
            "adversary": adversary,
        }
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for key in ("rounds", "seed", "safety_margin", "ec_block_size", "ec_max_passes", "workers"):
        if key in v:
            kwargs[key] = int(v.pop(key))
    for key in ("loss_probability", "bsa_failure_probability", "check1_fraction", "check2_fraction", "qber_threshold"):
        if key in v:
            kwargs[key] = float(v.pop(key))
    for key in ("mode", "message_file"):
        if key in v:
            kwargs[key] = v.pop(key)
    if v:
        raise ConfigError(f"unknown setting(s): {', '.join(sorted(v))}")
    return SessionConfig(**kwargs)
