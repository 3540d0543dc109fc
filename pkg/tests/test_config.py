import pytest

from dfsqkd.adversary import Legs
from dfsqkd.channel import NoiseFamily, ParameterKind
from dfsqkd.config import build_config, flatten, load_file
from dfsqkd.protocol import Encoding
from dfsqkd.session import ConfigError

SAMPLE = """
encoding = "rotation"
rounds = 1234
seed = 7

[noise]
family = "rotation"
distribution = "drift"
value = 0.5
step = 0.05
loss = 0.1

[adversary]
eve = "ir-y"
legs = "both"

[postprocessing]
check1_fraction = 0.3
qber_threshold = 0.2
safety_margin = 10
ec_block_size = 32
"""


def test_load_full_file(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(SAMPLE)
    c = build_config(load_file(path))
    assert c.encoding is Encoding.ROTATION and c.rounds == 1234 and c.seed == 7
    assert c.noise_family is NoiseFamily.ROTATION
    assert c.noise.kind is ParameterKind.DRIFT and c.noise.step == 0.05
    assert c.loss_probability == 0.1
    assert c.adversary.name == "ir-y" and c.adversary.legs is Legs.BOTH
    assert c.check1_fraction == 0.3 and c.check2_fraction == 0.25
    assert c.qber_threshold == 0.2 and c.safety_margin == 10 and c.ec_block_size == 32


def test_defaults():
    c = build_config({})
    assert c.encoding is Encoding.DEPHASING and c.noise_family is None
    assert c.channel_family is NoiseFamily.DEPHASING


@pytest.mark.parametrize(
    "doc",
    [{"colour": 1}, {"noise": {"angle": 1}}, {"adversary": {"eve": "ir-z", "when": 1}}, {"extra": {}}],
)
def test_unknown_keys_rejected(doc):
    with pytest.raises(ConfigError):
        flatten(doc)


@pytest.mark.parametrize(
    "values",
    [{"encoding": "bitflip"}, {"eve": "ir-w"}, {"legs": "sideways"}, {"distribution": "gauss"}, {"rounds": -3}, {"nonsense": 1}],
)
def test_bad_values_rejected(values):
    with pytest.raises(ConfigError):
        build_config(values)


def test_bad_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("rounds = = 3")
    with pytest.raises(ConfigError):
        load_file(path)
