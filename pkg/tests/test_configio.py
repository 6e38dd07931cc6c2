import hashlib
import json
import random
from fractions import Fraction

import pytest

from fansub.configio import ConfigError, config_to_dict, dumps_config, load_config, loads_config, save_config
from fansub.witness import WITNESS_VALUES, builtin_witness

from conftest import random_config

WITNESS_SHA256 = "525a484faf75a4b38cd3322bbf7aa7c75002ad4c3e8749c4ec4bdf5caf868cca"


def test_builtin_checksum():
    text = dumps_config(builtin_witness())
    assert hashlib.sha256(text.encode()).hexdigest() == WITNESS_SHA256


def test_builtin_table_verbatim(witness):
    doc = config_to_dict(witness)
    assert Fraction(doc["speeds"][0]) == WITNESS_VALUES["nu_minus"]
    written = set(json.dumps(doc).replace('"', " ").replace(",", " ").split())
    for name, v in WITNESS_VALUES.items():
        assert str(v) in written, name


@pytest.mark.parametrize("n", [1, 2, 3])
def test_round_trip_byte_identical(n, tmp_path):
    rng = random.Random(n)
    for _ in range(20):
        cfg = random_config(rng, n)
        text = dumps_config(cfg)
        assert loads_config(text) == cfg
        assert dumps_config(loads_config(text)) == text
    path = tmp_path / "c.json"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_float_values_read_as_decimal_text(witness):
    doc = config_to_dict(witness)
    doc["speeds"][1] = 0.1
    assert loads_config(json.dumps(doc)).speeds[1] == Fraction(1, 10)


def test_corrupted_json_reports_position(witness):
    text = dumps_config(witness)
    broken = text.replace('"speeds": [', '"speeds": [,', 1)
    with pytest.raises(ConfigError, match=r"line \d+ column \d+"):
        loads_config(broken)


@pytest.mark.parametrize("mutate, pattern", [
    (lambda d: d.pop("thermo"), "thermo: missing key"),
    (lambda d: d["speeds"].pop(), "speeds"),
    (lambda d: d["regions"][1].__setitem__("rho", "-1"), r"regions\[1\]"),
    (lambda d: d["regions"][0].__setitem__("C", True), "boolean"),
    (lambda d: d["riemann"].__setitem__("rho_plus", "abc"), "riemann.rho_plus"),
    (lambda d: d.__setitem__("n_waves", 0), "n_waves"),
])
def test_bad_documents_name_the_key(witness, mutate, pattern):
    doc = config_to_dict(witness)
    mutate(doc)
    with pytest.raises(ConfigError, match=pattern):
        loads_config(json.dumps(doc))
