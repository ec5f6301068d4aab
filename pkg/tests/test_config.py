import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgpe.config import (
    RUN_KEYS,
    SCHEME_KEYS,
    ConfigParseError,
    canonical_json,
    config_hash,
    initial_from_dict,
    parse_config_text,
    parse_override,
    scheme_config_from_dict,
    scheme_config_to_dict,
)
from sgpe.nonlinearity import CutoffShape
from sgpe.profiles import InitialDatum
from sgpe.schemes import Scheme, SchemeConfig

ALLOWED = {**SCHEME_KEYS, **RUN_KEYS}


def test_parse_sections_comments_and_numbers():
    text = """
    # trajectory settings
    [scheme]
    scheme = split_hermite   # case-insensitive
    K = 48
    dt = 2**-10
    T = 5*2**-8
    lambda = -1
    [run]
    seed = 7
    C0 = inf
    """
    v = parse_config_text(text, ALLOWED)
    assert v["scheme"] is Scheme.SPLIT_HERMITE
    assert v["K"] == 48 and v["seed"] == 7
    assert v["dt"] == 2.0**-10 and v["T"] == 5 * 2.0**-8
    assert v["lambda"] == -1.0 and math.isinf(v["C0"])


@pytest.mark.parametrize("text, line, key", [
    ("K = 8\nbogus = 1\n", 2, "bogus"),
    ("\n\n  K = 8.5\n", 3, "K"),
    ("scheme = NOPE\n", 1, "scheme"),
    ("K = 8\nk = 9\n", 2, "k"),
])
def test_parse_errors_carry_location(text, line, key):
    with pytest.raises(ConfigParseError) as info:
        parse_config_text(text, ALLOWED)
    assert info.value.line == line
    assert info.value.key == key
    assert f"line {line}" in str(info.value)


def test_parse_rejects_malformed_lines():
    with pytest.raises(ConfigParseError):
        parse_config_text("K 8\n", ALLOWED)
    with pytest.raises(ConfigParseError):
        parse_config_text("[scheme\n", ALLOWED)
    with pytest.raises(ConfigParseError):
        parse_override("K", ALLOWED)


def test_override_and_scheme_config():
    key, value = parse_override("alpha=0.25", ALLOWED)
    assert (key, value) == ("alpha", 0.25)
    cfg = scheme_config_from_dict({"K": 16, "alpha": 0.25, "cutoff_shape": CutoffShape.SMOOTHSTEP,
                                   "cutoff_L": 3.0}, SchemeConfig())
    assert cfg.K == 16 and cfg.alpha == 0.25
    assert cfg.cutoff.shape is CutoffShape.SMOOTHSTEP and cfg.cutoff.L == 3.0


def test_scheme_config_errors_are_config_errors():
    with pytest.raises(ConfigParseError):
        scheme_config_from_dict({"K": 0})
    with pytest.raises(ConfigParseError):
        initial_from_dict({"init": "triangle"})


def test_initial_from_dict():
    init = initial_from_dict({"init": "hermite", "modes": (2, 0)})
    assert init == InitialDatum(kind="hermite", modes=(0, 2))


def test_hash_is_stable_and_sensitive():
    a = scheme_config_to_dict(SchemeConfig(K=16))
    b = scheme_config_to_dict(SchemeConfig(K=16))
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(scheme_config_to_dict(SchemeConfig(K=17)))
    assert a["C0"] == "inf"
    assert canonical_json({"b": 1, "a": [1.5, math.inf]}) == '{"a":[1.5,"inf"],"b":1}'


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_values_round_trip(x):
    v = parse_config_text(f"alpha = {x!r}\n", ALLOWED)
    assert v["alpha"] == x
