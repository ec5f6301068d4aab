"""Config files, canonical dictionaries and hashing.

The file format is flat ``key = value`` lines with ``#`` comments and
optional ``[section]`` headers. Sections only group keys for readability;
every key must be known, whichever section it appears in.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import fields

from .errors import ConfigurationError
from .nonlinearity import CutoffProfile, CutoffShape
from .operators import OperatorKind
from .profiles import InitialDatum
from .schemes import Scheme, SchemeConfig

__all__ = [
    "ConfigParseError",
    "parse_config_text",
    "parse_config_file",
    "scheme_config_from_dict",
    "scheme_config_to_dict",
    "initial_from_dict",
    "canonical_json",
    "config_hash",
    "SCHEME_KEYS",
    "RUN_KEYS",
]


class ConfigParseError(ConfigurationError):
    """Syntax or key error in a config file; carries line/column when known."""

    def __init__(self, message, line=None, column=None, key=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
        self.key = key


def _float(text):
    t = str(text).strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if "**" in t:
        # powers of two are the common way to write time steps: 2**-10, 5*2**-18
        parts = t.split("*")
        try:
            if len(parts) == 3 and parts[1] == "":  # a**b
                return float(parts[0]) ** float(parts[2])
            if len(parts) == 4 and parts[2] == "":  # c*a**b
                return float(parts[0]) * float(parts[1]) ** float(parts[3])
        except ValueError:
            pass
        raise ValueError(f"cannot parse number {text!r}")
    if "/" in t:
        num, den = t.split("/", 1)
        return float(num) / float(den)
    return float(t)


def _int(text):
    value = _float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _int_list(text):
    return tuple(_int(p) for p in str(text).replace(",", " ").split())


def _float_list(text):
    return tuple(_float(p) for p in str(text).replace(",", " ").split())


def _enum(enum_cls):
    def conv(text):
        try:
            return enum_cls(str(text).strip().upper())
        except ValueError:
            allowed = ", ".join(m.value for m in enum_cls)
            raise ValueError(f"{text!r} is not one of {allowed}") from None
    return conv


def _opt_float(text):
    t = str(text).strip().lower()
    return None if t in ("", "none") else _float(t)


# key -> (converter, SchemeConfig field or None)
SCHEME_KEYS = {
    "scheme": (_enum(Scheme), "scheme"),
    "K": (_int, "K"),
    "lambda": (_float, "lam"),
    "alpha": (_float, "alpha"),
    "dt": (_float, "dt"),
    "T": (_float, "T"),
    "B_choice": (_enum(OperatorKind), "B_choice"),
    "theta": (_float, "theta"),
    "C0": (_float, "C0"),
    "Lx": (_opt_float, "Lx"),
    "fp_tol": (_float, "fp_tol"),
    "fp_max_iter": (_int, "fp_max_iter"),
    "quad_oversample": (_int, "quad_oversample"),
    "cutoff_shape": (_enum(CutoffShape), None),
    "cutoff_L": (_float, None),
    "cutoff_k": (_int, None),
}

INITIAL_KEYS = {
    "init": (str, "kind"),
    "x0": (_float, "x0"),
    "width": (_float, "width"),
    "modes": (_int_list, "modes"),
}

RUN_KEYS = {
    "seed": (_int, None),
    "dump_final": (lambda t: str(t).strip().lower() in ("1", "true", "yes", "on"), None),
}

STUDY_KEYS = {
    "kind": (str, None),
    "ladder": (_int_list, None),
    "n_samples": (_int, None),
    "error_norm": (str, None),
    "schemes": (lambda t: tuple(_enum(Scheme)(p) for p in str(t).replace(",", " ").split()), None),
    "k_values": (_int_list, None),
    "n_steps_values": (_int_list, None),
    "lx_values": (_float_list, None),
    "alpha_values": (_float_list, None),
    "eval_points": (_int, None),
    "reference_scheme": (_enum(Scheme), None),
}


def _key_table(lowercase_map):
    return {k.lower(): k for k in lowercase_map}


def parse_config_text(text: str, allowed: dict) -> dict:
    """Parse ``key = value`` text into ``{key: converted value}``.

    A small line parser rather than :mod:`configparser` so that unknown keys
    can be reported with their line and column.

    ``allowed`` maps key names to ``(converter, _)`` pairs; keys are matched
    case-insensitively. Unknown keys, duplicates and bad values raise
    :class:`ConfigParseError` with the offending line.
    """
    lookup = _key_table(allowed)
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigParseError("malformed section header", lineno, 1)
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno, 1)
        key, value = (p.strip() for p in line.split("=", 1))
        col = raw.index(key) + 1 if key else 1
        name = lookup.get(key.lower())
        if name is None:
            raise ConfigParseError(f"unknown key {key!r}", lineno, col, key)
        if name in out:
            raise ConfigParseError(f"duplicate key {key!r}", lineno, col, key)
        conv = allowed[name][0]
        try:
            out[name] = conv(value)
        except (ValueError, TypeError) as exc:
            raise ConfigParseError(f"bad value for {name!r}: {exc}", lineno, raw.index("=") + 2, name) from None
    return out


def parse_config_file(path, allowed: dict) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), allowed)


def parse_override(text: str, allowed: dict) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigParseError(f"override {text!r} must look like key=value")
    parsed = parse_config_text(text, allowed)
    (item,) = parsed.items()
    return item


def scheme_config_from_dict(values: dict, base: SchemeConfig | None = None) -> SchemeConfig:
    kwargs = {} if base is None else {f.name: getattr(base, f.name) for f in fields(SchemeConfig)}
    cutoff = kwargs.get("cutoff", CutoffProfile())
    cut_kwargs = {"L": cutoff.L, "k": cutoff.k, "shape": cutoff.shape}
    for key, value in values.items():
        if key not in SCHEME_KEYS:
            continue
        target = SCHEME_KEYS[key][1]
        if target is not None:
            kwargs[target] = value
        else:
            cut_kwargs[{"cutoff_shape": "shape", "cutoff_L": "L", "cutoff_k": "k"}[key]] = value
    kwargs["cutoff"] = CutoffProfile(**cut_kwargs)
    try:
        return SchemeConfig(**kwargs)
    except ConfigurationError as exc:
        raise ConfigParseError(str(exc)) from None


def initial_from_dict(values: dict, base: InitialDatum | None = None) -> InitialDatum:
    base = base or InitialDatum()
    kwargs = base.to_dict()
    for key, (_, target) in INITIAL_KEYS.items():
        if key in values:
            kwargs[target] = values[key]
    try:
        return InitialDatum(**kwargs)
    except ConfigurationError as exc:
        raise ConfigParseError(str(exc)) from None


def jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    if isinstance(value, (tuple, list)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    return value


def scheme_config_to_dict(cfg: SchemeConfig) -> dict:
    d = {f.name: getattr(cfg, f.name) for f in fields(SchemeConfig)}
    cut = d.pop("cutoff")
    d["cutoff"] = {"L": cut.L, "k": cut.k, "shape": cut.shape}
    return jsonable(d)


def canonical_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    """SHA-256 of the canonical JSON form of ``obj`` (a dict of plain values)."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
