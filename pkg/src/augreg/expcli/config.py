"""Line-oriented experiment configuration.

Grammar::

    file     := line*
    line     := blank | comment | section | assign
    comment  := '#' anything
    section  := '[' name ']'
    assign   := key '=' value [ '#' comment ]
    value    := item (',' item)*        # two or more items give a list

Items parse as int, then float, then true/false, else stay strings. Keys before
the first section are top-level; later keys are addressed as ``section.key``.
Overrides given as ``--set section.key=value`` use the same value syntax.
"""
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigError

SECTIONS = {
    "": {"preset", "seed", "trials", "task"},
    "params": None,
    "data": {"n", "p", "spectrum", "gamma", "ratio", "a", "b", "split", "signal", "signal_index", "noise", "latent"},
    "augmentation": {"family", "sigma2", "beta", "k", "alpha", "mu", "rotation_form"},
    "output": {"metrics", "solvers", "precomputed_copies", "ridge_lambda"},
}


def parse_item(text):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(text.lower(), text)


def parse_value(text):
    items = [parse_item(t) for t in text.split(",")]
    return items if len(items) > 1 else items[0]


def parse_text(text):
    """Flat dict keyed by ``key`` or ``section.key``."""
    out = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header", path=f"line {lineno}")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]", path=section)
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected key = value", path=f"line {lineno}")
        key = key.strip()
        allowed = SECTIONS[section]
        path = f"{section}.{key}" if section else key
        if allowed is not None and key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {path}", path=path)
        out[path] = parse_value(value)
    return out


def parse_overrides(pairs):
    out = {}
    for pair in pairs or ():
        key, eq, value = pair.partition("=")
        if not eq:
            raise ConfigError(f"override {pair!r} is not key=value", path=pair)
        out[key.strip()] = parse_value(value)
    return out


def as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class ExperimentConfig:
    preset: Optional[str] = None
    seed: int = 0
    params: dict = field(default_factory=dict)
    trials: int = 20
    task: str = "regression"
    data: dict = field(default_factory=dict)
    augmentation: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def build_config(flat, overrides=None):
    """Assemble and validate an ExperimentConfig from parsed key/value pairs."""
    merged = dict(flat)
    for key, value in (overrides or {}).items():
        merged[key] = value
    cfg = ExperimentConfig()
    for key, value in merged.items():
        section, _, name = key.rpartition(".")
        if section == "":
            if name == "preset":
                cfg.preset = str(value)
            elif name == "seed":
                cfg.seed = _int(value, key)
            elif name == "trials":
                cfg.trials = _int(value, key)
            elif name == "task":
                cfg.task = str(value)
            elif "preset" in merged:
                cfg.params[name] = value
            else:
                raise ConfigError(f"unknown key {key}", path=key)
        elif section == "params":
            cfg.params[name] = value
        elif section in ("data", "augmentation", "output"):
            if name not in SECTIONS[section]:
                raise ConfigError(f"unknown key {key}", path=key)
            getattr(cfg, section)[name] = value
        else:
            raise ConfigError(f"unknown section in {key}", path=key)
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1", path="trials")
    if cfg.task not in ("regression", "classification"):
        raise ConfigError("task must be regression or classification", path="task")
    if cfg.preset is None:
        _validate_sweep(cfg)
    elif "trials" in merged:
        cfg.params["trials"] = cfg.trials
    return cfg


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}", path=path)
    return value


def _validate_sweep(cfg):
    if "family" not in cfg.augmentation:
        raise ConfigError("a custom sweep needs augmentation.family", path="augmentation.family")
    for key in ("n", "p"):
        if key not in cfg.data:
            raise ConfigError(f"a custom sweep needs data.{key}", path=f"data.{key}")
        for v in as_list(cfg.data[key]):
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"data.{key} must hold positive integers", path=f"data.{key}")
    if isinstance(cfg.data["p"], list):
        raise ConfigError("data.p takes a single value", path="data.p")
    for key, value in cfg.augmentation.items():
        if key in ("family", "rotation_form"):
            continue
        if not as_list(value):
            raise ConfigError(f"augmentation.{key} grid is empty", path=f"augmentation.{key}")


def load_config(path, overrides=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", path=str(path)) from exc
    return build_config(parse_text(text), overrides)
