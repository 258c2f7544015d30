"""INI-style run configuration.

Format: ``[section]`` headers, ``key = value`` lines and ``#`` comments.
Vectors and lists are comma-separated, tuples in parentheses, e.g.::

    [env]
    obstacles = (7,7,2),(3,7,1),(1.5,4,0.5),(4.5,3,1.5),(8,3,0.75)

Every key has a compiled-in default, so an empty file gives the full
navigation setup. Unknown keys and invalid values are rejected with the
file, line and dotted key in the message.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nav
from .policy import RbfGaussianPolicy
from .sweep import default_grid
from .trainer import FORMULATIONS, TrainConfig


class ConfigError(ValueError):
    pass


# value parsers ---------------------------------------------------------

_TUPLE = re.compile(r"\(([^()]*)\)")


def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text):
    parts = [p for p in text.replace("(", "").replace(")", "").split(",") if p.strip()]
    return tuple(float(p) for p in parts)


def _ints(text):
    return tuple(int(p) for p in text.split(",") if p.strip())


def _words(text):
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _vec(n):
    def parse(text):
        vals = _floats(text)
        if len(vals) != n:
            raise ValueError(f"expected {n} numbers, got {len(vals)}")
        return vals

    return parse


def _triples(text):
    groups = _TUPLE.findall(text)
    leftover = _TUPLE.sub("", text).replace(",", "").strip()
    if leftover:
        raise ValueError(f"expected '(x,y,r),(x,y,r),...', got {text!r}")
    out = []
    for g in groups:
        vals = tuple(float(v) for v in g.split(","))
        if len(vals) != 3:
            raise ValueError(f"obstacle {g!r} needs exactly 3 numbers")
        out.append(vals)
    return tuple(out)


def _choice(*options):
    def parse(text):
        value = text.strip()
        if value not in options:
            raise ValueError(f"expected one of {options}, got {value!r}")
        return value

    return parse


# formatting mirrors parsing so resolved configs round-trip exactly


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ",".join("(" + ",".join(_fmt(v) for v in t) + ")" for t in value)
        return ",".join(_fmt(v) for v in value)
    return str(value)


_DEFAULT_TRAIN = TrainConfig()
_DEFAULT_ENV = nav.NavEnvConfig()

SCHEMA = {
    "env": {
        "bounds": (_vec(4), _DEFAULT_ENV.bounds),
        "obstacles": (_triples, _DEFAULT_ENV.obstacles),
        "goal": (_vec(2), _DEFAULT_ENV.goal),
        "horizon": (_int, _DEFAULT_ENV.horizon),
        "step_scale": (_float, _DEFAULT_ENV.step_scale),
        "start": (_vec(2), _DEFAULT_ENV.start),
    },
    "policy": {
        "sigma": (_float, 0.5),
        "cov": (_vec(2), (0.5, 0.5)),
        "spacing": (_float, 0.25),
        "cutoff": (_float, 0.0),
    },
    "train": {
        "formulation": (_choice(*FORMULATIONS), _DEFAULT_TRAIN.formulation),
        "weight": (_float, _DEFAULT_TRAIN.weight),
        "eta": (_float, _DEFAULT_TRAIN.eta),
        "episodes": (_int, _DEFAULT_TRAIN.episodes),
        "batch_size": (_int, _DEFAULT_TRAIN.batch_size),
        "seed": (_int, _DEFAULT_TRAIN.seed),
        "start_mode": (_choice("fixed", "uniform_safe"), _DEFAULT_TRAIN.start_mode),
        "terminal_bonus": (_bool, _DEFAULT_TRAIN.terminal_bonus),
        "log_every": (_int, _DEFAULT_TRAIN.log_every),
        "grad_clip": (_float, _DEFAULT_TRAIN.grad_clip),
        "baseline": (_bool, _DEFAULT_TRAIN.baseline),
        "timing": (_bool, _DEFAULT_TRAIN.timing),
        "checkpoint_every": (_int, _DEFAULT_TRAIN.checkpoint_every),
    },
    "eval": {
        "episodes": (_int, 1000),
        "seed": (_int, 0),
    },
    "sweep": {
        "weights": (_floats, tuple(default_grid())),
        "formulations": (_words, FORMULATIONS),
        "seeds": (_ints, (0, 1, 2)),
        "train_episodes": (_int, 10_000),
        "eval_episodes": (_int, 500),
        "start_mode": (_choice("fixed", "uniform_safe"), "fixed"),
        "eta": (_float, 0.002),
        "jobs": (_int, 1),
    },
    "oracle": {
        "instances": (_int, 25),
        "samples": (_int, 10_000),
        "dual_instances": (_int, 10),
        "xi_points": (_int, 11),
        "seed": (_int, 0),
        "normalized": (_bool, True),
    },
}

# (section, key) -> predicate, message
_CHECKS = {
    ("train", "eta"): (lambda v: v > 0, "must be > 0"),
    ("train", "weight"): (lambda v: v >= 0, "must be >= 0"),
    ("train", "episodes"): (lambda v: v >= 0, "must be >= 0"),
    ("train", "batch_size"): (lambda v: v >= 1, "must be >= 1"),
    ("train", "log_every"): (lambda v: v >= 1, "must be >= 1"),
    ("train", "seed"): (lambda v: 0 <= v < 2**64, "must be an unsigned 64-bit integer"),
    ("eval", "episodes"): (lambda v: v >= 1, "must be >= 1"),
    ("eval", "seed"): (lambda v: 0 <= v < 2**64, "must be an unsigned 64-bit integer"),
    ("policy", "sigma"): (lambda v: v > 0, "must be > 0"),
    ("policy", "cov"): (lambda v: min(v) > 0, "entries must be > 0"),
    ("policy", "spacing"): (lambda v: v > 0, "must be > 0"),
    ("env", "horizon"): (lambda v: v >= 1, "must be >= 1"),
    ("env", "step_scale"): (lambda v: v > 0, "must be > 0"),
    ("sweep", "weights"): (lambda v: len(v) > 0 and min(v) >= 0, "must be a nonempty list of weights >= 0"),
    ("sweep", "formulations"): (lambda v: len(v) > 0 and set(v) <= set(FORMULATIONS),
                                f"must list formulations from {FORMULATIONS}"),
    ("sweep", "seeds"): (lambda v: len(v) > 0 and min(v) >= 0, "must be a nonempty list of seeds"),
    ("sweep", "train_episodes"): (lambda v: v >= 0, "must be >= 0"),
    ("sweep", "eval_episodes"): (lambda v: v >= 1, "must be >= 1"),
    ("sweep", "eta"): (lambda v: v > 0, "must be > 0"),
    ("sweep", "jobs"): (lambda v: v >= 1, "must be >= 1"),
    ("oracle", "instances"): (lambda v: v >= 1, "must be >= 1"),
    ("oracle", "samples"): (lambda v: v >= 1, "must be >= 1"),
    ("oracle", "dual_instances"): (lambda v: v >= 1, "must be >= 1"),
    ("oracle", "xi_points"): (lambda v: v >= 2, "must be >= 2"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})
    source: str = "<defaults>"
    lines: dict = field(default_factory=dict)  # (section, key) -> line number

    def __getitem__(self, section):
        return self.values[section]

    def set(self, section: str, key: str, value, origin: str = "<override>"):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"{origin}: unknown key {section}.{key}")
        check = _CHECKS.get((section, key))
        if check is not None and not check[0](value):
            raise ConfigError(f"{origin}: invalid value for {section}.{key}: {value!r} {check[1]}")
        self.values[section][key] = value

    # builders ---------------------------------------------------------

    def env(self) -> nav.NavEnvConfig:
        e = self.values["env"]
        return nav.NavEnvConfig(e["bounds"], e["obstacles"], e["goal"], e["horizon"], e["step_scale"], e["start"])

    def policy(self) -> RbfGaussianPolicy:
        p = self.values["policy"]
        return RbfGaussianPolicy.default(p["sigma"], p["cov"], p["spacing"], p["cutoff"])

    def train(self) -> TrainConfig:
        return TrainConfig(**self.values["train"])

    def sweep_template(self) -> TrainConfig:
        s = self.values["sweep"]
        return TrainConfig(**{**self.values["train"], "episodes": s["train_episodes"], "eta": s["eta"],
                              "start_mode": s["start_mode"]})

    def validate(self):
        """Cross-field checks; errors name the offending key."""
        try:
            env = self.env()
        except ValueError as exc:
            raise ConfigError(f"{self._where('env', 'bounds')}: env: {exc}") from exc
        for key in ("start", "goal"):
            if not nav.is_safe(env, np.asarray(getattr(env, key))):
                raise ConfigError(f"{self._where('env', key)}: env.{key} lies inside an obstacle")
        return self

    def _where(self, section, key):
        line = self.lines.get((section, key))
        return f"{self.source}:{line}" if line else self.source

    def dumps(self) -> str:
        out = []
        for section, keys in SCHEMA.items():
            out.append(f"[{section}]")
            for key in keys:
                out.append(f"{key} = {_fmt(self.values[section][key])}")
            out.append("")
        return "\n".join(out)


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    rc = RunConfig(source=source)
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside of any [section]")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError(f"{source}:{lineno}: unknown key {section}.{key}")
        parser, _ = SCHEMA[section][key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: malformed value for {section}.{key}: {exc}") from exc
        rc.set(section, key, parsed, origin=f"{source}:{lineno}")
        rc.lines[(section, key)] = lineno
    return rc.validate()


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, str(path))
