"""Flat key=value run configuration.

One `key = value` pair per line, `#` starts a comment, blank lines ignored.
Keys are the model parameter names plus `seed` and `output`; anything else
is rejected with its line number. Missing keys fall back to the baseline
defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .mdp import MdpError
from .mtd import MtdParams


class ConfigError(ValueError):
    pass


_PARAM_FIELDS = tuple(f.name for f in fields(MtdParams))
_INT_KEYS = ("seed",)
_STR_KEYS = ("output",)


@dataclass
class RunConfig:
    params: MtdParams
    seed: int = 0
    output: str | None = None


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; unknown keys and bad values raise ConfigError."""
    values: dict[str, float] = {}
    seed = 0
    output: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _PARAM_FIELDS:
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} needs a number, got {value!r}") from None
        elif key in _INT_KEYS:
            try:
                seed = int(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} needs an integer, got {value!r}") from None
        elif key in _STR_KEYS:
            output = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        params = MtdParams(**values)
    except MdpError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(params=params, seed=seed, output=output)


def render_config(config: RunConfig) -> str:
    """Emit a config in the same flat format; parse_config round-trips it."""
    lines = [f"{name} = {getattr(config.params, name)!r}" for name in _PARAM_FIELDS]
    lines.append(f"seed = {config.seed}")
    if config.output is not None:
        lines.append(f"output = {config.output}")
    return "\n".join(lines) + "\n"


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig(params=MtdParams())
    with open(path) as fh:
        return parse_config(fh.read())
