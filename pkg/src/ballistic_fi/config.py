"""Flat key = value configuration files.

One assignment per line, ``#`` comments, blank lines ignored.  Sections are
plain dotted prefixes (``potential.name``, ``grid.resolution``), so files
stay diff-friendly and need no parser dependency.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Union

from .errors import PreconditionError


def parse_config(source: Union[str, Path]) -> Dict[str, str]:
    """Parse a config file (or literal text containing an '=' assignment)."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    elif isinstance(source, str) and "=" in source:
        text = source
    else:
        raise PreconditionError(f"config file not found: {source}")
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"config line {lineno} is not a key = value pair: {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def get_str(cfg: Dict[str, str], key: str, default: Optional[str] = None) -> str:
    if key in cfg:
        return cfg[key]
    if default is None:
        raise PreconditionError(f"missing required config key {key!r}")
    return default


def get_float(cfg: Dict[str, str], key: str, default: Optional[float] = None) -> float:
    if key not in cfg:
        if default is None:
            raise PreconditionError(f"missing required config key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise PreconditionError(f"config key {key!r} is not a number: {cfg[key]!r}") from None


def get_int(cfg: Dict[str, str], key: str, default: Optional[int] = None) -> int:
    return int(get_float(cfg, key, default=None if default is None else float(default)))


def get_floats(cfg: Dict[str, str], key: str, default: Optional[List[float]] = None) -> List[float]:
    if key not in cfg:
        if default is None:
            raise PreconditionError(f"missing required config key {key!r}")
        return list(default)
    try:
        return [float(tok) for tok in cfg[key].replace(",", " ").split()]
    except ValueError:
        raise PreconditionError(f"config key {key!r} is not a number list: {cfg[key]!r}") from None


def potential_params(cfg: Dict[str, str]) -> Dict[str, Union[float, str]]:
    """Collect potential.* keys (minus the name) with numeric coercion."""
    params: Dict[str, Union[float, str]] = {}
    for key, val in cfg.items():
        if not key.startswith("potential.") or key == "potential.name":
            continue
        name = key[len("potential."):]
        try:
            params[name] = float(val)
        except ValueError:
            params[name] = val
    return params
