"""Centralized defaults, overridable from a key=value file or keyword arguments."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Config:
    # truncation window and evaluation grid
    x_min: float = 1e-6
    x_max: float = 1e6
    grid_points: int = 512          # source cells for best-constant searches
    pad_decades: float = 4.0        # outer evaluation grid extends this far beyond the window
    pad_cells: int = 32
    gl_order: int = 2
    quad_rtol: float = 1e-8
    # oracle
    restarts: int = 16
    max_iter: int = 500
    seed: int = 42
    tol: float = 1e-5
    patience: int = 5
    # localized norms inside A2-type constants
    local_cells: int = 96
    local_restarts: int = 4
    local_max_iter: int = 200
    t_per_cell: int = 4             # extra log-uniform t points per dyadic cell
    max_levels: int = 128           # dyadic levels used inside A2-type constants
    # quadrature density (nodes per decade) in the maximal-operator constants
    gamma_per_decade: int = 8
    # kernels
    oinarov_samples: int = 100_000
    chain_cap: float = 1e3
    # equivalence band
    band_lo: float = 1.0 / 16.0
    band_hi: float = 4.0

    def replace(self, **kw) -> "Config":
        data = asdict(self)
        for k, v in kw.items():
            if v is None:
                continue
            if k not in data:
                raise KeyError(f"unknown config key {k!r}")
            data[k] = type(data[k])(v)
        return Config(**data)

    def to_json(self) -> dict:
        return asdict(self)


_ALIASES = {
    "oracle.restarts": "restarts",
    "oracle.max_iter": "max_iter",
    "oracle.seed": "seed",
    "oracle.grid_points": "grid_points",
    "grid.x_min": "x_min",
    "grid.x_max": "x_max",
    "band.lo": "band_lo",
    "band.hi": "band_hi",
}


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    out = {}
    names = {f.name for f in fields(Config)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in names:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        out[key] = val
    return out


def load_config(path: str | None = None, **overrides) -> Config:
    """Defaults, then the file (explicit path or $HOL_CONFIG), then overrides."""
    cfg = Config()
    path = path or os.environ.get("HOL_CONFIG")
    if path:
        with open(path, encoding="utf-8") as fh:
            cfg = cfg.replace(**parse_config_text(fh.read()))
    return cfg.replace(**overrides)


DEFAULT = Config()
