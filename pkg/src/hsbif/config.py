"""Run configuration: grid profiles, INI-style config files, flag override."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class GridProfile:
    name: str
    M_t: int
    M_theta: int
    sl_M: int  # 1D eigensolver grid intervals
    sl_T: float  # 1D eigensolver half-width


PROFILES = {
    "coarse": GridProfile("coarse", 201, 33, 1000, 16.0),
    "default": GridProfile("default", 801, 129, 2000, 20.0),
    "fine": GridProfile("fine", 1601, 257, 4000, 24.0),
}


@dataclass
class RunConfig:
    """Flat, fully serializable run configuration.

    Every report embeds the config that produced it.  Values come from an
    INI file ([run] section) updated by command-line flags; flags win.
    """

    N: int = 3
    s: float = 0.0
    gamma: float = -0.25
    j: int = 1
    j_max: int = 6
    profile: str = "default"
    out: str = ""  # empty: no report files written
    cone: str = "k1+"
    from_point: str = "gamma1"
    gamma_min: float = -0.6
    steps: int = 200
    tol: float = 1e-10
    symmetry: str = "axial"
    morse_symmetry: str = "full"
    dump_eigenvectors: bool = False

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise ValueError(
                f"unknown profile {self.profile!r}; expected one of {sorted(PROFILES)}"
            )

    @property
    def grid_profile(self) -> GridProfile:
        return PROFILES[self.profile]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_ini(cls, path: str | Path) -> "RunConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValueError(f"config file {path} not found or unreadable")
        if "run" not in parser:
            raise ValueError(f"config file {path} lacks a [run] section")
        section = parser["run"]
        kwargs = {}
        for f in fields(cls):
            if f.name not in section:
                continue
            raw = section[f.name]
            if f.type in ("int", int):
                kwargs[f.name] = int(raw)
            elif f.type in ("float", float):
                kwargs[f.name] = float(raw)
            elif f.type in ("bool", bool):
                kwargs[f.name] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                kwargs[f.name] = raw
        return cls(**kwargs)

    def override(self, **flags) -> "RunConfig":
        """New config with non-None flag values replacing file values."""
        data = self.to_dict()
        for key, val in flags.items():
            if val is not None:
                data[key] = val
        return RunConfig(**data)
