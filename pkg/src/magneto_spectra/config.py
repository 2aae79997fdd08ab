"""Run configuration (TOML) and run manifests.

Schema (all sections optional except ``domain`` and ``field``)::

    [domain]            # type = "disk" | "ellipse" | "fourier" and its parameters
    type = "disk"
    R = 1.0

    [field]
    expr = "2 - x"      # sympy expression in x, y

    [sweep]
    B = [50, 100, 200, 400, 800]     # or: start, stop, num (geometric range)
    floquet_check = false

    [strip]
    floquet = "holonomy"             # or a phase in radians
    t0_factor = 8.0
    t0_cap = 0.9
    h_layer = 0.04
    ns_scale = 24.0
    # ns = 256, nt = 96               # fixed grid sizes (optional)

    [solver]
    tol = 1e-10
    nev = 1
    seed = 0

    [hc3]
    kappa = [5, 10, 20]
    convention = "displayed"

    [output]
    dir = "out"
"""
from __future__ import annotations

import datetime as _dt
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy
import tomli

from . import __version__
from .field import FieldError, FieldModel
from .geometry import BoundaryCurve, GeometryError

__all__ = ["ConfigError", "RunConfig", "load_config", "write_manifest"]

_SCHEMA = {
    "domain": None,  # validated by BoundaryCurve.from_config
    "field": None,  # validated by FieldModel.from_config
    "sweep": {"B": list, "start": float, "stop": float, "num": int, "floquet_check": bool},
    "strip": {"floquet": (str, float), "t0_factor": float, "t0_cap": float, "h_layer": float,
              "ns_scale": float, "ns": int, "nt": int},
    "solver": {"tol": float, "nev": int, "seed": int, "jobs": int},
    "hc3": {"kappa": list, "convention": str, "rtol": float},
    "output": {"dir": str},
}


class ConfigError(ValueError):
    pass


def _check_type(section, key, value, kind):
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if float in kinds and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if int in kinds and isinstance(value, bool):
        raise ConfigError(f"[{section}] {key}: expected integer")
    if not isinstance(value, kinds):
        names = "/".join(k.__name__ for k in kinds)
        raise ConfigError(f"[{section}] {key}: expected {names}, got {type(value).__name__}")
    return value


@dataclass
class RunConfig:
    """Validated, fully resolved run configuration."""

    domain: dict
    field: dict
    sweep: dict = field(default_factory=dict)
    strip: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    hc3: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a table")
        unknown = set(raw) - set(_SCHEMA)
        if unknown:
            raise ConfigError(f"unknown sections: {sorted(unknown)}")
        for req in ("domain", "field"):
            if req not in raw:
                raise ConfigError(f"missing [{req}] section")
        out = {}
        for section, spec in _SCHEMA.items():
            body = raw.get(section, {})
            if not isinstance(body, dict):
                raise ConfigError(f"[{section}] must be a table")
            if spec is None:
                out[section] = dict(body)
                continue
            bad = set(body) - set(spec)
            if bad:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(bad)}")
            out[section] = {k: _check_type(section, k, v, spec[k]) for k, v in body.items()}
        cfg = cls(**out)
        cfg._defaults()
        cfg._validate()
        return cfg

    def _defaults(self):
        self.strip.setdefault("floquet", "holonomy")
        self.strip.setdefault("t0_factor", 8.0)
        self.strip.setdefault("t0_cap", 0.9)
        self.strip.setdefault("h_layer", 0.04)
        self.strip.setdefault("ns_scale", 24.0)
        self.solver.setdefault("tol", 1e-10)
        self.solver.setdefault("nev", 1)
        self.solver.setdefault("seed", 0)
        self.sweep.setdefault("floquet_check", False)
        self.hc3.setdefault("kappa", [5.0, 10.0, 20.0])
        self.hc3.setdefault("convention", "displayed")
        self.hc3.setdefault("rtol", 1e-6)
        self.output.setdefault("dir", "out")

    def _validate(self):
        s = self.sweep
        if "B" in s and any(k in s for k in ("start", "stop", "num")):
            raise ConfigError("[sweep] give either B or start/stop/num, not both")
        if any(k in s for k in ("start", "stop", "num")):
            if not all(k in s for k in ("start", "stop", "num")):
                raise ConfigError("[sweep] geometric range needs start, stop and num")
            if not (0 < s["start"] < s["stop"]) or s["num"] < 2:
                raise ConfigError("[sweep] need 0 < start < stop and num >= 2")
        if "B" in s:
            try:
                s["B"] = [float(b) for b in s["B"]]
            except (TypeError, ValueError):
                raise ConfigError("[sweep] B must be a list of numbers") from None
        fl = self.strip["floquet"]
        if isinstance(fl, str) and fl != "holonomy":
            raise ConfigError("[strip] floquet must be 'holonomy' or a number")
        if not 0 < self.strip["t0_cap"] < 1:
            raise ConfigError("[strip] t0_cap must lie in (0, 1)")
        for key in ("t0_factor", "h_layer", "ns_scale"):
            if self.strip[key] <= 0:
                raise ConfigError(f"[strip] {key} must be positive")
        if not 1e-12 <= self.solver["tol"] < 1e-2:
            raise ConfigError("[solver] tol must lie in [1e-12, 1e-2)")
        if not 1 <= self.solver["nev"] <= 8:
            raise ConfigError("[solver] nev must lie in 1..8")
        if self.solver.get("jobs", 1) < 1:
            raise ConfigError("[solver] jobs must be positive")
        if self.hc3["convention"] not in ("displayed", "inverted"):
            raise ConfigError("[hc3] convention must be 'displayed' or 'inverted'")
        try:
            self.hc3["kappa"] = [float(k) for k in self.hc3["kappa"]]
        except (TypeError, ValueError):
            raise ConfigError("[hc3] kappa must be a list of numbers") from None
        try:
            self.build_field()
        except (GeometryError, FieldError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    # -- builders ------------------------------------------------------------
    def build_curve(self) -> BoundaryCurve:
        return BoundaryCurve.from_config(self.domain)

    def build_field(self) -> FieldModel:
        if not hasattr(self, "_field_model"):
            self._field_model = FieldModel.from_config(self.field, self.build_curve())
        return self._field_model

    def B_list(self) -> list[float]:
        s = self.sweep
        if "B" in s:
            return list(s["B"])
        if "start" in s:
            return [float(b) for b in np.geomspace(s["start"], s["stop"], s["num"])]
        raise ConfigError("[sweep] needs B or start/stop/num")

    def problem(self):
        from .problem import SpectralProblem

        fm = self.build_field()
        st = self.strip
        return SpectralProblem(fm.curve, fm, floquet=st["floquet"], t0_cap=st["t0_cap"],
                               t0_factor=st["t0_factor"], h_layer=st["h_layer"],
                               ns_scale=st["ns_scale"], ns=st.get("ns"), nt=st.get("nt"),
                               tol=self.solver["tol"], seed=self.solver["seed"])

    def to_dict(self) -> dict:
        d = asdict(self)
        return json.loads(json.dumps(d))


def load_config(path) -> RunConfig:
    """Parse and validate a TOML file."""
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return RunConfig.from_dict(raw)


def write_manifest(outdir, command: str, config: RunConfig | None, outputs: list,
                   extra: dict | None = None) -> Path:
    """``manifest-<command>.json`` echoing the resolved config, library versions and outputs."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    man = {
        "command": command,
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "config": config.to_dict() if config is not None else None,
        "outputs": [str(o) for o in outputs],
        **(extra or {}),
    }
    path = outdir / f"manifest-{command}.json"
    path.write_text(json.dumps(man, indent=2, default=float) + "\n")
    return path
