"""Run configuration files.

Configs are INI-style key/value text (configparser); the full schema is
documented in the README.  The [domain] and [grid] sections identify the
eigenproblem and are hashed (sha256 over a canonical rendering) to tie
eigenpair caches to the configs that produced them.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass

from .geometry import (
    AnnulusRegion,
    Barrier,
    BoundaryNeighborhood,
    Disc,
    Polygon,
    RectRegion,
    Rectangle,
    Region,
    SquareMinusObstacle,
    Stadium,
    TorusMinusObstacle,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "domain_from_config", "region_from_scan", "config_hash"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    parser: configparser.ConfigParser
    path: str

    def section(self, name):
        if not self.parser.has_section(name):
            raise ConfigError(f"missing [{name}] section")
        return self.parser[name]

    def get(self, section, key, fallback=None):
        return self.parser.get(section, key, fallback=fallback)

    @property
    def seed(self):
        return self.parser.getint("run", "seed", fallback=0)

    @property
    def threads(self):
        return self.parser.getint("run", "threads", fallback=0)

    @property
    def resolution(self):
        try:
            return self.parser.getint("grid", "resolution")
        except (configparser.Error, ValueError) as exc:
            raise ConfigError(f"bad [grid] resolution: {exc}") from exc


def load_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if not parser.has_section("domain") or not parser.has_section("grid"):
        raise ConfigError("config needs [domain] and [grid] sections")
    return RunConfig(parser=parser, path=path)


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def _obstacle_from(sec):
    shape = sec.get("obstacle_shape", "disc").strip().lower()
    if shape == "none":
        return None
    if shape == "disc":
        cx, cy = _floats(sec.get("obstacle_center", "0.5 0.5"))
        r = float(sec.get("obstacle_radius", "0.25"))
        return Disc((cx, cy), r)
    if shape == "polygon":
        vals = _floats(sec.get("polygon_vertices", ""))
        if len(vals) < 6 or len(vals) % 2:
            raise ConfigError("polygon_vertices needs an even list of >= 6 numbers")
        return Polygon(tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2)))
    raise ConfigError(f"unknown obstacle_shape {shape!r}")


def domain_from_config(cfg):
    sec = cfg.section("domain")
    variant = sec.get("variant", "").strip().lower()
    try:
        if variant == "rectangle":
            return Rectangle(
                a=float(sec.get("a", "1.0")),
                bc_x=sec.get("bc_x", "dirichlet"),
                bc_y=sec.get("bc_y", "dirichlet"),
            )
        if variant == "stadium":
            return Stadium(a=float(sec.get("a", "1.0")), bc=sec.get("outer_bc", "dirichlet"))
        if variant in ("torus_disc", "sinai", "torus"):
            return TorusMinusObstacle(
                obstacle=None if variant == "torus" else _obstacle_from(sec),
                obstacle_bc=sec.get("obstacle_bc", "dirichlet"),
            )
        if variant in ("square_disc", "square_obstacle"):
            return SquareMinusObstacle(
                obstacle=_obstacle_from(sec),
                outer_bc=sec.get("outer_bc", "dirichlet"),
                obstacle_bc=sec.get("obstacle_bc", "dirichlet"),
            )
        if variant == "barrier":
            return Barrier(
                a=float(sec.get("a", "1.0")),
                slit_x=float(sec.get("slit_x", "0.5")),
                slit_y0=float(sec.get("slit_y0", "0.0")),
                slit_y1=float(sec.get("slit_y1", "0.5")),
                bc=sec.get("outer_bc", "dirichlet"),
            )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad [domain] section: {exc}") from exc
    raise ConfigError(f"unknown domain variant {variant!r}")


def region_from_scan(cfg, domain):
    """Region from numbered ``primitiveN`` keys in [scan] (union semantics)."""
    sec = cfg.section("scan")
    parts = []
    for key in sorted(k for k in sec.keys() if k.startswith("primitive")):
        tokens = sec.get(key).split()
        kind = tokens[0].lower()
        vals = [float(t) for t in tokens[1:]]
        if kind == "rect":
            parts.append(RectRegion(*vals))
        elif kind == "annulus":
            parts.append(AnnulusRegion((vals[0], vals[1]), vals[2], vals[3]))
        elif kind == "nbhd":
            parts.append(BoundaryNeighborhood(tokens[1], float(tokens[2])))
        else:
            raise ConfigError(f"unknown region primitive kind {kind!r}")
    if not parts:
        return None
    return Region(tuple(parts))


def config_hash(cfg):
    """sha256 over a canonical rendering of [domain] and [grid]."""
    lines = []
    for name in ("domain", "grid"):
        sec = cfg.section(name)
        for key in sorted(sec.keys()):
            lines.append(f"{name}.{key}={sec.get(key)}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()
