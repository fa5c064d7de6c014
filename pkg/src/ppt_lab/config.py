"""Run configuration: flat ``key = value`` files merged with CLI flags."""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from fractions import Fraction

from . import actions as A
from . import groups as G
from .product import ProductAction


class ConfigError(ValueError):
    pass


def _int(text):
    try:
        return int(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected an integer, got {text!r}") from exc


def _nonneg(text):
    v = _int(text)
    if v < 0:
        raise ConfigError(f"expected a nonnegative integer, got {v}")
    return v


def _positive(text):
    v = _int(text)
    if v < 1:
        raise ConfigError(f"expected a positive integer, got {v}")
    return v


def _int_list(text):
    out = [_nonneg(x) for x in str(text).split(",") if x.strip()]
    if not out:
        raise ConfigError("expected a comma-separated list of integers")
    return out


def _float(text):
    try:
        return float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected a number, got {text!r}") from exc


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def convert(text):
        value = str(text).strip().lower()
        if value not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {text!r}")
        return value
    return convert


def _text(text):
    return str(text).strip()


# name -> (converter, default)
FIELDS = {
    "group": (_choice("lamplighter", "bs", "free", "zn"), None),
    "n": (_int, None),
    "rank": (_positive, None),
    "dim": (_positive, None),
    "actions": (_text, None),
    "gens": (_text, None),
    "element": (_text, None),
    "side": (_choice("right", "left"), "right"),
    "L": (_nonneg, None),
    "r": (_int_list, None),
    "delta": (_positive, 2),
    "W": (_positive, None),
    "N": (_positive, None),
    "g": (_text, None),
    "h": (_text, None),
    "alpha": (_text, None),
    "matrix": (_text, None),
    "radius": (_nonneg, 32),
    "r0": (_nonneg, 2),
    "reverse": (_bool, False),
    "max_lamps": (_nonneg, 2),
    "samples": (_nonneg, 200),
    "seed": (_int, 0),
    "n0_max": (_nonneg, 8),
    "depth": (_nonneg, None),
    "margin": (_float, 0.5),
    "edges": (_text, None),
    "budget": (_positive, None),
    "format": (_choice("json", "csv", "text"), "json"),
    "output": (_text, None),
    "threads": (_positive, 1),
}

ALIASES = {"space": "actions", "l": "L", "w": "W", "r_grid": "r"}
# fields that never influence the emitted report
PLUMBING = ("format", "output", "threads", "edges", "budget")


def canonical_key(key):
    key = key.strip().replace("-", "_")
    if key in FIELDS:
        return key
    low = key.lower()
    if low in ALIASES:
        return ALIASES[low]
    if low in FIELDS:
        return low
    raise ConfigError(f"unknown configuration key {key!r}")


def read_config_file(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = canonical_key(key)
        if key in out:
            raise ConfigError(f"{path}:{num}: duplicate key {key!r}")
        out[key] = value.strip().strip('"').strip("'")
    return out


@dataclass
class RunConfig:
    group: str = None
    n: int = None
    rank: int = None
    dim: int = None
    actions: str = None
    gens: str = None
    element: str = None
    side: str = "right"
    L: int = None
    r: list = None
    delta: int = 2
    W: int = None
    N: int = None
    g: str = None
    h: str = None
    alpha: str = None
    matrix: str = None
    radius: int = 32
    r0: int = 2
    reverse: bool = False
    max_lamps: int = 2
    samples: int = 200
    seed: int = 0
    n0_max: int = 8
    depth: int = None
    margin: float = 0.5
    edges: str = None
    budget: int = None
    format: str = "json"
    output: str = None
    threads: int = 1

    @classmethod
    def from_sources(cls, file_values=None, flag_values=None):
        """Defaults, then the config file, then flags (flags win)."""
        merged = {}
        for source in (file_values or {}, flag_values or {}):
            for key, value in source.items():
                if value is not None:
                    merged[canonical_key(key)] = value
        values = {}
        for key, raw in merged.items():
            convert = FIELDS[key][0]
            try:
                values[key] = convert(raw) if isinstance(raw, str) else raw
            except ConfigError as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        return cls(**values)

    def to_dict(self, keys=None):
        """The resolved configuration echoed into reports."""
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in PLUMBING and getattr(self, f.name) is not None
                and (keys is None or f.name in keys)}

    # ------------------------------------------------------------------
    # typed views

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"missing required setting(s): {', '.join(missing)}")

    def build_group(self):
        self.require("group")
        try:
            return G.make_group(self.group, n=self.n, rank=self.rank, dim=self.dim)
        except G.GroupError as exc:
            raise ConfigError(str(exc)) from exc

    def element_list(self, group, text):
        return [group.parse_element(t) for t in split_elements(text)]

    def generators(self, group):
        if self.gens:
            return self.element_list(group, self.gens)
        return list(group.generators().values())

    def action_list(self, group):
        self.require("actions")
        return [parse_action(item, group) for item in split_top_level(self.actions)]

    def product(self, group):
        return ProductAction(self.action_list(group))

    def single_action(self, group):
        acts = self.action_list(group)
        if len(acts) != 1:
            raise ConfigError("this command takes exactly one action")
        return acts[0]

    def rational_matrix(self):
        self.require("matrix")
        rows = []
        for row in self.matrix.split(";"):
            if not row.strip():
                continue
            try:
                rows.append([Fraction(x.strip()) for x in row.split(",")])
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad matrix row {row!r}") from exc
        if not rows or len({len(r) for r in rows}) != 1:
            raise ConfigError("matrix rows must be nonempty and of equal length")
        return rows


def split_top_level(text):
    """Split on commas that are not inside parentheses."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    parts.append("".join(current).strip())
    if depth != 0 or any(not p for p in parts):
        raise ConfigError(f"malformed action list {text!r}")
    return parts


def split_elements(text):
    """Elements separated by ``|``; plain words may also use commas."""
    text = text.strip()
    if "|" in text:
        parts = text.split("|")
    elif "=" in text:
        parts = [text]
    else:
        parts = text.split(",")
    parts = [p.strip() for p in parts]
    if not parts or any(not p for p in parts):
        raise ConfigError(f"malformed element list {text!r}")
    return parts


_LINE = re.compile(r"^line\((.*)\)$", re.IGNORECASE)


def parse_action(text, group):
    """``t1``, ``t2``, ``tn``, ``h2``, ``cayley`` or ``line(c1,...,ck)``."""
    m = _LINE.match(text.strip())
    try:
        if m:
            coeffs = [Fraction(x.strip()) for x in m.group(1).split(",")]
            return A.make_action("line", group, coeffs)
        return A.make_action(text.strip(), group)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad action {text!r}: {exc}") from exc
