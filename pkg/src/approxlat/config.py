"""Run configuration: a sectioned ``key = value`` text format.

    # comment
    [scheme]
    kind = quadratic        # or padic
    D = 2
    w = 1                   # rationals as "1/2", never decimals
    window_closed = true

Ring elements are written as integer pairs: "m,n" for m + n sqrt(D) and
"a,k" for a / p^k; lists of them are separated by ";". Every key is
validated against a schema and errors carry the line number.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import UsageError


class ConfigError(UsageError):
    pass


def _rational(s: str) -> Fraction:
    if any(c in s for c in ".eE"):
        raise ValueError("decimals are not accepted; write a fraction such as 1/2")
    return Fraction(s.strip())


def _int(s: str) -> int:
    return int(s.strip())


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {s!r}")


def _pair(s: str) -> tuple[int, int]:
    parts = [x.strip() for x in s.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected an integer pair 'x,y', got {s!r}")
    return int(parts[0]), int(parts[1])


def _pairs(s: str) -> list[tuple[int, int]]:
    return [_pair(x) for x in s.split(";") if x.strip()]


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _rationals(s: str) -> list[Fraction]:
    return [_rational(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _word(*choices):
    def parse(s: str) -> str:
        v = s.strip()
        if v not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {v!r}")
        return v
    return parse


def _endos(s: str) -> list[tuple[str, object]]:
    out = []
    for item in s.split(";"):
        item = item.strip()
        if not item:
            continue
        kind, _, arg = item.partition(":")
        kind = kind.strip()
        if kind == "mult":
            out.append(("mult", _pair(arg)))
        elif kind == "scale":
            out.append(("scale", int(arg)))
        else:
            raise ValueError(f"endomorphism must be 'mult:x,y' or 'scale:k', got {item!r}")
    return out


SCHEMA = {
    "scheme": {"kind": _word("quadratic", "padic"), "D": _int, "p": _int, "w": _rational,
               "window_closed": _bool},
    "region": {"T": _rational, "level": _int, "margin": _rational, "lambda_T": _rational,
               "lambda_level": _int},
    "subset": {"kind": _word("full", "empty", "bernoulli", "subwindow", "congruence"),
               "theta": _rational, "seed": _int, "w_sub": _rational, "strict": _bool,
               "modulus": _int, "residues": _ints},
    "query": {"mode": _word("dilation", "integer_multiples"), "F": _pairs, "r": _int, "q": _int,
              "endos": _endos, "delta": _pair, "n": _int, "radius": _rational, "order": _int,
              "V_radius": _rational, "t": _rational, "samples": _int, "seed": _int,
              "synd_margin": _rational},
    "folner": {"scales": _rationals, "thickening": _rational},
    "output": {"directory": str, "formats": lambda s: [x.strip() for x in s.split(",") if x.strip()]},
}


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    text: str = ""

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        if key not in self.sections.get(section, {}):
            raise ConfigError(f"missing required key [{section}] {key}")
        return self.sections[section][key]

    def where(self, section: str, key: str) -> str:
        ln = self.lines.get((section, key))
        return f"[{section}] {key}" + (f" (line {ln})" if ln else "")

    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig(text=text)
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {ln}: malformed section header {raw.strip()!r}")
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {ln}: unknown section [{section}]")
            if section in cfg.sections:
                raise ConfigError(f"line {ln}: duplicate section [{section}]")
            cfg.sections[section] = {}
            continue
        if section is None:
            raise ConfigError(f"line {ln}: key outside any section")
        key, eq, value = line.partition("=")
        key = key.strip()
        if not eq:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        if key not in SCHEMA[section]:
            raise ConfigError(f"line {ln}: unknown key {key!r} in [{section}]")
        if key in cfg.sections[section]:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        try:
            cfg.sections[section][key] = SCHEMA[section][key](value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"line {ln}: bad value for [{section}] {key}: {e}") from None
        cfg.lines[(section, key)] = ln
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
