"""Experiment configuration: INI-style ``key = value`` text with sections.

Every key is listed in ``SCHEMA``; anything else is an error.  Example::

    [group]
    family = z16

    [gens]
    kind = standard

    [ball]
    radius = 10

    [ac-probe]
    J = 1
    n_min = 1
    n_max = 3
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from fractions import Fraction

from .groups import Group, GroupElement, make_group
from .metric import GenSet

SCHEMA: dict[str, dict[str, str]] = {
    "group": {
        "family": "lamplighter | lamplighter-<q> | z16 | sol",
        "q": "lamp alphabet size for lamplighter (default 2)",
        "matrix": "four integers a b c d for sol (default 2 1 1 1)",
    },
    "gens": {
        "kind": "standard | good-gen-set | explicit (default standard)",
        "letters": "explicit letters 'm:k' separated by ';'",
    },
    "ball": {
        "radius": "ball radius R (default 8)",
        "file": "ball file name inside --out (default ball.spb)",
    },
    "ac-probe": {
        "J": "witness offset J, or 'auto' (default 1)",
        "n_min": "first n (default J)",
        "n_max": "last n (default 3)",
        "a": "module element a (default: smallest nonzero)",
        "F": "quarter-bound constant used when J = auto",
    },
    "depth-probe": {
        "i_min": "first i (default 0)",
        "i_max": "last i (default 4)",
        "a": "module element a (default: first nonzero digit)",
        "max_steps": "cap on the depth search (default none)",
        "H": "constant in the reported valuation bound (default 0)",
    },
    "valuation-check": {
        "samples": "random samples (default 10000)",
        "seed": "random seed (default 0)",
        "tol": "allowed violation (default 0, or 1e-9 for sol)",
    },
    "lemma-check": {
        "samples": "words per phase (default 1000)",
        "max_length": "maximum word length (default 30)",
        "seed": "random seed (default 0)",
        "side": "+1 for the I1 form, -1 for the I2 form (default 1)",
        "D": "fixed D instead of fitting (default: fit)",
    },
    "quarter-fit": {},
    "decompose-check": {
        "samples": "random fuzz-box samples per phase (default 1000)",
        "seed": "random seed (default 0)",
        "F": "fuzz constant (default 2M + 4C)",
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    text: str
    parser: configparser.ConfigParser

    def get(self, section: str, key: str, default=None):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return default

    def get_int(self, section: str, key: str, default=None):
        v = self.get(section, key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be an integer, got {v!r}") from None

    def get_float(self, section: str, key: str, default=None):
        v = self.get(section, key)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be a number, got {v!r}") from None

    @property
    def family(self) -> str:
        return self.get("group", "family")

    def group(self) -> Group:
        fam = self.family
        q = self.get_int("group", "q", 2)
        matrix = None
        raw = self.get("group", "matrix")
        if raw is not None:
            nums = raw.replace(",", " ").split()
            if len(nums) != 4:
                raise ConfigError("[group] matrix needs four integers")
            try:
                a, b, c, d = map(int, nums)
            except ValueError:
                raise ConfigError(f"[group] matrix must be integers, got {raw!r}") from None
            matrix = ((a, b), (c, d))
        try:
            return make_group(fam, q=q, matrix=matrix)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def radius(self) -> int:
        return self.get_int("ball", "radius", 8)

    def gens(self, group: Group) -> GenSet:
        from .goodgen import good_gen_set_for

        kind = self.get("gens", "kind", "standard")
        if kind == "standard":
            return GenSet(group, group.standard_generators(), name="standard")
        if kind == "good-gen-set":
            try:
                return good_gen_set_for(group).gens()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if kind == "explicit":
            raw = self.get("gens", "letters")
            if not raw:
                raise ConfigError("[gens] kind = explicit needs letters")
            return GenSet(group, [parse_letter(group, x) for x in raw.split(";") if x.strip()],
                          name="explicit")
        raise ConfigError(f"unknown [gens] kind {kind!r}")


def parse_module(group: Group, text: str):
    """Parse a module element: '3/2' (z16), 'e:c,e:c' (lamplighter), 'x,y' (sol)."""
    text = text.strip()
    tag = group.tag
    try:
        if tag == "z16":
            return group.coerce(Fraction(text))
        if tag == "lamplighter":
            if text in ("", "0"):
                return group.zero()
            terms = {}
            for part in text.split(","):
                e, c = part.split(":")
                terms[int(e)] = terms.get(int(e), 0) + int(c)
            return group.coerce(terms)
        if tag == "sol":
            x, y = text.strip("()").split(",")
            return group.coerce((int(x), int(y)))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse module element {text!r}: {exc}") from None
    raise ConfigError(f"no parser for family {tag!r}")


def parse_letter(group: Group, text: str) -> GroupElement:
    m, _, k = text.strip().partition(":")
    try:
        shift = int(m)
    except ValueError:
        raise ConfigError(f"bad letter {text!r}: shift must be an integer") from None
    return group.element(shift, parse_module(group, k) if k.strip() else None)


def load_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    if not parser.has_option("group", "family"):
        raise ConfigError("[group] family is required")
    return ExperimentConfig(text, parser)


def describe_schema() -> str:
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, doc in keys.items():
            lines.append(f"  {key}: {doc}")
    return "\n".join(lines)
