"""Text formats: ``.game`` table games, ``.pmf`` joint distributions and
INI experiment configs.

A ``.game`` file::

    # matching game
    [game]
    name = matching
    actions = 2 2

    [satisfy]
    # player : opponents' actions in player order -> satisfying actions
    0 : 0 -> 0
    0 : 1 -> 1
    1 : 0 -> 0
    1 : 1 -> 1

Opponent profiles that are not listed have an empty satisfying set.  A
``.pmf`` file has one ``a_1 a_2 ... : probability`` line per support point;
probabilities may be decimals or fractions such as ``1/3``.
"""

from __future__ import annotations

import configparser
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .equilibrium import JointPmf
from .errors import ConfigError, ParseError
from .game import iter_profiles, opponents
from .games import TableGame


def _lines(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror or exc}", path=path) from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, raw, line


def _ints(text, path, lineno, raw, what):
    try:
        return tuple(int(x) for x in text.split())
    except ValueError:
        raise ParseError(f"{what} must be whitespace-separated integers", path, lineno, raw) from None


def read_game(path) -> TableGame:
    """Parse a ``.game`` file into a :class:`TableGame`."""
    section, meta, rules = None, {}, []
    for lineno, raw, line in _lines(path):
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", path, lineno, raw)
            section = line[1:-1].strip().lower()
            if section not in ("game", "satisfy"):
                raise ParseError(f"unknown section [{section}]", path, lineno, raw)
        elif section == "game":
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError("expected 'key = value'", path, lineno, raw)
            meta[key.strip().lower()] = (value.strip(), lineno, raw)
        elif section == "satisfy":
            rules.append((lineno, raw, line))
        else:
            raise ParseError("content before the [game] section", path, lineno, raw)
    if "actions" not in meta:
        raise ParseError("missing 'actions' in [game]", path=path)
    value, lineno, raw = meta["actions"]
    counts = _ints(value, path, lineno, raw, "actions")
    if len(counts) < 2 or min(counts) < 1:
        raise ParseError("need at least 2 players with at least one action each", path, lineno, raw)
    if "players" in meta:
        value, lineno, raw = meta["players"]
        if _ints(value, path, lineno, raw, "players") != (len(counts),):
            raise ParseError(f"players does not match the {len(counts)} action counts",
                             path, lineno, raw)
    name = meta.get("name", (Path(path).stem,))[0]

    table = [np.zeros(counts, dtype=bool) for _ in counts]
    seen = set()
    for lineno, raw, line in rules:
        head, sep, rhs = line.partition("->")
        player, sep2, opp = head.partition(":")
        if not sep or not sep2:
            raise ParseError("expected 'player : opponent actions -> satisfying actions'",
                             path, lineno, raw)
        ids = _ints(player, path, lineno, raw, "player")
        i = ids[0] if len(ids) == 1 else -1
        if not 0 <= i < len(counts):
            raise ParseError(f"player must lie in [0, {len(counts)})", path, lineno, raw)
        a_minus = _ints(opp, path, lineno, raw, "opponent actions")
        others = counts[:i] + counts[i + 1:]
        if len(a_minus) != len(others) or any(not 0 <= x < c for x, c in zip(a_minus, others)):
            raise ParseError(f"opponent profile must have {len(others)} entries within {others}",
                             path, lineno, raw)
        if (i, a_minus) in seen:
            raise ParseError("duplicate rule", path, lineno, raw)
        seen.add((i, a_minus))
        for x in _ints(rhs, path, lineno, raw, "satisfying actions"):
            if not 0 <= x < counts[i]:
                raise ParseError(f"action {x} out of range for player {i}", path, lineno, raw)
            table[i][a_minus[:i] + (x,) + a_minus[i:]] = True
    return TableGame(table, name=name)


def write_game(game, path) -> None:
    """Write any deterministic game in ``.game`` form by enumeration."""
    counts = game.action_counts
    lines = ["[game]", f"name = {getattr(game, 'name', 'game')}",
             "actions = " + " ".join(map(str, counts)), "", "[satisfy]"]
    for i in range(len(counts)):
        for a in iter_profiles(counts):
            if a[i] != 0:
                continue
            o = opponents(a, i)
            s = sorted(game.correspondence(i, o))
            if s:
                lines.append(f"{i} : {' '.join(map(str, o))} -> {' '.join(map(str, s))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pmf(path, action_counts: Optional[tuple] = None) -> JointPmf:
    probs = {}
    for lineno, raw, line in _lines(path):
        lhs, sep, rhs = line.rpartition(":")
        if not sep:
            raise ParseError("expected 'a_1 ... a_N : probability'", path, lineno, raw)
        a = _ints(lhs, path, lineno, raw, "profile")
        try:
            p = float(Fraction(rhs.strip()))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad probability {rhs.strip()!r}", path, lineno, raw) from None
        if action_counts is not None and (len(a) != len(action_counts) or
                                          any(not 0 <= x < c for x, c in zip(a, action_counts))):
            raise ParseError(f"profile {a} is not valid for action counts {tuple(action_counts)}",
                             path, lineno, raw)
        if a in probs:
            raise ParseError(f"duplicate profile {a}", path, lineno, raw)
        probs[a] = p
    if not probs:
        raise ParseError("pmf file has no support points", path=path)
    try:
        return JointPmf(probs)
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from exc


def write_pmf(pmf: JointPmf, path) -> None:
    lines = [f"{' '.join(map(str, a))} : {p!r}" for a, p in sorted(pmf.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ------------------------------------------------------------------ configs

PRESETS = ("table1", "table2", "rat_1.5", "rat_2.0", "rat_2.2", "rat_2.8")

_FLOAT_PAIRS = ("capacity_window", "demand_window")
_INTS = ("iterations", "realizations", "window", "env_samples", "seed", "tremble_cutoff",
         "num_agents", "num_resources", "instance_seed", "num_users", "num_wifi", "num_lte")
_FLOATS = ("mu", "tremble", "wifi_capacity", "lte_capacity", "threshold")
_STRS = ("game", "service", "instance_file", "game_file", "stochastic_rule")


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("satgame.presets").joinpath(f"{name}.ini").read_text(encoding="utf-8")


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse an INI experiment config into ``ExperimentConfig`` keyword arguments
    plus the study-level ``instances`` and ``fast_iterations`` entries."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"bad config: {exc}", path=source) from exc
    if "experiment" not in cp:
        raise ParseError("missing [experiment] section", path=source)
    sec = cp["experiment"]
    out = {}
    try:
        for key, value in sec.items():
            if key in _INTS:
                out[key] = int(value)
            elif key in _FLOATS:
                out[key] = float(value)
            elif key in _STRS:
                out[key] = value.strip()
            elif key in _FLOAT_PAIRS:
                lo, hi = (float(x) for x in value.split(","))
                out[key] = (lo, hi)
            elif key == "algorithms":
                out[key] = tuple(x.strip() for x in value.split(",") if x.strip())
            elif key == "instances":
                out[key] = int(value)
            elif key == "fast_iterations":
                out[key] = int(value)
            else:
                raise ParseError(f"unknown key {key!r} in [experiment]", path=source)
    except ValueError as exc:
        raise ParseError(f"bad value in [experiment]: {exc}", path=source) from exc
    return out


def load_config(path_or_preset: str) -> dict:
    if path_or_preset in PRESETS:
        return parse_config(preset_text(path_or_preset), f"preset:{path_or_preset}")
    path = Path(path_or_preset)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror or exc}", path=path) from exc
    return parse_config(text, str(path))
