"""JSON system descriptions: parsing, validation and canonical emission.

A document has four blocks::

    {
      "shift":     {"alphabet_size": 2, "incidence": ["11", "11"], "labels": ["+1", "-1"]},
      "potential": {"memory": 1, "mode": "exact",
                    "entries": [{"word": [0], "weight": "1"}, {"word": [1], "weight": "4"}]},
      "group":     {"kind": "lattice", "d": 1, "psi": [[1], [-1]]},
      "task":      {"name": "skew-pressure", "N": 40, "anchor": 0}
    }

Shortcuts accepted on input: ``{"full": t}`` and ``{"free_rank": t}`` for the
shift, ``{"kind": "finite", "order": n}`` for a cyclic group, and an omitted
potential (zero potential). The canonical form always spells everything out.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .groups import FiniteGroup, FreeGroup, GroupExtendedSystem, LatticeGroup, SymbolMap
from .potentials import LocallyConstantPotential
from .shift import MarkovShift, sigma_free


class ConfigError(ValueError):
    pass


TASK_DEFAULTS = {
    "N": 40,
    "anchor": 0,
    "tol": 1e-12,
    "window": None,
    "ball_radius": 6,
    "depth": 8,
    "precision": None,
    "pressure": None,
    "output": None,
    "budget": None,   # group-ball bucket cap for the skew dynamic programs
}


@dataclass(frozen=True, eq=False)
class SystemConfig:
    shift: MarkovShift
    potential: LocallyConstantPotential
    system: Optional[GroupExtendedSystem]
    task: dict = field(default_factory=dict)

    @property
    def task_name(self) -> Optional[str]:
        return self.task.get("name")

    def param(self, key):
        return self.task.get(key, TASK_DEFAULTS.get(key))

    def to_dict(self) -> dict:
        return canonical_dict(self)

    def dumps(self) -> str:
        return dumps(self.to_dict())

    def digest(self) -> str:
        body = {k: v for k, v in self.to_dict().items() if k != "task"}
        return hashlib.sha256(dumps(body).encode()).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x, key=repr)
    raise TypeError(f"not serialisable: {type(x).__name__}")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_weight(raw, exact: bool):
    if isinstance(raw, str):
        try:
            w = Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad weight {raw!r}; expected a decimal or 'p/q'")
    elif isinstance(raw, int) and not isinstance(raw, bool):
        w = Fraction(raw)
    elif isinstance(raw, float):
        w = Fraction(raw) if exact else raw
    else:
        raise ConfigError(f"bad weight {raw!r}")
    if w <= 0:
        raise ConfigError(f"weights must be positive, got {raw!r}")
    return w if exact else float(w)


def _parse_shift(block) -> MarkovShift:
    if not isinstance(block, dict):
        raise ConfigError("shift block must be an object")
    labels = block.get("labels")
    try:
        if "full" in block:
            return MarkovShift.full(int(block["full"]), labels)
        if "free_rank" in block:
            return sigma_free(int(block["free_rank"]))
        rows = block.get("incidence")
        if not isinstance(rows, list) or not all(isinstance(r, str) for r in rows):
            raise ConfigError("shift.incidence must be a list of 0/1 strings")
        n = block.get("alphabet_size", len(rows))
        if n != len(rows):
            raise ConfigError(f"alphabet_size {n} but {len(rows)} incidence rows")
        return MarkovShift.from_rows(rows, labels)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _parse_potential(block, shift: MarkovShift, precision=None) -> LocallyConstantPotential:
    if block is None:
        pot = LocallyConstantPotential.zero(shift)
        return pot.as_float() if precision == "float" else pot
    if not isinstance(block, dict):
        raise ConfigError("potential block must be an object")
    mode = precision or block.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise ConfigError(f"potential mode must be exact or float, got {mode!r}")
    exact = mode == "exact"
    memory = int(block.get("memory", 1))
    table = {}
    for k, entry in enumerate(block.get("entries", [])):
        word = tuple(int(s) for s in entry.get("word", ()))
        if len(word) != memory:
            raise ConfigError(f"potential entry {k}: word {word} has length != memory {memory}")
        if word in table:
            raise ConfigError(f"potential entry {k}: duplicate word {word}")
        if "weight" in entry:
            table[word] = _parse_weight(entry["weight"], exact)
        elif "log" in entry:
            import math
            if exact:
                raise ConfigError(f"potential entry {k}: log values need mode 'float'")
            table[word] = math.exp(float(entry["log"]))
        else:
            raise ConfigError(f"potential entry {k} needs 'weight' or 'log'")
    try:
        return LocallyConstantPotential(shift, memory, table)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _parse_group(block, shift: MarkovShift) -> Optional[GroupExtendedSystem]:
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ConfigError("group block must be an object")
    kind = block.get("kind")
    try:
        if kind == "lattice":
            G = LatticeGroup(int(block["d"]))
        elif kind == "finite":
            if "table" in block:
                G = FiniteGroup(block["table"], int(block.get("identity", 0)))
            else:
                G = FiniteGroup.cyclic(int(block["order"]))
        elif kind == "free":
            G = FreeGroup(int(block["rank"]))
        else:
            raise ConfigError(f"unknown group kind {kind!r}")
        psi = block.get("psi")
        if not isinstance(psi, list) or len(psi) != shift.alphabet_size:
            raise ConfigError(f"group.psi must list one element per symbol ({shift.alphabet_size})")
        return GroupExtendedSystem(shift, SymbolMap(G, tuple(psi)))
    except ConfigError:
        raise
    except (KeyError, TypeError) as e:
        raise ConfigError(f"group block: missing or bad field {e}") from None
    except ValueError as e:
        raise ConfigError(f"group block: {e}") from None


def parse(doc: dict, precision: Optional[str] = None) -> SystemConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"shift", "potential", "group", "task"}
    if unknown:
        raise ConfigError(f"unknown top-level blocks {sorted(unknown)}")
    if "shift" not in doc:
        raise ConfigError("missing shift block")
    task = dict(doc.get("task") or {})
    precision = precision or task.get("precision")
    shift = _parse_shift(doc["shift"])
    pot = _parse_potential(doc.get("potential"), shift, precision)
    system = _parse_group(doc.get("group"), shift)
    for key in ("N", "anchor", "ball_radius", "depth", "window", "budget"):
        v = task.get(key)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise ConfigError(f"task.{key} must be a nonnegative integer")
    for key in ("N", "budget"):
        if task.get(key, 1) is not None and task.get(key, 1) < 1:
            raise ConfigError(f"task.{key} must be >= 1")
    if not 0 <= task.get("anchor", 0) < shift.alphabet_size:
        raise ConfigError(f"task.anchor outside 0..{shift.alphabet_size - 1}")
    return SystemConfig(shift, pot, system, task)


def loads(text: str, precision: Optional[str] = None) -> SystemConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}") from None
    return parse(doc, precision)


def _element_json(G, g):
    if G.kind == "lattice":
        return list(g)
    if G.kind == "free":
        return list(g)
    return int(g)


def canonical_dict(cfg: SystemConfig) -> dict:
    shift = cfg.shift
    out = {"shift": {"alphabet_size": shift.alphabet_size, "incidence": shift.rows()}}
    if shift.labels is not None:
        out["shift"]["labels"] = list(shift.labels)
    pot = cfg.potential
    entries = []
    for w in sorted(pot.weights):
        v = pot.weights[w]
        entries.append({"word": list(w), "weight": fraction_str(v) if isinstance(v, Fraction) else repr(float(v))})
    out["potential"] = {"memory": pot.memory, "mode": "exact" if pot.exact else "float", "entries": entries}
    if cfg.system is not None:
        G = cfg.system.group
        block = dict(G.describe())
        if G.kind == "finite":
            block["identity"] = G.identity
        block["psi"] = [_element_json(G, g) for g in cfg.system.psi.images]
        out["group"] = block
    if cfg.task:
        out["task"] = copy.deepcopy(cfg.task)
    return out


def load(path_or_name, precision: Optional[str] = None) -> SystemConfig:
    """Load a config from a path, or a bundled config by name."""
    p = Path(str(path_or_name))
    if p.exists():
        return loads(p.read_text(), precision)
    name = str(path_or_name)
    if not name.endswith(".json"):
        name += ".json"
    res = resources.files("skewlab.configs").joinpath(name)
    if not res.is_file():
        raise ConfigError(f"no config file or bundled config named {path_or_name!r}")
    return loads(res.read_text(), precision)


def bundled_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("skewlab.configs").iterdir()
                  if p.name.endswith(".json"))
