"""JSON model files: parsing with located errors, and serialisation.

Schema::

    {
      "horizon": 2,
      "outcomes": [{"name": "w1", "prob": "1/9"}, ...],
      "filtration": [[["w1", "w2", "w3", "w4"]], [["w1", "w2"], ["w3", "w4"]], ...],
      "processes": {"S": [{"w1": "1", ...}, ...]},
      "random_times": {"tau": {"w1": 2, ...}}
    }

Probabilities and values are strings ("2/3", "0.25") so nothing is rounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ModelError
from .filtered_space import (
    AdaptedProcess,
    Filtration,
    SampleSpace,
    as_fraction,
    build_filtration,
    format_fraction,
)
from .random_time import RandomTime


class ModelSyntaxError(ModelError):
    def __init__(self, message, line, column, source="<model>"):
        self.line, self.column = line, column
        super().__init__(f"{source}:{line}:{column}: {message}")


@dataclass(frozen=True)
class Model:
    space: SampleSpace
    filtration: Filtration
    processes: dict
    random_times: dict
    source: str = "<model>"


def _expect(cond, message, path):
    if not cond:
        raise ModelError(message, path=path)


def _number(value, path):
    if isinstance(value, bool) or isinstance(value, float):
        raise ModelError(f"{value!r} is not exact; write numbers as strings or integers", path=path)
    try:
        return as_fraction(value)
    except (TypeError, ValueError) as exc:
        raise ModelError(str(exc), path=path) from None


def model_from_dict(doc, source: str = "<model>") -> Model:
    _expect(isinstance(doc, dict), "top level must be an object", "$")
    for key in ("horizon", "outcomes", "filtration"):
        _expect(key in doc, f"missing key {key!r}", "$")
    unknown = sorted(set(doc) - {"horizon", "outcomes", "filtration", "processes", "random_times"})
    _expect(not unknown, f"unknown keys {unknown}", "$")

    horizon = doc["horizon"]
    _expect(isinstance(horizon, int) and not isinstance(horizon, bool) and horizon >= 1,
            "must be an integer >= 1", "horizon")

    outcomes = doc["outcomes"]
    _expect(isinstance(outcomes, list) and outcomes, "must be a non-empty list", "outcomes")
    names, weights = [], []
    for k, entry in enumerate(outcomes):
        path = f"outcomes[{k}]"
        _expect(isinstance(entry, dict) and "name" in entry and "prob" in entry,
                "needs 'name' and 'prob'", path)
        _expect(isinstance(entry["name"], str) and entry["name"], "name must be a non-empty string", path + ".name")
        _expect(entry["name"] not in names, f"duplicate outcome {entry['name']!r}", path + ".name")
        prob = _number(entry["prob"], path + ".prob")
        _expect(prob > 0, f"probability {format_fraction(prob)} must be strictly positive", path + ".prob")
        names.append(entry["name"])
        weights.append(prob)
    total = sum(weights)
    _expect(total == 1, f"probabilities sum to {format_fraction(total)}, not 1", "outcomes")
    space = SampleSpace(tuple(names), tuple(weights), horizon)

    partitions = doc["filtration"]
    _expect(isinstance(partitions, list), "must be a list of partitions", "filtration")
    _expect(len(partitions) == horizon + 1,
            f"needs {horizon + 1} partitions (times 0..{horizon}), got {len(partitions)}", "filtration")
    for n, level in enumerate(partitions):
        _expect(isinstance(level, list) and all(isinstance(a, list) for a in level),
                "must be a list of atoms (lists of outcome names)", f"filtration[{n}]")
    F = build_filtration(space, partitions)

    processes = {}
    for name, rows in (doc.get("processes") or {}).items():
        path = f"processes.{name}"
        _expect(isinstance(rows, list) and len(rows) == horizon + 1,
                f"needs one table per time 0..{horizon}", path)
        values = []
        for n, row in enumerate(rows):
            _expect(isinstance(row, dict), "must map outcomes to values", f"{path}[{n}]")
            missing = [o for o in names if o not in row]
            extra = [o for o in row if o not in names]
            _expect(not missing, f"missing outcomes {missing}", f"{path}[{n}]")
            _expect(not extra, f"unknown outcomes {extra}", f"{path}[{n}]")
            values.append(tuple(_number(row[o], f"{path}[{n}].{o}") for o in names))
        processes[name] = AdaptedProcess(F, tuple(values), name)

    times = {}
    for name, mapping in (doc.get("random_times") or {}).items():
        path = f"random_times.{name}"
        _expect(isinstance(mapping, dict), "must map outcomes to integers", path)
        for o, v in mapping.items():
            _expect(o in names, "unknown outcome", f"{path}.{o}")
            _expect(isinstance(v, int) and not isinstance(v, bool), f"{v!r} is not an integer", f"{path}.{o}")
            _expect(0 <= v <= horizon, f"{v} outside 0..{horizon}", f"{path}.{o}")
        missing = [o for o in names if o not in mapping]
        _expect(not missing, f"missing outcomes {missing}", path)
        times[name] = RandomTime.from_mapping(space, mapping, name=name)
    return Model(space, F, processes, times, source)


def parse_model_text(text: str, source: str = "<model>") -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno, source) from None
    return model_from_dict(doc, source)


def parse_model(path) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read: {exc.strerror}", path=str(path)) from None
    return parse_model_text(text, str(path))


def model_to_dict(space: SampleSpace, F: Filtration, processes=(), random_times=()) -> dict:
    names = space.outcomes
    return {
        "horizon": space.horizon,
        "outcomes": [{"name": o, "prob": format_fraction(w)} for o, w in zip(names, space.weights)],
        "filtration": [[[names[i] for i in atom] for atom in F.atoms(n)] for n in range(F.horizon + 1)],
        "processes": {
            p.name: [{o: format_fraction(v) for o, v in zip(names, p.at(n))} for n in range(p.horizon + 1)]
            for p in processes
        },
        "random_times": {t.name: dict(zip(names, t.values)) for t in random_times},
    }


def bundled_example(which: int) -> Model:
    """Load one of the two JSON models shipped with the package."""
    from importlib.resources import files

    if which not in (1, 2):
        raise ValueError("bundled examples are 1 and 2")
    resource = files("tauarb").joinpath("data", f"example{which}.json")
    return parse_model_text(resource.read_text(encoding="utf-8"), f"example{which}.json")
