"""Problem configuration: JSON schema validation plus cross-field rules."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import jsonschema

from .errors import ConfigurationError

DEFAULTS = {
    "cutoffs": {"mu_max": 60.0},
    "checks": ["lam1"],
    "verify": {
        "enabled": False, "mu_max": 30.0, "quadrature": [64, 128], "samples": 100,
        "steps": 25, "step_size": 0.05, "max_branches": 1, "pairing": "tk",
    },
    "search": {"lo": [-2.0, -2.0], "hi": [2.0, 2.0], "n": 9},
}


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("symbreak").joinpath("schemas", name).read_text()
    return json.loads(text)


class ConfigErrors(ConfigurationError):
    """Every violation found in a configuration, each as ``"path: message"``."""

    def __init__(self, problems: list):
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


def _path(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def _schema_problems(doc) -> list:
    validator = jsonschema.Draft202012Validator(load_schema("config.schema.json"))
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        if err.validator == "oneOf" and err.context:
            # report the branch matching the declared mode instead of the oneOf summary
            mode = err.instance.get("mode") if isinstance(err.instance, dict) else None
            idx = {"polynomial": 0, "table": 1}.get(mode)
            sub = [e for e in err.context if idx is None or e.relative_schema_path[0] == idx]
            for e in sub:
                out.append(f"{_path(e)}: {e.message}")
            if not sub:
                out.append(f"{_path(err)}: {err.message}")
        else:
            out.append(f"{_path(err)}: {err.message}")
    return out


def _semantic_problems(doc) -> list:
    out = []
    dom = doc.get("domain", {}).get("kind")
    amb = doc.get("group", {}).get("ambient")
    expected = {"SO2_on_disc": "disc", "SO3_on_ball": "ball"}.get(amb)
    if dom and expected and dom != expected:
        out.append(f"group/ambient: {amb} acts on a {expected}, but domain/kind is {dom}")
    verify = doc.get("verify", {})
    if verify.get("enabled"):
        if doc.get("F", {}).get("mode") != "polynomial":
            out.append("verify/enabled: verification requires F/mode = polynomial")
        if dom != "disc":
            out.append("verify/enabled: verification requires domain/kind = disc")
    return out


@dataclass(frozen=True)
class ProblemConfig:
    raw: dict  # the document with defaults filled in

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def mu_max(self) -> float:
        return float(self.raw["cutoffs"]["mu_max"])

    @property
    def subgroup(self) -> str:
        return self.raw["group"].get("subgroup", "trivial")


def with_defaults(doc: dict) -> dict:
    out = copy.deepcopy(doc)
    out["domain"].setdefault("radius", 1.0)
    out["group"].setdefault("subgroup", "trivial")
    out.setdefault("cutoffs", {}).setdefault("mu_max", DEFAULTS["cutoffs"]["mu_max"])
    out.setdefault("checks", list(DEFAULTS["checks"]))
    v = out.setdefault("verify", {})
    for k, val in DEFAULTS["verify"].items():
        v.setdefault(k, copy.deepcopy(val))
    if out["F"]["mode"] == "polynomial" and "points" not in out["F"]:
        s = out["F"].setdefault("search", {})
        for k, val in DEFAULTS["search"].items():
            s.setdefault(k, copy.deepcopy(val))
    out.setdefault("output", {})
    return out


def validate(doc) -> list:
    problems = _schema_problems(doc)
    if not problems:
        problems = _semantic_problems(doc)
    return problems


def parse_config(text: str) -> ProblemConfig:
    """Validate a JSON document; raises ConfigErrors listing every violation."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigErrors([f"<root>: not valid JSON ({exc})"]) from exc
    problems = validate(doc)
    if problems:
        raise ConfigErrors(problems)
    return ProblemConfig(with_defaults(doc))


def load_config(path) -> ProblemConfig:
    with open(path) as fh:
        return parse_config(fh.read())
