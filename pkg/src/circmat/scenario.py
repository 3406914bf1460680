"""Scenario files: JSON ingestion, strict validation and emission.

A scenario bundles the network description, the material batch, the chain
timing, the disassembly outcome (literal or a trained-policy reference) and
display options. Validation is not fail-fast: every problem is reported with
a JSON-pointer-style path so a bad file can be fixed in one pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .flows import MaterialSpec, ScenarioParams, weighted_initial_mass
from .network import (
    ARC,
    NODE,
    Compartment,
    MaterialNetwork,
    build_network,
    collect_network_issues,
    validate_solids_topology,
)

TASK_NAMES = (
    "two_parts_one_target",
    "two_parts_two_targets",
    "four_parts_two_targets_two_obstacles",
    "four_parts_chassis",
)

_TOP_KEYS = {"network", "materials", "timing", "outcome", "options"}
_COMPARTMENT_KEYS = {"id", "source", "sink", "kind", "role"}
_MATERIAL_KEYS = {"name", "criticality", "mass_kg"}
_TIMING_KEYS = {"t_1out4", "t_2in4", "T_t", "T_r", "T_i"}
_OUTCOME_KEYS = {"s", "T_d", "policy", "task"}
_OPTION_KEYS = {"delta", "l", "rounding"}


class ParseError(ValueError):
    """The file is not readable JSON."""


@dataclass(frozen=True)
class Issue:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ValidationError(ValueError):
    """One or more scenario invariants are violated; carries all of them."""

    def __init__(self, issues: list[Issue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


@dataclass(frozen=True)
class OutcomeSpec:
    """Either a literal (s, T_d) pair or a policy artifact reference."""

    s: float | None = None
    T_d: float | None = None
    policy: str | None = None
    task: str | None = None

    @property
    def is_literal(self) -> bool:
        return self.s is not None


@dataclass(frozen=True)
class ScenarioFile:
    network: MaterialNetwork
    materials: tuple[MaterialSpec, ...]
    params: ScenarioParams
    outcome: OutcomeSpec
    rounding: int = 1

    @property
    def m0_bar(self) -> float:
        return weighted_initial_mass(self.materials)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_unknown(obj: dict, allowed: set[str], path: str, issues: list[Issue]) -> None:
    for key in obj:
        if key not in allowed:
            issues.append(Issue(path, f"unknown key {key!r}"))


def validate_scenario(data) -> ScenarioFile:
    """Validate a parsed scenario dict, raising with every issue found."""
    issues: list[Issue] = []
    if not isinstance(data, dict):
        raise ValidationError([Issue("/", "scenario must be a JSON object")])
    _check_unknown(data, _TOP_KEYS, "/", issues)
    for section in ("network", "materials", "timing", "outcome"):
        if section not in data:
            issues.append(Issue("/", f"missing section {section!r}"))

    network = _validate_network(data.get("network"), issues)
    materials = _validate_materials(data.get("materials"), issues)
    options = _validate_options(data.get("options"), issues)
    params = _validate_timing(data.get("timing"), options, issues)
    outcome = _validate_outcome(data.get("outcome"), issues)

    if issues:
        raise ValidationError(issues)
    assert network is not None and params is not None and outcome is not None
    return ScenarioFile(
        network=network,
        materials=tuple(materials),
        params=params,
        outcome=outcome,
        rounding=options["rounding"],
    )


def _validate_network(section, issues: list[Issue]) -> MaterialNetwork | None:
    if section is None:
        return None
    if not isinstance(section, list) or not section:
        issues.append(Issue("/network", "must be a non-empty array of compartments"))
        return None
    comps: list[Compartment] = []
    ok = True
    for i, entry in enumerate(section):
        path = f"/network/{i}"
        if not isinstance(entry, dict):
            issues.append(Issue(path, "must be an object"))
            ok = False
            continue
        _check_unknown(entry, _COMPARTMENT_KEYS, path, issues)
        cid = entry.get("id")
        source = entry.get("source")
        sink = entry.get("sink")
        kind = entry.get("kind")
        role = entry.get("role", "other")
        if not isinstance(cid, int) or isinstance(cid, bool) or cid < 1:
            issues.append(Issue(f"{path}/id", "must be a positive integer"))
            ok = False
        if not isinstance(source, int) or not isinstance(sink, int):
            issues.append(Issue(path, "source and sink must be integers"))
            ok = False
        if kind not in (NODE, ARC):
            issues.append(Issue(f"{path}/kind", f"must be {NODE!r} or {ARC!r}"))
            ok = False
        if not isinstance(role, str) or not role:
            issues.append(Issue(f"{path}/role", "must be a non-empty string"))
            ok = False
        if ok:
            comps.append(Compartment(id=cid, source=source, sink=sink, kind=kind, role=role))
    if not ok:
        return None
    for exc, message in collect_network_issues(comps):
        issues.append(Issue("/network", message))
    if any(i.path.startswith("/network") for i in issues):
        return None
    net = build_network(comps)
    topo_ok, reasons = validate_solids_topology(net)
    if not topo_ok:
        for reason in reasons:
            issues.append(Issue("/network", f"solids topology: {reason}"))
        return None
    return net


def _validate_materials(section, issues: list[Issue]) -> list[MaterialSpec]:
    materials: list[MaterialSpec] = []
    if section is None:
        return materials
    if not isinstance(section, list) or not section:
        issues.append(Issue("/materials", "must be a non-empty array"))
        return materials
    for i, entry in enumerate(section):
        path = f"/materials/{i}"
        if not isinstance(entry, dict):
            issues.append(Issue(path, "must be an object"))
            continue
        _check_unknown(entry, _MATERIAL_KEYS, path, issues)
        name = entry.get("name")
        criticality = entry.get("criticality")
        mass = entry.get("mass_kg")
        bad = False
        if not isinstance(name, str) or not name:
            issues.append(Issue(f"{path}/name", "must be a non-empty string"))
            bad = True
        if not _is_number(criticality) or not (0.0 < criticality <= 1.0):
            issues.append(Issue(f"{path}/criticality", "must be a number in (0, 1]"))
            bad = True
        if not _is_number(mass) or mass < 0.0:
            issues.append(Issue(f"{path}/mass_kg", "must be a number >= 0"))
            bad = True
        if not bad:
            materials.append(MaterialSpec(name=name, criticality=float(criticality), mass_kg=float(mass)))
    return materials


def _validate_options(section, issues: list[Issue]) -> dict:
    options = {"delta": 1.0, "l": 1, "rounding": 1}
    if section is None:
        return options
    if not isinstance(section, dict):
        issues.append(Issue("/options", "must be an object"))
        return options
    _check_unknown(section, _OPTION_KEYS, "/options", issues)
    if "delta" in section:
        if not _is_number(section["delta"]) or section["delta"] <= 0.0:
            issues.append(Issue("/options/delta", "must be a positive number"))
        else:
            options["delta"] = float(section["delta"])
    if "l" in section:
        if not isinstance(section["l"], int) or isinstance(section["l"], bool) or section["l"] < 0:
            issues.append(Issue("/options/l", "must be a non-negative integer"))
        else:
            options["l"] = section["l"]
    if "rounding" in section:
        if not isinstance(section["rounding"], int) or section["rounding"] < 0:
            issues.append(Issue("/options/rounding", "must be a non-negative integer"))
        else:
            options["rounding"] = section["rounding"]
    return options


def _validate_timing(section, options: dict, issues: list[Issue]) -> ScenarioParams | None:
    if section is None:
        return None
    if not isinstance(section, dict):
        issues.append(Issue("/timing", "must be an object"))
        return None
    _check_unknown(section, _TIMING_KEYS, "/timing", issues)
    values = {}
    for key in ("t_2in4", "T_t", "T_r", "T_i"):
        if key not in section:
            issues.append(Issue(f"/timing/{key}", "is required"))
        elif not _is_number(section[key]):
            issues.append(Issue(f"/timing/{key}", "must be a number"))
        else:
            values[key] = float(section[key])
    if "t_1out4" in section and section["t_1out4"] != 0:
        issues.append(Issue("/timing/t_1out4", "extraction time is the origin and must be 0"))
    if "t_2in4" in values and values["t_2in4"] < 0.0:
        issues.append(Issue("/timing/t_2in4", "must be >= 0"))
    for key in ("T_t", "T_r", "T_i"):
        if key in values and values[key] <= 0.0:
            issues.append(Issue(f"/timing/{key}", "must be positive"))
    if len(values) == 4 and values["T_t"] >= values["T_r"]:
        issues.append(Issue("/timing", "T_t must be smaller than T_r"))
    if any(i.path.startswith("/timing") for i in issues) or len(values) < 4:
        return None
    return ScenarioParams(
        t_2in4=values["t_2in4"],
        T_t=values["T_t"],
        T_r=values["T_r"],
        T_i=values["T_i"],
        delta=options["delta"],
        l=options["l"],
    )


def _validate_outcome(section, issues: list[Issue]) -> OutcomeSpec | None:
    if section is None:
        return None
    if not isinstance(section, dict):
        issues.append(Issue("/outcome", "must be an object"))
        return None
    _check_unknown(section, _OUTCOME_KEYS, "/outcome", issues)
    literal = "s" in section or "T_d" in section
    reference = "policy" in section or "task" in section
    if literal and reference:
        issues.append(Issue("/outcome", "provide either literal {s, T_d} or {policy, task}, not both"))
        return None
    if literal:
        bad = False
        if not _is_number(section.get("s")) or not (0.0 <= section["s"] <= 100.0):
            issues.append(Issue("/outcome/s", "must be a number in [0, 100]"))
            bad = True
        if not _is_number(section.get("T_d")) or section["T_d"] <= 0.0:
            issues.append(Issue("/outcome/T_d", "must be a positive number"))
            bad = True
        if bad:
            return None
        return OutcomeSpec(s=float(section["s"]), T_d=float(section["T_d"]))
    if reference:
        bad = False
        if not isinstance(section.get("policy"), str) or not section.get("policy"):
            issues.append(Issue("/outcome/policy", "must be a policy file path"))
            bad = True
        if section.get("task") not in TASK_NAMES:
            issues.append(Issue("/outcome/task", f"must be one of {TASK_NAMES}"))
            bad = True
        if bad:
            return None
        return OutcomeSpec(policy=section["policy"], task=section["task"])
    issues.append(Issue("/outcome", "provide either literal {s, T_d} or {policy, task}"))
    return None


def parse_scenario(path) -> ScenarioFile:
    """Load and validate a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    return validate_scenario(data)


def emit_scenario(scenario: ScenarioFile) -> dict:
    """Serialize back to the on-disk JSON shape; inverse of validation."""
    network = [
        {"id": c.id, "source": c.source, "sink": c.sink, "kind": c.kind, "role": c.role}
        for c in scenario.network.compartments
    ]
    materials = [
        {"name": m.name, "criticality": m.criticality, "mass_kg": m.mass_kg}
        for m in scenario.materials
    ]
    timing = {
        "t_2in4": scenario.params.t_2in4,
        "T_t": scenario.params.T_t,
        "T_r": scenario.params.T_r,
        "T_i": scenario.params.T_i,
    }
    if scenario.outcome.is_literal:
        outcome = {"s": scenario.outcome.s, "T_d": scenario.outcome.T_d}
    else:
        outcome = {"policy": scenario.outcome.policy, "task": scenario.outcome.task}
    return {
        "network": network,
        "materials": materials,
        "timing": timing,
        "outcome": outcome,
        "options": {
            "delta": scenario.params.delta,
            "l": scenario.params.l,
            "rounding": scenario.rounding,
        },
    }


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (`table2_sac`, ...)."""
    root = resources.files("circmat").joinpath("scenarios")
    return Path(str(root.joinpath(f"{name}.json")))
