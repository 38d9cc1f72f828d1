"""Closed-world taxonomy codes used to classify every KPI.

Four axes: data source (14 dotted codes), subject of measurement (4),
scope (3 kinds), performance of collaboration (11 dotted codes).
The dotted numbering carries the hierarchy: "1.2.2.1" is a child of
"1.2.2". Anything outside these sets is rejected with
unknown-taxonomy-code; ancestor expansion happens at query time, never
in stored definitions.
"""

from __future__ import annotations

from enum import Enum

from .errors import UnknownTaxonomyCodeError

# Data-source axis: where the numbers for a KPI come from.
DATA_SOURCE_CODES: dict[str, str] = {
    "1": "Collaboration-based",
    "1.1": "Subjective",
    "1.1.1": "Service consumer opinion",
    "1.1.2": "Service provider opinion",
    "1.2": "Objective",
    "1.2.1": "Continuous monitoring of collaboration",
    "1.2.2": "Bag of assets",
    "1.2.2.1": "History of collaboration",
    "1.2.2.2": "Description of services",
    "1.2.2.3": "Description of competences",
    "1.2.2.4": "Contracts and SLA",
    "1.2.3": "Social network",
    "2": "Non-collaboration-based",
    "2.1": "Control process",
}

# Performance axis: 1.x structural (network shape), 2.x operational (quality).
PERFORMANCE_CODES: dict[str, str] = {
    "1": "Structural",
    "1.1": "Service structure",
    "1.2": "General structure",
    "2": "Operational",
    "2.1": "Effectiveness",
    "2.2": "Flexibility",
    "2.3": "Substitutability",
    "2.4": "Efficiency",
    "2.5": "Responsiveness",
    "2.6": "Cost",
    "2.7": "Productivity",
}


class SubjectCode(str, Enum):
    """What a KPI measures: always a composition, never a single service."""

    PROCESS = "process"
    PARTNER = "partner"
    VO = "vo"
    VBE = "vbe"


class ScopeKind(str, Enum):
    GLOBAL = "global"      # obligatory everywhere, portable across VBEs
    STANDARD = "standard"  # obligatory for all VOs of one VBE
    CUSTOM = "custom"      # defined for one particular VO


def check_data_source(code: str) -> str:
    if code not in DATA_SOURCE_CODES:
        raise UnknownTaxonomyCodeError(f"unknown data-source code {code!r}")
    return code


def check_performance(code: str) -> str:
    if code not in PERFORMANCE_CODES:
        raise UnknownTaxonomyCodeError(f"unknown performance code {code!r}")
    return code


def ancestors(code: str) -> list[str]:
    """Codes implied by dotted numbering: '1.2.2.1' -> ['1.2.2', '1.2', '1']."""
    parts = code.split(".")
    return [".".join(parts[:i]) for i in range(len(parts) - 1, 0, -1)]


def expand(codes: frozenset[str] | set[str]) -> frozenset[str]:
    """Close a code set under the ancestor relation."""
    out: set[str] = set()
    for code in codes:
        out.add(code)
        out.update(ancestors(code))
    return frozenset(out)


def is_descendant_or_equal(code: str, of: str) -> bool:
    return code == of or of in ancestors(code)


def is_structural(performance_codes: frozenset[str] | set[str]) -> bool:
    return any(c == "1" or c.startswith("1.") for c in performance_codes)


def is_operational(performance_codes: frozenset[str] | set[str]) -> bool:
    return any(c == "2" or c.startswith("2.") for c in performance_codes)
