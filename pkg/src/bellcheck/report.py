"""JSON report emission.

Schema (``schema_version`` 1)::

    {"schema_version": 1, "tool": "bellcheck", "version": "...",
     "results": [ {"kind": "check" | "jarrett" | "chsh" | "ch74" |
                   "chsh-deterministic-bound" | "extension" | "sample" |
                   "validation", ...}, ... ]}

Exact quantities are strings such as ``"51/400"``; most carry a ``*_float``
companion. Field order is fixed so reports are byte-stable.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import singledispatch
from typing import Any, Iterable

from . import __version__
from .bell import Ch74Result, ChshResult, DeterministicBound
from .checks import CheckResult, JarrettReport
from .determinize import ExtensionReport
from .model import ValidationReport, is_exact
from .sampler import SampleSummary

SCHEMA_VERSION = 1
MAX_MISMATCHES = 20


def exact(p) -> str:
    return str(Fraction(p)) if is_exact(p) else repr(float(p))


@singledispatch
def to_dict(result) -> dict[str, Any]:
    raise TypeError(f"cannot report {type(result).__name__}")


@to_dict.register
def _(r: CheckResult):
    return {
        "kind": "check",
        "condition": r.condition.value,
        "holds": r.holds,
        "max_deviation": exact(r.max_deviation),
        "max_deviation_float": float(r.max_deviation),
        "witness": r.witness.to_dict() if r.witness else None,
        "skipped_contexts": r.skipped_contexts,
        "mode": r.mode,
        "tolerance": r.tolerance,
    }


@to_dict.register
def _(r: JarrettReport):
    return {
        "kind": "jarrett",
        "parameter_independence": to_dict(r.parameter_independence),
        "outcome_independence": to_dict(r.outcome_independence),
        "factorability": to_dict(r.factorability),
        "full_support": r.full_support,
        "implication_ok": r.implication_ok,
        "equivalence_ok": r.equivalence_ok,
        "consistent": r.consistent,
        "notes": list(r.notes),
    }


@to_dict.register
def _(r: ChshResult):
    a, a2, b, b2 = r.settings
    labels = ("E(a,b)", "E(a,b2)", "E(a2,b)", "E(a2,b2)")
    return {
        "kind": "chsh",
        "settings": {"a": a, "a2": a2, "b": b, "b2": b2},
        "correlators": {k: exact(v) for k, v in zip(labels, r.correlators)},
        "S": exact(r.s),
        "S_float": float(r.s),
        "satisfied": r.satisfied,
    }


@to_dict.register
def _(r: Ch74Result):
    a, a2, b, b2 = r.settings
    return {
        "kind": "ch74",
        "settings": {"a": a, "a2": a2, "b": b, "b2": b2},
        "value": exact(r.value),
        "value_float": float(r.value),
        "satisfied": r.satisfied,
    }


@to_dict.register
def _(r: DeterministicBound):
    return {
        "kind": "chsh-deterministic-bound",
        "strategies": len(r.values),
        "max_abs_S": r.max_abs_s,
        "max_S": r.max_s,
        "argmax": [list(s) for s in r.argmax],
    }


@to_dict.register
def _(r: ExtensionReport):
    return {
        "kind": "extension",
        "deterministic": r.deterministic,
        "exact": r.exact,
        "mismatch_count": len(r.mismatches),
        "mismatches": [
            {
                "hidden": m.hidden,
                "profile": list(m.profile),
                "outcomes": list(m.outcomes),
                "expected": exact(m.expected),
                "recovered": exact(m.recovered),
            }
            for m in r.mismatches[:MAX_MISMATCHES]
        ],
    }


@to_dict.register
def _(r: SampleSummary):
    return {
        "kind": "sample",
        "model": r.model,
        "sites": list(r.sites),
        "profile": list(r.profile),
        "hidden": r.hidden,
        "n": r.n,
        "seed": r.seed,
        "generator": r.generator,
        "table": [
            {"outcomes": list(t), "count": c, "frequency": c / r.n, "analytic": exact(p)}
            for t, c, p in zip(r.tuples, r.counts, r.analytic)
        ],
        "tv_distance": r.tv_distance,
    }


@to_dict.register
def _(r: ValidationReport):
    return {
        "kind": "validation",
        "ok": r.ok,
        "violations": [{"kind": v.kind, "message": v.message} for v in r.violations],
    }


def build_report(results: Iterable) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "bellcheck",
        "version": __version__,
        "results": [to_dict(r) for r in results],
    }


def emit_report(results: Iterable) -> str:
    return json.dumps(build_report(results), indent=2) + "\n"
