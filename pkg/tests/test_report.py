"""JSON reports against checked-in golden files.

Regenerate with ``BELLCHECK_UPDATE_GOLDEN=1 pytest tests/test_report.py`` and
review the diff; the golden files are the compatibility contract.
"""
import json
import os
from pathlib import Path

import pytest

from bellcheck import fixtures
from bellcheck.bell import ch74, chsh, enumerate_deterministic_bound
from bellcheck.checks import check_all, jarrett_report
from bellcheck.determinize import deterministic_extension, verify_extension
from bellcheck.model import validate
from bellcheck.report import build_report, emit_report, to_dict
from bellcheck.sampler import sample

GOLDEN = Path(__file__).resolve().parent / "golden"
LL = ("look", "look")


def _extension():
    m = fixtures.product()
    return [verify_extension(m, deterministic_extension(m))]


CASES = {
    "carddeck-checks": lambda: check_all(fixtures.carddeck()),
    "carddeck-jarrett": lambda: [jarrett_report(fixtures.carddeck())],
    "product-bell": lambda: [chsh(fixtures.product(), "x0", "x1", "y0", "y1"),
                             ch74(fixtures.product(), "x0", "x1", "y0", "y1")],
    "chsh-bound": lambda: [enumerate_deterministic_bound()],
    "product-extension": _extension,
    "carddeck-sample": lambda: [sample(fixtures.carddeck(), LL, 1000, 1234567)],
    "two-setting-validation": lambda: [validate(fixtures.two_setting())],
}


def _without_version(text):
    data = json.loads(text)
    data.pop("version")
    return data


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    text = emit_report(CASES[name]())
    path = GOLDEN / f"{name}.json"
    if os.environ.get("BELLCHECK_UPDATE_GOLDEN"):
        path.write_text(text)
    assert _without_version(text) == _without_version(path.read_text())


@pytest.mark.parametrize("name", sorted(CASES))
def test_emission_is_byte_stable(name):
    assert emit_report(CASES[name]()) == emit_report(CASES[name]())


def test_envelope():
    data = build_report([])
    assert data["schema_version"] == 1 and data["tool"] == "bellcheck" and data["results"] == []


def test_exact_values_are_strings():
    d = to_dict(check_all(fixtures.carddeck())[0])
    assert d["condition"] == "factorability"
    assert d["max_deviation"] == "91/400" and d["max_deviation_float"] == pytest.approx(0.2275)
    assert d["witness"]["hidden"] == "D_1" and d["witness"]["outcomes"] == ["KB", "QR"]


def test_unknown_objects_rejected():
    with pytest.raises(TypeError):
        to_dict(object())
