"""Deterministic extension of a factorable model.

Each site ``j`` gets an auxiliary uniform variable ``mu_j`` on [0, 1). Given
the hidden value and the site's setting, the site reports outcome ``k`` when
``mu_j`` falls in ``[c_{k-1}, c_k)`` where ``c_k`` is the cumulative marginal
of the first ``k`` outcomes (the last interval is closed). Averaging over
``mu`` gives back the product of marginals, so for a factorable model the
joint is recovered.

``mu`` is never sampled. Refining each site's unit interval by the
breakpoints of all its settings yields finitely many boxes of the unit
hypercube on which every response is constant, so the extension is an
ordinary finite model with hidden values ``(lambda, box)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .checks import PreconditionError, check_determinism, check_factorability
from .model import Model, Prob

Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Box:
    hidden: str
    intervals: tuple[Interval, ...]
    index: tuple[int, ...]

    @property
    def weight(self) -> Fraction:
        w = Fraction(1)
        for lo, hi in self.intervals:
            w *= hi - lo
        return w


@dataclass(frozen=True)
class ExtendedModel:
    """The deterministic model plus the box behind each of its hidden values."""

    model: Model
    boxes: dict[str, Box]
    breakpoints: dict[tuple[str, int, str], tuple[Fraction, ...]] = field(repr=False)

    def origin(self, label: str) -> str:
        return self.boxes[label].hidden


def local_marginals(model: Model, lam: str, j: int, setting: str) -> list[Fraction]:
    """P(o | lam, setting) at site ``j`` for every outcome, read from the first matching profile."""
    profile = next(p for p in model.profiles if p[j] == setting)
    alpha = model.sites[j].outcomes[setting]
    acc = {o: Fraction(0) for o in alpha}
    for t, p in model.row(lam, profile).items():
        acc[t[j]] += p
    return [acc[o] for o in alpha]


def breakpoints(probs: list[Fraction]) -> tuple[Fraction, ...]:
    """Cumulative sums ``0 = c_0 <= ... <= c_m = 1``."""
    return tuple(itertools.accumulate(probs, initial=Fraction(0)))


def response(cuts: tuple[Fraction, ...], alphabet: tuple[str, ...], u: Fraction) -> str:
    """Outcome whose half-open interval ``[c_{k-1}, c_k)`` contains ``u``; the last one is closed."""
    for k in range(1, len(cuts)):
        if u < cuts[k]:
            return alphabet[k - 1]
    return alphabet[-1]


def deterministic_extension(model: Model) -> ExtendedModel:
    """Build the box-refined deterministic extension of a factorable model.

    Raises
    ------
    PreconditionError
        If ``model`` has float weights or is not factorable; the message
        carries the witness.
    """
    if not model.is_exact():
        raise PreconditionError("deterministic extension needs exact rational weights")
    fact = check_factorability(model)
    if not fact.holds:
        raise PreconditionError(
            f"model is not factorable: deviation {fact.max_deviation} at {fact.witness}"
        )

    bps: dict[tuple[str, int, str], tuple[Fraction, ...]] = {}
    boxes: dict[str, Box] = {}
    hidden: list[str] = []
    prior: dict = {p: [] for p in model.profiles}
    kernel: dict = {}
    structure: dict = {}

    for lam in model.hidden:
        site_intervals: list[list[Interval]] = []
        for j, site in enumerate(model.sites):
            cuts = set()
            for s in site.settings:
                c = breakpoints(local_marginals(model, lam, j, s))
                bps[(lam, j, s)] = c
                cuts.update(c)
            ordered = sorted(cuts)
            site_intervals.append([(lo, hi) for lo, hi in zip(ordered, ordered[1:]) if hi > lo])

        for index in itertools.product(*(range(len(iv)) for iv in site_intervals)):
            intervals = tuple(site_intervals[j][i] for j, i in enumerate(index))
            box = Box(lam, intervals, index)
            label = f"{lam}~{'.'.join(map(str, index))}"
            boxes[label] = box
            hidden.append(label)
            structure[label] = tuple(f"{lam}~{i}" for i in index)
            for profile in model.profiles:
                w = model.prior_of(profile)[lam]
                prior[profile].append(w * box.weight)
                outcome = tuple(
                    response(bps[(lam, j, s)], model.sites[j].outcomes[s], lo)
                    for j, (s, (lo, _)) in enumerate(zip(profile, intervals))
                )
                kernel[(label, profile)] = {outcome: Fraction(1)}

    extended = Model(
        model.sites,
        tuple(hidden),
        {p: tuple(ws) for p, ws in prior.items()},
        kernel,
        structure,
        name=f"{model.name}-det",
    )
    return ExtendedModel(extended, boxes, bps)


def box_bound(model: Model) -> int:
    """Upper bound on the number of boxes per hidden value."""
    bound = 1
    for site in model.sites:
        bound *= 1 + sum(len(alpha) - 1 for alpha in site.outcomes.values())
    return bound


@dataclass(frozen=True)
class Mismatch:
    hidden: str
    profile: tuple[str, ...]
    outcomes: tuple[str, ...]
    expected: Prob
    recovered: Prob


@dataclass(frozen=True)
class ExtensionReport:
    deterministic: bool
    mismatches: tuple[Mismatch, ...]

    @property
    def exact(self) -> bool:
        return not self.mismatches

    @property
    def ok(self) -> bool:
        return self.deterministic and self.exact

    @property
    def first_mismatch(self) -> Optional[Mismatch]:
        return self.mismatches[0] if self.mismatches else None


def verify_extension(original: Model, extended: ExtendedModel) -> ExtensionReport:
    """Integrate the box variable out and compare with ``prior * joint`` of the original, exactly."""
    ext = extended.model
    mismatches = []
    for profile in original.profiles:
        ext_prior = ext.prior_of(profile)
        orig_prior = original.prior_of(profile)
        for lam in original.hidden:
            recovered: dict = {t: Fraction(0) for t in original.tuples(profile)}
            for label in ext.hidden:
                if extended.origin(label) != lam:
                    continue
                for t, p in ext.row(label, profile).items():
                    recovered[t] += ext_prior[label] * p
            row = original.row(lam, profile)
            for t in original.tuples(profile):
                expected = orig_prior[lam] * row.get(t, 0)
                if recovered[t] != expected:
                    mismatches.append(Mismatch(lam, profile, t, expected, recovered[t]))
    return ExtensionReport(check_determinism(ext).holds, tuple(mismatches))
