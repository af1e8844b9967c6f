"""Seeded Monte Carlo simulation of a model.

Each sample draws a hidden value from the prior and then an outcome tuple
from the kernel, both by inverse CDF over the canonical orderings. Sample
``i`` consumes counters ``2i`` and ``2i + 1`` of a counter-based SplitMix64
stream keyed by the seed, so any split of the sample range into chunks gives
the same counts.

The inner loop runs in a compiled extension when it is built, and in numpy
otherwise; set ``BELLCHECK_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from . import _pykernels
from .model import DomainError, Model, Prob, Profile, normalize_query

GENERATOR = "splitmix64-counter/v1"
_BACKENDS = {"python": _pykernels}
try:
    if os.environ.get("BELLCHECK_PURE_PYTHON"):
        raise ImportError("compiled kernel disabled by BELLCHECK_PURE_PYTHON")
    from . import _ckernels

    _BACKENDS["cython"] = _ckernels
    BACKEND = "cython"
except ImportError:
    BACKEND = "python"


class UndefinedConditional(ValueError):
    """The conditioning event was never observed."""


@dataclass(frozen=True)
class SampleSummary:
    model: str
    sites: tuple[str, ...]
    profile: Profile
    hidden: Optional[str]
    n: int
    seed: int
    tuples: tuple[tuple[str, ...], ...]
    counts: tuple[int, ...]
    hidden_counts: Mapping[str, tuple[int, ...]]
    analytic: tuple[Prob, ...]
    generator: str = GENERATOR

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.n for c in self.counts)

    @property
    def tv_distance(self) -> float:
        """Total-variation distance between empirical and analytic distributions."""
        return 0.5 * math.fsum(abs(f - float(p)) for f, p in zip(self.frequencies, self.analytic))

    def event_frequency(self, query) -> float:
        """Empirical frequency of an event given as one outcome subset per site."""
        subsets = _subsets(self, query)
        hits = sum(c for t, c in zip(self.tuples, self.counts) if _matches(t, subsets))
        return hits / self.n


def _cumulative(weights) -> np.ndarray:
    return np.array([float(c) for c in itertools.accumulate(weights, initial=Fraction(0))][1:], dtype=np.float64)


def sample(
    model: Model,
    profile: Profile,
    n: int,
    seed: int,
    hidden: Optional[str] = None,
    chunks: int = 1,
    backend: Optional[str] = None,
) -> SampleSummary:
    """Simulate ``n`` rounds under ``profile``.

    ``hidden`` fixes the hidden value (a sub-run conditioned on it) instead of
    drawing it from the prior.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    if chunks < 1:
        raise ValueError("chunks must be at least 1")
    profile = model.check_profile(profile)
    name = backend or BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} is not available (have {sorted(_BACKENDS)})")
    impl = _BACKENDS[name]

    tuples = model.tuples(profile)
    if hidden is None:
        lams = list(model.hidden)
        weights = [model.prior_of(profile)[lam] for lam in lams]
    else:
        lams = [model.check_hidden(hidden)]
        weights = [Fraction(1)]
    prior_cum = _cumulative(weights)
    kernel_cum = np.ascontiguousarray(
        [_cumulative([model.row(lam, profile).get(t, 0) for t in tuples]) for lam in lams]
    )
    counts = np.zeros((len(lams), len(tuples)), dtype=np.int64)
    bounds = [n * k // chunks for k in range(chunks + 1)]
    for lo, hi in zip(bounds, bounds[1:]):
        if hi > lo:
            impl.tally(seed, lo, hi, prior_cum, kernel_cum, counts)

    analytic = [Fraction(0)] * len(tuples)
    for w, lam in zip(weights, lams):
        row = model.row(lam, profile)
        for k, t in enumerate(tuples):
            analytic[k] += w * row.get(t, 0)
    return SampleSummary(
        model=model.name,
        sites=tuple(s.name for s in model.sites),
        profile=profile,
        hidden=hidden,
        n=n,
        seed=seed,
        tuples=tuple(tuples),
        counts=tuple(int(c) for c in counts.sum(axis=0)),
        hidden_counts={lam: tuple(int(c) for c in counts[i]) for i, lam in enumerate(lams)},
        analytic=tuple(analytic),
    )


def _subsets(summary: SampleSummary, query) -> list[Optional[frozenset]]:
    entries: list = [None] * len(summary.sites)
    if isinstance(query, Mapping):
        for key, sub in query.items():
            if isinstance(key, int) and 0 <= key < len(entries):
                j = key
            elif key in summary.sites:
                j = summary.sites.index(key)
            else:
                raise DomainError(f"unknown site {key!r}")
            entries[j] = sub
    else:
        entries = list(query)
    return [
        None if sub is None else frozenset((sub,) if isinstance(sub, str) else sub)
        for sub in entries
    ]


def _matches(t, subsets) -> bool:
    return all(s is None or o in s for o, s in zip(t, subsets))


def conditional_frequencies(summary: SampleSummary, condition: Mapping) -> dict[tuple[str, ...], float]:
    """Empirical distribution of the unconditioned sites given an event at the others.

    ``condition`` maps site names (or indices) to an outcome or a set of
    outcomes. Raises :class:`UndefinedConditional` when no sample satisfied
    the condition.
    """
    subsets = _subsets(summary, condition)
    free = [j for j, s in enumerate(subsets) if s is None]
    table: dict[tuple[str, ...], int] = {}
    for t in dict.fromkeys(tuple(t[j] for j in free) for t in summary.tuples):
        table[t] = 0
    total = 0
    for t, c in zip(summary.tuples, summary.counts):
        if _matches(t, subsets):
            table[tuple(t[j] for j in free)] += c
            total += c
    if total == 0:
        raise UndefinedConditional(f"condition {dict(condition)} has zero empirical count")
    return {k: v / total for k, v in table.items()}


def analytic_event(model: Model, profile: Profile, query, hidden: Optional[str] = None) -> Fraction:
    """Exact probability of an event under the prior mixture (or one hidden value)."""
    profile = model.check_profile(profile)
    subsets = normalize_query(model, profile, query)
    weights = model.prior_of(profile) if hidden is None else {hidden: Fraction(1)}
    total = Fraction(0)
    for lam, w in weights.items():
        for t, p in model.row(lam, profile).items():
            if all(o in s for o, s in zip(t, subsets)):
                total += w * p
    return total


def available_backends() -> list[str]:
    return sorted(_BACKENDS)
