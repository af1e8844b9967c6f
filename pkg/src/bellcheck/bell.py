"""CHSH and CH74 expressions on bipartite models.

Sign convention: ``S = E(a,b) + E(a,b') + E(a',b) - E(a',b')``. Local
hidden-variable models with a setting-independent prior satisfy
``|S| <= 2`` and ``-1 <= CH <= 0``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .checks import PreconditionError
from .model import DomainError, Model, Prob

# (site index, setting) -> {outcome: +1 | -1}
DichotomicMap = Mapping[tuple[int, str], Mapping[str, int]]


def default_map(model: Model) -> dict[tuple[int, str], dict[str, int]]:
    """First outcome of every alphabet maps to +1, all others to -1."""
    out = {}
    for j, site in enumerate(model.sites):
        for s, alpha in site.outcomes.items():
            out[(j, s)] = {o: (1 if k == 0 else -1) for k, o in enumerate(alpha)}
    return out


def _require_bipartite(model: Model):
    if model.n_sites != 2:
        raise PreconditionError(f"Bell expressions need exactly 2 sites, model has {model.n_sites}")
    if not model.has_constant_prior():
        raise PreconditionError("Bell expressions need a setting-independent prior")


def _value(mapping: DichotomicMap, j: int, setting: str, outcome: str) -> int:
    try:
        v = mapping[(j, setting)][outcome]
    except KeyError:
        raise DomainError(f"dichotomic map has no value for site {j} setting {setting} outcome {outcome}") from None
    if v not in (1, -1):
        raise DomainError(f"dichotomic values must be +1 or -1, got {v}")
    return v


def correlator(
    model: Model, a: str, b: str, mapping: Optional[DichotomicMap] = None, hidden: Optional[str] = None
) -> Fraction:
    """Expected product of the two dichotomic outcomes under settings ``(a, b)``.

    Averaged over the prior, or computed for one hidden value if ``hidden``
    is given.
    """
    _require_bipartite(model)
    mapping = default_map(model) if mapping is None else mapping
    profile = model.check_profile((a, b))
    weights = model.prior_of(profile)
    lams = model.hidden if hidden is None else (model.check_hidden(hidden),)
    total = Fraction(0)
    for lam in lams:
        w = 1 if hidden is not None else weights[lam]
        for (e1, e2), p in model.row(lam, profile).items():
            total += w * p * _value(mapping, 0, a, e1) * _value(mapping, 1, b, e2)
    return total


@dataclass(frozen=True)
class ChshResult:
    settings: tuple[str, str, str, str]
    e_ab: Prob
    e_ab2: Prob
    e_a2b: Prob
    e_a2b2: Prob

    @property
    def s(self) -> Prob:
        return self.e_ab + self.e_ab2 + self.e_a2b - self.e_a2b2

    @property
    def satisfied(self) -> bool:
        return abs(self.s) <= 2

    @property
    def correlators(self) -> tuple[Prob, Prob, Prob, Prob]:
        return self.e_ab, self.e_ab2, self.e_a2b, self.e_a2b2


def chsh(
    model: Model, a: str, a2: str, b: str, b2: str, mapping: Optional[DichotomicMap] = None
) -> ChshResult:
    return ChshResult(
        (a, a2, b, b2),
        correlator(model, a, b, mapping),
        correlator(model, a, b2, mapping),
        correlator(model, a2, b, mapping),
        correlator(model, a2, b2, mapping),
    )


@dataclass(frozen=True)
class Ch74Result:
    settings: tuple[str, str, str, str]
    value: Prob

    @property
    def satisfied(self) -> bool:
        return -1 <= self.value <= 0


def _targets(model: Model, targets: Optional[Mapping[tuple[int, str], str]]):
    if targets is None:
        return {(j, s): alpha[0] for j, site in enumerate(model.sites) for s, alpha in site.outcomes.items()}
    return targets


def ch74(
    model: Model, a: str, a2: str, b: str, b2: str, targets: Optional[Mapping[tuple[int, str], str]] = None
) -> Ch74Result:
    """``P12(a,b) + P12(a,b') + P12(a',b) - P12(a',b') - P1(a) - P2(b)``.

    ``targets`` picks the counted outcome per (site, setting); by default the
    first outcome of each alphabet. ``P1(a)`` and ``P2(b)`` are read under
    the profile ``(a, b)``.
    """
    _require_bipartite(model)
    targets = _targets(model, targets)

    def both(x, y):
        profile = model.check_profile((x, y))
        weights = model.prior_of(profile)
        t = (targets[(0, x)], targets[(1, y)])
        return sum((weights[lam] * model.row(lam, profile).get(t, 0) for lam in model.hidden), Fraction(0))

    def single(j, profile):
        weights = model.prior_of(profile)
        o = targets[(j, profile[j])]
        return sum(
            (weights[lam] * p for lam in model.hidden
             for t, p in model.row(lam, profile).items() if t[j] == o),
            Fraction(0),
        )

    value = both(a, b) + both(a, b2) + both(a2, b) - both(a2, b2)
    value -= single(0, (a, b)) + single(1, (a, b))
    return Ch74Result((a, a2, b, b2), value)


@dataclass(frozen=True)
class DeterministicBound:
    max_abs_s: int
    max_s: int
    argmax: tuple[tuple[int, int, int, int], ...]
    values: dict[tuple[int, int, int, int], int]


def strategy_s(x: int, x2: int, y: int, y2: int) -> int:
    """S for the local deterministic strategy A(a)=x, A(a')=x2, B(b)=y, B(b')=y2."""
    return x * y + x * y2 + x2 * y - x2 * y2


def enumerate_deterministic_bound(n_settings_per_site: int = 2) -> DeterministicBound:
    """Enumerate all 16 local deterministic strategies of the two-setting CHSH scenario.

    ``argmax`` lists the strategies attaining the largest (signed) S in
    lexicographic order with +1 before -1.
    """
    if n_settings_per_site != 2:
        raise PreconditionError("only the two-setting CHSH scenario is enumerated")
    values = {st: strategy_s(*st) for st in itertools.product((1, -1), repeat=4)}
    max_s = max(values.values())
    return DeterministicBound(
        max_abs_s=max(abs(v) for v in values.values()),
        max_s=max_s,
        argmax=tuple(st for st, v in values.items() if v == max_s),
        values=values,
    )
