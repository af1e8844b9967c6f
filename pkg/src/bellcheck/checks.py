"""Checkers for the locality-related conditions on a hidden-variable model.

Every checker returns a :class:`CheckResult` holding the largest absolute
deviation from the condition over all contexts, a witness context where that
maximum is first attained (canonical order: hidden values, then profiles,
then sites and outcome tuples as declared), and the number of contexts
skipped because the conditioning event had probability zero.

Conditional conditions (parameter and outcome independence, separability)
are checked for every ordering of the sites. A conditioning prefix of one
ordering is just a set of other sites, so the checks range over all sites
``j`` and all subsets of the remaining sites.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .model import (
    DEFAULT_FLOAT_TOL,
    DomainError,
    Model,
    Prob,
    Profile,
    event_prob,
    normalize_query,
)


class PreconditionError(ValueError):
    """The model does not meet a checker's precondition."""


class Condition(str, enum.Enum):
    FACTORABILITY = "factorability"
    PARAMETER_INDEPENDENCE = "parameter-independence"
    OUTCOME_INDEPENDENCE = "outcome-independence"
    MEASUREMENT_INDEPENDENCE = "measurement-independence"
    DETERMINISM = "determinism"
    SEPARABILITY = "separability"


@dataclass(frozen=True)
class CheckConfig:
    """Arithmetic mode and tolerance. Rational mode always compares exactly."""

    mode: str = "rational"
    tolerance: float = 0

    def __post_init__(self):
        if self.mode not in ("rational", "float"):
            raise ValueError(f"unknown arithmetic mode {self.mode!r}")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.mode == "rational" and self.tolerance != 0:
            raise ValueError("a tolerance is only allowed in float mode")

    @classmethod
    def float_mode(cls, tolerance: float = DEFAULT_FLOAT_TOL) -> "CheckConfig":
        return cls("float", tolerance)

    @property
    def convert(self) -> Callable[[Any], Prob]:
        return Fraction if self.mode == "rational" else float


RATIONAL = CheckConfig()


@dataclass(frozen=True)
class Witness:
    """Where a maximal deviation was found.

    ``given`` maps site names to the outcomes conditioned on; ``profiles``
    has two entries when the deviation compares two setting profiles.
    """

    hidden: Optional[str] = None
    profiles: tuple[Profile, ...] = ()
    outcomes: Optional[tuple[str, ...]] = None
    site: Optional[str] = None
    given: Optional[dict[str, str]] = None
    detail: str = ""

    def __str__(self) -> str:
        parts = []
        if self.hidden is not None:
            parts.append(f"hidden={self.hidden}")
        if self.profiles:
            parts.append("profiles=" + " vs ".join(",".join(p) for p in self.profiles))
        if self.site is not None:
            parts.append(f"site={self.site}")
        if self.given:
            parts.append("given=" + ",".join(f"{k}={v}" for k, v in self.given.items()))
        if self.outcomes is not None:
            parts.append("outcomes=" + ",".join(self.outcomes))
        return " ".join(parts)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        if self.hidden is not None:
            out["hidden"] = self.hidden
        if self.profiles:
            out["profiles"] = [list(p) for p in self.profiles]
        if self.outcomes is not None:
            out["outcomes"] = list(self.outcomes)
        if self.site is not None:
            out["site"] = self.site
        if self.given is not None:
            out["given"] = dict(self.given)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True)
class CheckResult:
    condition: Condition
    holds: bool
    max_deviation: Prob
    witness: Optional[Witness] = None
    skipped_contexts: int = 0
    mode: str = "rational"
    tolerance: float = 0

    def __str__(self) -> str:
        verdict = "HOLDS" if self.holds else "FAILS"
        return f"{self.condition.value}: {verdict} (max deviation {self.max_deviation})"


class _Max:
    """Running maximum that keeps the first witness attaining it."""

    def __init__(self, zero: Prob):
        self.value = zero
        self.witness: Optional[Witness] = None

    def offer(self, dev: Prob, make_witness: Callable[[], Witness]):
        if dev > self.value:
            self.value = dev
            self.witness = make_witness()

    def result(self, condition: Condition, config: CheckConfig, skipped: int = 0) -> CheckResult:
        holds = self.value <= config.tolerance
        return CheckResult(condition, holds, self.value, self.witness, skipped,
                           config.mode, config.tolerance)


class _Tables:
    """Dense joint tables and cached sub-marginals for one arithmetic mode."""

    def __init__(self, model: Model, config: CheckConfig):
        self.model = model
        conv = config.convert
        self.zero = conv(0)
        self.one = conv(1)
        self.joint: dict[tuple[str, Profile], dict[tuple[str, ...], Prob]] = {}
        for lam in model.hidden:
            for profile in model.profiles:
                row = model.row(lam, profile)
                self.joint[(lam, profile)] = {
                    t: conv(row.get(t, 0)) for t in model.tuples(profile)
                }
        self._marg: dict = {}

    def marg(self, lam: str, profile: Profile, sites: tuple[int, ...]) -> dict[tuple[str, ...], Prob]:
        """Marginal over ``sites`` keyed by outcomes in the order of ``sites``."""
        key = (lam, profile, sites)
        table = self._marg.get(key)
        if table is None:
            alphabets = self.model.alphabets(profile)
            table = {a: self.zero for a in itertools.product(*(alphabets[i] for i in sites))}
            for t, p in self.joint[(lam, profile)].items():
                k = tuple(t[i] for i in sites)
                table[k] += p
            self._marg[key] = table
        return table


def _tables(model: Model, config: CheckConfig) -> _Tables:
    key = ("tables", config.mode)
    tables = model._cache.get(key)
    if tables is None:
        tables = model._cache[key] = _Tables(model, config)
    return tables


def _subsets(items: list[int]):
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def _conditioning_contexts(model: Model, nonempty: bool = False):
    """Yield ``(j, S)``: a target site and a set of other sites to condition on."""
    n = model.n_sites
    for j in range(n):
        others = [i for i in range(n) if i != j]
        for sub in _subsets(others):
            if nonempty and not sub:
                continue
            yield j, sub


def _names(model: Model, sites, outcomes) -> dict[str, str]:
    return {model.sites[i].name: o for i, o in zip(sites, outcomes)}


def check_factorability(model: Model, config: CheckConfig = RATIONAL) -> CheckResult:
    """Joint = product of per-site marginals, each depending on its own setting only.

    Two deviations are folded into one maximum: the gap between the joint and
    the product of marginals within each profile, and the spread of a site's
    marginal across profiles that share that site's setting.
    """
    tab = _tables(model, config)
    best = _Max(tab.zero)
    n = model.n_sites
    for lam in model.hidden:
        for profile in model.profiles:
            margs = [tab.marg(lam, profile, (j,)) for j in range(n)]
            for t, p in tab.joint[(lam, profile)].items():
                prod = tab.one
                for j in range(n):
                    prod *= margs[j][(t[j],)]
                best.offer(abs(p - prod), lambda: Witness(
                    lam, (profile,), t, detail="joint differs from product of marginals"))
        for j, site in enumerate(model.sites):
            for s in site.settings:
                group = [p for p in model.profiles if p[j] == s]
                for o in site.outcomes[s]:
                    _spread(best, [(tab.marg(lam, p, (j,))[(o,)], p) for p in group],
                            lambda lo, hi: Witness(lam, (lo, hi), site=site.name, given={},
                                                   outcomes=(o,),
                                                   detail="marginal depends on other sites' settings"))
    return best.result(Condition.FACTORABILITY, config)


def _spread(best: _Max, values: list[tuple[Prob, Profile]], make):
    """Offer max - min of ``values``; the witness names both profiles in canonical order."""
    if len(values) < 2:
        return
    idx = range(len(values))
    lo = min(idx, key=lambda i: values[i][0])
    hi = max(idx, key=lambda i: values[i][0])
    first, second = sorted((lo, hi))
    best.offer(values[hi][0] - values[lo][0], lambda: make(values[first][1], values[second][1]))


def check_event_factorability(
    model: Model, lam: str, profile: Profile, query, config: CheckConfig = RATIONAL
) -> CheckResult:
    """Factorization test for one coarse event, e.g. King at L and Black at R."""
    conv = config.convert
    subsets = normalize_query(model, profile, query)
    whole = conv(event_prob(model, lam, profile, subsets))
    prod = conv(1)
    n = model.n_sites
    for j in range(n):
        only_j: list = [None] * n
        only_j[j] = subsets[j]
        prod *= conv(event_prob(model, lam, profile, only_j))
    dev = abs(whole - prod)
    best = _Max(conv(0))
    given = {model.sites[j].name: ",".join(sorted(subsets[j])) for j in range(n)}
    best.offer(dev, lambda: Witness(lam, (tuple(profile),), given=given,
                                   detail=f"event probability {whole} vs product {prod}"))
    return best.result(Condition.FACTORABILITY, config)


def check_parameter_independence(model: Model, config: CheckConfig = RATIONAL) -> CheckResult:
    """Conditional outcome probabilities at a site ignore settings of sites outside the conditioning set.

    For a target site ``j`` conditioned on outcomes at sites ``S``, profiles
    agreeing on the settings of ``S`` and ``j`` must give the same
    conditional probability.
    """
    tab = _tables(model, config)
    best = _Max(tab.zero)
    skipped = 0
    for lam in model.hidden:
        for j, sub in _conditioning_contexts(model):
            key_sites = sub + (j,)
            groups: dict[tuple, list[Profile]] = {}
            for p in model.profiles:
                groups.setdefault(tuple(p[i] for i in key_sites), []).append(p)
            for gkey, group in groups.items():
                if len(group) < 2:
                    continue
                alphabets = model.alphabets(group[0])
                for a in itertools.product(*(alphabets[i] for i in sub)):
                    supported = []
                    for p in group:
                        den = tab.marg(lam, p, sub)[a]
                        if den == 0:
                            skipped += 1
                        else:
                            supported.append((p, den))
                    for o in alphabets[j]:
                        values = [(tab.marg(lam, p, key_sites)[a + (o,)] / den, p)
                                  for p, den in supported]
                        _spread(best, values, lambda lo, hi: Witness(
                            lam, (lo, hi), site=model.sites[j].name,
                            given=_names(model, sub, a), outcomes=(o,),
                            detail="conditional depends on a remote setting"))
    return best.result(Condition.PARAMETER_INDEPENDENCE, config, skipped)


def check_outcome_independence(model: Model, config: CheckConfig = RATIONAL) -> CheckResult:
    """Conditioning on other sites' outcomes leaves each site's distribution unchanged."""
    tab = _tables(model, config)
    best = _Max(tab.zero)
    skipped = 0
    for lam in model.hidden:
        for profile in model.profiles:
            alphabets = model.alphabets(profile)
            for j, sub in _conditioning_contexts(model, nonempty=True):
                m_j = tab.marg(lam, profile, (j,))
                m_s = tab.marg(lam, profile, sub)
                m_sj = tab.marg(lam, profile, sub + (j,))
                for a, den in m_s.items():
                    if den == 0:
                        skipped += 1
                        continue
                    for o in alphabets[j]:
                        dev = abs(m_sj[a + (o,)] / den - m_j[(o,)])
                        best.offer(dev, lambda: Witness(
                            lam, (profile,), site=model.sites[j].name,
                            given=_names(model, sub, a), outcomes=(o,),
                            detail="conditional differs from marginal"))
    return best.result(Condition.OUTCOME_INDEPENDENCE, config, skipped)


def check_measurement_independence(model: Model, config: CheckConfig = RATIONAL) -> CheckResult:
    """The prior over hidden values is the same for every setting profile."""
    conv = config.convert
    best = _Max(conv(0))
    for i, lam in enumerate(model.hidden):
        values = [(conv(model.prior[p][i]), p) for p in model.profiles]
        _spread(best, values, lambda lo, hi: Witness(lam, (lo, hi), detail="prior depends on settings"))
    return best.result(Condition.MEASUREMENT_INDEPENDENCE, config)


def check_determinism(model: Model, config: CheckConfig = RATIONAL) -> CheckResult:
    """Every joint kernel entry is 0 or 1; deviation is the distance to {0, 1}."""
    tab = _tables(model, config)
    best = _Max(tab.zero)
    for (lam, profile), row in tab.joint.items():
        for t, p in row.items():
            best.offer(min(p, tab.one - p), lambda: Witness(lam, (profile,), t))
    return best.result(Condition.DETERMINISM, config)


def check_separability(model: Model, config: CheckConfig = RATIONAL) -> CheckResult:
    """Each site's conditional outcome probabilities depend only on its own hidden component and setting.

    Requires ``model.structure``. All contexts sharing (site, component,
    setting, outcome) must agree, whatever the other components, the other
    settings, and the outcomes conditioned on.
    """
    if model.structure is None:
        raise PreconditionError("separability needs a lambda structure")
    tab = _tables(model, config)
    best = _Max(tab.zero)
    skipped = 0
    seen: dict[tuple, tuple[Prob, tuple, Prob, tuple]] = {}
    for lam in model.hidden:
        comps = model.structure[lam]
        for profile in model.profiles:
            alphabets = model.alphabets(profile)
            for j, sub in _conditioning_contexts(model):
                m_s = tab.marg(lam, profile, sub)
                m_sj = tab.marg(lam, profile, sub + (j,))
                for a, den in m_s.items():
                    if den == 0:
                        skipped += 1
                        continue
                    for o in alphabets[j]:
                        value = m_sj[a + (o,)] / den
                        ctx = (lam, profile, sub, a)
                        key = (j, comps[j], profile[j], o)
                        if key not in seen:
                            seen[key] = (value, ctx, value, ctx)
                            continue
                        lo, lo_ctx, hi, hi_ctx = seen[key]
                        if value < lo:
                            lo, lo_ctx = value, ctx
                        if value > hi:
                            hi, hi_ctx = value, ctx
                        seen[key] = (lo, lo_ctx, hi, hi_ctx)
                        best.offer(hi - lo, lambda: _separability_witness(model, j, o, lo_ctx, hi_ctx))
    return best.result(Condition.SEPARABILITY, config, skipped)


def _separability_witness(model, j, o, ctx_a, ctx_b) -> Witness:
    (lam_a, prof_a, sub_a, a_a), (lam_b, prof_b, sub_b, a_b) = ctx_a, ctx_b
    detail = (f"P({model.sites[j].name}={o}) differs between hidden {lam_a} given "
              f"{_names(model, sub_a, a_a)} and hidden {lam_b} given {_names(model, sub_b, a_b)}")
    return Witness(lam_b, (prof_a, prof_b), outcomes=(o,), site=model.sites[j].name,
                   given=_names(model, sub_b, a_b), detail=detail)


CHECKS: dict[Condition, Callable[[Model, CheckConfig], CheckResult]] = {
    Condition.FACTORABILITY: check_factorability,
    Condition.PARAMETER_INDEPENDENCE: check_parameter_independence,
    Condition.OUTCOME_INDEPENDENCE: check_outcome_independence,
    Condition.MEASUREMENT_INDEPENDENCE: check_measurement_independence,
    Condition.DETERMINISM: check_determinism,
    Condition.SEPARABILITY: check_separability,
}


def run_check(model: Model, condition, config: CheckConfig = RATIONAL) -> CheckResult:
    return CHECKS[Condition(condition)](model, config)


def has_full_support(model: Model) -> bool:
    """No zero kernel entry anywhere."""
    return all(
        len(model.kernel.get((lam, p), {})) == len(model.tuples(p))
        for lam in model.hidden
        for p in model.profiles
    )


@dataclass(frozen=True)
class JarrettReport:
    """Factorability against its split into parameter and outcome independence."""

    parameter_independence: CheckResult
    outcome_independence: CheckResult
    factorability: CheckResult
    full_support: bool
    implication_ok: bool
    equivalence_ok: Optional[bool]
    notes: tuple[str, ...] = field(default=())

    @property
    def consistent(self) -> bool:
        return self.implication_ok and self.equivalence_ok is not False

    @property
    def results(self) -> tuple[CheckResult, CheckResult, CheckResult]:
        return self.parameter_independence, self.outcome_independence, self.factorability


def jarrett_report(model: Model, config: CheckConfig = RATIONAL) -> JarrettReport:
    pi = check_parameter_independence(model, config)
    oi = check_outcome_independence(model, config)
    fact = check_factorability(model, config)
    both = pi.holds and oi.holds
    full = has_full_support(model)
    notes = ("probabilistic determinism holds structurally: the kernel is a function "
             "of the hidden value and the settings",)
    return JarrettReport(
        pi, oi, fact, full,
        implication_ok=(not both) or fact.holds,
        equivalence_ok=(both == fact.holds) if full else None,
        notes=notes,
    )


def check_all(model: Model, config: CheckConfig = RATIONAL) -> list[CheckResult]:
    """Run every checker; separability only when the model carries a structure."""
    out = []
    for cond, fn in CHECKS.items():
        if cond is Condition.SEPARABILITY and model.structure is None:
            continue
        out.append(fn(model, config))
    return out


__all__ = [
    "CHECKS",
    "CheckConfig",
    "CheckResult",
    "Condition",
    "DomainError",
    "JarrettReport",
    "PreconditionError",
    "RATIONAL",
    "Witness",
    "check_all",
    "check_determinism",
    "check_event_factorability",
    "check_factorability",
    "check_measurement_independence",
    "check_outcome_independence",
    "check_parameter_independence",
    "check_separability",
    "has_full_support",
    "jarrett_report",
    "run_check",
]
