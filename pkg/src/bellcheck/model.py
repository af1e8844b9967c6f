"""Finite hidden-variable models and the exact probability engine.

A model describes ``N`` sites (regions), each with a list of measurement
settings and an ordered outcome alphabet per setting. A hidden variable
takes finitely many labelled values with a prior that may depend on the
setting profile, and a kernel gives the joint outcome distribution for each
``(hidden value, profile)`` pair.

Probabilities are exact :class:`fractions.Fraction` values by default. Plain
floats are accepted for imported float data; see :func:`as_float` and
:func:`as_rational`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

Prob = Union[Fraction, float]
Profile = tuple[str, ...]
Outcomes = tuple[str, ...]

DEFAULT_FLOAT_TOL = 1e-9


class DomainError(ValueError):
    """Unknown hidden value, setting, outcome or site."""


def to_prob(value) -> Prob:
    """Coerce ``value`` to an exact rational, leaving floats untouched.

    Strings are read exactly, so ``"0.3"`` becomes ``3/10``.
    """
    if isinstance(value, float):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def is_exact(value: Prob) -> bool:
    return not isinstance(value, float)


@dataclass(frozen=True)
class Site:
    """One measurement region.

    ``outcomes`` maps each setting id to its ordered outcome alphabet. The
    insertion order of ``outcomes`` is the setting order.
    """

    name: str
    outcomes: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(
            self, "outcomes", {s: tuple(alpha) for s, alpha in self.outcomes.items()}
        )

    @property
    def settings(self) -> tuple[str, ...]:
        return tuple(self.outcomes)


@dataclass(frozen=True)
class Model:
    """A finite multipartite hidden-variable model.

    Parameters
    ----------
    sites
        Ordered sites. The order fixes tuple layout and the default chain
        order.
    hidden
        Ordered hidden-variable labels.
    prior
        Either one weight sequence aligned with ``hidden`` (a setting
        independent prior) or a mapping from profile to such a sequence.
    kernel
        Mapping ``(hidden, profile) -> {outcome tuple: probability}``.
        Tuples left out have probability zero.
    structure
        Optional mapping from hidden label to per-site component labels.

    Instances are never mutated after construction. Construction does not
    check normalization or totality; use :func:`validate` for that.
    """

    sites: tuple[Site, ...]
    hidden: tuple[str, ...]
    prior: Mapping[Profile, tuple[Prob, ...]]
    kernel: Mapping[tuple[str, Profile], Mapping[Outcomes, Prob]]
    structure: Optional[Mapping[str, tuple[str, ...]]] = None
    name: str = "model"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        sites = tuple(self.sites)
        hidden = tuple(self.hidden)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "hidden", hidden)
        profiles = list(itertools.product(*(s.settings for s in sites)))

        prior = self.prior
        if isinstance(prior, Mapping):
            prior = {tuple(p): tuple(to_prob(w) for w in ws) for p, ws in prior.items()}
        else:
            weights = tuple(to_prob(w) for w in prior)
            prior = {p: weights for p in profiles}
        object.__setattr__(self, "prior", prior)

        kernel = {}
        for (lam, profile), row in self.kernel.items():
            clean = {}
            for outcomes, p in row.items():
                p = to_prob(p)
                if p != 0:
                    clean[tuple(outcomes)] = p
            kernel[(lam, tuple(profile))] = clean
        object.__setattr__(self, "kernel", kernel)

        if self.structure is not None:
            object.__setattr__(
                self, "structure", {lam: tuple(c) for lam, c in self.structure.items()}
            )

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.name == other.name
            and self.sites == other.sites
            and self.hidden == other.hidden
            and self.prior == other.prior
            and self.kernel == other.kernel
            and self.structure == other.structure
        )

    __hash__ = None

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @cached_property
    def profiles(self) -> tuple[Profile, ...]:
        return tuple(itertools.product(*(s.settings for s in self.sites)))

    def alphabets(self, profile: Profile) -> tuple[tuple[str, ...], ...]:
        return tuple(site.outcomes[s] for site, s in zip(self.sites, profile))

    def tuples(self, profile: Profile) -> list[Outcomes]:
        """All outcome tuples for ``profile`` in canonical (lexicographic) order."""
        key = ("tuples", profile)
        if key not in self._cache:
            self._cache[key] = list(itertools.product(*self.alphabets(profile)))
        return self._cache[key]

    def site_index(self, site: Union[int, str]) -> int:
        if isinstance(site, int):
            if not 0 <= site < len(self.sites):
                raise DomainError(f"site index {site} out of range")
            return site
        for i, s in enumerate(self.sites):
            if s.name == site:
                return i
        raise DomainError(f"unknown site {site!r}")

    def prior_of(self, profile: Profile) -> dict[str, Prob]:
        self.check_profile(profile)
        return dict(zip(self.hidden, self.prior[tuple(profile)]))

    def has_constant_prior(self) -> bool:
        vectors = [self.prior.get(p) for p in self.profiles]
        return all(v == vectors[0] for v in vectors)

    def is_exact(self) -> bool:
        values = itertools.chain(
            itertools.chain.from_iterable(self.prior.values()),
            itertools.chain.from_iterable(r.values() for r in self.kernel.values()),
        )
        return all(is_exact(v) for v in values)

    def check_profile(self, profile: Profile) -> Profile:
        profile = tuple(profile)
        if len(profile) != len(self.sites):
            raise DomainError(f"profile {profile} has length {len(profile)}, expected {len(self.sites)}")
        for site, s in zip(self.sites, profile):
            if s not in site.outcomes:
                raise DomainError(f"unknown setting {s!r} at site {site.name}")
        return profile

    def check_hidden(self, lam: str) -> str:
        if lam not in self.hidden:
            raise DomainError(f"unknown hidden value {lam!r}")
        return lam

    def row(self, lam: str, profile: Profile) -> Mapping[Outcomes, Prob]:
        """Sparse kernel row for ``(lam, profile)``."""
        self.check_hidden(lam)
        profile = self.check_profile(profile)
        try:
            return self.kernel[(lam, profile)]
        except KeyError:
            raise DomainError(f"no kernel entry for ({lam}, {profile})") from None


class Violation(NamedTuple):
    kind: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def _is_one(total: Prob, tol: float) -> bool:
    if is_exact(total):
        return total == 1
    return abs(total - 1) <= tol


def validate(model: Model, tol: float = DEFAULT_FLOAT_TOL) -> ValidationReport:
    """List every violated structural invariant of ``model``.

    Exact sums must equal 1 exactly; sums involving floats are compared with
    ``tol``. Never raises.
    """
    report = ValidationReport()
    add = report.violations.append

    if not model.sites:
        add(Violation("sites", "model has no sites"))
    names = [s.name for s in model.sites]
    if len(set(names)) != len(names):
        add(Violation("sites", f"duplicate site names {names}"))
    for site in model.sites:
        if not site.outcomes:
            add(Violation("settings", f"site {site.name} has no settings"))
        for s, alpha in site.outcomes.items():
            if not alpha:
                add(Violation("alphabet", f"site {site.name} setting {s} has an empty alphabet"))
            elif len(set(alpha)) != len(alpha):
                add(Violation("alphabet", f"site {site.name} setting {s} repeats an outcome"))
    if not model.hidden:
        add(Violation("hidden", "hidden alphabet is empty"))
    if len(set(model.hidden)) != len(model.hidden):
        add(Violation("hidden", "duplicate hidden values"))
    if report.violations:
        return report

    for profile in model.profiles:
        weights = model.prior.get(profile)
        if weights is None:
            add(Violation("prior", f"no prior for profile {profile}"))
            continue
        if len(weights) != len(model.hidden):
            add(Violation("prior", f"prior for {profile} has {len(weights)} weights, expected {len(model.hidden)}"))
            continue
        if any(w < 0 for w in weights):
            add(Violation("prior", f"negative prior weight for {profile}"))
        total = sum(weights)
        if not _is_one(total, tol):
            add(Violation("normalization", f"prior for {profile} sums to {total}"))
    for profile in model.prior:
        if profile not in model.profiles:
            add(Violation("prior", f"prior given for unknown profile {profile}"))

    for lam in model.hidden:
        for profile in model.profiles:
            row = model.kernel.get((lam, profile))
            if row is None:
                add(Violation("totality", f"missing kernel entry for ({lam}, {profile})"))
                continue
            alphabets = model.alphabets(profile)
            for outcomes, p in row.items():
                if len(outcomes) != len(alphabets) or any(
                    o not in alpha for o, alpha in zip(outcomes, alphabets)
                ):
                    add(Violation("outcome", f"kernel ({lam}, {profile}) has unknown tuple {outcomes}"))
                if p < 0:
                    add(Violation("kernel", f"negative probability at ({lam}, {profile}, {outcomes})"))
            total = sum(row.values(), Fraction(0))
            if not _is_one(total, tol):
                add(Violation("normalization", f"kernel ({lam}, {profile}) sums to {total}"))
    for (lam, profile) in model.kernel:
        if lam not in model.hidden or profile not in model.profiles:
            add(Violation("kernel", f"kernel entry for unknown context ({lam}, {profile})"))

    if model.structure is not None:
        for lam in model.hidden:
            comps = model.structure.get(lam)
            if comps is None:
                add(Violation("structure", f"lambda structure does not cover {lam}"))
            elif len(comps) != len(model.sites):
                add(Violation("structure", f"structure of {lam} has {len(comps)} components, expected {len(model.sites)}"))
    return report


def _check_outcomes(model: Model, profile: Profile, outcomes: Sequence[str]) -> Outcomes:
    outcomes = tuple(outcomes)
    alphabets = model.alphabets(profile)
    if len(outcomes) != len(alphabets):
        raise DomainError(f"outcome tuple {outcomes} has wrong length")
    for site, o, alpha in zip(model.sites, outcomes, alphabets):
        if o not in alpha:
            raise DomainError(f"unknown outcome {o!r} at site {site.name}")
    return outcomes


def joint(model: Model, lam: str, profile: Profile, outcomes: Sequence[str]) -> Prob:
    """P(outcomes | lam, profile), exactly as stored."""
    row = model.row(lam, profile)
    outcomes = _check_outcomes(model, tuple(profile), outcomes)
    return row.get(outcomes, Fraction(0))


def normalize_query(model: Model, profile: Profile, query) -> tuple[frozenset, ...]:
    """Turn an event query into one outcome subset per site.

    ``query`` is either a sequence aligned with the sites or a mapping keyed
    by site name or index. Each entry is an outcome, an iterable of outcomes,
    or ``None`` for the full alphabet. Sites missing from a mapping are
    unrestricted.
    """
    profile = model.check_profile(profile)
    alphabets = model.alphabets(profile)
    if isinstance(query, Mapping):
        entries: list = [None] * len(alphabets)
        for key, sub in query.items():
            entries[model.site_index(key)] = sub
    else:
        entries = list(query)
        if len(entries) != len(alphabets):
            raise DomainError(f"query has {len(entries)} entries, expected {len(alphabets)}")
    subsets = []
    for site, alpha, sub in zip(model.sites, alphabets, entries):
        if sub is None:
            subsets.append(frozenset(alpha))
            continue
        if isinstance(sub, str):
            sub = (sub,)
        sub = frozenset(sub)
        if not sub:
            raise DomainError(f"empty event at site {site.name}")
        unknown = sub - set(alpha)
        if unknown:
            raise DomainError(f"unknown outcomes {sorted(unknown)} at site {site.name}")
        subsets.append(sub)
    return tuple(subsets)


def event_prob(model: Model, lam: str, profile: Profile, query) -> Prob:
    """Probability of a coarse event such as "King at L and Black at R"."""
    row = model.row(lam, profile)
    subsets = normalize_query(model, profile, query)
    total = Fraction(0)
    for outcomes, p in row.items():
        if all(o in sub for o, sub in zip(outcomes, subsets)):
            total += p
    return total


def marginal(model: Model, lam: str, profile: Profile, site: Union[int, str], outcome: str) -> Prob:
    """P(outcome at ``site`` | lam, profile), summed out of the joint."""
    j = model.site_index(site)
    row = model.row(lam, profile)
    if outcome not in model.alphabets(tuple(profile))[j]:
        raise DomainError(f"unknown outcome {outcome!r} at site {model.sites[j].name}")
    return sum((p for t, p in row.items() if t[j] == outcome), Fraction(0))


class Conditional(NamedTuple):
    """A conditional probability; ``undefined`` marks a zero-probability condition.

    Undefined conditionals carry the value 1 so that chain products still
    reproduce the joint (which is 0 there).
    """

    value: Prob
    undefined: bool = False


def _subset_prob(row: Mapping[Outcomes, Prob], assignment: Mapping[int, str]) -> Prob:
    return sum(
        (p for t, p in row.items() if all(t[i] == o for i, o in assignment.items())),
        Fraction(0),
    )


def conditional(
    model: Model,
    lam: str,
    profile: Profile,
    site: Union[int, str],
    outcome: str,
    given: Mapping[Union[int, str], str],
) -> Conditional:
    """P(outcome at site | outcomes at the ``given`` sites, lam, profile)."""
    j = model.site_index(site)
    row = model.row(lam, profile)
    alphabets = model.alphabets(tuple(profile))
    cond = {}
    for key, o in given.items():
        i = model.site_index(key)
        if o not in alphabets[i]:
            raise DomainError(f"unknown outcome {o!r} at site {model.sites[i].name}")
        cond[i] = o
    if j in cond:
        raise DomainError("conditioning set contains the target site")
    if outcome not in alphabets[j]:
        raise DomainError(f"unknown outcome {outcome!r} at site {model.sites[j].name}")
    denom = _subset_prob(row, cond)
    if denom == 0:
        return Conditional(Fraction(1), True)
    return Conditional(_subset_prob(row, {**cond, j: outcome}) / denom, False)


def chain_factor(
    model: Model,
    lam: str,
    profile: Profile,
    j: int,
    prefix: Sequence[str],
    outcome: str,
) -> Conditional:
    """P(e_j | e_0..e_{j-1}, lam, profile) with ``j`` a 0-based site index.

    ``prefix`` holds the outcomes of sites ``0..j-1`` in site order.
    """
    prefix = tuple(prefix)
    if len(prefix) != j:
        raise DomainError(f"prefix must cover sites 0..{j - 1}, got {len(prefix)} outcomes")
    return conditional(model, lam, profile, j, outcome, dict(enumerate(prefix)))


def chain_factors(
    model: Model,
    lam: str,
    profile: Profile,
    outcomes: Sequence[str],
    order: Optional[Sequence[Union[int, str]]] = None,
) -> list[Conditional]:
    """The Bayes chain factors of a full tuple, one per site in ``order``.

    Their product equals :func:`joint` for any order.
    """
    profile = model.check_profile(profile)
    outcomes = _check_outcomes(model, profile, outcomes)
    if order is None:
        idx = list(range(model.n_sites))
    else:
        idx = [model.site_index(s) for s in order]
        if sorted(idx) != list(range(model.n_sites)):
            raise DomainError(f"order {order} is not a permutation of the sites")
    factors = []
    for pos, j in enumerate(idx):
        given = {i: outcomes[i] for i in idx[:pos]}
        factors.append(conditional(model, lam, profile, j, outcomes[j], given))
    return factors


def coarse_grain(model: Model, groups: Mapping[str, str], name: Optional[str] = None) -> Model:
    """Merge hidden values into coarser labels.

    ``groups`` maps every hidden label to its coarse label. The coarse prior
    is the summed prior and the coarse kernel the prior-weighted average of
    the merged kernels, per profile.
    """
    missing = [lam for lam in model.hidden if lam not in groups]
    if missing:
        raise DomainError(f"no coarse label for {missing}")
    coarse = list(dict.fromkeys(groups[lam] for lam in model.hidden))
    prior = {}
    kernel = {}
    for profile in model.profiles:
        weights = model.prior_of(profile)
        totals = {c: Fraction(0) for c in coarse}
        for lam in model.hidden:
            totals[groups[lam]] += weights[lam]
        prior[profile] = tuple(totals[c] for c in coarse)
        for c in coarse:
            if totals[c] == 0:
                raise DomainError(f"coarse value {c!r} has zero weight under {profile}")
            acc: dict[Outcomes, Prob] = {}
            for lam in model.hidden:
                if groups[lam] != c:
                    continue
                for t, p in model.row(lam, profile).items():
                    acc[t] = acc.get(t, 0) + weights[lam] * p / totals[c]
            kernel[(c, profile)] = acc
    return Model(model.sites, tuple(coarse), prior, kernel, name=name or model.name)


def _convert(model: Model, conv) -> Model:
    prior = {p: tuple(conv(w) for w in ws) for p, ws in model.prior.items()}
    kernel = {k: {t: conv(p) for t, p in row.items()} for k, row in model.kernel.items()}
    return Model(model.sites, model.hidden, prior, kernel, model.structure, model.name)


def as_float(model: Model) -> Model:
    return _convert(model, float)


def as_rational(model: Model) -> Model:
    """Exact copy of ``model``; floats become their exact binary rationals."""
    return _convert(model, Fraction)


def mixture(model: Model, profile: Profile) -> dict[Outcomes, Prob]:
    """Prior-averaged outcome distribution for ``profile`` (the observable one)."""
    weights = model.prior_of(profile)
    acc: dict[Outcomes, Prob] = {t: Fraction(0) for t in model.tuples(tuple(profile))}
    for lam in model.hidden:
        for t, p in model.row(lam, profile).items():
            acc[t] += weights[lam] * p
    return acc


def iter_contexts(model: Model) -> Iterable[tuple[str, Profile]]:
    for lam in model.hidden:
        for profile in model.profiles:
            yield lam, profile
