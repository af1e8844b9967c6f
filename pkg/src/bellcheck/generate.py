"""Random finite models with exact rational weights, for property testing."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .model import Model, Site


def random_distribution(rng: random.Random, k: int, full_support: bool = False, max_weight: int = 6) -> tuple[Fraction, ...]:
    lo = 1 if full_support else 0
    while True:
        w = [rng.randint(lo, max_weight) for _ in range(k)]
        if sum(w):
            total = sum(w)
            return tuple(Fraction(x, total) for x in w)


def random_sites(rng: random.Random, max_sites: int = 3, max_settings: int = 3, max_outcomes: int = 4,
                 n_sites: Optional[int] = None) -> tuple[Site, ...]:
    n = n_sites or rng.randint(1, max_sites)
    sites = []
    for j in range(n):
        settings = {}
        for s in range(rng.randint(1, max_settings)):
            m = rng.randint(2, max_outcomes)
            settings[f"s{s}"] = tuple(f"o{k}" for k in range(m))
        sites.append(Site("ABCDEFGH"[j], settings))
    return tuple(sites)


def _hidden(rng: random.Random, max_hidden: int) -> tuple[str, ...]:
    return tuple(f"h{i}" for i in range(rng.randint(1, max_hidden)))


def random_model(rng: random.Random, max_sites: int = 3, max_settings: int = 3, max_outcomes: int = 4,
                 max_hidden: int = 3, full_support: bool = False, constant_prior: bool = True,
                 n_sites: Optional[int] = None) -> Model:
    """Arbitrary joint kernels; generically neither factorable nor signaling-free."""
    sites = random_sites(rng, max_sites, max_settings, max_outcomes, n_sites)
    hidden = _hidden(rng, max_hidden)
    probe = Model(sites, hidden, [1] * len(hidden), {})
    if constant_prior:
        prior = random_distribution(rng, len(hidden), full_support=True)
    else:
        prior = {p: random_distribution(rng, len(hidden), full_support=True) for p in probe.profiles}
    kernel = {}
    for lam in hidden:
        for p in probe.profiles:
            tuples = probe.tuples(p)
            kernel[(lam, p)] = dict(zip(tuples, random_distribution(rng, len(tuples), full_support)))
    return Model(sites, hidden, prior, kernel, name="random")


def _product_kernel(probe: Model, local) -> dict:
    kernel = {}
    for lam in probe.hidden:
        for p in probe.profiles:
            row = {}
            for t in probe.tuples(p):
                w = Fraction(1)
                for j, o in enumerate(t):
                    w *= local(lam, j, p, o)
                row[t] = w
            kernel[(lam, p)] = row
    return kernel


def random_factorable_model(rng: random.Random, max_sites: int = 3, max_settings: int = 3, max_outcomes: int = 4,
                            max_hidden: int = 3, full_support: bool = False, n_sites: Optional[int] = None) -> Model:
    """Product of per-site kernels that depend on the hidden value and the site's own setting.

    Carries the trivial structure (every site's component is the whole hidden value).
    """
    sites = random_sites(rng, max_sites, max_settings, max_outcomes, n_sites)
    hidden = _hidden(rng, max_hidden)
    prior = random_distribution(rng, len(hidden), full_support=True)
    probe = Model(sites, hidden, prior, {})
    dists = {
        (lam, j, s): dict(zip(alpha, random_distribution(rng, len(alpha), full_support)))
        for lam in hidden
        for j, site in enumerate(sites)
        for s, alpha in site.outcomes.items()
    }
    kernel = _product_kernel(probe, lambda lam, j, p, o: dists[(lam, j, p[j])][o])
    structure = {lam: (lam,) * len(sites) for lam in hidden}
    return Model(sites, hidden, prior, kernel, structure, name="random-factorable")


def random_deterministic_model(rng: random.Random, max_sites: int = 3, max_settings: int = 3,
                               max_outcomes: int = 4, max_hidden: int = 3, n_sites: Optional[int] = None) -> Model:
    """Each site's outcome is a function of the hidden value and its own setting."""
    sites = random_sites(rng, max_sites, max_settings, max_outcomes, n_sites)
    hidden = _hidden(rng, max_hidden)
    prior = random_distribution(rng, len(hidden), full_support=True)
    probe = Model(sites, hidden, prior, {})
    choice = {
        (lam, j, s): rng.choice(alpha)
        for lam in hidden
        for j, site in enumerate(sites)
        for s, alpha in site.outcomes.items()
    }
    kernel = _product_kernel(probe, lambda lam, j, p, o: Fraction(int(choice[(lam, j, p[j])] == o)))
    structure = {lam: (lam,) * len(sites) for lam in hidden}
    return Model(sites, hidden, prior, kernel, structure, name="random-deterministic")


def random_signaling_product(rng: random.Random, max_sites: int = 3, max_settings: int = 3, max_outcomes: int = 4,
                             max_hidden: int = 3, full_support: bool = True, n_sites: Optional[int] = None) -> Model:
    """Independent outcomes per profile, but each site's marginal may depend on every setting."""
    sites = random_sites(rng, max_sites, max_settings, max_outcomes, n_sites)
    hidden = _hidden(rng, max_hidden)
    prior = random_distribution(rng, len(hidden), full_support=True)
    probe = Model(sites, hidden, prior, {})
    dists = {}
    for lam in hidden:
        for p in probe.profiles:
            for j, alpha in enumerate(probe.alphabets(p)):
                dists[(lam, j, p)] = dict(zip(alpha, random_distribution(rng, len(alpha), full_support)))
    kernel = _product_kernel(probe, lambda lam, j, p, o: dists[(lam, j, p)][o])
    return Model(sites, hidden, prior, kernel, name="random-signaling")


def random_dichotomic_map(rng: random.Random, model: Model) -> dict[tuple[int, str], dict[str, int]]:
    return {
        (j, s): {o: rng.choice((1, -1)) for o in alpha}
        for j, site in enumerate(model.sites)
        for s, alpha in site.outcomes.items()
    }
