"""Independent brute-force oracles.

Nothing here imports the code under test except the Model container, and the
algorithms deliberately differ from the library's: card-deck values come from
enumerating physical deals, and the conditional checks walk explicit site
orderings with Bayes chains instead of cached subset marginals.
"""
from __future__ import annotations

import itertools
from fractions import Fraction as F

KR_QB_SHARE = {"D_1": F(30, 100), "D_2": F(70, 100)}


def card_deals():
    """Yield (deck, card to L, card to R, probability) for every deal."""
    for deck, share in KR_QB_SHARE.items():
        for pair, w in ((("KR", "QB"), share), (("KB", "QR"), 1 - share)):
            for left, right in (pair, pair[::-1]):
                yield deck, left, right, F(1, 2) * w * F(1, 2)


def card_prob(deck, pred):
    """P(pred(left, right) | deck) by enumeration."""
    total = sum(p for d, _, _, p in card_deals() if d == deck)
    hit = sum(p for d, l, r, p in card_deals() if d == deck and pred(l, r))
    return hit / total


def king(card):
    return card[0] == "K"


def black(card):
    return card[1] == "B"


# --- generic brute force over a Model's raw kernel -------------------------

def _dense(model, lam, profile):
    row = model.kernel[(lam, profile)]
    alphabets = [s.outcomes[x] for s, x in zip(model.sites, profile)]
    return {t: F(row.get(t, 0)) for t in itertools.product(*alphabets)}


def _prob(dense, fixed):
    return sum((p for t, p in dense.items() if all(t[i] == o for i, o in fixed.items())), F(0))


def bf_factorability(model):
    """Max deviation from joint = product of own-setting marginals (incl. marginal spread)."""
    n = len(model.sites)
    worst = F(0)
    margs = {}
    for lam in model.hidden:
        for profile in itertools.product(*(s.settings for s in model.sites)):
            dense = _dense(model, lam, profile)
            for j in range(n):
                for o in model.sites[j].outcomes[profile[j]]:
                    margs.setdefault((lam, j, profile[j], o), []).append(_prob(dense, {j: o}))
            for t, p in dense.items():
                prod = F(1)
                for j, o in enumerate(t):
                    prod *= _prob(dense, {j: o})
                worst = max(worst, abs(p - prod))
    for values in margs.values():
        worst = max(worst, max(values) - min(values))
    return worst


def _chain_contexts(model):
    """Yield (lam, profile, order, pos, prefix-dict, site, outcome, conditional) over all orderings."""
    n = len(model.sites)
    for lam in model.hidden:
        for profile in itertools.product(*(s.settings for s in model.sites)):
            dense = _dense(model, lam, profile)
            for order in itertools.permutations(range(n)):
                for pos, j in enumerate(order):
                    before = order[:pos]
                    for t in itertools.product(*(model.sites[i].outcomes[profile[i]] for i in before)):
                        prefix = dict(zip(before, t))
                        den = _prob(dense, prefix)
                        for o in model.sites[j].outcomes[profile[j]]:
                            cond = None if den == 0 else _prob(dense, {**prefix, j: o}) / den
                            yield lam, profile, order, pos, prefix, j, o, cond, dense


def bf_outcome_independence(model):
    worst = F(0)
    for lam, profile, order, pos, prefix, j, o, cond, dense in _chain_contexts(model):
        if cond is not None:
            worst = max(worst, abs(cond - _prob(dense, {j: o})))
    return worst


def bf_parameter_independence(model):
    groups = {}
    for lam, profile, order, pos, prefix, j, o, cond, dense in _chain_contexts(model):
        if cond is None:
            continue
        agree = tuple(profile[i] for i in order[: pos + 1])
        key = (lam, order[: pos + 1], agree, tuple(sorted(prefix.items())), o)
        groups.setdefault(key, []).append(cond)
    return max((max(v) - min(v) for v in groups.values()), default=F(0))


def bf_determinism(model):
    worst = F(0)
    for lam in model.hidden:
        for profile in itertools.product(*(s.settings for s in model.sites)):
            for p in _dense(model, lam, profile).values():
                worst = max(worst, min(p, 1 - p))
    return worst
