"""Built-in models.

``carddeck`` is the two-deck card experiment: each deck is split into pairs
holding one King and one Queen, one Black and one Red card. Deck 1 has 30%
``(KR, QB)`` pairs and 70% ``(KB, QR)`` pairs, deck 2 the reverse. A deck is
picked with probability 1/2 and each observer receives one card of a pair
drawn from it. ``carddeck-complete`` refines the deck label with the pair
drawn and who received which card, which makes every outcome certain.
"""
from __future__ import annotations

from fractions import Fraction as F
from typing import Callable

from .model import Model, Site

CARDS = ("KR", "KB", "QR", "QB")
PAIRS = {"D_1": {("KR", "QB"): F(3, 10), ("KB", "QR"): F(7, 10)},
         "D_2": {("KR", "QB"): F(7, 10), ("KB", "QR"): F(3, 10)}}


def _card_sites() -> tuple[Site, Site]:
    return Site("L", {"look": CARDS}), Site("R", {"look": CARDS})


def carddeck() -> Model:
    profile = ("look", "look")
    kernel = {}
    for deck, pairs in PAIRS.items():
        row = {}
        for (c1, c2), w in pairs.items():
            row[(c1, c2)] = w / 2
            row[(c2, c1)] = w / 2
        kernel[(deck, profile)] = row
    return Model(_card_sites(), ("D_1", "D_2"), (F(1, 2), F(1, 2)), kernel, name="carddeck")


def carddeck_complete() -> Model:
    """Card deck with hidden value (deck, pair, dealing); structure = each observer's card."""
    profile = ("look", "look")
    hidden, weights, kernel, structure = [], [], {}, {}
    for deck, pairs in PAIRS.items():
        for (c1, c2), w in pairs.items():
            for left, right in ((c1, c2), (c2, c1)):
                lam = f"{deck}.{left}-{right}"
                hidden.append(lam)
                weights.append(F(1, 2) * w * F(1, 2))
                kernel[(lam, profile)] = {(left, right): 1}
                structure[lam] = (left, right)
    return Model(_card_sites(), hidden, weights, kernel, structure, name="carddeck-complete")


def deck_of(lam: str) -> str:
    """Deck label of a ``carddeck-complete`` hidden value."""
    return lam.split(".", 1)[0]


def _local_model(name, sites, hidden, prior, local, structure=True) -> Model:
    """Product model from per-site kernels ``local[lam][site][setting] -> {outcome: p}``."""
    probe = Model(sites, hidden, prior, {})
    kernel = {}
    for lam in hidden:
        for profile in probe.profiles:
            row = {}
            for t in probe.tuples(profile):
                p = F(1)
                for j, (s, o) in enumerate(zip(profile, t)):
                    p *= F(local[lam][j][s].get(o, 0))
                row[t] = p
            kernel[(lam, profile)] = row
    struct = {lam: (lam,) * len(sites) for lam in hidden} if structure else None
    return Model(sites, hidden, prior, kernel, struct, name=name)


PM = ("+", "-")


def product() -> Model:
    """Two hidden values, two binary settings per site, outcomes independent given lambda."""
    sites = (Site("L", {"x0": PM, "x1": PM}), Site("R", {"y0": PM, "y1": PM}))
    local = {
        "h1": [{"x0": {"+": F(1, 3), "-": F(2, 3)}, "x1": {"+": F(1, 2), "-": F(1, 2)}},
               {"y0": {"+": F(1, 4), "-": F(3, 4)}, "y1": {"+": F(2, 3), "-": F(1, 3)}}],
        "h2": [{"x0": {"+": F(3, 5), "-": F(2, 5)}, "x1": {"+": F(1, 10), "-": F(9, 10)}},
               {"y0": {"+": F(1, 2), "-": F(1, 2)}, "y1": {"+": F(1, 5), "-": F(4, 5)}}],
    }
    return _local_model("product", sites, ("h1", "h2"), (F(2, 5), F(3, 5)), local)


def signaling() -> Model:
    """R's outcome copies L's setting choice; L's outcome is a fair coin."""
    sites = (Site("L", {"a0": PM, "a1": PM}), Site("R", {"b0": PM, "b1": PM}))
    probe = Model(sites, ("h",), (1,), {})
    kernel = {}
    for profile in probe.profiles:
        r = "+" if profile[0] == "a0" else "-"
        kernel[("h", profile)] = {("+", r): F(1, 2), ("-", r): F(1, 2)}
    return Model(sites, ("h",), (1,), kernel, name="signaling")


def two_setting() -> Model:
    """Setting-dependent prior: lambda is correlated with L's setting."""
    sites = (Site("L", {"a0": PM, "a1": PM}), Site("R", {"b": PM}))
    prior = {("a0", "b"): (F(1, 3), F(2, 3)), ("a1", "b"): (F(1, 2), F(1, 2))}
    kernel = {}
    for profile in prior:
        kernel[("h1", profile)] = {("+", "+"): 1}
        kernel[("h2", profile)] = {("-", "-"): 1}
    return Model(sites, ("h1", "h2"), prior, kernel, name="two-setting")


def deterministic() -> Model:
    """Perfectly anticorrelated: L always sees +, R always sees -."""
    sites = (Site("L", {"a0": PM, "a1": PM}), Site("R", {"b0": PM, "b1": PM}))
    local = {"h": [{"a0": {"+": 1}, "a1": {"+": 1}}, {"b0": {"-": 1}, "b1": {"-": 1}}]}
    return _local_model("deterministic", sites, ("h",), (1,), local)


def uniform() -> Model:
    """Independent fair coins at both sites."""
    sites = (Site("L", {"a0": PM, "a1": PM}), Site("R", {"b0": PM, "b1": PM}))
    coin = {"+": F(1, 2), "-": F(1, 2)}
    local = {"h": [{"a0": coin, "a1": coin}, {"b0": coin, "b1": coin}]}
    return _local_model("uniform", sites, ("h",), (1,), local)


FIXTURES: dict[str, Callable[[], Model]] = {
    "carddeck": carddeck,
    "carddeck-complete": carddeck_complete,
    "product": product,
    "signaling": signaling,
    "two-setting": two_setting,
    "deterministic": deterministic,
    "uniform": uniform,
}


def get(name: str) -> Model:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
