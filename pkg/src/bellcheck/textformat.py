"""Line-oriented text format for models.

Example::

    # two decks of cards
    model carddeck
    site L
      setting look : KR KB QR QB
    site R
      setting look : KR KB QR QB
    hidden D_1 1/2
    hidden D_2 1/2
    kernel D_1 | look look
      KR QB : 3/20
      QB KR : 3/20
      KB QR : 7/20
      QR KB : 7/20
    kernel D_2 | look look
      ...

Indentation is cosmetic. ``setting`` lines belong to the last ``site`` and
outcome rows to the last ``kernel`` header; omitted rows have probability
zero. A hidden line may carry a prior weight and, after a colon, one
structure component per site. A setting-dependent prior is written as
``prior <settings...> : <weights...>`` lines instead of hidden weights.
Numbers are integers, ``p/q`` fractions or decimals, all read exactly.
Names are declared before use. The full grammar is in ``docs/format.md``.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Optional

from .model import Model, Site, is_exact

KEYWORDS = frozenset({"model", "site", "setting", "hidden", "prior", "kernel"})
_TOKEN = re.compile(r"[:|]|[^\s:|#]+")
_NUMBER = re.compile(r"\d+(?:/\d+)?|\d+\.\d*|\.\d+")


class ParseError(ValueError):
    """A diagnostic with a 1-based line and column."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class _Tok:
    __slots__ = ("text", "line", "col")

    def __init__(self, text, line, col):
        self.text, self.line, self.col = text, line, col

    def __repr__(self):
        return f"{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[tuple[int, list[_Tok]]]:
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = [_Tok(m.group(), n, m.start() + 1) for m in _TOKEN.finditer(line)]
        if toks:
            out.append((n, toks))
    return out


def _number(tok: _Tok) -> Fraction:
    if not _NUMBER.fullmatch(tok.text):
        raise ParseError(f"expected a number, got {tok.text!r}", tok.line, tok.col)
    try:
        return Fraction(tok.text)
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in {tok.text!r}", tok.line, tok.col) from None


def _name(tok: _Tok, what: str) -> str:
    if tok.text in (":", "|") or tok.text in KEYWORDS:
        raise ParseError(f"expected {what}, got {tok.text!r}", tok.line, tok.col)
    return tok.text


def _split(toks: list[_Tok], sep: str) -> Optional[tuple[list[_Tok], list[_Tok]]]:
    for i, t in enumerate(toks):
        if t.text == sep:
            return toks[:i], toks[i + 1:]
    return None


def parse_model(text: str) -> Model:
    """Parse a model document; raise :class:`ParseError` on any problem."""
    lines = _tokenize(text)
    if not lines or lines[0][1][0].text != "model":
        if lines:
            tok = lines[0][1][0]
            raise ParseError(f"expected 'model' declaration, got {tok.text!r}", tok.line, tok.col)
        raise ParseError("expected 'model' declaration, got end of input", 1, 1)

    name = "model"
    sites: list[tuple[str, dict[str, tuple[str, ...]], _Tok]] = []
    hidden: list[tuple[str, Optional[Fraction], Optional[tuple[str, ...]], _Tok]] = []
    priors: dict[tuple[str, ...], tuple[tuple[Fraction, ...], _Tok]] = {}
    kernels: dict[tuple[str, tuple[str, ...]], dict[tuple[str, ...], Fraction]] = {}
    headers: dict[tuple[str, tuple[str, ...]], _Tok] = {}
    current_kernel = None
    seen_model = False

    for n, toks in lines:
        head = toks[0]
        kw = head.text
        if kw == "model":
            if seen_model:
                raise ParseError("duplicate 'model' declaration", head.line, head.col)
            if len(toks) != 2:
                raise ParseError("expected: model NAME", head.line, head.col)
            name = _name(toks[1], "a model name")
            seen_model = True
        elif kw == "site":
            if hidden or kernels:
                raise ParseError("sites must be declared before hidden values and kernels", head.line, head.col)
            if len(toks) != 2:
                raise ParseError("expected: site NAME", head.line, head.col)
            sname = _name(toks[1], "a site name")
            if any(s[0] == sname for s in sites):
                raise ParseError(f"duplicate site {sname!r}", toks[1].line, toks[1].col)
            sites.append((sname, {}, head))
        elif kw == "setting":
            if not sites:
                raise ParseError("'setting' outside a site", head.line, head.col)
            if hidden or kernels:
                raise ParseError("settings must be declared before hidden values and kernels", head.line, head.col)
            parts = _split(toks[1:], ":")
            if parts is None or len(parts[0]) != 1 or not parts[1]:
                raise ParseError("expected: setting NAME : OUTCOME...", head.line, head.col)
            sid = _name(parts[0][0], "a setting name")
            settings = sites[-1][1]
            if sid in settings:
                raise ParseError(f"duplicate setting {sid!r}", parts[0][0].line, parts[0][0].col)
            alpha = []
            for t in parts[1]:
                o = _name(t, "an outcome name")
                if o in alpha:
                    raise ParseError(f"duplicate outcome {o!r}", t.line, t.col)
                alpha.append(o)
            settings[sid] = tuple(alpha)
        elif kw == "hidden":
            if kernels:
                raise ParseError("hidden values must be declared before kernels", head.line, head.col)
            body = toks[1:]
            comps = None
            parts = _split(body, ":")
            if parts is not None:
                body, ctoks = parts
                comps = tuple(_name(t, "a structure component") for t in ctoks)
                if len(comps) != len(sites):
                    raise ParseError(f"structure needs {len(sites)} components, got {len(comps)}",
                                     head.line, head.col)
            if len(body) not in (1, 2):
                raise ParseError("expected: hidden NAME [WEIGHT] [: COMPONENT...]", head.line, head.col)
            lam = _name(body[0], "a hidden-value name")
            if any(h[0] == lam for h in hidden):
                raise ParseError(f"duplicate hidden value {lam!r}", body[0].line, body[0].col)
            weight = _number(body[1]) if len(body) == 2 else None
            hidden.append((lam, weight, comps, body[0]))
        elif kw == "prior":
            parts = _split(toks[1:], ":")
            if parts is None:
                raise ParseError("expected: prior SETTING... : WEIGHT...", head.line, head.col)
            profile = _profile(parts[0], sites, head)
            if profile in priors:
                raise ParseError(f"duplicate prior for profile {' '.join(profile)}", head.line, head.col)
            priors[profile] = (tuple(_number(t) for t in parts[1]), head)
        elif kw == "kernel":
            parts = _split(toks[1:], "|")
            if parts is None or len(parts[0]) != 1:
                raise ParseError("expected: kernel HIDDEN | SETTING...", head.line, head.col)
            lam_tok = parts[0][0]
            lam = _name(lam_tok, "a hidden-value name")
            if all(h[0] != lam for h in hidden):
                raise ParseError(f"unknown hidden value {lam!r}", lam_tok.line, lam_tok.col)
            profile = _profile(parts[1], sites, head)
            key = (lam, profile)
            if key in kernels:
                raise ParseError(f"duplicate kernel block for {lam} | {' '.join(profile)}", head.line, head.col)
            kernels[key] = {}
            headers[key] = head
            current_kernel = key
        else:
            if current_kernel is None:
                raise ParseError(f"unknown statement {kw!r}", head.line, head.col)
            parts = _split(toks, ":")
            if parts is None or len(parts[1]) != 1:
                raise ParseError("expected: OUTCOME... : PROBABILITY", head.line, head.col)
            lam, profile = current_kernel
            alphabets = [sites[j][1][s] for j, s in enumerate(profile)]
            if len(parts[0]) != len(alphabets):
                raise ParseError(f"outcome row needs {len(alphabets)} outcomes, got {len(parts[0])}",
                                 head.line, head.col)
            outcome = []
            for j, t in enumerate(parts[0]):
                if t.text not in alphabets[j]:
                    raise ParseError(f"unknown outcome {t.text!r} at site {sites[j][0]} setting {profile[j]}",
                                     t.line, t.col)
                outcome.append(t.text)
            outcome = tuple(outcome)
            row = kernels[current_kernel]
            if outcome in row:
                raise ParseError(f"duplicate row {' '.join(outcome)}", head.line, head.col)
            row[outcome] = _number(parts[1][0])

    return _assemble(name, sites, hidden, priors, kernels, headers, lines[-1][0])


def _profile(toks: list[_Tok], sites, head: _Tok) -> tuple[str, ...]:
    if len(toks) != len(sites):
        raise ParseError(f"profile needs {len(sites)} settings, got {len(toks)}", head.line, head.col)
    for j, t in enumerate(toks):
        if t.text not in sites[j][1]:
            raise ParseError(f"unknown setting {t.text!r} at site {sites[j][0]}", t.line, t.col)
    return tuple(t.text for t in toks)


def _assemble(name, sites, hidden, priors, kernels, headers, last_line) -> Model:
    if not sites:
        raise ParseError("model declares no sites", last_line + 1, 1)
    for sname, settings, tok in sites:
        if not settings:
            raise ParseError(f"site {sname!r} declares no settings", tok.line, tok.col)
    if not hidden:
        raise ParseError("model declares no hidden values", last_line + 1, 1)

    model_sites = tuple(Site(s, settings) for s, settings, _ in sites)
    profiles = list(itertools.product(*(s.settings for s in model_sites)))
    lams = tuple(h[0] for h in hidden)

    weighted = [h for h in hidden if h[1] is not None]
    if weighted and priors:
        tok = priors[next(iter(priors))][1]
        raise ParseError("use either hidden weights or prior lines, not both", tok.line, tok.col)
    if weighted:
        if len(weighted) != len(hidden):
            tok = next(h[3] for h in hidden if h[1] is None)
            raise ParseError(f"hidden value {tok.text!r} has no prior weight", tok.line, tok.col)
        weights = tuple(h[1] for h in hidden)
        total = sum(weights)
        if total != 1:
            tok = hidden[0][3]
            raise ParseError(f"prior weights sum to {total}, not 1", tok.line, tok.col)
        prior = weights
    else:
        for p in profiles:
            if p not in priors:
                raise ParseError(f"no prior for profile {' '.join(p)}", last_line + 1, 1)
        for p, (ws, tok) in priors.items():
            if len(ws) != len(lams):
                raise ParseError(f"prior needs {len(lams)} weights, got {len(ws)}", tok.line, tok.col)
            if sum(ws) != 1:
                raise ParseError(f"prior for {' '.join(p)} sums to {sum(ws)}, not 1", tok.line, tok.col)
        prior = {p: priors[p][0] for p in profiles}

    for key, row in kernels.items():
        total = sum(row.values(), Fraction(0))
        if total != 1:
            tok = headers[key]
            raise ParseError(f"kernel {key[0]} | {' '.join(key[1])} sums to {total}, not 1", tok.line, tok.col)
    for lam, _, _, tok in hidden:
        for p in profiles:
            if (lam, p) not in kernels:
                raise ParseError(f"missing kernel block {lam} | {' '.join(p)}", tok.line, tok.col)

    structured = [h for h in hidden if h[2] is not None]
    if structured and len(structured) != len(hidden):
        tok = next(h[3] for h in hidden if h[2] is None)
        raise ParseError(f"hidden value {tok.text!r} has no structure components", tok.line, tok.col)
    structure = {h[0]: h[2] for h in hidden} if structured else None
    return Model(model_sites, lams, prior, kernels, structure, name=name)


def _check_name(name: str, what: str) -> str:
    if not name or name in KEYWORDS or not re.fullmatch(r"[^\s:|#]+", name):
        raise ValueError(f"{what} {name!r} cannot be written in a model document")
    return name


def _fmt(p) -> str:
    if is_exact(p):
        return str(Fraction(p))
    return repr(float(p))


def serialize_model(model: Model) -> str:
    """Canonical document: declaration order of the model, rationals in lowest terms, zero rows omitted."""
    out = [f"model {_check_name(model.name, 'model name')}"]
    for site in model.sites:
        out.append(f"site {_check_name(site.name, 'site name')}")
        for s, alpha in site.outcomes.items():
            names = " ".join(_check_name(o, "outcome") for o in alpha)
            out.append(f"  setting {_check_name(s, 'setting')} : {names}")
    constant = model.has_constant_prior()
    for i, lam in enumerate(model.hidden):
        parts = ["hidden", _check_name(lam, "hidden value")]
        if constant:
            parts.append(_fmt(model.prior[model.profiles[0]][i]))
        if model.structure is not None:
            parts.append(":")
            parts.extend(_check_name(c, "structure component") for c in model.structure[lam])
        out.append(" ".join(parts))
    if not constant:
        for p in model.profiles:
            out.append(f"prior {' '.join(p)} : {' '.join(_fmt(w) for w in model.prior[p])}")
    for lam in model.hidden:
        for p in model.profiles:
            out.append(f"kernel {lam} | {' '.join(p)}")
            row = model.kernel.get((lam, p), {})
            for t in model.tuples(p):
                if row.get(t, 0) != 0:
                    out.append(f"  {' '.join(t)} : {_fmt(row[t])}")
    return "\n".join(out) + "\n"
