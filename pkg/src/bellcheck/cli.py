"""Command-line front end.

Exit status: 0 on success (every requested condition holds, or the output is
informational), 1 when a check or inequality fails, 2 on usage, input or
domain errors.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from . import __version__, fixtures
from .bell import ch74, chsh, default_map, enumerate_deterministic_bound
from .checks import (
    CheckConfig,
    Condition,
    PreconditionError,
    check_all,
    check_event_factorability,
    jarrett_report,
    run_check,
)
from .determinize import deterministic_extension, verify_extension
from .model import DomainError, Model, event_prob, validate
from .report import emit_report
from .sampler import sample
from .textformat import ParseError, parse_model, serialize_model

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load_model(spec: str) -> Model:
    """Resolve ``PATH``, ``PATH.hvm``, ``fixture:NAME`` or a bare fixture name."""
    if spec.startswith("fixture:"):
        return _fixture(spec.split(":", 1)[1])
    path = Path(spec)
    for candidate in (path, path.with_name(path.name + ".hvm")):
        if candidate.is_file():
            text = candidate.read_text(encoding="utf-8")
            try:
                return parse_model(text)
            except ParseError as exc:
                raise UsageError(f"{candidate}:{exc.line}:{exc.col}: {exc.message}") from None
    if path.name in fixtures.FIXTURES:
        return fixtures.get(path.name)
    raise UsageError(f"cannot read model {spec!r}: no such file or built-in fixture")


def _fixture(name: str) -> Model:
    try:
        return fixtures.get(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _config(args) -> CheckConfig:
    if args.tol is not None and args.mode != "float":
        raise UsageError("--tol is only valid with --mode float")
    if args.mode == "float":
        return CheckConfig.float_mode() if args.tol is None else CheckConfig.float_mode(args.tol)
    return CheckConfig()


def _require_valid(model: Model):
    report = validate(model)
    if not report.ok:
        raise UsageError("invalid model: " + "; ".join(v.message for v in report.violations))


def _write_json(args, results):
    if args.json:
        text = emit_report(results)
        if args.json == "-":
            args.stdout.write(text)
        else:
            Path(args.json).write_text(text, encoding="utf-8")


def _line(result) -> str:
    verdict = "HOLDS" if result.holds else "FAILS"
    text = f"{result.condition.value}: {verdict}  max deviation {result.max_deviation}"
    if not result.holds and result.witness is not None:
        text += f" at {result.witness}"
    if result.skipped_contexts:
        text += f"  ({result.skipped_contexts} zero-probability contexts skipped)"
    return text


def cmd_check(args) -> int:
    model = load_model(args.model)
    _require_valid(model)
    config = _config(args)
    if args.condition == "all":
        results = check_all(model, config)
    elif args.condition == "jarrett":
        rep = jarrett_report(model, config)
        for r in rep.results:
            print(_line(r))
        print(f"full support: {rep.full_support}")
        print(f"(PI and OI) implies factorability: {'ok' if rep.implication_ok else 'VIOLATED'}")
        if rep.equivalence_ok is not None:
            print(f"equivalence on full support: {'ok' if rep.equivalence_ok else 'VIOLATED'}")
        _write_json(args, [rep])
        return EXIT_OK if all(r.holds for r in rep.results) else EXIT_FAIL
    else:
        try:
            cond = Condition(args.condition)
        except ValueError:
            raise UsageError(f"unknown condition {args.condition!r}") from None
        results = [run_check(model, cond, config)]
    for r in results:
        print(_line(r))
    _write_json(args, results)
    return EXIT_OK if all(r.holds for r in results) else EXIT_FAIL


def _site(model: Model, key: str) -> int:
    return int(key) if key.isdigit() else model.site_index(key)


def parse_map(model: Model, specs: list[str]) -> dict:
    """``SITE.SETTING=PLUS,PLUS/MINUS,MINUS`` entries over the default map."""
    mapping = default_map(model)
    for spec in specs:
        for entry in filter(None, (e.strip() for e in spec.split(";"))):
            try:
                target, values = entry.split("=", 1)
                site, setting = target.rsplit(".", 1)
                plus, _, minus = values.partition("/")
            except ValueError:
                raise UsageError(f"bad --map entry {entry!r}; expected SITE.SETTING=O1,O2/O3") from None
            j = _site(model, site)
            if (j, setting) not in mapping:
                raise UsageError(f"unknown setting {setting!r} at site {site}")
            new = dict(mapping[(j, setting)])
            for sign, group in ((1, plus), (-1, minus)):
                for o in filter(None, group.split(",")):
                    if o not in new:
                        raise UsageError(f"unknown outcome {o!r} for {site}.{setting}")
                    new[o] = sign
            mapping[(j, setting)] = new
    return mapping


def _bell_settings(model: Model, args) -> tuple[str, str, str, str]:
    if model.n_sites != 2:
        raise UsageError("Bell expressions need a two-site model")
    s1, s2 = model.sites[0].settings, model.sites[1].settings
    a = args.a or s1[0]
    a2 = args.a2 or (s1[1] if len(s1) > 1 else s1[0])
    b = args.b or s2[0]
    b2 = args.b2 or (s2[1] if len(s2) > 1 else s2[0])
    return a, a2, b, b2


def cmd_chsh(args) -> int:
    model = load_model(args.model)
    _require_valid(model)
    a, a2, b, b2 = _bell_settings(model, args)
    res = chsh(model, a, a2, b, b2, parse_map(model, args.map))
    for label, e in zip(("E(a,b)", "E(a,b2)", "E(a2,b)", "E(a2,b2)"), res.correlators):
        print(f"{label} = {e}")
    print(f"S = {res.s}  ({'satisfied' if res.satisfied else 'VIOLATED'}: |S| <= 2)")
    _write_json(args, [res])
    return EXIT_OK if res.satisfied else EXIT_FAIL


def cmd_ch74(args) -> int:
    model = load_model(args.model)
    _require_valid(model)
    a, a2, b, b2 = _bell_settings(model, args)
    targets = {(j, s): alpha[0] for j, site in enumerate(model.sites) for s, alpha in site.outcomes.items()}
    for spec in args.target:
        try:
            target, outcome = spec.split("=", 1)
            site, setting = target.rsplit(".", 1)
        except ValueError:
            raise UsageError(f"bad --target {spec!r}; expected SITE.SETTING=OUTCOME") from None
        j = _site(model, site)
        if outcome not in model.sites[j].outcomes.get(setting, ()):
            raise UsageError(f"unknown target {spec!r}")
        targets[(j, setting)] = outcome
    res = ch74(model, a, a2, b, b2, targets)
    print(f"CH = {res.value}  ({'satisfied' if res.satisfied else 'VIOLATED'}: -1 <= CH <= 0)")
    _write_json(args, [res])
    return EXIT_OK if res.satisfied else EXIT_FAIL


def cmd_determinize(args) -> int:
    model = load_model(args.model)
    _require_valid(model)
    ext = deterministic_extension(model)
    print(f"extension: {len(ext.model.hidden)} deterministic hidden values "
          f"from {len(model.hidden)} original")
    if args.output:
        Path(args.output).write_text(serialize_model(ext.model), encoding="utf-8")
    results = []
    status = EXIT_OK
    if args.verify:
        rep = verify_extension(model, ext)
        results.append(rep)
        print(f"deterministic: {'yes' if rep.deterministic else 'NO'}")
        print("recovery: exact" if rep.exact else f"recovery: FAILED at {rep.first_mismatch}")
        status = EXIT_OK if rep.ok else EXIT_FAIL
    _write_json(args, results)
    return status


def cmd_sample(args) -> int:
    model = load_model(args.model)
    _require_valid(model)
    profile = tuple(args.profile.split(",")) if args.profile else model.profiles[0]
    summary = sample(model, profile, args.n, args.seed, hidden=args.hidden, chunks=args.chunks)
    print(f"model {summary.model}  profile {','.join(summary.profile)}  n={summary.n}  "
          f"seed={summary.seed}  generator={summary.generator}")
    for t, c, p in zip(summary.tuples, summary.counts, summary.analytic):
        if c or p:
            print(f"  {' '.join(t):<20} {c:>10}  {c / summary.n:.6f}  (exact {p})")
    print(f"total variation distance: {summary.tv_distance:.6f}")
    _write_json(args, [summary])
    return EXIT_OK


def _demo_carddeck(args) -> list:
    model = fixtures.carddeck()
    profile = ("look", "look")
    king = {"L": ("KR", "KB")}
    black = {"R": ("KB", "QB")}
    joint_kb = event_prob(model, "D_1", profile, {**king, **black})
    p_k = event_prob(model, "D_1", profile, king)
    p_b = event_prob(model, "D_1", profile, black)
    print("card decks: deck D_1 holds 30% (KR,QB) pairs and 70% (KB,QR) pairs; D_2 the reverse")
    print(f"P(K at L, B at R | D_1)           = {joint_kb}")
    print(f"P(K at L | D_1) * P(B at R | D_1) = {p_k} * {p_b} = {p_k * p_b}")
    event = check_event_factorability(model, "D_1", profile, {**king, **black})
    print(f"event deviation                   = {event.max_deviation}")
    results = [event]
    for r in check_all(model):
        print(_line(r))
        results.append(r)
    complete = fixtures.carddeck_complete()
    print("completed model (deck, pair, dealing):")
    for r in check_all(complete):
        print("  " + _line(r))
        results.append(r)
    res = chsh(model, "look", "look", "look", "look", {
        (0, "look"): {"KR": 1, "KB": 1, "QR": -1, "QB": -1},
        (1, "look"): {"KB": 1, "QB": 1, "KR": -1, "QR": -1},
    })
    print(f"CHSH with K/Q at L and B/R at R: S = {res.s} (|S| <= 2: {res.satisfied})")
    results.append(res)
    return results


def _demo_chsh_bound(args) -> list:
    bound = enumerate_deterministic_bound(2)
    print(f"{len(bound.values)} local deterministic strategies; max |S| = {bound.max_abs_s}; "
          f"{len(bound.argmax)} attain S = {bound.max_s}")
    return [bound]


DEMOS = {"carddeck": _demo_carddeck, "chsh-bound": _demo_chsh_bound}


def cmd_demo(args) -> int:
    if args.name not in DEMOS:
        raise UsageError(f"unknown demo {args.name!r}; known: {', '.join(DEMOS)}")
    _write_json(args, DEMOS[args.name](args))
    return EXIT_OK


def cmd_show(args) -> int:
    model = load_model(args.model)
    sys.stdout.write(serialize_model(model))
    report = validate(model)
    if not report.ok:
        for v in report.violations:
            print(f"invalid: {v.message}", file=sys.stderr)
        return EXIT_FAIL
    _write_json(args, [report])
    return EXIT_OK


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellcheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bellcheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH",
                        help="write a JSON report ('-' for stdout; text output then goes to stderr)")
    with_model = argparse.ArgumentParser(add_help=False, parents=[common])
    with_model.add_argument("--model", required=True, metavar="PATH|fixture:NAME")
    bell = argparse.ArgumentParser(add_help=False)
    for flag in ("--a", "--a2", "--b", "--b2"):
        bell.add_argument(flag, help="setting id (defaults: first and second settings)")

    p = sub.add_parser("check", parents=[with_model], help="check locality conditions")
    p.add_argument("--mode", choices=("rational", "float"), default="rational")
    p.add_argument("--tol", type=float, help="float-mode tolerance (default 1e-9)")
    p.add_argument("--condition", default="all",
                   help="all, jarrett, or one of: " + ", ".join(c.value for c in Condition))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("chsh", parents=[with_model, bell], help="evaluate the CHSH expression")
    p.add_argument("--map", action="append", default=[], metavar="SPEC",
                   help="SITE.SETTING=PLUS,../MINUS,..; unmapped outcomes: first +1, others -1")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("ch74", parents=[with_model, bell], help="evaluate the CH74 expression")
    p.add_argument("--target", action="append", default=[], metavar="SITE.SETTING=OUTCOME")
    p.set_defaults(func=cmd_ch74)

    p = sub.add_parser("determinize", parents=[with_model], help="build the deterministic extension")
    p.add_argument("--verify", action="store_true", help="verify exact recovery of the joint")
    p.add_argument("--output", metavar="PATH", help="write the extended model document")
    p.set_defaults(func=cmd_determinize)

    p = sub.add_parser("sample", parents=[with_model], help="Monte Carlo simulation")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--profile", help="comma-separated settings, one per site")
    p.add_argument("--hidden", help="fix the hidden value instead of drawing it")
    p.add_argument("--chunks", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("demo", parents=[common], help="built-in walkthroughs")
    p.add_argument("name", help=", ".join(DEMOS))
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("show", parents=[with_model], help="print the canonical model document")
    p.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # with --json -, stdout carries only the JSON document
    args.stdout = sys.stdout
    try:
        if args.json == "-":
            with contextlib.redirect_stdout(sys.stderr):
                return args.func(args)
        return args.func(args)
    except (UsageError, DomainError, PreconditionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
