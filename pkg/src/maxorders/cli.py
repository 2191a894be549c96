"""Command-line front end.

Exit codes: 0 verified or success, 1 refuted (witness in the report),
2 unknown (a search bound was hit), 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .affine import (
    AffineSyntaxError,
    is_maximal_order,
    member,
    minimal_primes,
    parse_affine,
    spectrum,
)
from .bundle import load_bundle, resolve
from .crossed import (
    CrossedSystemError,
    dimension_report,
    maximality_check,
    minimal_primes_of_S,
    prime_action_orbits,
    separation_certificates,
    theorem33_report,
    verify_monomial_rep,
)
from .groups import GroupSyntaxError, delta_plus_trivial, dihedral_free, parse_group, validate_extension
from .presentations import (
    IncompleteCompletion,
    PresentationSyntaxError,
    complete,
    enumerate_elements,
    normal_form,
    parse_presentation,
)
from .replay import replay
from .status import REFUTED, UNKNOWN, VERIFIED, SearchBoundExceeded, jsonable

EXIT = {VERIFIED: 0, REFUTED: 1, UNKNOWN: 2}
INPUT_ERROR = 3


class InputError(Exception):
    pass


def _is_bundle(path) -> bool:
    try:
        return (resolve(path) / "presentation.txt").exists()
    except FileNotFoundError:
        return False


def _read(path) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _presentation(path):
    if _is_bundle(path):
        return load_bundle(path).presentation
    return parse_presentation(_read(path))


def _rewrite_system(args):
    if _is_bundle(args.input):
        b = load_bundle(args.input)
        return b.rewrite_system(args.max_rules)
    return complete(_presentation(args.input), args.max_rules or 500, args.max_len or 20)


def _affine(path):
    if _is_bundle(path):
        return load_bundle(path).base
    return parse_affine(_read(path))[0]


def _group(path):
    if _is_bundle(path):
        b = load_bundle(path)
        return b.crossed_system().extension
    return parse_group(_read(path))


def _bundle(args):
    if not _is_bundle(args.input):
        raise InputError(f"{args.input} is not a crossed-system bundle")
    return load_bundle(args.input)


# -- verbs -----------------------------------------------------------------------

def cmd_normalize(args):
    rs = _rewrite_system(args)
    w = rs.word(args.word)
    nf = normal_form(rs, w)
    return VERIFIED, {"word": rs.format(w), "normal_form": rs.format(nf)}


def cmd_complete(args):
    p = _presentation(args.input)
    try:
        rs = complete(p, args.max_rules or 500, args.max_len or 20)
    except IncompleteCompletion as exc:
        return UNKNOWN, {
            "confluent": False,
            "reason": exc.reason,
            "partial_rules": [[p.format(a), p.format(b)] for a, b in exc.rules],
        }
    return VERIFIED, {
        "confluent": True,
        "order": [p.names[a] for a in (p.order or range(len(p.names)))],
        "rules": [[rs.format(a), rs.format(b)] for a, b in rs.rules],
    }


def cmd_enumerate(args):
    rs = _rewrite_system(args)
    words, counts = enumerate_elements(rs, args.length)
    out = {"counts": counts}
    if args.words:
        out["words"] = [rs.format(w) for w in words]
    return VERIFIED, out


def cmd_affine(args):
    b = _affine(args.input)
    if args.action == "member":
        if len(args.vector) != b.ambient_rank:
            raise InputError(f"expected {b.ambient_rank} integers")
        r = member(b, tuple(args.vector), args.max_nodes)
        out = r.to_json()
        if r:
            out["product"] = b.format(r.coefficients)
        return (VERIFIED if r else REFUTED), out
    if args.action == "minimal-primes":
        ps = minimal_primes(b)
        return VERIFIED, {"minimal_primes": [p.to_json(b) for p in ps], "count": len(ps)}
    if args.action == "check-normal":
        r = is_maximal_order(b, args.max_nodes)
        return (VERIFIED if r else REFUTED), r.to_json()
    if args.action == "spectrum":
        return VERIFIED, spectrum(b).to_json(b)
    raise InputError(f"unknown affine action {args.action}")


def cmd_group(args):
    e = _group(args.input)
    if args.action == "validate":
        v = validate_extension(e)
        return (VERIFIED if v.ok else REFUTED), v.to_json()
    v = validate_extension(e)
    if not v.ok:
        raise InputError(f"invalid extension data: {v.violation}")
    if args.action == "delta-plus":
        r = delta_plus_trivial(e)
        return (VERIFIED if r else REFUTED), {"delta_plus_trivial": r.value, **r.to_json(e)}
    if args.action == "dihedral-free":
        r = dihedral_free(e)
        return (VERIFIED if r else REFUTED), {"dihedral_free": r.value, **r.to_json(e)}
    raise InputError(f"unknown group action {args.action}")


def cmd_crossed(args):
    b = _bundle(args)
    if args.action == "rep-verify":
        rep = b.monomial_rep()
        if rep is None:
            raise InputError("bundle has no monomial_rep.txt")
        r = verify_monomial_rep(b.presentation, rep, b.setting("scan_len", args.scan_len), b.rewrite_system(args.max_rules))
        return (VERIFIED if r.ok else REFUTED), r.to_json()
    try:
        cs = b.crossed_system(args.check_len, args.max_rules)
    except CrossedSystemError as exc:
        word = b.presentation.format(exc.word) if exc.word is not None else None
        return REFUTED, {"error": type(exc).__name__, "message": str(exc), "word": word}
    if args.action == "validate":
        return VERIFIED, cs.to_json()
    if args.action == "orbits":
        orb = prime_action_orbits(cs)
        sep = separation_certificates(cs, orb)
        return VERIFIED, {**orb.to_json(cs), "separation": sep}
    if args.action == "minimal-primes":
        r = minimal_primes_of_S(cs)
        r["dimension"] = dimension_report(cs)
        return r["status"], r
    if args.action == "maximality":
        r = maximality_check(cs, b.setting("radius", args.radius), b.setting("box", args.box))
        return r.status, r.to_json()
    raise InputError(f"unknown crossed action {args.action}")


def cmd_report(args):
    b = _bundle(args)
    cs = b.crossed_system(args.check_len, args.max_rules)
    r = theorem33_report(cs, b.setting("radius", args.radius), b.setting("box", args.box))
    return r.status, r.to_json()


def cmd_replay(args):
    r = replay(
        args.name, check_len=args.check_len, radius=args.radius, box=args.box,
        scan_len=args.scan_len, max_rules=args.max_rules,
    )
    return (VERIFIED if r["ok"] else REFUTED), r


# -- plumbing ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--check-len", type=int, default=None)
    common.add_argument("--radius", type=int, default=None)
    common.add_argument("--box", type=int, default=None)
    common.add_argument("--max-rules", type=int, default=None)
    common.add_argument("--max-len", type=int, default=None)
    common.add_argument("--scan-len", type=int, default=None)
    common.add_argument("--max-nodes", type=int, default=200_000)

    p = _Parser(prog="workbench", description="monoid maximal-order workbench")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("normalize", parents=[common])
    s.add_argument("input")
    s.add_argument("word")
    s.set_defaults(fn=cmd_normalize)

    s = sub.add_parser("complete", parents=[common])
    s.add_argument("input")
    s.set_defaults(fn=cmd_complete)

    s = sub.add_parser("enumerate", parents=[common])
    s.add_argument("input")
    s.add_argument("--length", type=int, default=4)
    s.add_argument("--words", action="store_true")
    s.set_defaults(fn=cmd_enumerate)

    s = sub.add_parser("affine", parents=[common])
    s.add_argument("action", choices=["member", "minimal-primes", "check-normal", "spectrum"])
    s.add_argument("input")
    s.add_argument("vector", nargs="*", type=int)
    s.set_defaults(fn=cmd_affine)

    s = sub.add_parser("group", parents=[common])
    s.add_argument("action", choices=["delta-plus", "dihedral-free", "validate"])
    s.add_argument("input")
    s.set_defaults(fn=cmd_group)

    s = sub.add_parser("crossed", parents=[common])
    s.add_argument("action", choices=["validate", "orbits", "minimal-primes", "maximality", "rep-verify"])
    s.add_argument("input")
    s.set_defaults(fn=cmd_crossed)

    s = sub.add_parser("report", parents=[common])
    s.add_argument("kind", choices=["theorem33"])
    s.add_argument("input")
    s.set_defaults(fn=cmd_report)

    s = sub.add_parser("replay", parents=[common])
    s.add_argument("name")
    s.set_defaults(fn=cmd_replay)
    return p


def _pretty(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return pad + ", ".join(json.dumps(v, ensure_ascii=False) for v in obj)
        return "\n".join(
            (f"{pad}-\n" + _pretty(v, indent + 1)) if isinstance(v, (dict, list)) else f"{pad}- {v}"
            for v in obj
        )
    return pad + json.dumps(obj, ensure_ascii=False)


def run_command(argv, out=None) -> int:
    out = out or sys.stdout
    t0 = time.perf_counter()
    pretty = "--pretty" in argv
    try:
        args = build_parser().parse_args(argv)
        status, result = args.fn(args)
        code = EXIT[status]
    except (InputError, PresentationSyntaxError, AffineSyntaxError, GroupSyntaxError,
            FileNotFoundError, ValueError, KeyError, IncompleteCompletion) as exc:
        status, result, code = "InputError", {"error": type(exc).__name__, "message": str(exc)}, INPUT_ERROR
        if isinstance(exc, IncompleteCompletion):
            status, code = UNKNOWN, EXIT[UNKNOWN]
    except SearchBoundExceeded as exc:
        status, result, code = UNKNOWN, {"error": "SearchBoundExceeded", "message": str(exc)}, EXIT[UNKNOWN]
    report = {
        "command": list(argv),
        "version": __version__,
        "status": status,
        "result": jsonable(result),
        "timings": {"seconds": round(time.perf_counter() - t0, 3)},
    }
    if pretty:
        out.write(_pretty(report) + "\n")
    else:
        out.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    return code


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
