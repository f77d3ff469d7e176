"""Command-line front end.

Exit codes: 0 the judgment holds, 1 it fails, 2 usage, parse or internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import time
from pathlib import Path

from . import __version__, checkers
from .errors import DslSyntaxError, FairckError, Inapplicable, NotFound
from .semantics import Config
from .syntax import load, print_system
from .verdict import ClientSpec, DerivationTree, DerivationWitness, DivergenceWitness, TracePath, Unavailable
from .witness import explain_instance, synth_discriminating_client

EXIT_HOLDS, EXIT_FAILS, EXIT_ERROR = 0, 1, 2


class UsageError(FairckError):
    pass


def _color_enabled(stream) -> bool:
    mode = os.environ.get("FAIRCK_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _paint(text: str, code: str, on: bool) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if on else text


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FairckError(f"{path}: {e.strerror or e}") from None
    try:
        return load(text)
    except DslSyntaxError as e:
        raise FairckError(f"{path}:{e}") from None
    except FairckError as e:
        raise FairckError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# rendering


def _tree_lines(t: DerivationTree, depth: int = 0) -> list[str]:
    pad = "  " * depth
    if t.back_edge:
        return [f"{pad}{t.judgment}  (see above)"]
    out = [f"{pad}{t.judgment}  [{t.rule}]"]
    for c in t.children:
        out.extend(_tree_lines(c, depth + 1))
    return out


def render_witness(w) -> list[str]:
    if isinstance(w, DerivationWitness):
        out = []
        if w.coinductive is not None:
            out.append("derivation (rules only, cycles closed by 'see above'):")
            out += ["  " + x for x in _tree_lines(w.coinductive)]
        if w.bounding is not None:
            out.append("bounding derivation (finite, rules and corules):")
            out += ["  " + x for x in _tree_lines(w.bounding)]
        return out
    if isinstance(w, TracePath):
        return [f"trace: {'.'.join(w.trace) or '(empty)'}", f"reaches: {w.terminal}", f"problem: {w.reason}"]
    if isinstance(w, DivergenceWitness):
        return [
            f"after: {'.'.join(w.prefix) or '(empty)'}",
            f"pair: {w.node_desc}",
            f"escape: {'.'.join(w.escape_trace) or '(empty)'}",
            f"note: {w.note}",
        ]
    if isinstance(w, ClientSpec):
        return ["discriminating client:"] + ["  " + x for x in w.source.rstrip("\n").split("\n")]
    if isinstance(w, Unavailable):
        return [f"no witness: {w.reason}"]
    return []


def emit_report(args, judgment: str, mode: str, holds: bool, witness, elapsed_ms: float) -> int:
    if args.json:
        report = {
            "version": __version__,
            "command": args.command_echo,
            "judgment": judgment,
            "mode": mode,
            "holds": holds,
            "witness": None if witness is None else witness.to_json(),
            "elapsed_ms": round(elapsed_ms, 3) if args.timing else 0,
        }
        print(json.dumps(report, indent=2, sort_keys=False))
    else:
        on = _color_enabled(sys.stdout)
        word = _paint("holds", "32", on) if holds else _paint("fails", "31", on)
        print(f"{judgment}: {word}  [{mode}]")
        if witness is not None:
            for line in render_witness(witness):
                print("  " + line)
        if args.timing:
            print(f"  time: {elapsed_ms:.3f} ms")
    return EXIT_HOLDS if holds else EXIT_FAILS


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args) -> int:
    system = _load(args.file)
    sys.stdout.write(print_system(system))
    return EXIT_HOLDS


def _run_check(args, inst) -> int:
    start = time.perf_counter()
    holds = inst.holds()
    witness = explain_instance(inst) if args.explain else None
    elapsed = (time.perf_counter() - start) * 1000
    return emit_report(args, inst.show(inst.root), inst.mode, holds, witness, elapsed)


def cmd_term(args) -> int:
    system = _load(args.file)
    return _run_check(args, checkers.termination_instance(system, system.ref(args.type)))


def cmd_comp(args) -> int:
    system = _load(args.file)
    c0 = Config(system.ref(args.client), system.ref(args.server))
    return _run_check(args, checkers.compliance_instance(system, c0, fair=args.mode == "fair"))


def cmd_sub(args) -> int:
    if args.synth_client and args.mode != "fair":
        raise UsageError("--synth-client needs --mode fair")
    system = _load(args.file)
    t, s = system.ref(args.left), system.ref(args.right)
    start = time.perf_counter()
    inst = checkers.subtyping_instance(system, t, s, fair=args.mode == "fair")
    holds = inst.holds()
    witness = None
    if args.synth_client and not holds and checkers.subtyping(system, t, s).holds:
        try:
            witness = synth_discriminating_client(system, t, s, budget=args.budget)
        except NotFound as e:
            witness = Unavailable(str(e))
        except Inapplicable as e:  # pragma: no cover - excluded by the guard above
            witness = Unavailable(str(e))
    elif args.explain:
        witness = explain_instance(inst)
    elapsed = (time.perf_counter() - start) * 1000
    return emit_report(args, inst.show(inst.root), inst.mode, holds, witness, elapsed)


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    res = run_selftest(
        seed=args.seed,
        max_states=args.max_states,
        alphabet=args.alphabet,
        random_count=args.random,
        random_max_states=args.random_max_states,
        random_alphabet=args.random_alphabet,
        inject_fault=args.inject_fault,
    )
    if args.json:
        out = {"version": __version__, "command": args.command_echo, "ok": res.ok, **res.to_json()}
        print(json.dumps(out, indent=2))
    else:
        print(res.summary())
        for d in res.discrepancies:
            print(str(d), file=sys.stderr)
        for v in res.audit_violations[:20]:
            print("audit: " + v, file=sys.stderr)
        if args.timing:
            print(f"time: {res.seconds:.2f} s")
    return EXIT_HOLDS if res.ok else EXIT_FAILS


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fairck",
        description="Decide fair termination, (fair) compliance and (fair) subtyping of session types.",
        epilog="Exit status: 0 holds, 1 fails, 2 error.  FAIRCK_COLOR=auto|always|never controls colors.",
    )
    p.add_argument("--version", action="version", version=f"fairck {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True, metavar="COMMAND")

    def common(sp):
        sp.add_argument("file", help="session type source (.st)")
        sp.add_argument("--explain", action="store_true", help="attach a witness for the verdict")
        sp.add_argument("--json", action="store_true", help="print a JSON report")
        sp.add_argument("--timing", action="store_true", help="measure and report elapsed time")

    sp = sub.add_parser("parse", help="validate a file and print its normalized form")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("term", help="fair termination of a type")
    common(sp)
    sp.add_argument("-t", "--type", required=True, metavar="NAME")
    sp.set_defaults(func=cmd_term)

    sp = sub.add_parser("comp", help="(fair) compliance of a client with a server")
    common(sp)
    sp.add_argument("-c", "--client", required=True, metavar="NAME")
    sp.add_argument("-s", "--server", required=True, metavar="NAME")
    sp.add_argument("--mode", required=True, choices=["safety", "fair"])
    sp.set_defaults(func=cmd_comp)

    sp = sub.add_parser("sub", help="(fair) subtyping between two types")
    common(sp)
    sp.add_argument("-t", dest="left", required=True, metavar="NAME", help="the candidate subtype")
    sp.add_argument("-s", dest="right", required=True, metavar="NAME", help="the candidate supertype")
    sp.add_argument("--mode", required=True, choices=["safety", "fair"])
    sp.add_argument("--synth-client", action="store_true",
                    help="when only the fair check fails, search for a client that tells the types apart")
    sp.add_argument("--budget", type=int, default=64, metavar="N", help="client size bound for --synth-client")
    sp.set_defaults(func=cmd_sub)

    sp = sub.add_parser("selftest", help="compare checkers with oracles on generated systems")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--max-states", type=int, default=4,
                    help="exhaustive family bound, Nil included (0 skips every family)")
    sp.add_argument("--alphabet", type=int, default=2, help="labels in the exhaustive family")
    sp.add_argument("--random", type=int, default=500, metavar="N", help="number of random systems")
    sp.add_argument("--random-max-states", type=int, default=8)
    sp.add_argument("--random-alphabet", type=int, default=3)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--timing", action="store_true")
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code not in (0, None) else EXIT_HOLDS
    args.command_echo = shlex.join(["fairck", *argv])
    try:
        return args.func(args)
    except FairckError as e:
        print(f"fairck: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:  # noqa: BLE001 - last-resort diagnostic, stable exit code
        print(f"fairck: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
