"""Command line: batch experiments and inspection, with machine-readable output.

Every randomized subcommand draws from ``random.Random(seed)`` (Mersenne Twister),
so a fixed seed and configuration give byte-identical output.  The exit code
is 0 exactly when every check the subcommand makes passes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .codec import Theta, decode, encode
from .coarse import CSV_HEADER, gamma_hat, gamma_prefix, perturb_experiment, rows_for_intervals
from .layout import load_schedule, row_info

log = logging.getLogger("densecode")


def _emit(rows: List[List[str]], header: Sequence[str], out: Optional[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def _word(values: Sequence[int]) -> str:
    return " ".join(map(str, values))


# ---------------------------------------------------------------- subcommands

def cmd_roundtrip(args: argparse.Namespace) -> int:
    schedule = load_schedule(args.schedule)
    rng = random.Random(args.seed)
    ns = range(args.intervals)
    rows = rows_for_intervals(schedule, ns, args.values)
    length = 1 << args.intervals
    out, failures = [], 0
    for k in range(args.samples):
        f = (0,) + tuple(rng.randrange(args.values) for _ in range(length - 1))
        back = gamma_hat(gamma_prefix(f, schedule, rows).X, args.intervals - 1, schedule)
        if args.inject_corruption and k == 0:
            back = (back[0], back[1] + 1) + back[2:]
        ok = back == f
        failures += not ok
        out.append([str(k), _word(f), _word(back), "true" if ok else "false"])
        if not ok:
            log.error("sample %d: %s decoded as %s", k, _word(f), _word(back))
    _emit(out, ["sample", "f", "decoded", "equal"], args.out)
    return 1 if failures else 0


def cmd_perturb(args: argparse.Namespace) -> int:
    schedule = load_schedule(args.schedule)
    rng = random.Random(args.seed)
    top = max(row_info(schedule, i).n for i in range(args.rows))
    length = 2 << top
    out, failures = [], 0
    for k in range(args.samples):
        f = tuple(rng.randrange(args.values) for _ in range(length))
        S = tuple(int(rng.random() < args.density) for _ in range(length))
        for rep in perturb_experiment(f, S, schedule, args.rows, rng=rng, values=args.values):
            failures += not rep.holds
            out.append([str(k)] + rep.csv_fields())
    _emit(out, ["sample"] + CSV_HEADER, args.out)
    return 1 if failures else 0


def cmd_construct(args: argparse.Namespace) -> int:
    from .construction import InvariantBreach, PiSeq, length_lex, run
    from .programs import DEFAULT_ADVERSARY, Registry

    if args.pi:
        pi = PiSeq.parse(json.loads(Path(args.pi).read_text()))
    else:
        pi = length_lex(args.stages)
    registry = Registry.load(args.adversary) if args.adversary else Registry.from_json(DEFAULT_ADVERSARY)
    try:
        result = run(pi, registry, T=args.stages)
    except InvariantBreach as err:
        report = {"breaches": 1, "stage": err.stage, "checker": err.checker, "detail": err.detail}
        sys.stdout.write(json.dumps(report, sort_keys=True, default=str) + "\n")
        return 1
    if args.out:
        result.write_trace(args.out)
        Path(args.out).with_suffix(".report.json").write_text(
            json.dumps(result.report, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
    else:
        for rec in result.trace:
            sys.stdout.write(json.dumps(rec, sort_keys=True) + "\n")
    sys.stderr.write(json.dumps({k: result.report[k] for k in ("stages", "exits", "breaches")}) + "\n")
    return 0


def read_theta(path: str) -> Theta:
    """``{"arity": n, "support": {code: bits}}``, or ``{"word": [...]}`` to encode first."""
    data = json.loads(Path(path).read_text())
    if "word" in data:
        return encode([int(v) for v in data["word"]])
    return Theta.from_mapping(int(data["arity"]), {int(s): v for s, v in data["support"].items()})


def theta_json(theta: Theta) -> dict:
    return {"arity": theta.arity, "support": {str(s): "".join(map(str, b)) for s, b in theta.items()}}


def cmd_decode(args: argparse.Namespace) -> int:
    sys.stdout.write(_word(decode(read_theta(args.file))) + "\n")
    return 0


def cmd_layout(args: argparse.Namespace) -> int:
    schedule = load_schedule(args.schedule)
    out = []
    for i in range(args.rows):
        info = row_info(schedule, i)
        cells = [info.i, info.n, info.s, info.b, info.r, info.l_minus, info.l]
        out.append(["" if v is None else str(v) for v in cells])
    _emit(out, ["row", "n", "s", "b", "r", "l_minus", "l"], args.out)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="densecode", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, samples: int) -> None:
        sp.add_argument("--schedule", default="paper", help="'paper' or a JSON file of {n, b} rows")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=samples)
        sp.add_argument("--values", type=int, default=4, help="values of f are drawn below this")
        sp.add_argument("--out", help="write CSV here instead of stdout")

    rt = sub.add_parser("roundtrip", help="encode random f and decode it back")
    common(rt, 1000)
    rt.add_argument("--intervals", type=int, default=2, help="decode intervals 0 .. N-1")
    rt.add_argument("--inject-corruption", action="store_true", help=argparse.SUPPRESS)
    rt.set_defaults(func=cmd_roundtrip)

    pe = sub.add_parser("perturb", help="row densities of the image change under a change of f on S")
    common(pe, 100)
    pe.add_argument("--rows", type=int, default=3)
    pe.add_argument("--density", type=float, default=0.25, help="chance a position is in S")
    pe.set_defaults(func=cmd_perturb)

    co = sub.add_parser("construct", help="run the finite-injury construction")
    co.add_argument("--stages", type=int, default=50)
    co.add_argument("--pi", help="JSON array of bit strings; default is length-lexicographic order")
    co.add_argument("--adversary", help="JSON program registry; default is the built-in five")
    co.add_argument("--out", help="JSON-lines trace path; the report goes next to it")
    co.set_defaults(func=cmd_construct)

    de = sub.add_parser("decode", help="decode a code family read from JSON")
    de.add_argument("file")
    de.set_defaults(func=cmd_decode)

    la = sub.add_parser("layout", help="print the rows of a layout schedule")
    la.add_argument("--schedule", default="paper")
    la.add_argument("--rows", type=int, default=8)
    la.add_argument("--out")
    la.set_defaults(func=cmd_layout)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    # layout bounds and exact densities can run to tens of thousands of digits
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as err:
        log.error("%s: %s", args.command, err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
