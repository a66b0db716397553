"""Command-line front end.

Exit codes: 0 success, 1 invalid market file or claim, 2 market rejected by
validation, 3 internal inconsistency (a validated market without pricing
measures, or a failed exact re-check).
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from . import lp
from .lp import SolverInconsistency
from .market import (
    NotRepresentable,
    UnboundedBelow,
    completion_quote,
    price,
    superhedge_quote,
    validate,
)
from .marketfile import MarketFileError, generate_market, load, parse_number
from .measures import InconsistentMarket, build_polytope
from .power import refinement_study
from . import report as rep

MODE_ENV = "IMPERFECT_MARKET_MODE"

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_REJECTED = 2
EXIT_INCONSISTENT = 3

MARKET_COMMANDS = ("validate", "analyze", "price", "superhedge", "complete", "measures", "power", "extend")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact",
                      help="exact rational arithmetic (default)")
    mode.add_argument("--float", dest="mode", action="store_const", const="float",
                      help="floating-point LPs with tolerance --tol")
    common.add_argument("--tol", type=float, default=lp.DEFAULT_TOL)
    common.add_argument("--format", choices=("human", "machine"), default="human")

    p = argparse.ArgumentParser(prog="imperfect-market", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name in MARKET_COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("market", help="market file")
        if name in ("price", "superhedge", "complete"):
            sp.add_argument("--claim", required=True, help="comma-separated payoff, one entry per state")
        if name in ("analyze", "power"):
            sp.add_argument("--budget", type=int, default=64, help="probe families for the power bound")
        if name in ("analyze", "power", "validate"):
            sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gen", parents=[common])
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--states", type=int, required=True)
    g.add_argument("--assets", type=int, required=True)
    g.add_argument("--no-full-support", action="store_true",
                   help="allow markets that fail the no-pure-bubble test")

    s = sub.add_parser("study", parents=[common])
    s.add_argument("--beta", required=True)
    s.add_argument("--kmax", type=int, required=True)
    return p


def _resolve_mode(args) -> bool:
    if args.mode is not None:
        return args.mode == "exact"
    env = os.environ.get(MODE_ENV, "exact").strip().lower()
    if env not in ("exact", "float"):
        raise MarketFileError(f"{MODE_ENV} must be 'exact' or 'float', got {env!r}")
    return env == "exact"


def _emit(args, data: dict, human: str) -> None:
    if args.format == "machine":
        sys.stdout.write(rep.to_machine(data))
    else:
        sys.stdout.write(human)


def _parse_claim(text: str, n: int, exact: bool) -> tuple:
    tokens = [t.strip() for t in text.split(",")]
    values = tuple(parse_number(t, exact, field="claim") for t in tokens)
    if len(values) != n:
        raise MarketFileError(f"claim has {len(values)} entries, market has {n} states", field="claim")
    return values


def _witness_text(witness: dict) -> str:
    parts = []
    for key, value in witness.items():
        if isinstance(value, dict):
            value = "{" + ", ".join(f"{n}: {rep.fmt(x)}" for n, x in value.items()) + "}"
        else:
            value = rep.fmt(value)
        parts.append(f"{key}={value}")
    return ", ".join(parts)


def _cmd_market(args, exact: bool) -> int:
    started = time.perf_counter()
    mf = load(args.market, exact=exact)
    market = mf.to_market()

    if args.command == "analyze":
        report = rep.analyze(mf, budget=args.budget, seed=args.seed)
        _emit(args, report, rep.to_human(report, time.perf_counter() - started))
        return EXIT_OK if report["validation"]["accepted"] else EXIT_REJECTED

    val = validate(market, seed=getattr(args, "seed", 0))
    val_section = rep.validation_section(val)
    if args.command == "validate" or not val.accepted:
        data = {"schema": rep.REPORT_SCHEMA, "market": rep.market_section(mf, market),
                "validation": val_section}
        _emit(args, data, rep.to_human(data))
        return EXIT_OK if val.accepted else EXIT_REJECTED

    if args.command in ("price", "superhedge", "complete"):
        claim = _parse_claim(args.claim, market.n_states, exact)
        data = {"command": args.command, "claim": list(claim)}
        if args.command == "price":
            try:
                q = price(market, claim)
                data.update(method="representation", value=q.value,
                            witness={"weights": dict(zip((a.name for a in market.assets), q.weights)),
                                     "numeraire": q.numeraire, "cash": q.cash})
            except NotRepresentable:
                # not traded: quote the superhedging extension instead
                h = superhedge_quote(market, claim)
                data.update(method="superhedge", value=h.value,
                            witness={"z": dict(zip((a.name for a in market.assets), h.weights)),
                                     "u": h.cash})
        elif args.command == "superhedge":
            h = superhedge_quote(market, claim)
            data.update(value=h.value, witness={"z": dict(zip((a.name for a in market.assets), h.weights)),
                                                "u": h.cash})
        else:
            h = completion_quote(market, claim)
            data.update(value=h.value, witness={"z": dict(zip((a.name for a in market.assets), h.weights)),
                                                "u": h.cash, "a": h.offset})
        human = f"{args.command}: {rep.fmt(data['value'])}\n  witness: {_witness_text(data['witness'])}\n"
        if "method" in data:
            human += f"  method: {data['method']}\n"
        _emit(args, data, human)
        return EXIT_OK

    polytope = build_polytope(market)
    if args.command == "measures":
        section, _ = rep.measures_section(market, polytope)
        data = {"schema": rep.REPORT_SCHEMA, "market": rep.market_section(mf, market),
                "validation": val_section, **section}
        human = rep.to_human(data)
        _emit(args, data, human)
        return EXIT_OK
    if args.command == "extend":
        data = rep.extension_section(market, polytope, mf.strikes)
        lines = [f"extendable to call-overwritten claims: {data['extendable']}",
                 f"strictly positive measure on them: {data['strictly_positive']}"]
        for c in data["claims"]:
            lines.append(f"  {rep.fmt(c['claim'])}: sup integral of f^1 = {rep.fmt(c['sup_integral'])}")
        _emit(args, data, "\n".join(lines) + "\n")
        return EXIT_OK
    if args.command == "power":
        data = rep.power_section(market, args.budget, args.seed)
        c = data["completion"]
        lc = data["linear_completion"]
        human = (f"completion price market power >= {rep.fmt(c['lower_bound'])} "
                 f"({c['probes_used']} probes, seed {c['seed']})\n"
                 f"  witness: {'; '.join(rep.fmt(f) for f in c['witness'])}\n"
                 f"linear completion: {'present, power 0' if lc['present'] else 'absent'}\n")
        _emit(args, data, human)
        return EXIT_OK
    raise AssertionError(args.command)  # pragma: no cover


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        exact = _resolve_mode(args)
    except MarketFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        with lp.numeric_mode(exact=exact, tol=args.tol):
            if args.command == "gen":
                mf = generate_market(args.seed, args.states, args.assets,
                                     full_support=not args.no_full_support)
                sys.stdout.write(mf.serialize())
                return EXIT_OK
            if args.command == "study":
                beta = parse_number(args.beta, True, field="beta")
                rows = refinement_study(beta, args.kmax)
                data = {"beta": beta, "rows": [{"k": k, "power": v} for k, v in rows]}
                human = "".join(f"k={k:4d}  power {rep.fmt(v)}\n" for k, v in rows)
                _emit(args, data, human)
                return EXIT_OK
            return _cmd_market(args, exact)
    except (MarketFileError, OSError, ValueError) as exc:
        if isinstance(exc, InconsistentMarket):
            print(f"internal inconsistency: {exc}", file=sys.stderr)
            return EXIT_INCONSISTENT
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (SolverInconsistency, UnboundedBelow) as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
