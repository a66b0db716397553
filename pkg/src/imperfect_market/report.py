"""Analysis reports: one nested dict, rendered as JSON or as text.

Values are kept as Fractions (or floats in float mode) while the report
is assembled; :func:`to_machine` turns Fractions into ``"p/q"`` strings and
:func:`to_human` prints them as fraction plus six-digit decimal.  Nothing
time-dependent enters the machine form, so it is byte-stable.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .market import (
    Market,
    ValidationReport,
    cash_additive_part,
    price,
    validate,
)
from .marketfile import MarketFile
from .measures import (
    CertificateKind,
    ZeroFundamentalValue,
    build_polytope,
    bubble,
    fundamental_value_bounds,
    markup,
    npb_check,
    restricted_extension_check,
    strictly_positive_measure,
)
from .power import completion_oracle, linear_completion, power_at, power_lower_bound

REPORT_SCHEMA = "imperfect-market-report/1"
VERTEX_LIMIT = 8


def digest(mf: MarketFile) -> str:
    return hashlib.sha256(mf.serialize().encode("utf-8")).hexdigest()


def validation_section(report: ValidationReport) -> dict:
    def clean(entry):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in entry.items()}

    return {
        "accepted": report.accepted,
        "numeraire_price": report.numeraire_price,
        "numeraire_price_ok": report.numeraire_price_ok,
        "arbitrage_violations": [clean(v) for v in report.arbitrage_violations],
        "monotonicity_violations": [clean(v) for v in report.monotonicity_violations],
        "messages": list(report.messages),
    }


def market_section(mf: MarketFile, market: Market) -> dict:
    return {
        "digest": digest(mf),
        "states": list(market.space.states),
        "negligible_core": sorted(market.order.negligible_core),
        "assets": [a.name for a in market.assets],
    }


def measures_section(market: Market, polytope) -> tuple:
    profile = npb_check(market, polytope)
    cert = strictly_positive_measure(polytope)
    out = {
        "polytope": {
            "nonempty": polytope.nonempty,
            "vertices": (
                [list(v) for v in polytope.vertices()] if market.n_states <= VERTEX_LIMIT else None
            ),
            "support_profile": dict(profile.maxima),
        },
        "verdicts": {
            "no_pure_bubble": profile.no_pure_bubble,
            "nflvr": profile.no_pure_bubble,
            "cash_additive_completion": profile.no_pure_bubble,
        },
        "certificate": {
            "kind": cert.kind.value,
            "measure": None if cert.measure is None else list(cert.measure),
            "floor": cert.floor,
        },
    }
    return out, cert


def asset_rows(market: Market, polytope, cert, strikes) -> list:
    rows = []
    for a in market.assets:
        lo, hi = fundamental_value_bounds(polytope, a.payoff)
        row = {
            "name": a.name,
            "ask": a.ask,
            "price": price(market, a.payoff).value,
            "cash_additive_part": cash_additive_part(market, a.payoff),
            "fundamental_value": {"min": lo, "max": hi},
            "markup": None,
            "markup_note": None,
            "bubble": bubble(market, a.payoff, strikes, polytope=polytope),
        }
        if cert.kind is CertificateKind.STRICTLY_POSITIVE:
            try:
                row["markup"] = markup(market, cert, a.payoff)
            except ZeroFundamentalValue:
                row["markup_note"] = "zero fundamental value"
        else:
            row["markup_note"] = "no strictly positive pricing measure"
        rows.append(row)
    return rows


def extension_section(market: Market, polytope, strikes) -> dict:
    v = restricted_extension_check(market, strikes, polytope=polytope)
    return {
        "strikes": list(strikes),
        "extendable": v.extendable,
        "strictly_positive": v.strictly_positive,
        "measure": None if v.measure is None else list(v.measure),
        "floor": v.floor,
        "claims": [
            {"claim": list(w["claim"]), "sup_integral": w["sup_integral"], "ok": w["ok"]}
            for w in v.witnesses
        ],
    }


def power_section(market: Market, budget: int, seed: int) -> dict:
    est = power_lower_bound(completion_oracle(market), market, probe_budget=budget, seed=seed)
    lin = linear_completion(market)
    lin_entry = {"present": lin is not None, "measure": None, "power_at_witness": None}
    if lin is not None:
        lin_entry["measure"] = list(lin.measure)
        lin_entry["power_at_witness"] = power_at(lin, est.witness)
    return {
        "completion": {
            "lower_bound": est.lower_bound,
            "witness": [list(f) for f in est.witness],
            "probe_budget": est.probe_budget,
            "probes_used": est.probes_used,
            "seed": seed,
        },
        "linear_completion": lin_entry,
    }


def analyze(mf: MarketFile, budget: int = 64, seed: int = 0, sample_count: int = 32) -> dict:
    """Full report; ``report["validation"]["accepted"]`` gates the rest.

    Raises :class:`~imperfect_market.measures.InconsistentMarket` when a
    validated market has an empty pricing polytope.
    """
    market = mf.to_market()
    report = {"schema": REPORT_SCHEMA, "market": market_section(mf, market)}
    val = validate(market, sample_count=sample_count, seed=seed)
    report["validation"] = validation_section(val)
    if not val.accepted:
        return report
    polytope = build_polytope(market)
    section, cert = measures_section(market, polytope)
    report.update(section)
    report["assets"] = asset_rows(market, polytope, cert, mf.strikes)
    report["extension"] = extension_section(market, polytope, mf.strikes)
    report["power"] = power_section(market, budget, seed)
    return report


def _plain(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return value
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def to_machine(report: dict) -> str:
    return json.dumps(_plain(report), indent=2) + "\n"


def fmt(value) -> str:
    if isinstance(value, Fraction):
        frac = str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
        return f"{frac} ({float(value):.6f})"
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(fmt(v) for v in value) + ")"
    if value is None:
        return "-"
    return str(value)


def to_human(report: dict, elapsed: float = None) -> str:
    lines = []
    mk = report["market"]
    lines.append(f"market {mk['digest'][:16]}  states {' '.join(mk['states'])}")
    lines.append(f"  negligible core: {{{', '.join(mk['negligible_core'])}}}")
    v = report["validation"]
    lines.append(f"validation: {'accepted' if v['accepted'] else 'REJECTED'}")
    lines.append(f"  numeraire price: {fmt(v['numeraire_price'])}")
    for msg in v["messages"]:
        lines.append(f"  ! {msg}")
    if "polytope" in report:
        p = report["polytope"]
        lines.append("pricing measures:")
        if p["vertices"] is not None:
            lines.append("  vertices: " + "; ".join(fmt(x) for x in p["vertices"]))
        for s, mx in p["support_profile"].items():
            lines.append(f"  max mass on {s}: {fmt(mx)}")
        verdict = "holds" if report["verdicts"]["no_pure_bubble"] else "fails"
        lines.append(f"NPB / NFLVR / cash-additive completion: {verdict}")
        c = report["certificate"]
        lines.append(f"certificate: {c['kind']}")
        if c["measure"] is not None:
            lines.append(f"  measure {fmt(c['measure'])}  floor {fmt(c['floor'])}")
    if "assets" in report:
        lines.append("assets:")
        for row in report["assets"]:
            fv = row["fundamental_value"]
            mu = fmt(row["markup"]) if row["markup"] is not None else f"- ({row['markup_note']})"
            lines.append(
                f"  {row['name']}: ask {fmt(row['ask'])} price {fmt(row['price'])} "
                f"cash-additive {fmt(row['cash_additive_part'])}"
            )
            lines.append(
                f"      fundamental value [{fmt(fv['min'])}, {fmt(fv['max'])}] "
                f"mark-up {mu} bubble {fmt(row['bubble'])}"
            )
    if "extension" in report:
        e = report["extension"]
        lines.append(
            f"call-overwrite extension: extendable {e['extendable']}, "
            f"strictly positive {e['strictly_positive']}"
        )
    if "power" in report:
        pw = report["power"]
        lines.append(
            f"market power of completion >= {fmt(pw['completion']['lower_bound'])} "
            f"({pw['completion']['probes_used']} probes)"
        )
        lc = pw["linear_completion"]
        lines.append(
            "linear completion: "
            + (f"present, measure {fmt(lc['measure'])}" if lc["present"] else "absent")
        )
    if elapsed is not None:
        lines.append(f"elapsed: {elapsed:.3f} s")
    return "\n".join(lines) + "\n"
