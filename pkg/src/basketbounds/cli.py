"""Batch front end: file formats, command dispatch, and report emission.

Two input formats are supported (see README for byte-level examples):

* ``basket-market/1``: a JSON document with assets, optional forwards, basket
  quotes, and optional per-asset chains.
* ``basket-chain/1``: a line-oriented text format for one call chain.

Exit codes: 0 clean, 1 domain violation (arbitrage/feasibility), 2 parse
error, 3 solver failure.  Report paths write delimiter-separated data plus a
rendered figure alongside unless ``--no-plot`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import closed_bounds, distributions, lower_lp, pricing, relaxation
from .core import (
    ArbitrageError,
    BasketQuote,
    FeasibilityError,
    MarketInstance,
    Sense,
    SolverFailure,
    chain_violations,
    per_asset_option_data,
    validate,
)

MARKET_FORMAT = "basket-market/1"
CHAIN_FORMAT = "basket-chain/1"
REPORT_FORMAT = "basketbounds-bound-report/1"
VOLSTUDY_FORMAT = "basketbounds-vol-study/1"

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_SOLVER = 0, 1, 2, 3


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# file formats


def parse_market_json(path) -> tuple[MarketInstance, list[str]]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MARKET_FORMAT:
        raise ParseError(f"{path}: missing or unknown format field (want {MARKET_FORMAT})")

    forwards = doc.get("forwards")
    quotes_doc = doc.get("quotes", [])
    chains_doc = doc.get("chains", [])
    names = doc.get("assets")

    n = None
    if names is not None:
        n = len(names)
    elif forwards is not None:
        n = len(forwards)
    elif quotes_doc:
        n = len(quotes_doc[0].get("weights", []))
    if not n:
        raise ParseError(f"{path}: cannot infer asset count (no assets/forwards/quotes)")
    if names is None:
        names = [f"asset{i}" for i in range(n)]

    quotes = []
    for idx, item in enumerate(quotes_doc):
        try:
            quotes.append(
                BasketQuote(
                    weights=np.asarray(item["weights"], dtype=float),
                    strike=float(item["strike"]),
                    price=float(item["price"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: quotes[{idx}]: {exc}") from exc

    chains = None
    if chains_doc:
        per_asset = [[] for _ in range(n)]
        for idx, item in enumerate(chains_doc):
            try:
                asset = item["asset"]
                ai = names.index(asset) if isinstance(asset, str) else int(asset)
                per_asset[ai] = [(float(e["strike"]), float(e["price"])) for e in item["quotes"]]
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise ParseError(f"{path}: chains[{idx}]: {exc}") from exc
        chains = per_asset

    try:
        market = MarketInstance(
            n=n,
            forwards=np.asarray(forwards, dtype=float) if forwards is not None else None,
            quotes=tuple(quotes),
            single_asset_chains=tuple(tuple(c) for c in chains) if chains else None,
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return market, list(names)


def write_market_json(path, market: MarketInstance, names: list[str]) -> None:
    doc = {"format": MARKET_FORMAT, "assets": list(names)}
    if market.forwards is not None:
        doc["forwards"] = [float(v) for v in market.forwards]
    doc["quotes"] = [
        {
            "weights": [float(v) for v in quote.weights],
            "strike": quote.strike,
            "price": quote.price,
        }
        for quote in market.quotes
    ]
    if market.single_asset_chains is not None:
        doc["chains"] = [
            {
                "asset": names[i],
                "quotes": [{"strike": k, "price": p} for k, p in chain],
            }
            for i, chain in enumerate(market.single_asset_chains)
            if chain
        ]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def parse_chain_text(path) -> tuple[str, Optional[float], np.ndarray, np.ndarray]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not lines or lines[0].strip() != CHAIN_FORMAT:
        raise ParseError(f"{path}: first line must be {CHAIN_FORMAT!r}")
    asset = "asset0"
    forward = None
    strikes, prices = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "asset" and len(parts) == 2:
            asset = parts[1]
            continue
        if parts[0] == "forward" and len(parts) == 2:
            try:
                forward = float(parts[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad forward value") from exc
            continue
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'strike price', got {raw!r}")
        try:
            strikes.append(float(parts[0]))
            prices.append(float(parts[1]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric row {raw!r}") from exc
    if not strikes:
        raise ParseError(f"{path}: no (strike, price) rows")
    ks = np.asarray(strikes)
    if np.any(np.diff(ks) <= 0):
        raise ParseError(f"{path}: strikes must be strictly increasing")
    return asset, forward, ks, np.asarray(prices)


def write_chain_text(path, asset: str, forward: Optional[float], strikes, prices) -> None:
    out = [CHAIN_FORMAT, f"asset {asset}"]
    if forward is not None:
        out.append(f"forward {forward:g}")
    out.extend(f"{float(k):g} {float(p):.10g}" for k, p in zip(strikes, prices))
    Path(path).write_text("\n".join(out) + "\n")


def _sniff(path) -> str:
    try:
        head = Path(path).read_text(errors="replace").lstrip()[:64]
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if head.startswith("{"):
        return "market"
    if head.startswith(CHAIN_FORMAT):
        return "chain"
    raise ParseError(f"{path}: unrecognized input (want JSON market or {CHAIN_FORMAT})")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    kind = _sniff(args.input)
    violations = []
    if kind == "market":
        market, names = parse_market_json(args.input)
        violations.extend(validate(market))
        if market.single_asset_chains is not None:
            for i, chain in enumerate(market.single_asset_chains):
                if len(chain) >= 2:
                    ks, ps = zip(*chain)
                    violations.extend(chain_violations(ks, ps, asset=i))
    else:
        asset, forward, ks, ps = parse_chain_text(args.input)
        violations.extend(chain_violations(ks, ps))
        if forward is not None and len(ks) >= 1:
            quote = BasketQuote(np.ones(1), float(ks[0]), float(ps[0]))
            market = MarketInstance(n=1, forwards=np.array([forward]), quotes=(quote,))
            violations.extend(validate(market))
    if violations:
        for v in violations:
            print(v)
        print(f"{len(violations)} violation(s)")
        return EXIT_VIOLATION
    print("ok: no static-arbitrage violations detected")
    return EXIT_OK


def cmd_clean(args) -> int:
    kind = _sniff(args.input)
    if kind == "chain":
        asset, forward, ks, ps = parse_chain_text(args.input)
        anchor = (0.0, forward) if (args.pin_forward and forward is not None) else None
        cleaned = relaxation.clean_chain(ks, ps, forward_anchor=anchor)
        write_chain_text(args.output, asset, forward, ks, cleaned.prices)
        print(f"{asset}: l1 distance {cleaned.l1_distance:.6g}")
        return EXIT_OK
    market, names = parse_market_json(args.input)
    if market.single_asset_chains is None:
        print("no chains to clean; wrote input unchanged")
        write_market_json(args.output, market, names)
        return EXIT_OK
    cleaned_chains = []
    for i, chain in enumerate(market.single_asset_chains):
        if len(chain) < 2:
            cleaned_chains.append(tuple(chain))
            continue
        ks, ps = map(np.asarray, zip(*chain))
        anchor = None
        if args.pin_forward and market.forwards is not None:
            anchor = (0.0, float(market.forwards[i]))
        cleaned = relaxation.clean_chain(ks, ps, forward_anchor=anchor)
        cleaned_chains.append(tuple(zip(ks.tolist(), cleaned.prices.tolist())))
        print(f"{names[i]}: l1 distance {cleaned.l1_distance:.6g}")
    out = MarketInstance(
        n=market.n,
        forwards=market.forwards,
        quotes=market.quotes,
        single_asset_chains=tuple(cleaned_chains),
    )
    write_market_json(args.output, out, names)
    return EXIT_OK


@dataclass(frozen=True)
class ReportRow:
    strike: float
    method: str
    sense: str
    value: float
    certificate: str
    runtime_ms: float


def _describe(cert) -> str:
    if cert is None:
        return ""
    if isinstance(cert, closed_bounds.BreakpointCertificate):
        return f"beta*={cert.beta_star:.6g}"
    if isinstance(cert, closed_bounds.UpperCertificate):
        ts = ",".join(f"{v:.4g}" for v in cert.t_star)
        return f"beta*={cert.beta_star:.6g} t*=[{ts}]"
    if isinstance(cert, closed_bounds.LowerNoForwardCertificate):
        return "nu=[" + ",".join(f"{v:.4g}" for v in cert.nu) + "]"
    if isinstance(cert, lower_lp.LowerCertificate):
        return f"h={cert.h:.6g}"
    if isinstance(cert, relaxation.PriceSurface):
        return f"surface({len(cert.anchors)} anchors)"
    if isinstance(cert, distributions.DiscreteDistribution):
        return f"distribution({cert.support.shape[0]} points)"
    return type(cert).__name__


def _bound_rows(market: MarketInstance, w0, strikes, methods, senses) -> list[ReportRow]:
    rows = []
    single = None
    if any(m in ("closed", "lp", "oracle") for m in methods):
        try:
            single = per_asset_option_data(market)
        except ValueError:
            single = None

    def run(strike, method, sense, fn):
        t0 = time.perf_counter()
        result = fn()
        ms = (time.perf_counter() - t0) * 1e3
        rows.append(
            ReportRow(
                strike=float(strike),
                method=method,
                sense=sense.value,
                value=float(result.value),
                certificate=_describe(result.certificate),
                runtime_ms=ms,
            )
        )

    for strike in strikes:
        for method in methods:
            if method in ("closed", "lp", "oracle") and single is None:
                raise ValueError(
                    f"method {method!r} needs forwards plus one option per asset; "
                    "use --method relax for general basket quotes"
                )
            if method == "closed":
                p, q, ks = single
                if Sense.UPPER in senses:
                    run(strike, method, Sense.UPPER,
                        lambda: closed_bounds.upper_with_forwards(p, q, ks, w0, strike))
                if Sense.LOWER in senses:
                    run(strike, method, Sense.LOWER,
                        lambda: closed_bounds.lower_no_forwards(p, ks, w0, strike))
            elif method == "lp":
                p, q, ks = single
                if Sense.UPPER in senses:
                    def upper_lp():
                        cert = closed_bounds.synthetic_strikes(p, q, ks, w0, strike)
                        from .core import BoundResult, Method
                        return BoundResult(
                            value=cert.bound_value(w0, strike),
                            sense=Sense.UPPER,
                            method=Method.CLOSED_UPPER,
                            certificate=cert,
                        )
                    run(strike, method, Sense.UPPER, upper_lp)
                if Sense.LOWER in senses:
                    run(strike, method, Sense.LOWER,
                        lambda: lower_lp.lower_with_forwards(p, q, ks, w0, strike))
            elif method == "relax":
                for sense in (Sense.UPPER, Sense.LOWER):
                    if sense in senses:
                        run(strike, method, sense,
                            lambda s=sense: relaxation.relax_bound(market, w0, strike, s)[0])
            elif method == "oracle":
                p, q, ks = single
                axes = distributions.default_axes(p, q, ks)
                for sense in (Sense.UPPER, Sense.LOWER):
                    if sense in senses:
                        run(strike, method, sense,
                            lambda s=sense: distributions.grid_oracle(market, w0, strike, s, axes))
            else:
                raise ValueError(f"unknown method {method!r}")
    rows.sort(key=lambda r: (r.strike, r.method, r.sense))
    return rows


def _write_report_csv(path, rows, header_note: str) -> None:
    lines = [f"# {REPORT_FORMAT} {header_note}".rstrip()]
    lines.append("strike,method,sense,value,certificate")
    for r in rows:
        cert = r.certificate.replace(",", ";")
        lines.append(f"{r.strike:.10g},{r.method},{r.sense},{r.value:.12g},{cert}")
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_bound(args) -> int:
    market, _names = parse_market_json(args.input)
    bad = validate(market)
    if bad:
        for v in bad:
            print(v, file=sys.stderr)
        return EXIT_VIOLATION
    w0 = np.asarray([float(v) for v in args.target_weights.split(",")])
    strikes = [float(v) for v in args.strikes.split(",")]
    methods = ["closed", "lp", "relax"] if args.method == "all" else [args.method]
    senses = (
        (Sense.UPPER, Sense.LOWER)
        if args.sense == "both"
        else ((Sense.UPPER,) if args.sense == "upper" else (Sense.LOWER,))
    )
    rows = _bound_rows(market, w0, strikes, methods, senses)
    print(f"{'strike':>10} {'method':>8} {'sense':>6} {'value':>14} {'runtime_ms':>11}  certificate")
    for r in rows:
        print(
            f"{r.strike:>10.6g} {r.method:>8} {r.sense:>6} {r.value:>14.8g} "
            f"{r.runtime_ms:>11.2f}  {r.certificate}"
        )
    if args.output:
        note = f"input={Path(args.input).name} target-weights={args.target_weights}"
        _write_report_csv(args.output, rows, note)
        if not args.no_plot:
            from . import plots

            plots.bound_report_figure(rows, Path(args.output).with_suffix(".png"))
    return EXIT_OK


def _load_study_config(args) -> dict:
    market, w0, quote_rows = pricing.yield_curve_demo()
    cfg = {
        "forwards": market.forwards,
        "covariance": market.covariance,
        "target_weights": w0,
        "quote_weight_rows": quote_rows,
        "maturity": 1.0,
        "paths": 1_000_000,
        "seed": 20240317,
        "strike_span": 0.10,
        "strike_count": 9,
    }
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{args.config}: {exc}") from exc
        for key in cfg:
            if key in doc:
                cfg[key] = np.asarray(doc[key], dtype=float) if isinstance(cfg[key], np.ndarray) else type(cfg[key])(doc[key])
    for name, flag in (("paths", args.paths), ("seed", args.seed), ("maturity", args.maturity)):
        if flag is not None:
            cfg[name] = flag
    return cfg


def vol_study(cfg) -> list[dict]:
    """Bound and market implied vols on a strike grid around the basket forward."""
    market = pricing.LognormalMarket(
        forwards=cfg["forwards"], covariance=cfg["covariance"], maturity=cfg["maturity"]
    )
    w0 = np.asarray(cfg["target_weights"], dtype=float)
    rows_w = [np.asarray(r, dtype=float) for r in cfg["quote_weight_rows"]]
    k_atm = float(w0 @ market.forwards)
    quote_contracts = [(w, float(w @ market.forwards)) for w in rows_w] + [(w0, k_atm)]
    paths, seed = int(cfg["paths"]), int(cfg["seed"])
    quote_prices, _ = pricing.mc_prices(market, quote_contracts, paths, seed)
    strikes = np.linspace(
        (1 - cfg["strike_span"]) * k_atm, (1 + cfg["strike_span"]) * k_atm, int(cfg["strike_count"])
    )
    target_prices, _ = pricing.mc_prices(market, [(w0, k) for k in strikes], paths, seed)

    quotes = [
        BasketQuote(w, k, float(p)) for (w, k), p in zip(quote_contracts, quote_prices)
    ]
    instance = MarketInstance(n=market.n, forwards=market.forwards, quotes=tuple(quotes))

    def vol_or_nan(price, strike):
        try:
            return pricing.implied_vol(price, k_atm, strike, market.maturity)
        except ValueError:
            return float("nan")

    out = []
    for strike, mc_price in zip(strikes, target_prices):
        upper, _ = relaxation.relax_bound(instance, w0, strike, Sense.UPPER)
        lower, _ = relaxation.relax_bound(instance, w0, strike, Sense.LOWER)
        out.append(
            {
                "strike": float(strike),
                "mc_implied_vol": vol_or_nan(float(mc_price), float(strike)),
                "upper_bound_vol": vol_or_nan(upper.value, float(strike)),
                "lower_bound_vol": vol_or_nan(lower.value, float(strike)),
            }
        )
    return out


def cmd_figure2(args) -> int:
    cfg = _load_study_config(args)
    rows = vol_study(cfg)
    header = [
        f"# {VOLSTUDY_FORMAT} seed={int(cfg['seed'])} paths={int(cfg['paths'])} "
        f"maturity={cfg['maturity']:g}",
        "strike,mc_implied_vol,upper_bound_vol,lower_bound_vol",
    ]
    for r in rows:
        header.append(
            f"{r['strike']:.10g},{r['mc_implied_vol']:.10g},"
            f"{r['upper_bound_vol']:.10g},{r['lower_bound_vol']:.10g}"
        )
    Path(args.output).write_text("\n".join(header) + "\n")
    if not args.no_plot:
        from . import plots

        plots.vol_study_figure(rows, Path(args.output).with_suffix(".png"))
    print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basketbounds",
        description="Static-arbitrage bounds on European basket call prices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a market or chain file for static arbitrage")
    v.add_argument("input")
    v.set_defaults(fn=cmd_validate)

    c = sub.add_parser("clean", help="repair chains to the closest arbitrage-free prices (l1)")
    c.add_argument("input")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--pin-forward", action="store_true", help="pin chains to a strike-0 forward anchor")
    c.set_defaults(fn=cmd_clean)

    b = sub.add_parser("bound", help="compute price bounds for target strikes")
    b.add_argument("input")
    b.add_argument("--target-weights", required=True, help="comma-separated basket weights")
    b.add_argument("--strikes", required=True, help="comma-separated target strikes")
    b.add_argument("--method", default="all", choices=["closed", "lp", "relax", "oracle", "all"])
    b.add_argument("--sense", default="both", choices=["upper", "lower", "both"])
    b.add_argument("-o", "--output", help="write a machine-readable CSV report")
    b.add_argument("--no-plot", action="store_true", help="skip the figure next to --output")
    b.set_defaults(fn=cmd_bound)

    f = sub.add_parser(
        "figure2", help="regenerate the bound-vs-market implied-volatility study"
    )
    f.add_argument("--config", help="JSON overriding the bundled demo configuration")
    f.add_argument("-o", "--output", default="vol_study.csv")
    f.add_argument("--paths", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--maturity", type=float)
    f.add_argument("--no-plot", action="store_true")
    f.set_defaults(fn=cmd_figure2)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FeasibilityError, ArbitrageError, relaxation.UnboundedRelaxation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
