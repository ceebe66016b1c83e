"""
Command-line front end.

Usage:
  python -m loopgauge.cli state build --catalog rank4_family --params p=0.25,x=3,y=2,z=1 --out w4.json
  python -m loopgauge.cli twist --state w4.json --loop 0,1,2
  python -m loopgauge.cli verify --all --seed 7
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import structlog
from dotenv import load_dotenv

from loopgauge.config import configure_logging, get_settings
from loopgauge.errors import LoopGaugeError
from loopgauge.schemas import (
    ClaimResultModel,
    CorrelationReport,
    DecompositionReport,
    LinkReport,
    ProtocolReportModel,
    SweepReportModel,
    TwistReportModel,
)
from loopgauge.services.paperlab.catalog import CLAIMS, verify_catalog
from loopgauge.services.paperlab.sweep import FAMILIES, sweep
from loopgauge.services.quantum.correlation import corr_matrix
from loopgauge.services.quantum.states import CATALOG_NAMES, catalog, load_state, marginal, state_to_payload
from loopgauge.services.twist.holonomy import METHODS, SIDES, transporter, twist
from loopgauge.services.twist.lsvd import classify_link, lorentz_svd
from loopgauge.services.twist.protocol import untwist_protocol

logger = structlog.get_logger()

EXIT_OK, EXIT_CLAIM_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


# Argument types

def _params(text: str) -> Dict[str, float]:
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"parameter {key!r} is not a number: {value!r}")
    return out


def _indices(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated qubit indices, got {text!r}")


def _pair(text: str) -> Tuple[int, int]:
    values = _indices(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"a link is two qubit indices, got {text!r}")
    return values


def _grid_entry(text: str) -> Tuple[str, List[float]]:
    key, sep, values = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=v1,v2,..., got {text!r}")
    try:
        return key.strip(), [float(v) for v in values.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid values for {key!r} must be numbers")


# Parser

def _add_state_args(p: argparse.ArgumentParser) -> None:
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--state", help="state file (JSON)")
    source.add_argument("--catalog", choices=CATALOG_NAMES)
    p.add_argument("--params", type=_params, default={}, help="catalog parameters, k=v,...")


def _add_tolerance_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tolerance", type=float, default=None, help="method tolerance (default 1e-8, iterative 1e-6)")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "table"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loopgauge", description="Twist of qubit loops from two-qubit correlations.")
    ap.add_argument("--log-level", default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    state = sub.add_parser("state", help="state files")
    state_sub = state.add_subparsers(dest="state_command", required=True)
    build = state_sub.add_parser("build", help="write a catalog state to a file")
    build.add_argument("--catalog", choices=CATALOG_NAMES, required=True)
    build.add_argument("--params", type=_params, default={})
    build.add_argument("--out")

    for name, text in (("corr", "correlation matrix of a link"), ("lsvd", "Lorentz SVD of a link"), ("transporter", "parallel transporter of a link")):
        p = sub.add_parser(name, help=text)
        _add_state_args(p)
        p.add_argument("--pair", type=_pair, default=(0, 1))
        p.add_argument("--rank-tolerance", type=float, default=None, help="relative size below which a singular value counts as zero")
        _add_output_args(p)
    for name in ("lsvd", "transporter"):
        _add_tolerance_arg(sub.choices[name])
    sub.choices["lsvd"].add_argument("--method", choices=("eigen", "iterative"), default="eigen")
    sub.choices["transporter"].add_argument("--method", choices=METHODS, default="sqrt")
    sub.choices["transporter"].add_argument("--side", choices=SIDES, default="left")

    tw = sub.add_parser("twist", help="twist of a loop")
    _add_state_args(tw)
    tw.add_argument("--loop", type=_indices, required=True)
    tw.add_argument("--method", choices=METHODS, default="sqrt")
    tw.add_argument("--side", choices=SIDES, default="left")
    _add_tolerance_arg(tw)
    tw.add_argument("--rank-tolerance", type=float, default=None)
    tw.add_argument("--cross-check", action="store_true", help="compare against the eigen route")
    _add_output_args(tw)

    pr = sub.add_parser("protocol", help="sequential untwisting protocol")
    _add_state_args(pr)
    pr.add_argument("--loop", type=_indices, required=True)
    pr.add_argument("--method", choices=METHODS, default="sqrt")
    _add_tolerance_arg(pr)
    _add_output_args(pr)

    ver = sub.add_parser("verify", help="run the claim catalog")
    which = ver.add_mutually_exclusive_group(required=True)
    which.add_argument("--all", action="store_true")
    which.add_argument("--claims", type=lambda t: [c for c in t.split(",") if c], help="claim ids, comma-separated")
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--samples", type=int, default=None, help="cap every claim's sample count")
    ver.add_argument("--threads", type=int, default=1)
    ver.add_argument("--archive", action="store_true", help="store the run in the database")
    _add_output_args(ver)

    sw = sub.add_parser("sweep", help="parameter sweep over a mixed-state family")
    sw.add_argument("--family", choices=FAMILIES, required=True)
    grid = sw.add_mutually_exclusive_group(required=True)
    grid.add_argument("--grid", type=_grid_entry, action="append", help="name=v1,v2,... (repeat per parameter)")
    grid.add_argument("--samples", type=int)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--method", choices=METHODS, default="sqrt")
    _add_output_args(sw)
    return ap


# Commands

def _load(args):
    if args.state:
        return load_state(args.state)
    return catalog(args.catalog, args.params)


def _link(args):
    rho = _load(args)
    pair = tuple(args.pair)
    return corr_matrix(marginal(rho, pair), pair)


def _tolerance_kwargs(args) -> dict:
    """Only the overrides given on the command line; the rest come from the settings."""
    out = {}
    if getattr(args, "tolerance", None) is not None:
        out["tolerance"] = args.tolerance
    if getattr(args, "rank_tolerance", None) is not None:
        out["rank_tolerance"] = args.rank_tolerance
    return out


def _table(rows: Sequence[Tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def cmd_state_build(args) -> Tuple[str, int]:
    rho = catalog(args.catalog, args.params)
    return json.dumps(state_to_payload(rho), indent=2) + "\n", EXIT_OK


def cmd_corr(args):
    corr = _link(args)
    params = args.params if args.catalog == "rank3_family" else None
    report = CorrelationReport.build(corr, classify_link(corr, params=params, **_tolerance_kwargs(args)))
    rows = [("pair", report.pair), ("det", report.det), ("rank", report.rank), ("region", report.region)]
    return report, rows


def cmd_lsvd(args):
    corr = _link(args)
    report = DecompositionReport.build(lorentz_svd(corr, method=args.method, **_tolerance_kwargs(args)), corr.pair)
    rows = [("pair", report.pair), ("sigma", report.sigma), ("concurrence", report.concurrence), ("residual", report.residual)]
    return report, rows


def cmd_transporter(args):
    corr = _link(args)
    report = LinkReport.build(transporter(corr, method=args.method, side=args.side, **_tolerance_kwargs(args)))
    return report, [("pair", report.pair), ("side", report.side), ("sigma", report.sigma)]


def cmd_twist(args):
    rho = _load(args)
    result = twist(rho, args.loop, method=args.method, side=args.side, cross_check=args.cross_check, **_tolerance_kwargs(args))
    report = TwistReportModel.build(result)
    rows = [("loop", report.loop), ("xi", report.xi), ("xi_reversed", report.xi_reversed), ("eigenvalues", report.eigenvalues)]
    return report, rows


def cmd_protocol(args):
    trace = untwist_protocol(_load(args), args.loop, method=args.method, **_tolerance_kwargs(args))
    report = ProtocolReportModel.build(trace)
    rows = [("loop", report.loop), ("mismatch_gap", report.mismatch_gap), ("total_weight", report.total_weight)]
    return report, rows


def cmd_verify(args) -> Tuple[str, int]:
    seed = args.seed if args.seed is not None else get_settings().seed
    selection = None if args.all else args.claims
    if args.archive:
        from loopgauge.db.database import SessionLocal, init_db
        from loopgauge.services.paperlab.archive import VerificationService

        init_db()
        db = SessionLocal()
        try:
            run, results = VerificationService(db).run(selection, seed=seed, samples=args.samples, threads=args.threads)
            logger.info("Archived verification run", run_id=run.id)
        finally:
            db.close()
    else:
        results = verify_catalog(selection, seed=seed, samples=args.samples, threads=args.threads)

    code = EXIT_OK if all(r.passed for r in results) else EXIT_CLAIM_FAILED
    models = [ClaimResultModel.build(r) for r in results]
    if args.format == "table":
        rows = [(m.claim_id, f"{'PASS' if m.passed else 'FAIL'}  computed={m.computed}  tolerance={m.tolerance}") for m in models]
        return _table(rows), code
    return json.dumps([m.model_dump(mode="json") for m in models], indent=2) + "\n", code


def cmd_sweep(args):
    seed = args.seed if args.seed is not None else get_settings().seed
    grid = dict(args.grid) if args.grid else None
    report = SweepReportModel.build(sweep(args.family, grid=grid, samples=args.samples, seed=seed, method=args.method))
    rows = [("family", report.family), ("points", len(report.points)), ("worst_gap", report.worst_gap), ("realized", report.realized)]
    return report, rows


_REPORTS = {
    "corr": cmd_corr,
    "lsvd": cmd_lsvd,
    "transporter": cmd_transporter,
    "twist": cmd_twist,
    "protocol": cmd_protocol,
    "sweep": cmd_sweep,
}


def _dispatch(args) -> Tuple[str, int]:
    if args.command == "state":
        return cmd_state_build(args)
    if args.command == "verify":
        return cmd_verify(args)
    report, rows = _REPORTS[args.command](args)
    if args.format == "table":
        return _table(rows), EXIT_OK
    return report.model_dump_json(indent=2, by_alias=True) + "\n", EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    ap = build_parser()
    args = ap.parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)

    if args.command == "verify" and args.claims:
        unknown = [c for c in args.claims if c not in CLAIMS]
        if unknown:
            ap.error(f"unknown claims: {', '.join(unknown)}")

    try:
        text, code = _dispatch(args)
    except LoopGaugeError as e:
        logger.error("Command failed", command=args.command, error=e.message)
        sys.stdout.write(json.dumps(e.to_dict(), indent=2, default=str) + "\n")
        return e.exit_code

    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
