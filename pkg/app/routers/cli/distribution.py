"""`distribution`: plot-ready CDF and histogram CSVs for L(k, f) over E_q."""
from __future__ import annotations

import argparse
from pathlib import Path
from typing import Optional, TextIO

from pydantic import BaseModel, Field

from app.services.moments_service import empirical_cdf
from app.services.report_service import to_csv

from ._shared import add_precision_flag, build_request, emit_json, metadata, precision_context, threads, write_file


class DistributionRequest(BaseModel):
    q: int
    k: int = Field(ge=1)
    bins: int = Field(default=10, ge=1, le=10_000)
    out: Path
    precision_bits: Optional[int] = None


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("distribution", help="empirical CDF of L(k, f)")
    parser.add_argument("--q", type=int, required=True)
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--bins", type=int, default=10)
    parser.add_argument("--out", type=Path, required=True, help="CDF CSV path; histogram goes to <stem>_hist.csv")
    add_precision_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(DistributionRequest, args)
    ctx = precision_context(req.precision_bits)
    table = empirical_cdf(req.q, req.k, ctx, req.bins, threads())

    cdf_rows = [(value.decimal(), f"{float(cdf):.17g}") for value, cdf in table.steps]
    hist_rows = [(repr(lo), repr(hi), count) for lo, hi, count in table.histogram]
    cdf_path = write_file(req.out, to_csv(("value", "cdf"), cdf_rows))
    hist_path = write_file(req.out.with_name(f"{req.out.stem}_hist.csv"), to_csv(("bin_lo", "bin_hi", "count"), hist_rows))

    result = {
        "q": req.q,
        "k": req.k,
        "population": len(table.values),
        "steps": len(table.steps),
        "bins": len(table.histogram),
        "cdf_path": str(cdf_path),
        "histogram_path": str(hist_path),
    }
    return emit_json(out, "distribution", result, metadata(ctx))
