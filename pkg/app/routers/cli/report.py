"""`report`: Markdown comparison of corrected and printed moment constants."""
from __future__ import annotations

import argparse
from pathlib import Path
from typing import Optional, TextIO

from pydantic import BaseModel, Field

from app.services.moments_service import discrepancy_report
from app.services.report_service import render_discrepancy

from ._shared import add_precision_flag, build_request, logger, precision_context, write_file


class ReportRequest(BaseModel):
    k: int = Field(default=1, ge=1)
    max_n: int = Field(default=4, ge=1, le=12)
    finite_q: int = Field(default=5, ge=3)
    out: Optional[Path] = None
    precision_bits: Optional[int] = None


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("report", help="render the moment discrepancy report")
    parser.add_argument("--k", type=int, default=1)
    parser.add_argument("--max-n", type=int, default=4)
    parser.add_argument("--finite-q", type=int, default=5)
    parser.add_argument("--out", type=Path, default=None)
    add_precision_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(ReportRequest, args)
    ctx = precision_context(req.precision_bits)
    report = discrepancy_report(req.k, req.max_n, ctx, req.finite_q)
    text = render_discrepancy(report, ctx.precision_bits)
    logger.info("discrepancy report: %s printed constants disagree", report.disagreements)
    if req.out is None:
        out.write(text)
    else:
        write_file(req.out, text)
    return 0
