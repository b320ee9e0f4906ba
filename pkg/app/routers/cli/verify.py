"""`verify`: exhaustive certified check that L(1, f) != 0 for every f in E_q, q <= x."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field

from app.services.density_service import count_vanishing
from app.services.report_service import VerificationPayload

from ._shared import (
    add_format_flag,
    add_precision_flag,
    build_request,
    emit_csv,
    emit_json,
    logger,
    metadata,
    precision_context,
    threads,
)


class VerifyRequest(BaseModel):
    max_q: int = Field(ge=3)
    precision_bits: Optional[int] = None
    format: str = Field(default="json", pattern="^(json|csv)$")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("verify", help="certify non-vanishing of L(1, f) over E_q")
    parser.add_argument("--max-q", type=int, required=True)
    add_precision_flag(parser)
    add_format_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(VerifyRequest, args)
    ctx = precision_context(req.precision_bits)
    records = []
    for q in range(3, req.max_q + 1, 2):
        record = count_vanishing(q, ctx, threads())
        logger.info("q=%s: %s functions certified non-zero", q, record.population)
        records.append(VerificationPayload.model_validate(record.to_payload()))

    if req.format == "csv":
        return emit_csv(
            out,
            ("q", "population", "min_abs_l1", "certified_zero_count", "undecided_count", "final_precision_bits", "escalations"),
            [
                (r.q, r.population, r.min_abs_l1.decimal, r.certified_zero_count, r.undecided_count,
                 r.final_precision_bits, r.escalations)
                for r in records
            ],
        )
    return emit_json(out, "verify", {"records": [r.model_dump() for r in records]}, metadata(ctx))
