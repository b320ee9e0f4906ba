"""`density`: proportion of vanishing L(1, f) among all Erdos functions with modulus <= x."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field

from app.services.density_service import DensityMode, density_table
from app.services.report_service import DensityPayload

from ._shared import (
    add_format_flag,
    add_precision_flag,
    build_request,
    emit_csv,
    emit_json,
    metadata,
    precision_context,
    threads,
)


class DensityRequest(BaseModel):
    max_q: int = Field(ge=3)
    mode: DensityMode = DensityMode.BOUND
    precision_bits: Optional[int] = None
    format: str = Field(default="json", pattern="^(json|csv)$")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("density", help="|V_q| density up to x")
    parser.add_argument("--max-q", type=int, required=True)
    parser.add_argument("--mode", choices=[m.value for m in DensityMode], default=DensityMode.BOUND.value)
    add_precision_flag(parser)
    add_format_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(DensityRequest, args)
    ctx = precision_context(req.precision_bits)
    rows = [DensityPayload.model_validate(r.to_payload()) for r in density_table(req.max_q, req.mode, ctx, threads())]
    if req.format == "csv":
        return emit_csv(
            out,
            ("x", "numerator", "denominator", "ratio"),
            [(r.x, r.numerator, r.denominator, r.ratio_decimal) for r in rows],
        )
    result = {"mode": req.mode.value, "rows": [r.model_dump() for r in rows], "final": rows[-1].model_dump()}
    return emit_json(out, "density", result, metadata(ctx))
