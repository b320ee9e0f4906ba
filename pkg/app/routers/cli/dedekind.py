"""`dedekind`: a higher-dimensional Dedekind cotangent sum, optionally with its reciprocity residual."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field, field_validator

from app.services.common_service import CrossCheckFailure, fraction_payload
from app.services.dedekind_service import (
    DedekindSpec,
    calibrate_sign_convention,
    dedekind_sum_numeric,
    reciprocity_check,
    reciprocity_rhs,
)

from ._shared import add_precision_flag, build_request, emit_json, logger, metadata, precision_context


def _int_list(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.replace(" ", "").split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


class DedekindRequest(BaseModel):
    a: list[int] = Field(min_length=2, max_length=12)
    m: list[int] = Field(min_length=2, max_length=12)
    i: int = Field(default=0, ge=0)
    check_reciprocity: bool = False
    precision_bits: Optional[int] = None

    @field_validator("a")
    @classmethod
    def _positive(cls, v: list[int]) -> list[int]:
        if any(x < 1 for x in v):
            raise ValueError("moduli must be positive")
        return v


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("dedekind", help="evaluate C(a_i; ... | m_i; ...)")
    parser.add_argument("--a", type=_int_list, required=True, help="moduli a_0,..,a_d")
    parser.add_argument("--m", type=_int_list, required=True, help="orders m_0,..,m_d")
    parser.add_argument("--i", type=int, default=0, help="distinguished index")
    parser.add_argument("--check-reciprocity", action="store_true")
    add_precision_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(DedekindRequest, args)
    ctx = precision_context(req.precision_bits)
    spec = DedekindSpec(tuple(req.a), tuple(req.m), req.i)
    result = {
        "moduli": list(spec.moduli),
        "orders": list(spec.orders),
        "index": spec.index,
        "value": dedekind_sum_numeric(spec, ctx).to_payload(),
    }
    meta = metadata(ctx)
    if req.check_reciprocity:
        convention = calibrate_sign_convention(ctx)
        residual = reciprocity_check(spec.moduli, spec.orders, ctx)
        result["reciprocity"] = {
            "rhs": fraction_payload(reciprocity_rhs(spec.moduli, spec.orders, convention)),
            "residual": residual.to_payload(),
            "holds": residual.contains(0),
        }
        meta = metadata(ctx, sign_convention=convention.tag)
        if not residual.contains(0):
            logger.error("reciprocity residual %r excludes zero", residual)
            emit_json(out, "dedekind", result, meta)
            raise CrossCheckFailure(f"reciprocity fails for a={list(spec.moduli)}, m={list(spec.orders)}")
    return emit_json(out, "dedekind", result, meta)
