"""`spoly`: S_{q,k}^{(u)} as an exact polynomial in q."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field

from app.services.common_service import fraction_payload
from app.services.dedekind_service import calibrate_sign_convention, leading_coefficient_formula, s_qk_polynomial

from ._shared import add_precision_flag, build_request, emit_json, metadata, precision_context


class SPolyRequest(BaseModel):
    u: int = Field(ge=1, le=64)
    k: int = Field(ge=1, le=64)
    method: str = Field(default="reciprocity", pattern="^(reciprocity|interpolation)$")
    precision_bits: Optional[int] = None


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("spoly", help="emit the coefficients of S_{q,k}^{(u)}")
    parser.add_argument("--u", type=int, required=True)
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--method", choices=("reciprocity", "interpolation"), default="reciprocity")
    add_precision_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(SPolyRequest, args)
    ctx = precision_context(req.precision_bits)
    convention = calibrate_sign_convention(ctx) if req.method == "reciprocity" else None
    poly = s_qk_polynomial(req.u, req.k, req.method, ctx, convention)
    result = {
        "u": req.u,
        "k": req.k,
        "method": req.method,
        "degree": poly.degree,
        "coefficients": poly.to_payload(),
        "leading_coefficient": fraction_payload(poly.leading_coefficient),
        "leading_coefficient_formula": fraction_payload(leading_coefficient_formula(req.u, req.k)),
        "text": str(poly),
    }
    meta = metadata(ctx, sign_convention=convention.tag if convention is not None else None)
    return emit_json(out, "spoly", result, meta)
