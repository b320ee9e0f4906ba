"""`lvalue`: certified L(k, f) for a single Erdos function."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field, field_validator

from app.services.common_service import InvalidFunction
from app.services.erdos_service import ErdosFunction, parity_of
from app.services.lseries_service import LMethod, l_value

from ._shared import add_precision_flag, build_request, emit_json, metadata, precision_context


class LValueRequest(BaseModel):
    q: int
    f: str = Field(min_length=3, max_length=10_000)
    k: int = Field(ge=1)
    method: LMethod = LMethod.DIRECT
    precision_bits: Optional[int] = None

    @field_validator("f")
    @classmethod
    def _strip(cls, v: str) -> str:
        return v.strip()


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("lvalue", help="evaluate L(k, f)")
    parser.add_argument("--q", type=int, required=True)
    parser.add_argument("--f", required=True, help="sign string such as '+-+--0'")
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--method", choices=[m.value for m in LMethod], default=LMethod.DIRECT.value)
    add_precision_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(LValueRequest, args)
    f = ErdosFunction.from_signs(req.f)
    if f.q != req.q:
        raise InvalidFunction(f"sign string has period {f.q}, expected {req.q}")
    ctx = precision_context(req.precision_bits)
    result = l_value(f, req.k, req.method, ctx)
    payload = {"f": f.to_signs(), "parity": parity_of(f).value, **result.to_payload()}
    return emit_json(out, "lvalue", payload, metadata(ctx))
