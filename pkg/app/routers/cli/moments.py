"""`moments`: m_q(2n) or the limiting M(2n) by any of the four methods."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field, model_validator

from app.core.config import get_settings
from app.services.common_service import CrossCheckFailure, InvalidArgument
from app.services.moments_service import (
    MomentMethod,
    MomentReport,
    limiting_moment,
    moment_enumeration,
    moment_printed_formula,
    moment_partition_formula,
    monte_carlo_moments,
)
from app.services.numeric_service import PiPowerRational
from app.services.report_service import MomentPayload

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


class MomentsRequest(BaseModel):
    q: Optional[int] = None
    limit: bool = False
    k: int = Field(ge=1)
    order: int = Field(ge=0, le=64)
    method: MomentMethod = MomentMethod.ENUMERATION
    samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    precision_bits: Optional[int] = None
    format: str = Field(default="json", pattern="^(json|csv)$")

    @model_validator(mode="after")
    def _consistent(self) -> "MomentsRequest":
        if self.limit == (self.q is not None):
            raise ValueError("give exactly one of --q and --limit")
        if self.method is MomentMethod.MONTECARLO and (self.samples is None or self.seed is None):
            raise ValueError("--method montecarlo needs --samples and --seed")
        return self


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("moments", help="moments of L(k, f) over E_q or in the limit")
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--q", type=int)
    target.add_argument("--limit", action="store_true", help="q -> infinity")
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--order", type=int, required=True)
    parser.add_argument("--method", choices=[m.value for m in MomentMethod], default=MomentMethod.ENUMERATION.value)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    add_precision_flag(parser)
    add_format_flag(parser)
    parser.set_defaults(handler=handle)


def _limit_report(req: MomentsRequest, ctx) -> MomentReport:
    if req.method is MomentMethod.PAPER:
        return moment_printed_formula(None, req.k, req.order, ctx)
    if req.method is not MomentMethod.PARTITION:
        raise InvalidArgument(f"--limit supports the partition and paper methods, not {req.method.value}")
    if req.order % 2:
        exact = PiPowerRational(0, 0)
    else:
        exact = limiting_moment(req.order // 2, req.k)
    return MomentReport(None, req.k, req.order, MomentMethod.PARTITION, exact=exact, value=exact.to_certified(ctx))


def _cross_check(report: MomentReport, req: MomentsRequest, ctx) -> None:
    """Partition output must enclose enumeration output wherever enumeration is affordable."""
    if req.q > get_settings().enumeration_max_q:
        logger.info("skipping enumeration cross-check beyond the enumeration guard (q=%s)", req.q)
        return
    oracle = moment_enumeration(req.q, req.k, req.order, ctx, threads())
    if not report.value.overlaps(oracle.value):
        raise CrossCheckFailure(
            f"partition {report.value!r} and enumeration {oracle.value!r} disagree at q={req.q}, order={req.order}"
        )


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(MomentsRequest, args)
    ctx = precision_context(req.precision_bits)
    if req.limit:
        report = _limit_report(req, ctx)
    elif req.method is MomentMethod.ENUMERATION:
        report = moment_enumeration(req.q, req.k, req.order, ctx, threads())
    elif req.method is MomentMethod.PARTITION:
        report = moment_partition_formula(req.q, req.k, req.order, ctx)
        _cross_check(report, req, ctx)
    elif req.method is MomentMethod.PAPER:
        report = moment_printed_formula(req.q, req.k, req.order, ctx)
    else:
        report = monte_carlo_moments(req.q, req.k, req.order, req.samples, req.seed, threads=threads())

    payload = MomentPayload.model_validate(report.to_payload())
    if req.format == "csv":
        columns = list(MomentPayload.model_fields)
        row = payload.model_dump()
        return emit_csv(out, columns, [["" if row[c] is None else row[c] for c in columns]])
    meta = metadata(ctx, seed=req.seed, label=report.label)
    return emit_json(out, "moments", payload.model_dump(), meta)
