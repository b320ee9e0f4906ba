"""`enumerate`: list or count the Erdos functions mod q."""
from __future__ import annotations

import argparse
from typing import Optional, TextIO

from pydantic import BaseModel, Field

from app.core.config import get_settings
from app.services.common_service import PopulationTooLarge
from app.services.erdos_service import (
    ParityClass,
    enumerate_erdos,
    enumerate_parity,
    parity_of,
    parity_population_size,
    population_size,
    rank_of,
)

from ._shared import add_format_flag, build_request, emit_csv, emit_json, logger, metadata


class EnumerateRequest(BaseModel):
    q: int
    parity: Optional[ParityClass] = None
    count_only: bool = False
    format: str = Field(default="json", pattern="^(json|csv)$")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("enumerate", help="list or count E_q")
    parser.add_argument("--q", type=int, required=True)
    parser.add_argument("--parity", choices=("odd", "even"), default=None)
    parser.add_argument("--count-only", action="store_true")
    add_format_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, out: TextIO) -> int:
    req = build_request(EnumerateRequest, args)
    if req.parity is None:
        count = population_size(req.q)
    else:
        count = parity_population_size(req.q, req.parity)
    if req.count_only:
        out.write(f"{count}\n")
        return 0

    limit = get_settings().enumeration_max_q
    if req.q > limit:
        raise PopulationTooLarge(f"q={req.q} exceeds ERDOS_ENUMERATION_MAX_Q={limit}; use --count-only")
    if req.parity is None:
        functions = list(enumerate_erdos(req.q))
    else:
        functions = sorted(enumerate_parity(req.q, req.parity), key=rank_of)
    logger.info("enumerated %s functions mod %s", len(functions), req.q)

    rows = [(rank_of(f), f.to_signs(), parity_of(f).value) for f in functions]
    if req.format == "csv":
        return emit_csv(out, ("rank", "signs", "parity"), rows)
    result = {
        "q": req.q,
        "parity": req.parity.value if req.parity else None,
        "count": count,
        "functions": [{"rank": rank, "signs": signs, "parity": parity} for rank, signs, parity in rows],
    }
    return emit_json(out, "enumerate", result, metadata())
