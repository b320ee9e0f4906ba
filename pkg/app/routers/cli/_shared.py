"""Shared helpers for CLI sub-commands.

Argument plumbing, precision contexts and payload emission used by every
module under `app.routers.cli`.
"""
from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO, Type, TypeVar

from pydantic import BaseModel

from app.core.config import MIN_PRECISION_BITS, get_settings
from app.services.numeric_service import PrecisionContext
from app.services.report_service import Metadata, envelope, to_csv

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

_INTERNAL_KEYS = {"command", "handler"}


def build_request(model: Type[M], args: argparse.Namespace) -> M:
    """Validate the parsed namespace against the sub-command's request model."""
    data = {key: value for key, value in vars(args).items() if key not in _INTERNAL_KEYS}
    return model.model_validate(data)


def add_precision_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--precision-bits",
        type=int,
        default=None,
        help=f"working precision in bits (>= {MIN_PRECISION_BITS}; default ERDOS_PRECISION_BITS)",
    )


def add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def precision_context(bits: int | None) -> PrecisionContext:
    if bits is None:
        return PrecisionContext.from_settings()
    return PrecisionContext(precision_bits=bits)


def metadata(ctx: PrecisionContext | None = None, seed: int | None = None, **extra: Any) -> Metadata:
    return Metadata(
        precision_bits=ctx.precision_bits if ctx is not None else None,
        seed=seed,
        sign_convention=extra.pop("sign_convention", None),
        **extra,
    )


def threads() -> int:
    return get_settings().threads


def emit_json(out: TextIO, command: str, result: Any, meta: Metadata) -> int:
    out.write(envelope(command, result, meta))
    return 0


def emit_csv(out: TextIO, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    out.write(to_csv(columns, rows))
    return 0


def write_file(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    logger.info("wrote %s (%s bytes)", path, len(text))
    return path
