"""
Report service.
Pydantic payload models, deterministic JSON/CSV emission and the Jinja2-rendered
discrepancy report.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from typing import Any, Iterable, Optional, Sequence

from jinja2 import Environment, FileSystemLoader, StrictUndefined
from pydantic import BaseModel, Field

from app.core.config import TEMPLATES_DIR, TOOL_VERSION
from app.services.moments_service import DiscrepancyReport

logger = logging.getLogger(__name__)

_env: Environment | None = None


# ── Payload models ───────────────────────────────────────────────────────────

class RationalPayload(BaseModel):
    num: str
    den: str


class CertifiedPayload(BaseModel):
    midpoint: str
    radius: str
    decimal: str


class Metadata(BaseModel):
    tool_version: str = TOOL_VERSION
    precision_bits: Optional[int] = None
    seed: Optional[int] = None
    sign_convention: Optional[str] = None
    label: Optional[str] = None


class MomentPayload(BaseModel):
    q: Optional[int] = Field(default=None, description="null for the q -> infinity limit")
    k: int
    order: int
    method: str
    label: str
    pi_exponent: Optional[int] = None
    coefficient_num: Optional[str] = None
    coefficient_den: Optional[str] = None
    midpoint: Optional[str] = None
    radius: Optional[str] = None
    decimal: Optional[str] = None
    standard_error: Optional[str] = None
    samples: Optional[int] = None
    seed: Optional[int] = None


class VerificationPayload(BaseModel):
    q: int
    population: int
    min_abs_l1: CertifiedPayload
    certified_zero_count: int
    undecided_count: int
    final_precision_bits: int
    escalations: int


class DensityPayload(BaseModel):
    x: int
    mode: str
    numerator: str
    denominator: str
    ratio: RationalPayload
    ratio_decimal: str


class Envelope(BaseModel):
    status: str = "ok"
    command: str
    metadata: Metadata
    result: Any


# ── Emission ─────────────────────────────────────────────────────────────────

def dumps(model: BaseModel) -> str:
    """Byte-stable JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def envelope(command: str, result: Any, metadata: Metadata) -> str:
    return dumps(Envelope(command=command, metadata=metadata, result=result))


def error_payload(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, default=str)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


# ── Rendering ────────────────────────────────────────────────────────────────

def _environment() -> Environment:
    global _env
    if _env is None:
        _env = Environment(
            loader=FileSystemLoader(str(TEMPLATES_DIR)),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )
    return _env


def render_discrepancy(report: DiscrepancyReport, precision_bits: int) -> str:
    """Markdown comparison of corrected and printed moment constants."""
    template = _environment().get_template("discrepancy.md.j2")
    return template.render(
        report=report,
        precision_bits=precision_bits,
        tool_version=TOOL_VERSION,
        finite_agrees=report.finite_enumeration.overlaps(report.finite_printed),
    )
