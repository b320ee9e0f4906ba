import os
from dotenv import load_dotenv

# Load env early (repo root, then app/.env)
ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
load_dotenv(dotenv_path=os.path.join(ROOT_DIR, ".env"))
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), ".env"))

import argparse
import logging
import sys
from typing import Sequence, TextIO

from pydantic import ValidationError

from app.core.config import APP_TITLE, TOOL_VERSION, get_settings
from app.routers import cli
from app.services.common_service import ErdosToolkitError
from app.services.report_service import error_payload

logger = logging.getLogger(__name__)

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _configure_logging(level: str) -> None:
    root = logging.getLogger()
    if getattr(_configure_logging, "_done", False):
        root.setLevel(level)
        return
    logging.basicConfig(level=level, stream=sys.stderr, format=_LOG_FORMAT)
    _configure_logging._done = True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_TITLE,
        description="Certified computations for L-series of Erdos functions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    cli.register_all(subparsers)
    return parser


def _fail(stderr: TextIO, code: int, message: str, detail) -> int:
    stderr.write(error_payload({"status": "error", "message": message, "detail": detail}) + "\n")
    return code


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Parse ``argv``, execute one sub-command and return its exit code.

    0 success, 1 cross-check failure, 2 invalid input, 3 precision exhausted.
    Payloads go to ``stdout``; diagnostics and logs go to ``stderr``.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        settings = get_settings()
    except ValidationError as exc:
        return _fail(stderr, 2, "Invalid configuration", exc.errors(include_url=False, include_context=False))
    _configure_logging(settings.log_level)

    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code or 0)

    logger.info("running %s (threads=%s, precision_bits=%s)", args.command, settings.threads, settings.precision_bits)
    try:
        return args.handler(args, stdout)
    except ErdosToolkitError as exc:
        logger.warning("%s failed: %s", args.command, exc.detail)
        payload = exc.as_payload()
        return _fail(stderr, exc.exit_code, payload["message"], payload["detail"])
    except ValidationError as exc:
        return _fail(stderr, 2, "Invalid input", exc.errors(include_url=False, include_context=False))
    except Exception as exc:
        logger.exception("%s crashed", args.command)
        return _fail(stderr, 1, "Internal error", str(exc))
