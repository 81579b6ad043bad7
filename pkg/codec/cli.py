"""Shared plumbing for the management commands."""

from __future__ import annotations

from contextlib import contextmanager

from django.conf import settings
from django.core.management.base import CommandError

from .config import DISTRIBUTIONS, MODES, CodecConfig
from .exceptions import BitstreamError, MFrameError
from .frames import read_raw
from .transform import SCANS, VALID_EDGES

EXIT_DRIFT = 1
EXIT_USAGE = 2
EXIT_IO = 3


@contextmanager
def command_errors():
    """Turn library errors into CommandErrors carrying the documented exit codes"""
    try:
        yield
    except BitstreamError as exc:
        raise CommandError(f"unreadable stream: {exc}", returncode=EXIT_IO) from exc
    except OSError as exc:
        raise CommandError(str(exc), returncode=EXIT_IO) from exc
    except MFrameError as exc:
        raise CommandError(str(exc), returncode=EXIT_USAGE) from exc


def add_codec_arguments(parser):
    group = parser.add_argument_group("codec")
    group.add_argument("--config", help="key=value file with MFRAME_* settings")
    group.add_argument("--mode", choices=MODES)
    group.add_argument("--qp-si", type=int, dest="qp_si")
    group.add_argument("--lambda", type=float, dest="lam", help="overrides the QP-derived value")
    group.add_argument("--block-edge", type=int, choices=VALID_EDGES, dest="block_edge")
    group.add_argument("--scan", choices=SCANS)
    group.add_argument("--distribution", choices=DISTRIBUTIONS)
    group.add_argument("--max-spikes", type=int, dest="max_spikes")
    group.add_argument("--rd-passes", type=int, dest="rd_passes")


def add_frame_arguments(parser, size_required: bool = True):
    group = parser.add_argument_group("raw frames")
    default = None if size_required else settings.MFRAME["FRAME_SIZE"]
    group.add_argument("--width", type=int, required=size_required, default=default)
    group.add_argument("--height", type=int, required=size_required, default=default)
    group.add_argument("--frame-index", type=int, default=0, dest="frame_index")
    group.add_argument("--chroma", choices=("none", "420"), default="none")


CODEC_OPTIONS = (
    "mode",
    "qp_si",
    "lam",
    "block_edge",
    "scan",
    "distribution",
    "max_spikes",
    "rd_passes",
)


def config_from_options(options) -> CodecConfig:
    overrides = {name: options.get(name) for name in CODEC_OPTIONS}
    if options.get("config"):
        return CodecConfig.from_file(options["config"], **overrides)
    return CodecConfig.from_settings(**overrides)


def read_frame(path, options, width=None, height=None):
    return read_raw(
        path,
        width or options["width"],
        height or options["height"],
        options.get("frame_index", 0),
        options.get("chroma", "none"),
    )
