from pathlib import Path

from django.core.management.base import BaseCommand

from codec.cli import (
    add_codec_arguments,
    add_frame_arguments,
    command_errors,
    config_from_options,
    read_frame,
)
from codec.frame_codec import encode_mframe
from codec.frames import write_raw
from evaluation.metrics import format_psnr, psnr


class Command(BaseCommand):
    help = "Encode an M-frame merging the given SI frames towards a target frame"

    def add_arguments(self, parser):
        parser.add_argument("--target", required=True, help="raw 8-bit target frame")
        parser.add_argument(
            "--si", action="append", required=True, help="raw SI frame (repeat per SI)"
        )
        parser.add_argument("--output", "-o", required=True, help="M-frame bitstream to write")
        parser.add_argument("--recon", help="write the canonical reconstruction here")
        add_frame_arguments(parser)
        add_codec_arguments(parser)

    def handle(self, *args, **options):
        with command_errors():
            config = config_from_options(options)
            target = read_frame(options["target"], options)
            si_frames = [read_frame(path, options) for path in options["si"]]
            result = encode_mframe(si_frames, target, config)
            Path(options["output"]).write_bytes(result.bitstream.data)
            if options["recon"]:
                write_raw(options["recon"], result.reconstruction)

        counts = ", ".join(f"{n} {mode}" for mode, n in result.mode_counts().items())
        self.stdout.write(
            self.style.SUCCESS(
                f"✓ Wrote {options['output']}: {result.rate_bits} bits, {result.mode} mode"
            )
        )
        self.stdout.write(f"  blocks: {counts}")
        self.stdout.write(
            f"  D={result.distortion:.2f}  lambda={result.lam:g}  "
            f"PSNR={format_psnr(psnr(result.reconstruction, target))} dB"
        )
