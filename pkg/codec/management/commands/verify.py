import hashlib
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from codec.cli import EXIT_DRIFT, command_errors, read_frame
from codec.frame_codec import decode_mframe
from codec.syntax import MFrameBitstream
from evaluation.metrics import format_psnr, psnr


class Command(BaseCommand):
    help = "Decode an M-frame with every SI frame and check the outputs are identical"

    def add_arguments(self, parser):
        parser.add_argument("--input", "-i", required=True, help="M-frame bitstream")
        parser.add_argument(
            "--si", action="append", required=True, help="raw SI frame (repeat per SI)"
        )
        parser.add_argument("--target", help="raw target frame, for PSNR")
        parser.add_argument("--frame-index", type=int, default=0, dest="frame_index")
        parser.add_argument("--chroma", choices=("none", "420"), default="none")

    def handle(self, *args, **options):
        with command_errors():
            stream = MFrameBitstream(Path(options["input"]).read_bytes())
            header = stream.header
            size = (header.width, header.height)
            outputs = []
            for path in options["si"]:
                si = read_frame(path, options, *size)
                outputs.append((path, decode_mframe(stream, si)))
            target = read_frame(options["target"], options, *size) if options["target"] else None

        reference = outputs[0][1]
        drift = False
        for path, frame in outputs:
            digest = hashlib.sha256(frame.samples.tobytes()).hexdigest()[:16]
            line = f"  {path}: {digest}"
            if target is not None:
                line += f"  PSNR={format_psnr(psnr(frame, target))} dB"
            if frame == reference:
                self.stdout.write(line)
            else:
                drift = True
                self.stdout.write(self.style.ERROR(line + "  DRIFT"))

        if drift:
            raise CommandError("reconstructions differ between SI frames", returncode=EXIT_DRIFT)
        self.stdout.write(
            self.style.SUCCESS(f"✓ {len(outputs)} SI frames decode to one reconstruction")
        )
