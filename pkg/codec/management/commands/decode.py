from pathlib import Path

from django.core.management.base import BaseCommand

from codec.cli import command_errors, read_frame
from codec.frame_codec import decode_mframe
from codec.frames import write_raw
from codec.syntax import MFrameBitstream


class Command(BaseCommand):
    help = "Decode an M-frame with any one of its SI frames"

    def add_arguments(self, parser):
        parser.add_argument("--input", "-i", required=True, help="M-frame bitstream")
        parser.add_argument("--si", required=True, help="raw SI frame available at the decoder")
        parser.add_argument("--output", "-o", required=True, help="raw frame to write")
        parser.add_argument("--frame-index", type=int, default=0, dest="frame_index")
        parser.add_argument("--chroma", choices=("none", "420"), default="none")

    def handle(self, *args, **options):
        with command_errors():
            stream = MFrameBitstream(Path(options["input"]).read_bytes())
            header = stream.header
            si = read_frame(options["si"], options, header.width, header.height)
            frame = decode_mframe(stream, si)
            write_raw(options["output"], frame)
        self.stdout.write(
            self.style.SUCCESS(
                f"✓ Decoded {header.width}x{header.height} {header.mode} M-frame "
                f"to {options['output']}"
            )
        )
