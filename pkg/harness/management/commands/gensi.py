from pathlib import Path

from django.core.management.base import BaseCommand

from codec.cli import add_frame_arguments, command_errors, read_frame
from codec.frames import write_raw
from codec.transform import SCANS, VALID_EDGES
from harness.sigen import DIVERGENCE_MODELS, SiGenConfig, generate_si_set, zstar_profile
from harness.sources import synthetic_frame


class Command(BaseCommand):
    help = "Generate a deterministic set of SI frames for a target frame"

    def add_arguments(self, parser):
        parser.add_argument("--target", help="raw 8-bit target frame (default: synthetic)")
        parser.add_argument("--output-dir", "-o", required=True, dest="output_dir")
        parser.add_argument("--n-si", type=int, dest="n_si")
        parser.add_argument("--qp-si", type=int, dest="qp_si")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--divergence", choices=DIVERGENCE_MODELS)
        parser.add_argument("--noise-scale", type=float, dest="noise_scale")
        parser.add_argument("--block-edge", type=int, choices=VALID_EDGES, dest="block_edge")
        parser.add_argument("--scan", choices=SCANS)
        parser.add_argument(
            "--profile", action="store_true", help="print the Z* profile of the SI set"
        )
        add_frame_arguments(parser, size_required=False)

    def handle(self, *args, **options):
        with command_errors():
            sigen = SiGenConfig.from_settings(
                seed=options["seed"],
                n_si=options["n_si"],
                qp_si=options["qp_si"],
                divergence_model=options["divergence"],
                noise_scale=options["noise_scale"],
                block_edge=options["block_edge"],
                scan=options["scan"],
            )
            if options["target"]:
                target = read_frame(options["target"], options)
            else:
                target = synthetic_frame(options["width"], options["height"], sigen.seed)
            si_frames = generate_si_set(target, sigen)

            out = Path(options["output_dir"])
            out.mkdir(parents=True, exist_ok=True)
            write_raw(out / "target.yuv", target)
            for n, frame in enumerate(si_frames):
                write_raw(out / f"si_{n}.yuv", frame)

        self.stdout.write(
            self.style.SUCCESS(
                f"✓ Wrote target and {len(si_frames)} {sigen.divergence_model} SI frames "
                f"({target.width}x{target.height}) to {out}"
            )
        )
        if options["profile"]:
            profile = zstar_profile(target, si_frames, sigen.block_edge, scan=sigen.scan)
            self.stdout.write("=" * 50)
            self.stdout.write("Z* profile at Q = 1")
            for z, count in enumerate(profile.histogram[:9]):
                self.stdout.write(f"  Z* = {z}: {count}")
            self.stdout.write(f"  Z* <= 5: {profile.fraction_at_most(5):.1%}")
