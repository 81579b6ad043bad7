from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from codec.cli import (
    EXIT_DRIFT,
    EXIT_USAGE,
    add_codec_arguments,
    command_errors,
    config_from_options,
)
from evaluation.metrics import format_psnr
from evaluation.models import SweepRun
from evaluation.plots import plot_curves
from evaluation.sweep import AXES, METHODS, rd_sweep, synthetic_corpus, to_curve, write_csv
from harness.sigen import DIVERGENCE_MODELS, SiGenConfig


def parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CommandError(f"bad value list {text!r}", returncode=EXIT_USAGE) from exc


class Command(BaseCommand):
    help = "Run an RD sweep over lambda or QP on the seeded synthetic corpus"

    def add_arguments(self, parser):
        parser.add_argument(
            "--method",
            action="append",
            dest="methods",
            choices=METHODS,
            help="repeat to sweep several methods (default: optimized)",
        )
        parser.add_argument("--axis", choices=AXES, default="lambda")
        parser.add_argument("--values", help="comma-separated lambdas or QPs")
        parser.add_argument("--frames", type=int, default=4, help="corpus size")
        parser.add_argument("--frame-size", type=int, dest="frame_size")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--n-si", type=int, dest="n_si")
        parser.add_argument("--divergence", choices=DIVERGENCE_MODELS)
        parser.add_argument("--workers", type=int)
        parser.add_argument("--csv", "-o", dest="csv", help="CSV report path")
        parser.add_argument("--svg", help="SVG plot path")
        parser.add_argument("--strict", action="store_true", help="fail on non-monotone RD")
        parser.add_argument("--record", action="store_true", help="store the run in the database")
        parser.add_argument("--label", default="")
        add_codec_arguments(parser)

    def handle(self, *args, **options):
        methods = options["methods"] or ["optimized"]
        values = parse_values(options["values"]) if options["values"] else None
        if values is not None and options["axis"] == "qp":
            values = [int(v) for v in values]

        with command_errors():
            config = config_from_options(options)
            sigen = SiGenConfig.from_settings(
                seed=options["seed"],
                n_si=options["n_si"],
                qp_si=config.qp_si,
                divergence_model=options["divergence"],
                block_edge=config.block_edge,
                scan=config.scan,
            )
            corpus = synthetic_corpus(options["frames"], options["frame_size"], sigen)
            frame_size = corpus[0].target.width if corpus else 0
            results = []
            for method in methods:
                results += rd_sweep(
                    corpus,
                    method,
                    options["axis"],
                    values,
                    config,
                    workers=options["workers"],
                    strict=options["strict"],
                )
            if options["csv"]:
                Path(options["csv"]).write_text(write_csv(results))
            if options["svg"]:
                curves = [to_curve([r for r in results if r.method == m], m) for m in methods]
                plot_curves(curves, options["svg"])

        self.stdout.write(f"{'method':<10} {'qp':>4} {'lambda':>8} {'bits':>10} {'PSNR':>8}")
        self.stdout.write("=" * 50)
        for r in results:
            line = (
                f"{r.method:<10} {r.qp:>4} {r.lam:>8g} {r.rate_bits:>10.1f} "
                f"{format_psnr(r.psnr_db):>8}"
            )
            self.stdout.write(self.style.ERROR(line + "  DRIFT") if r.drift else line)

        if options["record"]:
            for method in methods:
                run = SweepRun.record(
                    [r for r in results if r.method == method],
                    method=method,
                    axis=options["axis"],
                    frames=options["frames"],
                    frame_size=frame_size,
                    sigen=sigen,
                    label=options["label"],
                )
                self.stdout.write(self.style.SUCCESS(f"✓ Recorded sweep run #{run.pk} ({method})"))

        if any(r.drift for r in results):
            raise CommandError("drift detected during the sweep", returncode=EXIT_DRIFT)
        self.stdout.write(self.style.SUCCESS(f"✓ {len(results)} RD points"))
