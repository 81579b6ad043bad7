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
from harness.sigen import DIVERGENCE_MODELS, SiGenConfig
from harness.switching import GRAPHS, SyntheticPictures, graph_by_name, simulate_switch


def parse_switch(text):
    """'0:0>0:1' -> ((0, 0), (0, 1))"""
    try:
        origin, destination = text.split(">")
        return tuple(
            tuple(int(part) for part in node.split(":")) for node in (origin, destination)
        )
    except ValueError as exc:
        raise CommandError(
            f"bad switch {text!r}, expected stream:time>stream:time",
            returncode=EXIT_USAGE,
        ) from exc


class Command(BaseCommand):
    help = "Replay stream switches over an interactivity graph and check for drift"

    def add_arguments(self, parser):
        parser.add_argument("--graph", choices=GRAPHS, default="two-origins")
        parser.add_argument("--views", type=int, default=3, help="views of the static graph")
        parser.add_argument(
            "--switch",
            action="append",
            dest="switches",
            help="stream:time>stream:time (repeat; default: every permitted switch)",
        )
        parser.add_argument("--seed", type=int)
        parser.add_argument("--divergence", choices=DIVERGENCE_MODELS)
        parser.add_argument("--frame-size", type=int, dest="frame_size")
        parser.add_argument("--csv", help="write the switch report as CSV")
        parser.add_argument("--json", help="write the switch report as JSON")
        add_codec_arguments(parser)

    def handle(self, *args, **options):
        with command_errors():
            config = config_from_options(options)
            graph = graph_by_name(options["graph"], options["views"], config.qp_si)
            sigen = SiGenConfig.from_settings(
                seed=options["seed"], divergence_model=options["divergence"]
            )
            pictures = None
            if options["frame_size"]:
                pictures = SyntheticPictures(options["frame_size"], sigen.seed, graph.disparity)
            if options["switches"]:
                trace = [parse_switch(s) for s in options["switches"]]
            else:
                trace = graph.full_trace()
            report = simulate_switch(graph, trace, config, sigen, pictures)
            if options["csv"]:
                Path(options["csv"]).write_text(report.to_csv())
            if options["json"]:
                Path(options["json"]).write_text(report.to_json())

        self.stdout.write(f"Graph {graph.name}{' (cyclic)' if graph.cyclic else ''}")
        self.stdout.write("=" * 50)
        for r in report.records:
            line = (
                f"  {r.origin} -> {r.destination}: {r.mode}, {r.mframe_bits} bits, "
                f"PSNR={format_psnr(r.psnr_db)} dB, "
                f"R_avg={r.average_rate_bits:.0f} R_worst={r.worst_rate_bits}"
            )
            if r.drift:
                self.stdout.write(self.style.ERROR(line + "  DRIFT"))
            else:
                self.stdout.write(line)

        if report.drift:
            raise CommandError("drift detected", returncode=EXIT_DRIFT)
        self.stdout.write(self.style.SUCCESS(f"✓ {len(report.records)} switches, no drift"))
