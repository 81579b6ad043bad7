from django.core.management.base import BaseCommand, CommandError

from codec.cli import EXIT_USAGE, command_errors
from evaluation.metrics import bd_rate
from evaluation.models import SweepRun
from evaluation.sweep import read_csv


def load_curve(source):
    """'run:<id>', 'sweep.csv' or 'sweep.csv#method'"""
    if source.startswith("run:"):
        try:
            return SweepRun.objects.get(pk=int(source[4:])).curve()
        except (ValueError, SweepRun.DoesNotExist) as exc:
            raise CommandError(
                f"no recorded sweep run {source[4:]!r}", returncode=EXIT_USAGE
            ) from exc
    path, _, method = source.partition("#")
    curves = read_csv(path)
    if method:
        if method not in curves:
            raise CommandError(f"{path} has no {method!r} curve", returncode=EXIT_USAGE)
        return curves[method]
    if len(curves) != 1:
        raise CommandError(
            f"{path} holds {sorted(curves)}; pick one with {path}#<method>",
            returncode=EXIT_USAGE,
        )
    return next(iter(curves.values()))


class Command(BaseCommand):
    help = "Bjontegaard delta rate of curve A against curve B (negative: A is cheaper)"

    def add_arguments(self, parser):
        parser.add_argument("curve_a", help="run:<id>, sweep.csv or sweep.csv#method")
        parser.add_argument("curve_b", help="run:<id>, sweep.csv or sweep.csv#method")

    def handle(self, *args, **options):
        with command_errors():
            curve_a = load_curve(options["curve_a"])
            curve_b = load_curve(options["curve_b"])
            delta = bd_rate(curve_a, curve_b)

        self.stdout.write(f"A: {curve_a.method} ({len(curve_a)} points)")
        self.stdout.write(f"B: {curve_b.method} ({len(curve_b)} points)")
        self.stdout.write("=" * 50)
        self.stdout.write(self.style.SUCCESS(f"✓ BD-rate {delta:+.2f}%"))
