# Generated by Django 6.0.1 on 2026-10-17 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="SweepRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "method",
                    models.CharField(
                        choices=[
                            ("optimized", "Optimized merging"),
                            ("fixed", "Fixed-target merging"),
                            ("naive", "Optimized merging, naive shift model"),
                            ("intra", "Intra refresh"),
                        ],
                        max_length=10,
                    ),
                ),
                (
                    "axis",
                    models.CharField(
                        choices=[("lambda", "Lambda"), ("qp", "QP")], max_length=6
                    ),
                ),
                ("frames", models.PositiveIntegerField()),
                ("frame_size", models.PositiveIntegerField()),
                ("seed", models.BigIntegerField()),
                ("n_si", models.PositiveIntegerField()),
                ("qp_si", models.PositiveIntegerField()),
                ("label", models.CharField(blank=True, max_length=200)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "verbose_name": "Sweep Run",
                "verbose_name_plural": "Sweep Runs",
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="SweepPoint",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("qp", models.PositiveIntegerField()),
                ("lam", models.FloatField()),
                ("rate_bits", models.FloatField()),
                ("psnr_db", models.FloatField()),
                ("distortion", models.FloatField()),
                ("drift", models.BooleanField(default=False)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="points",
                        to="evaluation.sweeprun",
                    ),
                ),
            ],
            options={
                "verbose_name": "Sweep Point",
                "verbose_name_plural": "Sweep Points",
                "ordering": ["rate_bits"],
            },
        ),
    ]
