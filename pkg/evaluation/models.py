from django.db import models, transaction

from .metrics import RdCurve, RdPoint


class SweepRun(models.Model):
    """One recorded RD sweep of a method over the synthetic corpus"""

    METHOD_CHOICES = [
        ("optimized", "Optimized merging"),
        ("fixed", "Fixed-target merging"),
        ("naive", "Optimized merging, naive shift model"),
        ("intra", "Intra refresh"),
    ]
    AXIS_CHOICES = [
        ("lambda", "Lambda"),
        ("qp", "QP"),
    ]

    method = models.CharField(max_length=10, choices=METHOD_CHOICES)
    axis = models.CharField(max_length=6, choices=AXIS_CHOICES)
    frames = models.PositiveIntegerField()
    frame_size = models.PositiveIntegerField()
    seed = models.BigIntegerField()
    n_si = models.PositiveIntegerField()
    qp_si = models.PositiveIntegerField()
    label = models.CharField(max_length=200, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"#{self.pk} {self.method} over {self.axis} ({self.label or 'unlabelled'})"

    @property
    def has_drift(self):
        return self.points.filter(drift=True).exists()

    @classmethod
    def record(cls, results, *, method, axis, frames, frame_size, sigen, label=""):
        """Store a finished sweep and its points"""
        with transaction.atomic():
            run = cls.objects.create(
                method=method,
                axis=axis,
                frames=frames,
                frame_size=frame_size,
                seed=sigen.seed,
                n_si=sigen.n_si,
                qp_si=sigen.qp_si,
                label=label,
            )
            SweepPoint.objects.bulk_create(
                SweepPoint(
                    run=run,
                    qp=r.qp,
                    lam=r.lam,
                    rate_bits=r.rate_bits,
                    psnr_db=r.psnr_db,
                    distortion=r.distortion,
                    drift=r.drift,
                )
                for r in results
            )
        return run

    def curve(self) -> RdCurve:
        return RdCurve(
            self.method,
            tuple(RdPoint(p.rate_bits, p.psnr_db) for p in self.points.all()),
        )

    class Meta:
        ordering = ["-created_at"]
        verbose_name = "Sweep Run"
        verbose_name_plural = "Sweep Runs"


class SweepPoint(models.Model):
    """A single RD point of a sweep run"""

    run = models.ForeignKey(SweepRun, on_delete=models.CASCADE, related_name="points")
    qp = models.PositiveIntegerField()
    lam = models.FloatField()
    rate_bits = models.FloatField()
    psnr_db = models.FloatField()
    distortion = models.FloatField()
    drift = models.BooleanField(default=False)

    def __str__(self):
        return f"{self.run.method} qp={self.qp} lambda={self.lam:g}: {self.rate_bits:.0f} bits"

    class Meta:
        ordering = ["rate_bits"]
        verbose_name = "Sweep Point"
        verbose_name_plural = "Sweep Points"
