"""
Django settings for the mframe project.

The project has no web surface: Django provides the settings layer, the
management commands (encode, decode, verify, gensi, sweep, bdrate, simulate)
and the ORM used to keep sweep records.

Every codec tunable is read here through python-decouple, so it can be set
from the environment or from a settings.ini / .env file next to manage.py.
"""

from pathlib import Path

import dj_database_url
from decouple import Csv, config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("SECRET_KEY", default="mframe-local-only")

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = config("ALLOWED_HOSTS", default="localhost", cast=Csv())


# Application definition

INSTALLED_APPS = [
    "codec",
    "harness",
    "evaluation",
]


# Database
# Only the sweep record store lives here.

DATABASE_URL = config("DATABASE_URL", default="sqlite:///mframe.sqlite3", cast=str)

DATABASES = {"default": dj_database_url.parse(DATABASE_URL)}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

USE_TZ = True

TIME_ZONE = "UTC"


# Logging

LOG_LEVEL = config("MFRAME_LOG_LEVEL", default="WARNING")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "codec": {"handlers": ["console"], "level": LOG_LEVEL},
        "harness": {"handlers": ["console"], "level": LOG_LEVEL},
        "evaluation": {"handlers": ["console"], "level": LOG_LEVEL},
    },
}


# Codec defaults
# Flags on the management commands and key=value config files override these.

MFRAME = {
    "BLOCK_EDGE": config("MFRAME_BLOCK_EDGE", default=16, cast=int),
    "SCAN": config("MFRAME_SCAN", default="zigzag"),
    "QP_SI": config("MFRAME_QP_SI", default=27, cast=int),
    "MODE": config("MFRAME_MODE", default="optimized"),
    "LAM": config("MFRAME_LAMBDA", default="", cast=lambda v: float(v) if v else None),
    "DISTRIBUTION": config("MFRAME_DISTRIBUTION", default="spike"),
    "MAX_SPIKES": config("MFRAME_MAX_SPIKES", default=16, cast=int),
    "SPIKE_PATIENCE": config("MFRAME_SPIKE_PATIENCE", default=3, cast=int),
    "FULL_SPIKE_SWEEP": config("MFRAME_FULL_SPIKE_SWEEP", default=False, cast=bool),
    "FLOOR_MASS": config("MFRAME_FLOOR_MASS", default=0.01, cast=float),
    "EPSILON": config("MFRAME_EPSILON", default=1e-6, cast=float),
    "RD_PASSES": config("MFRAME_RD_PASSES", default=2, cast=int),
    "SEED": config("MFRAME_SEED", default=2024, cast=int),
    "N_SI": config("MFRAME_N_SI", default=3, cast=int),
    "NOISE_SCALE": config("MFRAME_NOISE_SCALE", default=0.125, cast=float),
    "DIVERGENCE": config("MFRAME_DIVERGENCE", default="quantized-noise"),
    "SWEEP_WORKERS": config("MFRAME_SWEEP_WORKERS", default=1, cast=int),
    "FRAME_SIZE": config("MFRAME_FRAME_SIZE", default=64, cast=int),
}
