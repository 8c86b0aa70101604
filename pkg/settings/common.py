"""Settings for command line runs of the lipan management commands.

The project has no database, templates or URLs; Django provides the command framework
and the process wide defaults below. Values in a run config override them.
"""
import os.path

PROJECT_ROOT = os.path.split(os.path.split(os.path.abspath(__file__))[0])[0]
SETTINGS_DIR = os.path.join(PROJECT_ROOT, "settings")

DEBUG = False
SECRET_KEY = "lipan-command-line-only"
ALLOWED_HOSTS = []
DATABASES = {}
USE_TZ = True
TIME_ZONE = "UTC"

INSTALLED_APPS = [
    "lipanapp",
]

# Output directory for reports when the run config names none.
LIPAN_OUT_DIR = os.path.join(PROJECT_ROOT, "lipan-out")
# Processes for point parallel evaluation.
LIPAN_WORKERS = 1
# Largest accepted net.
LIPAN_NET_CAP = 200000
LIPAN_MC_SAMPLES = 100000

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(asctime)s %(levelname)8s %(name)s %(module)s %(message)s",
        },
        "simple": {"format": "%(levelname)8s %(message)s"},
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "": {"handlers": ["console"], "propagate": True, "level": "INFO"},
        "impl.lipan": {"level": "INFO"},
        "filelock": {"level": "ERROR"},
    },
}
