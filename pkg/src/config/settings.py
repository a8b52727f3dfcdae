"""
In this module all configuration required for the application
is collected within a single dictionary named 'config'. Experiment
parameters live in YAML files (see src.schemas.experiment); this dict
only carries process-wide defaults that env vars may override.
"""

import os
from typing import Any, Dict

from dotenv import load_dotenv

dotenv_path = os.getenv(
    "QPLR_DOTENV_SHARED", os.path.join(os.path.dirname(__file__), ".env.shared")
)

dotenv_path_secrets = os.getenv(
    "QPLR_DOTENV_SECRETS",
    os.path.join(os.path.dirname(__file__), ".env.secrets"),
)

# priorizes env vars (not .env file)
load_dotenv(dotenv_path, override=False)
load_dotenv(dotenv_path_secrets, override=False)

config: Dict[str, Any] = {
    "APP": {
        "NAME": os.getenv("QPLR_NAME", "qplr"),
        "VERSION": os.getenv("QPLR_VERSION", "0.1.0"),
        "ENVIRONMENT": os.getenv("QPLR_ENVIRONMENT", "local"),
    },
    "LOGGING": {
        "LEVEL": os.getenv("QPLR_LOG_LEVEL", "INFO").upper(),
        "FORMAT": os.getenv(
            "QPLR_LOG_FORMAT", "%(asctime)s %(levelname)s %(name)s: %(message)s"
        ),
    },
    "RUNNER": {
        "WORKERS": int(os.getenv("QPLR_WORKERS", "1")),
        "OUTPUT_DIR": os.getenv("QPLR_OUTPUT_DIR", "results"),
        "SEED": int(os.getenv("QPLR_SEED", "0")),
    },
    "NUMERICS": {
        "HERMITIAN_TOL": float(os.getenv("QPLR_HERMITIAN_TOL", "1e-12")),
        "DENSE_LIMIT": int(os.getenv("QPLR_DENSE_LIMIT", "10000")),
        "TRIDIAGONAL_LIMIT": int(os.getenv("QPLR_TRIDIAGONAL_LIMIT", "100000")),
        "MANY_BODY_LIMIT": int(os.getenv("QPLR_MANY_BODY_LIMIT", "12")),
        "SLOPE_LEVELS": int(os.getenv("QPLR_SLOPE_LEVELS", "16")),
        "LABEL_BUDGET": float(os.getenv("QPLR_LABEL_BUDGET", "0.25")),
    },
}
