import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

_SRC = Path(__file__).resolve().parents[1] / "src"


@pytest.fixture
def run_cli():
    """Run the CLI as a subprocess with a clean FRACTALSCAN_* environment."""

    def run(*args: str, env_extra: dict | None = None) -> subprocess.CompletedProcess:
        env = {
            key: value
            for key, value in os.environ.items()
            if not key.startswith("FRACTALSCAN_")
        }
        env["PYTHONPATH"] = str(_SRC) + os.pathsep + env.get("PYTHONPATH", "")
        if env_extra:
            env.update(env_extra)
        return subprocess.run(
            [sys.executable, "-m", "fractalscan", *args],
            capture_output=True,
            env=env,
            timeout=120,
        )

    return run
