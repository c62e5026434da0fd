"""Shared fixtures: canonical parameter sets, a CLI runner, a service client."""
from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from rtmkit.cli import main
from rtmkit.model import SYSTOLIC, PopulationParams
from rtmkit.sampling import SeedSpec, derive_stream, draw_sample
from rtmkit.service import create_app


@pytest.fixture(scope="session")
def systolic() -> PopulationParams:
    """The systolic blood-pressure benchmark parameters."""
    return SYSTOLIC


@pytest.fixture(scope="session")
def telomere_like() -> PopulationParams:
    """Parameters whose observed baseline variance (0.0309) splits into
    signal/noise at repeatability 0.479, mimicking a telomere-attrition study."""
    return PopulationParams(
        mu=1.0, sigma2=0.0148011, alpha=-0.07, beta=0.0, nu2=0.002, delta2=0.0160989
    )


@pytest.fixture(scope="session")
def systolic_sample_100(systolic):
    """One fixed N=100 draw (latent, observed) used across inference tests."""
    return draw_sample(systolic, 100, derive_stream(SeedSpec(30, 0)))


@pytest.fixture()
def run_cli(capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout_text, stderr_text)."""

    def _run(argv):
        try:
            code = main(list(argv))
        except SystemExit as exc:  # argparse --help or usage failure
            code = exc.code if isinstance(exc.code, int) else 1
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


@pytest.fixture(scope="session")
def client() -> TestClient:
    return TestClient(create_app(), raise_server_exceptions=False)
