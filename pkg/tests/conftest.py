"""Configure pytest"""

from pathlib import Path

import numpy as np
import pytest
from _pytest.logging import LogCaptureFixture
from loguru import logger

from spectral_metric.matcore import pauli
from spectral_metric.settings import SolverOptions
from spectral_metric.states import density_from_bloch
from spectral_metric.triple import Representation, dirac_corner, dirac_d4, dirac_two_point, triple_from_dirac

DATA = Path(__file__).parent / "data"


@pytest.fixture
def caplog(caplog: LogCaptureFixture):
    """Override pytest's caplog fixture to work with loguru."""
    handler_id = logger.add(
        caplog.handler,
        format="{message}",
        level=0,
        filter=lambda record: record["level"].no >= caplog.handler.level,
        enqueue=False,  # Set to False since we're not using multiprocessing in tests
    )
    yield caplog
    logger.remove(handler_id)


@pytest.fixture(autouse=True)
def propagate_logs():
    """Fixture to handle --log-cli-level flag with loguru."""
    import logging

    class PropagateHandler(logging.Handler):
        def emit(self, record):
            if logging.getLogger(record.name).isEnabledFor(record.levelno):
                logging.getLogger(record.name).handle(record)

    logger.remove()
    logger.add(PropagateHandler(), format="{message}")
    return


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def d4():
    return dirac_d4()


@pytest.fixture(scope="session")
def two_point():
    return dirac_two_point()


@pytest.fixture(scope="session")
def corner3():
    return dirac_corner(3)


@pytest.fixture(scope="session")
def sigma1_triple():
    """Identity representation of M_2 with D = sigma_1; its kernel makes some distances infinite."""
    return triple_from_dirac(Representation.identity(2), pauli(1), label="sigma1")


@pytest.fixture
def north_east():
    """Pure states with Bloch vectors (0, 0, 1) and (1, 0, 0)."""
    return density_from_bloch([0, 0, 1]), density_from_bloch([1, 0, 0])


@pytest.fixture
def bisection_opts() -> SolverOptions:
    return SolverOptions(force_bisection=True)
