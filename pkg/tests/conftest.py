"""Fixtures shared by the pyvcr tests, auto-discovered by pytest"""

import logging

import matplotlib
import pytest

from pyvcr.utils.testing import write_step_fixture

matplotlib.use("Agg")


@pytest.fixture
def default_loglevel():
    """Reset the log level for all registered loggers to WARNING

    The command line client raises the level of the pyvcr loggers on
    --verbose and --debug, tests looking for the absence of INFO
    messages need them back at WARNING."""
    loggers = [logging.getLogger(name) for name in logging.root.manager.loggerDict]
    for logger in loggers:
        logger.setLevel(logging.WARNING)
    return default_loglevel


@pytest.fixture
def step_files(tmpdir):
    """Manifest, predictions and truth for a subject right iff Δv < 0.5"""
    return write_step_fixture(tmpdir)
