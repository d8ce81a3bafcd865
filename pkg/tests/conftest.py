from __future__ import annotations

import sys

import numpy as np
import pytest
from hypothesis import settings

from helpers import PMC_SURFACES, surface, surface_id

settings.register_profile("pmc", max_examples=40, deadline=None)
settings.load_profile("pmc")


@pytest.fixture(params=PMC_SURFACES, ids=surface_id)
def pmc_surface(request):
    family, c, params = request.param
    return surface(family, c, **params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance and acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance.VERDICTS):
            terminalreporter.write_line(line)
