import pytest

from shmtwin.decimator import DecimatorSpec, design_decimator, measure_response


@pytest.fixture(scope="session")
def default_chain():
    """The 256x chain is used all over; design it once per test session."""
    spec = DecimatorSpec()
    stages = design_decimator(spec)
    report = measure_response(stages, spec)
    return spec, stages, report
