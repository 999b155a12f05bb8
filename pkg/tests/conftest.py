import numpy as np
import pytest

from stereofollow import kernels
from stereofollow.geometry import StereoRig

BACKENDS = [kernels.python_backend]
if kernels.compiled_backend is not None:
    BACKENDS.append(kernels.compiled_backend)


@pytest.fixture
def rig():
    return StereoRig.reference()


@pytest.fixture
def rig_628():
    """Reference rig with focal length rounded to 628.03 px, as used in the worked examples."""
    return StereoRig(0.094, 628.03, (319.5, 239.5), (640, 480))


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(kernels, "backend", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
