import numpy as np
import pytest

from src.model.wavelet import WaveletParams
from src.service.cwt_service import CwtService
from src.service.estimation_service import EstimationService
from src.service.reconstruction_service import ReconstructionService
from src.service.separability_service import SeparabilityService
from src.service.signal_service import SignalService
from src.service.sst_service import SstService


@pytest.fixture
def params():
    return WaveletParams(mu=1.0, tau0=0.2)


@pytest.fixture
def signals():
    return SignalService()


@pytest.fixture
def cwt(params):
    return CwtService(params, workers=2)


@pytest.fixture
def sst(params, cwt):
    return SstService(params, cwt=cwt)


@pytest.fixture
def separability(params):
    return SeparabilityService(params)


@pytest.fixture
def estimation(params, cwt, sst):
    return EstimationService(params, cwt=cwt, sst=sst, n_voices=16, workers=2)


@pytest.fixture
def reconstruction(params):
    return ReconstructionService(params)


def ridge_band(cwt, plane, level=0.5, factor=2.0):
    """Cells away from both signal ends whose |W| exceeds level * max|W|.

    The default level keeps the band around each ridge and drops the small-scale
    rows where the sampled kernel is cut off at Nyquist.
    """
    magnitude = np.abs(plane.data)
    return (magnitude > level * magnitude.max()) & ~cwt.boundary_mask(plane, factor=factor)
