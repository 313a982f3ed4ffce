import math

import pytest

from rotwave import FlowParameters, GammaProfile, VorticityDistribution


@pytest.fixture
def pinned_flow():
    """Irrotational flow with p0^2 = tanh(1): the crossing sits at lambda = 1."""
    return FlowParameters(d=1.0, g=1.0, p0=-math.sqrt(math.tanh(1.0)))


@pytest.fixture
def pinned_profile(pinned_flow):
    return GammaProfile.from_distribution(VorticityDistribution.const(0.0), pinned_flow)


def make_profile(gamma=-1.0, d=1.0, g=1.0, p0=-1.0, **kwargs):
    flow = FlowParameters(d=d, g=g, p0=p0)
    if isinstance(gamma, VorticityDistribution):
        dist = gamma
    else:
        dist = VorticityDistribution.const(gamma)
    return GammaProfile.from_distribution(dist, flow, **kwargs), flow
