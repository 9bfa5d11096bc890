import pytest

from gcdeform.algebroid import build_complex_eigenbundle
from gcdeform.deformation import constrain_map, mc_residual, reduce_family
from gcdeform.frame import kodaira_frame


@pytest.fixture(scope="session")
def kframe():
    return kodaira_frame()


@pytest.fixture(scope="session")
def ksub(kframe):
    return build_complex_eigenbundle(kframe)


@pytest.fixture(scope="session")
def kmap(ksub):
    return constrain_map(ksub)


@pytest.fixture(scope="session")
def kfamily(kmap):
    emap, _ = kmap
    return reduce_family(mc_residual(emap))
