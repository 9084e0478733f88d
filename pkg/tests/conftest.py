import pytest

from kurihara.curve import CurveData
from kurihara.modsym import build_space, extract_eigensymbol


@pytest.fixture(scope="session")
def e11():
    return CurveData(
        0, -1, 1, -10, -20, conductor=11, tamagawa_product=5,
        label="11a1", mod_p_surjective=(7,),
    ).validate()


@pytest.fixture(scope="session")
def e37():
    return CurveData(
        0, 0, 1, -1, 0, conductor=37, tamagawa_product=1,
        label="37a1", mod_p_surjective=(5,),
    ).validate()


@pytest.fixture(scope="session")
def space11():
    return build_space(11)


@pytest.fixture(scope="session")
def space37():
    return build_space(37)


@pytest.fixture(scope="session")
def sym11(space11, e11):
    return extract_eigensymbol(space11, e11)


@pytest.fixture(scope="session")
def sym37(space37, e37):
    return extract_eigensymbol(space37, e37)
