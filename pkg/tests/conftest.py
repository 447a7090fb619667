import pathlib

import pytest

from relres.spec_model import parse_suite

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return parse_suite((CORPUS / name).read_text())


@pytest.fixture(scope="session")
def acc():
    return load("acc.spec")


@pytest.fixture(scope="session")
def ngc():
    return load("ngc.spec")


# reference ACC option shapes, as cycle tuples in row order
ACC_R1_SHAPES = {"1A": (1, 1, 2, 2), "1B": (1, 1, 3, 3),
                 "1C": (2, 2, 3, 3), "1D": (2, 2, 4, 4)}
ACC_R2_SHAPES = {"2A": (1, 2, 3, 2, 3, 4), "2B": (1, 2, 3, 3, 4, 5),
                 "2C": (1, 2, 3, 4, 5, 6), "2D": (2, 3, 4, 3, 4, 5),
                 "2E": (2, 3, 4, 4, 5, 6), "2F": (3, 4, 5, 4, 5, 6)}
