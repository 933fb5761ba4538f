import os

import pytest

from foalt.automaton import Foaa, parse

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "corpus")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def load(name: str) -> Foaa:
    with open(corpus_path(name)) as f:
        return parse(f.read())


@pytest.fixture
def example1() -> Foaa:
    return load("example1.foaa")


@pytest.fixture
def nonempty() -> Foaa:
    return load("nonempty.foaa")


@pytest.fixture
def chain() -> Foaa:
    return load("chain.foaa")


@pytest.fixture
def eqpair() -> Foaa:
    return load("eqpair.foaa")
