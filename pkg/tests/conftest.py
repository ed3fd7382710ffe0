import pathlib

import pytest

from finmod.parser import parse

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> pathlib.Path:
    return CORPUS


def load_formula(name: str):
    return parse((CORPUS / f"{name}.fol").read_text())


@pytest.fixture(scope="session")
def quadratic_depth():
    return load_formula("quadratic_depth")


@pytest.fixture(scope="session")
def linear_inflationary():
    return load_formula("linear_inflationary")


@pytest.fixture(scope="session")
def twin_counters():
    return load_formula("twin_counters")


@pytest.fixture(scope="session")
def staggered_counters():
    return load_formula("staggered_counters")


@pytest.fixture(scope="session")
def toggle_and_fill():
    return load_formula("toggle_and_fill")


@pytest.fixture(scope="session")
def threshold_counters():
    return load_formula("threshold_counters")


@pytest.fixture(scope="session")
def reachability():
    return load_formula("reachability")


@pytest.fixture(scope="session")
def reachability_doubling():
    return load_formula("reachability_doubling")


@pytest.fixture(scope="session")
def alternating_reachability():
    return load_formula("alternating_reachability")
