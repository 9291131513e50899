import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polyterm import parse_program, parse_query_spec

CORPUS = Path(__file__).parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


def load(name: str):
    program = parse_program((CORPUS / name).read_text())
    queries = parse_query_spec(program.annotations, program)
    return program, queries


@pytest.fixture(scope="session")
def der():
    return load("der.pl")


@pytest.fixture(scope="session")
def div():
    return load("div.pl")


@pytest.fixture(scope="session")
def ackermann():
    return load("ackermann.pl")
