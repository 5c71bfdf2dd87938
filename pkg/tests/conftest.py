import pytest

from ddquiver import canonical_setup
from ddquiver.corpus import corpus_algebras, free_tensor, kronecker_tensor

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def corpus():
    return corpus_algebras()


@pytest.fixture(scope="session")
def setups(corpus):
    return {name: canonical_setup(A) for name, A in corpus.items()}


@pytest.fixture(scope="session")
def tensor_setups():
    return {"free2-tensor": canonical_setup(free_tensor(5)),
            "kronecker-tensor": canonical_setup(kronecker_tensor(4))}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
