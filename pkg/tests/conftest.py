import pytest

import boxlab as bl

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def record_criterion():
    def record(number: int, description: str, ok: bool):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {description}"
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return record


def cyclic_chain(*moduli_per_level, rank: int = 1) -> bl.GroupChain:
    ambient = bl.AmbientGroup("free_abelian", rank)
    levels = []
    for moduli in moduli_per_level:
        if isinstance(moduli, int):
            moduli = [moduli] * rank
        levels.append(bl.CyclicQuotient(list(moduli)))
    return bl.build_chain(ambient, levels)


@pytest.fixture(scope="session")
def make_chain():
    return cyclic_chain


@pytest.fixture(scope="session")
def dyadic_chain():
    # Z -> Z/4 -> Z/8 -> Z/16
    return cyclic_chain(4, 8, 16)


@pytest.fixture(scope="session")
def dyadic_space(dyadic_chain):
    return bl.assemble_box_space(dyadic_chain)


@pytest.fixture(scope="session")
def deep_chain():
    # Z -> Z/2 -> ... -> Z/64
    return cyclic_chain(2, 4, 8, 16, 32, 64)


@pytest.fixture(scope="session")
def deep_space(deep_chain):
    return bl.assemble_box_space(deep_chain)


@pytest.fixture(scope="session")
def torus_chain():
    # Z^2 -> (Z/4)^2 -> (Z/8)^2 -> (Z/16)^2
    return cyclic_chain(4, 8, 16, rank=2)
