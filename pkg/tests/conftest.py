import pytest

from cqmkit import ChoiceSpec, build_model, load_menu, parse_bound, to_qubo

# Filled by test_acceptance.py; printed at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def menu():
    return load_menu()


def _menu_model(catalog, limit):
    return build_model(catalog, ChoiceSpec("price", "minimize", (parse_bound(f"calories<={limit}"),)))


@pytest.fixture(scope="session")
def menu_model(menu):
    return _menu_model(menu, 700)


@pytest.fixture(scope="session")
def menu_model_500(menu):
    return _menu_model(menu, 500)


@pytest.fixture(scope="session")
def menu_qubo(menu_model):
    return to_qubo(menu_model)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
