import pytest

from qdisc import datasets

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def iris_csv_text():
    return datasets.bundled_iris_csv()


@pytest.fixture(scope="session")
def iris_csv_path(tmp_path_factory, iris_csv_text):
    path = tmp_path_factory.mktemp("data") / "iris.csv"
    path.write_text(iris_csv_text, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def iris_data(iris_csv_text):
    return datasets.load_iris(iris_csv_text)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
