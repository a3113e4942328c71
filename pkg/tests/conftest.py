import io

import pytest

from ewlkernel.graph import Dataset, Graph, LabelInterner, parse_gtx

FIG1_GTX = "g 0\nn 0 s\nn 1 b\nn 2 e\nn 3 d\ne 0 1\ne 0 2\ne 1 2\ne 1 3\ne 2 3\n"


def gtx(text: str) -> Dataset:
    return parse_gtx(io.StringIO(text))


def cycle(n: int, label: int = 0) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)]


def labelled(edges, labels) -> Graph:
    return Graph.from_edges(list(labels), edges)


@pytest.fixture
def fig1() -> Dataset:
    return gtx(FIG1_GTX)


@pytest.fixture
def c6_vs_two_triangles() -> Dataset:
    c6 = Graph.from_edges([0] * 6, cycle(6))
    tt = Graph.from_edges([0] * 6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    return Dataset((c6, tt), LabelInterner(["x"]), graph_ids=("c6", "2c3"))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
