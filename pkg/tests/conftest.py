from pathlib import Path

import pytest

from moelab import Cyclic, DirectPower, FiniteTable, Free, FreeProduct

DATA = Path(__file__).parent / "data"


def table(name):
    return FiniteTable.from_json(DATA / f"{name}.json")


def corpus():
    """Small groups with generating sets, labelled for test ids."""
    out = {}
    for n in range(2, 10):
        out[f"Z{n}"] = Cyclic(n)
    out["Z4[1,2,3]"] = Cyclic(4, (1, 2, 3))
    out["Z4[1,2]"] = Cyclic(4, (1, 2))
    out["Z6[2,3]"] = Cyclic(6, (2, 3))
    out["Z7[1,2]"] = Cyclic(7, (1, 2))
    out["Z8[1,3]"] = Cyclic(8, (1, 3))
    out["Z11[1,3]"] = Cyclic(11, (1, 3))
    out["Z13[1,5]"] = Cyclic(13, (1, 5))
    out["Z3^2"] = DirectPower(Cyclic(3), 2)
    out["Z5^2"] = DirectPower(Cyclic(5), 2)
    out["Z2^3"] = DirectPower(Cyclic(2), 3)
    for name in ("s3_transposition_cycle", "s3_two_transpositions", "d4", "d5", "a4", "klein", "q8"):
        out[name] = table(name)
    return out


CORPUS = corpus()

FREE_PRODUCTS = {
    "Z5*Z5": FreeProduct(((Cyclic(5), 2),)),
    "Z3*Z4": FreeProduct(((Cyclic(3), 1), (Cyclic(4), 1))),
    "Z4[1,2,3]*Z5": FreeProduct(((Cyclic(4, (1, 2, 3)), 1), (Cyclic(5), 1))),
    "Z5*F2": FreeProduct(((Cyclic(5), 2), (Free(2), 1))),
    "Z6[2,3]*Z7[1,2]": FreeProduct(((Cyclic(6, (2, 3)), 1), (Cyclic(7, (1, 2)), 1))),
    "S3*Z3": FreeProduct(((table("s3_transposition_cycle"), 1), (Cyclic(3), 1))),
}


@pytest.fixture(params=sorted(CORPUS), ids=sorted(CORPUS))
def small_group(request):
    return CORPUS[request.param]


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[0].split("[")[1])):
            terminalreporter.write_line(line)
