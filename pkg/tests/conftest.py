import numpy as np
import pytest

from clusterbfs.generators import erdos_renyi, preferential_attachment
from clusterbfs.graph import from_arcs

# acceptance criterion number -> one-line verdict, echoed in the terminal summary
VERDICTS: dict[int, str] = {}


def record(criterion: int, ok: bool | None, detail: str) -> None:
    status = "PASS" if ok else ("SKIP" if ok is None else "FAIL")
    VERDICTS[criterion] = f"criterion {criterion:2d}: {status}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[key])


def random_graph(seed: int, n: int | None = None, kind: str | None = None):
    """ER (average degree 4-16) or preferential-attachment graph, chosen by seed."""
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(10, 400))
    kind = kind or ("er" if seed % 2 == 0 else "pa")
    if kind == "er":
        return erdos_renyi(n, float(rng.uniform(4, 16)), seed)
    return preferential_attachment(n, int(rng.integers(2, 8)), seed)


def disconnected_graph(seed: int, n: int):
    """Union of a few random pieces plus isolated vertices."""
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(3, n - 1), replace=False))
    bounds = [0, *cuts.tolist(), n]
    src, dst = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        size = b - a
        if size < 2:
            continue
        m = int(size * rng.uniform(0.6, 3))
        src.append(rng.integers(a, b, m))
        dst.append(rng.integers(a, b, m))
    if not src:
        return from_arcs(n, [], [])
    return from_arcs(n, np.concatenate(src), np.concatenate(dst))


@pytest.fixture
def cycle_tail():
    """4-cycle 0-1-2-3 plus vertex 4 joined to 1 and 3."""
    return from_arcs(5, [0, 1, 2, 3, 4, 4], [1, 2, 3, 0, 1, 3])
