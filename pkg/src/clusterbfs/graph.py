"""Immutable CSR graph, edge-list ingestion and the binary graph cache."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GRAPH_MAGIC = b"CBFSG001"


class GraphFormatError(ValueError):
    """Raised when an edge list or graph cache cannot be parsed."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Compressed adjacency with out- and in-neighbor access.

    ``m`` counts directed arcs, so an undirected edge contributes two.
    For symmetric graphs the ``in_*`` arrays are the same objects as ``out_*``.
    """

    n: int
    m: int
    out_offsets: np.ndarray
    out_targets: np.ndarray
    in_offsets: np.ndarray
    in_targets: np.ndarray
    symmetric: bool

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_offsets)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_offsets)

    def neighbors(self, v: int) -> np.ndarray:
        return self.out_targets[self.out_offsets[v]:self.out_offsets[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.in_targets[self.in_offsets[v]:self.in_offsets[v + 1]]

    def arcs(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (sources, targets) of every arc in CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int32), self.out_degree())
        return src, self.out_targets.copy()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and self.symmetric == other.symmetric
            and np.array_equal(self.out_offsets, other.out_offsets)
            and np.array_equal(self.out_targets, other.out_targets)
            and np.array_equal(self.in_offsets, other.in_offsets)
            and np.array_equal(self.in_targets, other.in_targets)
        )

    def __repr__(self) -> str:
        kind = "symmetric" if self.symmetric else "directed"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # src/dst must already be sorted by (src, dst) and deduplicated
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    return offsets, dst.astype(np.int32, copy=True)


def from_arcs(n: int, src, dst, directed: bool = False) -> Graph:
    """Build a simple graph on ``n`` vertices from parallel arc arrays.

    Self-loops are dropped, duplicates removed, and the arc set is
    symmetrized unless ``directed``.
    """
    src = np.asarray(src, dtype=np.int64).ravel()
    dst = np.asarray(dst, dtype=np.int64).ravel()
    if src.shape != dst.shape:
        raise ValueError("src and dst must have equal length")
    if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
        raise ValueError("arc endpoint out of range [0, n)")
    keep = src != dst
    src, dst = src[keep], dst[keep]
    if not directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    keys = np.unique(src * n + dst) if src.size else np.empty(0, dtype=np.int64)
    s, t = keys // max(n, 1), keys % max(n, 1)
    out_offsets, out_targets = _csr(n, s, t)
    if not directed:
        return Graph(n, int(keys.size), out_offsets, out_targets, out_offsets, out_targets, True)
    rkeys = np.sort(t * n + s)
    in_offsets, in_targets = _csr(n, rkeys // max(n, 1), rkeys % max(n, 1))
    return Graph(n, int(keys.size), out_offsets, out_targets, in_offsets, in_targets, False)


def load_edge_list(path, directed: bool = False) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` and blank lines are skipped. Vertex IDs are
    remapped to ``0..n-1`` in order of first appearance.
    """
    ids: dict[int, int] = {}
    src: list[int] = []
    dst: list[int] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2 or not (parts[0].isdigit() and parts[1].isdigit()):
                raise GraphFormatError(f"{path}:{lineno}: expected two non-negative integer IDs, got {text!r}")
            u = ids.setdefault(int(parts[0]), len(ids))
            v = ids.setdefault(int(parts[1]), len(ids))
            src.append(u)
            dst.append(v)
    return from_arcs(len(ids), src, dst, directed=directed)


def write_edge_list(g: Graph, path) -> None:
    """Write ``g`` so that ``load_edge_list`` rebuilds it exactly.

    Symmetric graphs emit each edge once. A vertex whose ID would otherwise
    be introduced out of order (or never, if isolated) is registered with a
    ``v v`` line, which the loader drops as a self-loop after assigning the ID.
    """
    src, dst = g.arcs()
    if g.symmetric:
        keep = src < dst
        src, dst = src[keep], dst[keep]
    lines = [f"# n={g.n} m={g.m} {'undirected' if g.symmetric else 'directed'}"]
    introduced = 0
    for u, v in zip(src.tolist(), dst.tolist()):
        hi = max(u, v)
        while introduced < hi:
            lines.append(f"{introduced} {introduced}")
            introduced += 1
        lines.append(f"{u} {v}")
        introduced = max(introduced, hi + 1)
    while introduced < g.n:
        lines.append(f"{introduced} {introduced}")
        introduced += 1
    Path(path).write_text("\n".join(lines) + "\n")


def save_graph(g: Graph, path) -> None:
    """Write the binary cache (magic, n, m, symmetric flag, CSR arrays)."""
    with open(path, "wb") as fh:
        fh.write(GRAPH_MAGIC)
        fh.write(struct.pack("<QQQ", g.n, g.m, 1 if g.symmetric else 0))
        fh.write(g.out_offsets.astype("<u8").tobytes())
        fh.write(g.out_targets.astype("<u4").tobytes())
        if not g.symmetric:
            fh.write(g.in_offsets.astype("<u8").tobytes())
            fh.write(g.in_targets.astype("<u4").tobytes())


def load_graph(path) -> Graph:
    data = Path(path).read_bytes()
    if data[:8] != GRAPH_MAGIC:
        raise GraphFormatError(f"{path}: not a graph cache (bad magic)")
    try:
        n, m, sym = struct.unpack_from("<QQQ", data, 8)
        pos = 32

        def take(dtype, count):
            nonlocal pos
            arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
            pos += arr.nbytes
            return arr

        out_offsets = take("<u8", n + 1).astype(np.int64)
        out_targets = take("<u4", m).astype(np.int32)
        if sym:
            in_offsets, in_targets = out_offsets, out_targets
        else:
            in_offsets = take("<u8", n + 1).astype(np.int64)
            in_targets = take("<u4", m).astype(np.int32)
    except (ValueError, struct.error) as exc:
        raise GraphFormatError(f"{path}: truncated graph cache") from exc
    if pos != len(data):
        raise GraphFormatError(f"{path}: trailing bytes in graph cache")
    return Graph(int(n), int(m), out_offsets, out_targets, in_offsets, in_targets, bool(sym))


def read_graph(path, directed: bool = False) -> Graph:
    """Load either a binary cache (detected by magic) or a text edge list."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head == GRAPH_MAGIC:
        return load_graph(path)
    return load_edge_list(path, directed=directed)


def order_by_degree(g: Graph) -> np.ndarray:
    """Vertices by out-degree descending, ties by ascending ID."""
    return np.lexsort((np.arange(g.n), -g.out_degree())).astype(np.int32)


@dataclass
class Diagnostics:
    ok: bool
    violation: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _check_half(n, m, offsets, targets, label):
    offsets = np.asarray(offsets)
    targets = np.asarray(targets)
    if offsets.shape != (n + 1,) or targets.shape != (m,):
        return Diagnostics(False, "shape mismatch", f"{label} arrays have wrong length")
    if offsets[0] != 0 or offsets[n] != m:
        return Diagnostics(False, "offset/arc mismatch", f"{label}_offsets[0]={offsets[0]}, [n]={offsets[n]}, m={m}")
    if np.any(np.diff(offsets) < 0):
        return Diagnostics(False, "offsets decreasing", label)
    if m and (targets.min() < 0 or targets.max() >= n):
        return Diagnostics(False, "target out of range", label)
    src = np.repeat(np.arange(n), np.diff(offsets))
    same_row = src[1:] == src[:-1]
    if np.any(same_row & (targets[1:] <= targets[:-1])):
        return Diagnostics(False, "unsorted or duplicate neighbors", label)
    if np.any(src == targets):
        return Diagnostics(False, "self-loop", label)
    return None


def validate(g: Graph) -> Diagnostics:
    """Check every Graph invariant; report the first violation."""
    bad = _check_half(g.n, g.m, g.out_offsets, g.out_targets, "out")
    if bad is not None:
        return bad
    bad = _check_half(g.n, g.m, g.in_offsets, g.in_targets, "in")
    if bad is not None:
        return bad
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.out_offsets))
    fwd = np.sort(src * g.n + g.out_targets)
    if g.symmetric:
        rev = np.sort(g.out_targets.astype(np.int64) * g.n + src)
        if not np.array_equal(fwd, rev):
            return Diagnostics(False, "asymmetric arc", "symmetric flag set but reverse arc missing")
    else:
        isrc = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.in_offsets))
        rev = np.sort(g.in_targets.astype(np.int64) * g.n + isrc)
        if not np.array_equal(fwd, rev):
            return Diagnostics(False, "in/out mismatch", "in-adjacency is not the reverse of out-adjacency")
    return Diagnostics(True)
