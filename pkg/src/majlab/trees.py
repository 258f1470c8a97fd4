"""Rooted trees and graph views for synchronous majority dynamics.

Hosts are finite undirected graphs in which every vertex has odd degree, so
a majority among neighbours is always strict.  Generated trees use dense
0-based vertex ids assigned in BFS order from the root, which keeps each
vertex's children contiguous; loaded trees keep the ids given in the file.

Vertex classification counts degree-1 neighbours ("pendant" vertices)
against the threshold (deg - 1) / 2 and is independent of the root choice.
"""

from __future__ import annotations

import re
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import (
    BadVertexError,
    DegreeParityError,
    NotATreeError,
    TooSmallError,
    TreeFormatError,
)

_HEADER_RE = re.compile(r"^tree\s+n=(\d+)\s+root=(\d+)\s*$")


class VertexClass(IntEnum):
    """Behavioural class of a vertex under majority dynamics.

    ACTIVE:  fewer than (deg - 1) / 2 pendant neighbours.
    BALKY:   exactly (deg - 1) / 2 pendant neighbours (every leaf of a tree
             with at least 3 vertices is balky).
    PASSIVE: more than (deg - 1) / 2 pendant neighbours; such vertices are
             0-stationary under every initial opinion vector.

    Values match the int8 codes produced by :func:`classify_all`, so the
    members compare directly against those arrays.
    """

    ACTIVE = 0
    BALKY = 1
    PASSIVE = 2

    @property
    def label(self) -> str:
        return self.name.lower()


def _build_csr(n: int, src: np.ndarray, dst: np.ndarray):
    """CSR adjacency with neighbour lists sorted ascending (deterministic)."""
    order = np.lexsort((dst, src))
    flat = np.ascontiguousarray(dst[order], dtype=np.int32)
    degree = np.bincount(src, minlength=n).astype(np.int32)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degree, out=offsets[1:])
    return flat, offsets, degree


def _check_odd_degrees(degree: np.ndarray) -> None:
    even = np.flatnonzero(degree % 2 == 0)
    if even.size:
        v = int(even[0])
        raise DegreeParityError(
            f"vertex {v} has even degree {int(degree[v])}; all degrees must be odd"
        )


class GraphView:
    """Undirected odd-degree graph in CSR form.

    Rejects self-loops, parallel edges, and even degrees.  Connectivity is
    not required; the dynamics engine is well defined per component.
    """

    __slots__ = ("n", "adj_flat", "adj_offsets", "degree")

    def __init__(self, n: int, adj_flat, adj_offsets, degree):
        self.n = n
        self.adj_flat = adj_flat
        self.adj_offsets = adj_offsets
        self.degree = degree

    @classmethod
    def from_edges(cls, n: int, edges) -> "GraphView":
        src, dst = _validated_edge_arrays(n, edges)
        flat, offsets, degree = _build_csr(n, src, dst)
        _check_odd_degrees(degree)
        return cls(n, flat, offsets, degree)

    def neighbours(self, v: int) -> np.ndarray:
        return self.adj_flat[self.adj_offsets[v] : self.adj_offsets[v + 1]]

    @property
    def edge_count(self) -> int:
        return int(self.adj_flat.size // 2)

    def __repr__(self) -> str:
        return f"GraphView(n={self.n}, m={self.edge_count})"


def _validated_edge_arrays(n: int, edges):
    pairs = [(int(u), int(v)) for u, v in edges]
    for u, v in pairs:
        if not (0 <= u < n and 0 <= v < n):
            raise TreeFormatError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise TreeFormatError(f"self-loop at vertex {u}")
    normalized = {(min(u, v), max(u, v)) for u, v in pairs}
    if len(normalized) != len(pairs):
        raise TreeFormatError("parallel edge in input")
    src = np.fromiter((u for u, _ in pairs), dtype=np.int64, count=len(pairs))
    dst = np.fromiter((v for _, v in pairs), dtype=np.int64, count=len(pairs))
    return np.concatenate([src, dst]), np.concatenate([dst, src])


class RootedTree:
    """A rooted odd-degree tree with precomputed structure arrays.

    Attributes
    ----------
    n, root : int
    parent : np.ndarray
        Parent id per vertex, -1 at the root.
    order : np.ndarray
        BFS order from the root; parents precede children.
    depth, height, degree : np.ndarray
        ``height[v]`` is the distance from v to the farthest leaf inside the
        subtree of v (0 exactly at childless vertices).
    diameter : int
        Eagerly computed with two BFS passes.
    """

    __slots__ = (
        "n",
        "root",
        "parent",
        "order",
        "depth",
        "height",
        "degree",
        "adj_flat",
        "adj_offsets",
        "child_flat",
        "child_offsets",
        "diameter",
    )

    def __init__(self, **fields):
        for name in RootedTree.__slots__:
            setattr(self, name, fields[name])

    # -- constructors -------------------------------------------------

    @classmethod
    def from_edges(cls, edges, root: int = 0, n: int | None = None) -> "RootedTree":
        edges = list(edges)
        if n is None:
            n = max((max(u, v) for u, v in edges), default=-1) + 1
            n = max(n, root + 1)
        if len(edges) != n - 1:
            raise NotATreeError(f"expected {n - 1} edges for n={n}, got {len(edges)}")
        if not (0 <= root < n):
            raise BadVertexError(f"root {root} out of range for n={n}")
        src, dst = _validated_edge_arrays(n, edges)
        adj_flat, adj_offsets, degree = _build_csr(n, src, dst)
        _check_odd_degrees(degree)
        parent, order = _bfs_tree(n, adj_flat, adj_offsets, root)
        if order.size != n:
            raise NotATreeError("input is disconnected")
        return cls._finish(n, root, parent, order, adj_flat, adj_offsets, degree)

    @classmethod
    def _finish(cls, n, root, parent, order, adj_flat, adj_offsets, degree,
                depth=None, height=None, diameter=None):
        if depth is None or height is None:
            depth = np.zeros(n, dtype=np.int32)
            height = np.zeros(n, dtype=np.int32)
            for v in order[1:]:
                depth[v] = depth[parent[v]] + 1
            for v in order[::-1]:
                p = parent[v]
                if p >= 0 and height[v] + 1 > height[p]:
                    height[p] = height[v] + 1
        child_flat, child_offsets = _child_csr(n, parent, root)
        if diameter is None:
            diameter = _tree_diameter(n, adj_flat, adj_offsets, root)
        return cls(
            n=n, root=root, parent=parent, order=order, depth=depth,
            height=height, degree=degree, adj_flat=adj_flat,
            adj_offsets=adj_offsets, child_flat=child_flat,
            child_offsets=child_offsets, diameter=int(diameter),
        )

    # -- structure accessors -------------------------------------------

    def neighbours(self, v: int) -> np.ndarray:
        return self.adj_flat[self.adj_offsets[v] : self.adj_offsets[v + 1]]

    def children(self, v: int) -> np.ndarray:
        return self.child_flat[self.child_offsets[v] : self.child_offsets[v + 1]]

    def is_leaf(self, v: int) -> bool:
        """True iff v has no children (height 0)."""
        return self.child_offsets[v] == self.child_offsets[v + 1]

    @property
    def pendant(self) -> np.ndarray:
        """Degree-1 vertices; the root-independent notion of 'leaf'."""
        return self.degree == 1

    @property
    def edge_count(self) -> int:
        return self.n - 1

    def subtree_mask(self, v: int) -> np.ndarray:
        """Boolean membership mask of the subtree rooted at v."""
        mask = np.zeros(self.n, dtype=bool)
        stack = [int(v)]
        while stack:
            u = stack.pop()
            mask[u] = True
            stack.extend(int(c) for c in self.children(u))
        return mask

    def edges(self) -> list[tuple[int, int]]:
        """Parent edges (parent, child) with children in BFS order."""
        out = []
        for v in self.order[1:]:
            out.append((int(self.parent[v]), int(v)))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, RootedTree):
            return NotImplemented
        if self.n != other.n or self.root != other.root:
            return False
        mine = {(min(u, v), max(u, v)) for u, v in self.edges()}
        theirs = {(min(u, v), max(u, v)) for u, v in other.edges()}
        return mine == theirs

    __hash__ = None

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, root={self.root}, diameter={self.diameter})"


def _bfs_tree(n, adj_flat, adj_offsets, root):
    parent = np.full(n, -1, dtype=np.int32)
    order = np.empty(n, dtype=np.int32)
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    order[0] = root
    head, tail = 0, 1
    while head < tail:
        v = int(order[head])
        head += 1
        for u in adj_flat[adj_offsets[v] : adj_offsets[v + 1]]:
            u = int(u)
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                order[tail] = u
                tail += 1
    return parent, order[:tail]


def _child_csr(n, parent, root):
    kids = np.flatnonzero(parent >= 0).astype(np.int64)
    by = np.lexsort((kids, parent[kids]))
    child_flat = kids[by].astype(np.int32)
    counts = np.bincount(parent[kids], minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return child_flat, offsets


def _bfs_distances(n, adj_flat, adj_offsets, src):
    dist = np.full(n, -1, dtype=np.int64)
    dist[src] = 0
    frontier = np.array([src], dtype=np.int64)
    while frontier.size:
        nxt = []
        for v in frontier:
            v = int(v)
            for u in adj_flat[adj_offsets[v] : adj_offsets[v + 1]]:
                u = int(u)
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = np.array(nxt, dtype=np.int64)
    return dist

def _tree_diameter(n, adj_flat, adj_offsets, root):
    d0 = _bfs_distances(n, adj_flat, adj_offsets, root)
    a = int(np.argmax(d0))
    d1 = _bfs_distances(n, adj_flat, adj_offsets, a)
    return int(d1.max())


def build_perfect_tree(k: int, h: int) -> RootedTree:
    """Perfect tree of branching factor k and height h.

    The root has k + 1 children and every other internal vertex has k, so
    every internal degree is k + 1 (odd exactly when k is even) and all
    leaves sit at depth h.  Vertex count: 1 + (k + 1) (k^h - 1) / (k - 1).
    """
    if k < 2 or k % 2 != 0:
        raise DegreeParityError(f"branching factor must be even and >= 2, got {k}")
    if h < 1:
        raise TooSmallError(f"height must be >= 1, got {h}")
    level_sizes = [1] + [(k + 1) * k ** (d - 1) for d in range(1, h + 1)]
    starts = np.concatenate([[0], np.cumsum(level_sizes)]).astype(np.int64)
    n = int(starts[-1])
    parent = np.full(n, -1, dtype=np.int32)
    depth = np.zeros(n, dtype=np.int32)
    parent[1 : starts[2]] = 0
    depth[1 : starts[2]] = 1
    for d in range(2, h + 1):
        lo, hi = starts[d], starts[d + 1]
        j = np.arange(hi - lo, dtype=np.int64)
        parent[lo:hi] = starts[d - 1] + j // k
        depth[lo:hi] = d
    kids = np.arange(1, n, dtype=np.int64)
    src = np.concatenate([kids, parent[kids]])
    dst = np.concatenate([parent[kids], kids])
    adj_flat, adj_offsets, degree = _build_csr(n, src, dst)
    order = np.arange(n, dtype=np.int32)
    height = (h - depth).astype(np.int32)
    return RootedTree._finish(
        n, 0, parent, order, adj_flat, adj_offsets, degree,
        depth=depth, height=height, diameter=2 * h if n > 1 else 0,
    )


def reroot(tree: RootedTree, new_root: int) -> RootedTree:
    """Same tree (same ids and edges), re-rooted by a BFS from new_root."""
    if not (0 <= new_root < tree.n):
        raise BadVertexError(f"root {new_root} out of range for n={tree.n}")
    parent, order = _bfs_tree(tree.n, tree.adj_flat, tree.adj_offsets, new_root)
    return RootedTree._finish(
        tree.n, new_root, parent, order, tree.adj_flat, tree.adj_offsets,
        tree.degree, diameter=tree.diameter,
    )


# -- vertex classification ---------------------------------------------


def pendant_neighbour_counts(host) -> np.ndarray:
    """Number of degree-1 neighbours per vertex."""
    pend = (host.degree == 1).astype(np.int64)
    gathered = pend[host.adj_flat]
    return np.add.reduceat(gathered, host.adj_offsets[:-1])


def classify_all(host) -> np.ndarray:
    """Class per vertex as an int8 array: 0 ACTIVE, 1 BALKY, 2 PASSIVE."""
    counts = pendant_neighbour_counts(host)
    threshold = (host.degree.astype(np.int64) - 1) // 2
    codes = np.full(host.n, 1, dtype=np.int8)
    codes[counts < threshold] = 0
    codes[counts > threshold] = 2
    return codes


_CLASS_BY_CODE = (VertexClass.ACTIVE, VertexClass.BALKY, VertexClass.PASSIVE)


def classify_vertex(host, v: int) -> VertexClass:
    if not (0 <= v < host.n):
        raise BadVertexError(f"vertex {v} out of range for n={host.n}")
    return _CLASS_BY_CODE[classify_all(host)[v]]


# -- text format ----------------------------------------------------------


def tree_to_text(tree: RootedTree, header_comments: list[str] | None = None) -> str:
    lines = [f"# {c}" for c in (header_comments or [])]
    lines.append(f"tree n={tree.n} root={tree.root}")
    lines.extend(f"{u} {v}" for u, v in tree.edges())
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> RootedTree:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lines.append((lineno, stripped))
    if not lines:
        raise TreeFormatError("empty tree file")
    lineno, header = lines[0]
    m = _HEADER_RE.match(header)
    if not m:
        raise TreeFormatError(f"line {lineno}: expected 'tree n=<N> root=<R>'")
    n, root = int(m.group(1)), int(m.group(2))
    if len(lines) - 1 != n - 1:
        raise NotATreeError(
            f"expected {n - 1} edge lines for n={n}, got {len(lines) - 1}"
        )
    edges = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise TreeFormatError(f"line {lineno}: expected '<u> <v>'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise TreeFormatError(f"line {lineno}: non-integer vertex id") from None
    return RootedTree.from_edges(edges, root=root, n=n)


def save_tree(tree: RootedTree, path, header_comments: list[str] | None = None) -> None:
    Path(path).write_text(tree_to_text(tree, header_comments))


def load_tree(path) -> RootedTree:
    return tree_from_text(Path(path).read_text())
