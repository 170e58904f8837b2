"""Graph and pattern representations, canonical forms and generators.

Vertices are 0-indexed everywhere. Edge-labeled multigraphs carry their
labels positionally: edge ``p`` of ``edge_list`` has label ``p + 1``.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

CanonicalCode = bytes


class GraphFormatError(ValueError):
    """Malformed edge-list document or invalid graph data."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(RuntimeError):
    pass


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SimpleGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    declared_degree_bound: int | None = None
    _adj: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise GraphFormatError(f"negative vertex count {self.n}")
        normed = []
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise GraphFormatError(f"loop at vertex {u}")
            normed.append(_norm(u, v))
        normed.sort()
        for a, b in zip(normed, normed[1:]):
            if a == b:
                raise GraphFormatError(f"duplicate edge {a}")
        object.__setattr__(self, "edges", tuple(normed))
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in normed:
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))
        D = self.declared_degree_bound
        if D is not None:
            if D < 1:
                raise GraphFormatError("declared degree bound must be positive")
            if self.max_degree > D:
                raise GraphFormatError(f"max degree {self.max_degree} exceeds declared bound {D}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    @property
    def degree_bound(self) -> int:
        """Declared bound if any, else the observed maximum degree."""
        if self.declared_degree_bound is not None:
            return self.declared_degree_bound
        return self.max_degree

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        return len(bfs_distances(self, 0)) == self.n

    def induced_subgraph(self, vertices) -> tuple["SimpleGraph", dict[int, int]]:
        verts = sorted(vertices)
        index = {v: i for i, v in enumerate(verts)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return SimpleGraph(len(verts), tuple(edges)), index


@dataclass(frozen=True)
class EdgeLabeledMultigraph:
    """Loop-free multigraph whose ``l`` edges are labeled by position."""

    m: int
    edge_list: tuple[tuple[int, int], ...]

    def __post_init__(self):
        normed = []
        for u, v in self.edge_list:
            if not (0 <= u < self.m and 0 <= v < self.m):
                raise ValueError(f"edge ({u}, {v}) out of range for {self.m} vertices")
            if u == v:
                raise ValueError("edge-labeled multigraphs are loop-free")
            normed.append(_norm(u, v))
        object.__setattr__(self, "edge_list", tuple(normed))

    @property
    def l(self) -> int:
        return len(self.edge_list)

    def incident_labels(self) -> list[tuple[int, ...]]:
        inc: list[list[int]] = [[] for _ in range(self.m)]
        for p, (u, v) in enumerate(self.edge_list, start=1):
            inc[u].append(p)
            inc[v].append(p)
        return [tuple(x) for x in inc]

    def has_isolated_vertices(self) -> bool:
        return any(not s for s in self.incident_labels())

    @property
    def non_isolated(self) -> int:
        return sum(1 for s in self.incident_labels() if s)

    def components(self) -> list[list[int]]:
        """Edge-label groups (0-based positions) of the connected components."""
        parent = list(range(self.m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edge_list:
            parent[find(u)] = find(v)
        groups: dict[int, list[int]] = {}
        for p, (u, _) in enumerate(self.edge_list):
            groups.setdefault(find(u), []).append(p)
        return sorted(groups.values())

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def edge_subgraph(self, positions) -> "EdgeLabeledMultigraph":
        """Edges at the given 0-based positions, relabeled 1.. in the given order,
        on the vertices they touch."""
        chosen = [self.edge_list[p] for p in positions]
        verts = sorted({x for e in chosen for x in e})
        index = {v: i for i, v in enumerate(verts)}
        return EdgeLabeledMultigraph(len(verts), tuple((index[u], index[v]) for u, v in chosen))

    def simple_reduction(self) -> SimpleGraph:
        """Underlying simple graph with parallel edges merged."""
        return SimpleGraph(self.m, tuple(set(self.edge_list)))

    def canonical(self) -> "EdgeLabeledMultigraph":
        return pattern_from_code(canonical_form(self))


@dataclass(frozen=True)
class WeightedTarget:
    k: int
    vertex_weights: tuple
    edge_weights: tuple

    def __post_init__(self):
        vw = tuple(self.vertex_weights)
        ew = tuple(tuple(row) for row in self.edge_weights)
        if len(vw) != self.k or len(ew) != self.k or any(len(r) != self.k for r in ew):
            raise ValueError("weight dimensions do not match k")
        if any(not w > 0 for w in vw):
            raise ValueError("vertex weights must be positive")
        for i in range(self.k):
            for j in range(self.k):
                if ew[i][j] < 0:
                    raise ValueError("edge weights must be nonnegative")
                if ew[i][j] != ew[j][i]:
                    raise ValueError(f"edge weights not symmetric at ({i}, {j})")
        object.__setattr__(self, "vertex_weights", vw)
        object.__setattr__(self, "edge_weights", ew)

    @property
    def soft_core(self) -> bool:
        return all(w > 0 for row in self.edge_weights for w in row)


@dataclass(frozen=True)
class RootedBall:
    graph: SimpleGraph
    root: int
    radius: int

    def __post_init__(self):
        dist = bfs_distances(self.graph, self.root)
        if len(dist) != self.graph.n or max(dist.values()) > self.radius:
            raise ValueError("ball contains vertices beyond its radius")


# -- parsing ---------------------------------------------------------------


def parse_graph(text: str, degree_bound: int | None = None) -> SimpleGraph:
    header = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise GraphFormatError(f"non-integer token in {line!r}", lineno) from None
        if len(nums) != 2:
            raise GraphFormatError(f"expected two integers, got {len(nums)}", lineno)
        if header is None:
            if nums[0] < 0 or nums[1] < 0:
                raise GraphFormatError("negative header value", lineno)
            header = nums
            continue
        u, v = nums
        n = header[0]
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex index out of range 0..{n - 1}", lineno)
        if u == v:
            raise GraphFormatError(f"loop at vertex {u}", lineno)
        e = _norm(u, v)
        if e in seen:
            raise GraphFormatError(f"duplicate edge {e}", lineno)
        seen.add(e)
        edges.append(e)
    if header is None:
        raise GraphFormatError("missing 'n m' header")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {len(edges)}")
    return SimpleGraph(header[0], tuple(edges), degree_bound)


def serialize_graph(G: SimpleGraph) -> str:
    lines = [f"{G.n} {G.m}"]
    lines.extend(f"{u} {v}" for u, v in G.edges)
    return "\n".join(lines) + "\n"


# -- generators ------------------------------------------------------------


def cycle(n: int) -> SimpleGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return SimpleGraph(n, tuple((i, (i + 1) % n) for i in range(n)), 2)


def path(n: int) -> SimpleGraph:
    if n < 1:
        raise ValueError("path needs n >= 1")
    return SimpleGraph(n, tuple((i, i + 1) for i in range(n - 1)), 2)


def complete(n: int) -> SimpleGraph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return SimpleGraph(n, tuple(combinations(range(n), 2)), max(n - 1, 1))


def torus(a: int, b: int) -> SimpleGraph:
    if a < 3 or b < 3:
        raise ValueError("torus needs a, b >= 3")
    idx = lambda i, j: i * b + j  # noqa: E731
    edges = set()
    for i in range(a):
        for j in range(b):
            edges.add(_norm(idx(i, j), idx((i + 1) % a, j)))
            edges.add(_norm(idx(i, j), idx(i, (j + 1) % b)))
    return SimpleGraph(a * b, tuple(edges), 4)


MAX_REGULAR_RETRIES = 1000


def random_regular(n: int, d: int, seed: int = 0) -> SimpleGraph:
    """Configuration model; pairings with loops or multi-edges are rejected."""
    if n * d % 2 or not 0 <= d < n:
        raise ValueError("random_regular needs n*d even and 0 <= d < n")
    rng = random.Random(seed)
    stubs = [v for v in range(n) for _ in range(d)]
    for _ in range(MAX_REGULAR_RETRIES):
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for u, v in zip(stubs[::2], stubs[1::2]):
            e = _norm(u, v)
            if u == v or e in edges:
                ok = False
                break
            edges.add(e)
        if ok:
            return SimpleGraph(n, tuple(edges), max(d, 1))
    raise GenerationError(
        f"configuration model failed after {MAX_REGULAR_RETRIES} retries (n={n}, d={d})"
    )


def generate(family: str, *params: int, seed: int = 0) -> SimpleGraph:
    """Build a member of a named family: cycle, path, torus, complete, random_regular."""
    builders = {
        "cycle": (cycle, 1),
        "path": (path, 1),
        "torus": (torus, 2),
        "complete": (complete, 1),
        "random_regular": (random_regular, 2),
    }
    if family not in builders:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(builders)}")
    fn, arity = builders[family]
    if len(params) != arity:
        raise ValueError(f"{family} takes {arity} parameter(s), got {len(params)}")
    if family == "random_regular":
        return fn(*params, seed=seed)
    return fn(*params)


def parse_family(spec: str) -> tuple[str, list[int]]:
    """``"torus 3x4"`` or ``"random_regular 8 3"`` -> (family, params)."""
    tokens = spec.replace("x", " ").replace("×", " ").split()
    if not tokens:
        raise ValueError("empty family spec")
    try:
        return tokens[0], [int(t) for t in tokens[1:]]
    except ValueError:
        raise ValueError(f"bad family spec {spec!r}") from None


# -- patterns --------------------------------------------------------------


def induced_pattern(G: SimpleGraph, edge_tuple) -> EdgeLabeledMultigraph:
    chosen = []
    for idx in edge_tuple:
        if not 0 <= idx < G.m:
            raise IndexError(f"edge index {idx} out of range (m={G.m})")
        chosen.append(G.edges[idx])
    verts = sorted({x for e in chosen for x in e})
    index = {v: i for i, v in enumerate(verts)}
    return EdgeLabeledMultigraph(len(verts), tuple((index[u], index[v]) for u, v in chosen))


def _incidence_code(incidence) -> CanonicalCode:
    return "|".join(".".join(map(str, s)) for s in sorted(incidence)).encode()


def canonical_form(F: EdgeLabeledMultigraph) -> CanonicalCode:
    # Each vertex is determined by its set of incident labels, and every label
    # sits in exactly two such sets, so the sorted multiset of label sets is a
    # complete invariant for label-preserving isomorphism.
    return _incidence_code(F.incident_labels())


def pattern_code_from_edges(edge_pairs) -> CanonicalCode:
    """canonical_form without building the multigraph; used by hot loops."""
    inc: dict[int, list[int]] = {}
    for p, (u, v) in enumerate(edge_pairs, start=1):
        inc.setdefault(u, []).append(p)
        inc.setdefault(v, []).append(p)
    return _incidence_code(tuple(s) for s in inc.values())


def pattern_from_code(code: CanonicalCode) -> EdgeLabeledMultigraph:
    text = code.decode()
    sets = [tuple(int(x) for x in part.split(".")) for part in text.split("|")] if text else []
    ends: dict[int, list[int]] = {}
    for vi, s in enumerate(sets):
        for p in s:
            ends.setdefault(p, []).append(vi)
    edges = tuple(tuple(ends[p]) for p in sorted(ends))
    return EdgeLabeledMultigraph(len(sets), edges)


# -- rooted balls ----------------------------------------------------------


def bfs_distances(G: SimpleGraph, root: int, radius: int | None = None) -> dict[int, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        if radius is not None and dist[u] == radius:
            continue
        for w in G.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def rooted_ball(G: SimpleGraph, root: int, radius: int) -> RootedBall:
    dist = bfs_distances(G, root, radius)
    sub, index = G.induced_subgraph(dist)
    return RootedBall(sub, index[root], radius)


def _refine(adj, colors):
    """Equitable refinement; new color ids depend only on invariant signatures."""
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(len(adj))]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _canonical_search(adj, colors):
    colors = _refine(adj, colors)
    n = len(adj)
    if len(set(colors)) == n:
        order = sorted(range(n), key=lambda v: colors[v])
        pos = {v: i for i, v in enumerate(order)}
        return tuple(sorted(_norm(pos[u], pos[w]) for u in range(n) for w in adj[u] if u < w))
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(colors):
        cells.setdefault(c, []).append(v)
    target = min((c for c, vs in cells.items() if len(vs) > 1), key=lambda c: (len(cells[c]), c))
    best = None
    for v in cells[target]:
        # individualize v by splitting it off below its cell mates
        trial = [2 * c + (0 if u == v or c != target else 1) for u, c in enumerate(colors)]
        cand = _canonical_search(adj, trial)
        if best is None or cand < best:
            best = cand
    return best


def canonical_rooted(ball: RootedBall) -> CanonicalCode:
    G = ball.graph
    adj = [sorted(G.neighbors(v)) for v in range(G.n)]
    dist = bfs_distances(G, ball.root)
    # the root is the unique vertex at distance 0, so it always lands at position 0
    edges = _canonical_search(adj, [dist[v] for v in range(G.n)])
    return f"r{ball.radius};n{G.n};".encode() + ";".join(f"{u}-{v}" for u, v in edges).encode()


# -- spanning trees --------------------------------------------------------


def bareiss_determinant(matrix) -> int:
    """Fraction-free determinant of an integer matrix."""
    M = [list(row) for row in matrix]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def spanning_tree_count(G) -> int:
    """Matrix-tree theorem; parallel edges of a multigraph count separately."""
    if isinstance(G, SimpleGraph):
        n, edges = G.n, G.edges
    else:
        n, edges = G.m, G.edge_list
    if n <= 1:
        return 1
    L = [[0] * n for _ in range(n)]
    for u, v in edges:
        L[u][u] += 1
        L[v][v] += 1
        L[u][v] -= 1
        L[v][u] -= 1
    return bareiss_determinant([row[1:] for row in L[1:]])
