"""Color statistics, the cumulant generating function and joint cumulants.

Colors are ``0..k-1``. A uniform random ``k``-coloring of ``G`` yields the
statistic vector ``Z = (n_0, ..., n_{k-1}, e_{00}, e_{01}, ..., e_{k-1,k-1})``:
vertex counts per color and edge counts per unordered color pair. The full
coordinates are ``v(G) X_i = n_i`` and ``v(G) X_{ij} = v(G) X_{ji} = e_{{i,j}}``,
so a point ``lam`` of R^{k + k^2} acts on ``Z`` through the reduced vector

    mu_i = lam_i,   mu_{ii} = lam_{ii},   mu_{ij} = lam_{ij} + lam_{ji}  (i < j)

and ``<lam, v(G) X> = <mu, Z>``. ``mu`` is also the vector of log-weights of
the target graph built by :func:`target_from_lambda`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import comb, factorial

import numpy as np

from .budget import Budget, BudgetExceeded
from .graphs import EdgeLabeledMultigraph, SimpleGraph, WeightedTarget, pattern_from_code

# -- coordinates -----------------------------------------------------------


def pair_index(k: int, a: int, b: int) -> int:
    """Column of e_{{a,b}} among the k(k+1)/2 unordered pairs (a <= b, lexicographic)."""
    if a > b:
        a, b = b, a
    return a * k - a * (a - 1) // 2 + (b - a)


def stat_labels(k: int) -> list[tuple]:
    labels: list[tuple] = [("v", i) for i in range(k)]
    labels += [("e", a, b) for a in range(k) for b in range(a, k)]
    return labels


def stat_index(k: int, coord) -> int:
    """Map a coordinate ``("v", i)`` or ``("e", i, j)`` to its statistic column."""
    if coord[0] == "v":
        _, i = coord
        if not 0 <= i < k:
            raise ValueError(f"color {i} out of range for k={k}")
        return i
    _, i, j = coord
    if not (0 <= i < k and 0 <= j < k):
        raise ValueError(f"colors ({i}, {j}) out of range for k={k}")
    return k + pair_index(k, i, j)


@dataclass(frozen=True)
class LambdaVector:
    k: int
    vertex: tuple[float, ...]
    edge: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        vertex = tuple(float(x) for x in self.vertex)
        edge = tuple(tuple(float(x) for x in row) for row in self.edge)
        if len(vertex) != self.k or len(edge) != self.k or any(len(r) != self.k for r in edge):
            raise ValueError("lambda dimensions do not match k")
        if not all(math.isfinite(x) for x in vertex + sum(edge, ())):
            raise ValueError("lambda entries must be finite")
        object.__setattr__(self, "vertex", vertex)
        object.__setattr__(self, "edge", edge)

    @classmethod
    def zero(cls, k: int) -> "LambdaVector":
        return cls(k, (0.0,) * k, ((0.0,) * k,) * k)

    @classmethod
    def from_coords(cls, k: int, values: dict) -> "LambdaVector":
        """Build from a sparse mapping ``{("v", i) | ("e", i, j): value}``."""
        vertex = [0.0] * k
        edge = [[0.0] * k for _ in range(k)]
        for coord, val in values.items():
            if coord[0] == "v":
                vertex[coord[1]] += val
            else:
                edge[coord[1]][coord[2]] += val
        return cls(k, tuple(vertex), tuple(map(tuple, edge)))

    @classmethod
    def from_reduced(cls, k: int, mu) -> "LambdaVector":
        """Representative with edge part on the upper triangle (lam_{ji} = 0 for j > i)."""
        mu = list(mu)
        edge = [[0.0] * k for _ in range(k)]
        for a in range(k):
            for b in range(a, k):
                edge[a][b] = mu[k + pair_index(k, a, b)]
        return cls(k, tuple(mu[:k]), tuple(map(tuple, edge)))

    def coords(self) -> list[tuple[tuple, float]]:
        out = [(("v", i), x) for i, x in enumerate(self.vertex)]
        out += [(("e", i, j), self.edge[i][j]) for i in range(self.k) for j in range(self.k)]
        return out

    def norm_inf(self) -> float:
        return max(abs(x) for _, x in self.coords())

    def reduced(self) -> np.ndarray:
        k = self.k
        mu = np.zeros(k + k * (k + 1) // 2)
        mu[:k] = self.vertex
        for a in range(k):
            for b in range(a, k):
                w = self.edge[a][a] if a == b else self.edge[a][b] + self.edge[b][a]
                mu[k + pair_index(k, a, b)] = w
        return mu

    def log_weight_norm(self) -> float:
        """Largest |log weight| of the associated target graph."""
        return float(np.max(np.abs(self.reduced())))

    def scaled(self, c: float) -> "LambdaVector":
        return LambdaVector(self.k, tuple(c * x for x in self.vertex),
                            tuple(tuple(c * x for x in row) for row in self.edge))

    def to_json(self) -> dict:
        return {"k": self.k, "vertex": list(self.vertex), "edge": [list(r) for r in self.edge]}

    @classmethod
    def from_json(cls, doc) -> "LambdaVector":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            return cls(int(doc["k"]), tuple(doc["vertex"]), tuple(tuple(r) for r in doc["edge"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed lambda document: {exc}") from None


def random_lambda(k: int, rng: np.random.Generator, cap: float, reduced: bool = False) -> LambdaVector:
    """Uniform draw with every coordinate in [-cap, cap].

    With ``reduced=True`` the draw is made on the log-weight coordinates and
    returned as the upper-triangular representative, so that
    ``norm_inf() == log_weight_norm()``.
    """
    if reduced:
        return LambdaVector.from_reduced(k, rng.uniform(-cap, cap, k + k * (k + 1) // 2))
    vals = rng.uniform(-cap, cap, k + k * k)
    return LambdaVector(k, tuple(vals[:k]), tuple(tuple(r) for r in vals[k:].reshape(k, k)))


def target_from_lambda(lam: LambdaVector) -> WeightedTarget:
    """H_lambda: vertex weight e^{lam_i}; edge weight e^{lam_ij + lam_ji} (i != j), e^{lam_ii}."""
    k = lam.k
    mu = lam.reduced()
    ew = tuple(tuple(math.exp(mu[k + pair_index(k, i, j)]) for j in range(k)) for i in range(k))
    return WeightedTarget(k, tuple(math.exp(x) for x in lam.vertex), ew)


# -- color statistics ------------------------------------------------------


@dataclass(frozen=True)
class ColorStatistics:
    vertex: tuple[Fraction, ...]
    edge: tuple[tuple[Fraction, ...], ...]
    v: int


def color_statistics(G: SimpleGraph, coloring, k: int) -> ColorStatistics:
    coloring = list(coloring)
    if len(coloring) != G.n:
        raise ValueError("coloring must assign a color to every vertex")
    if any(not 0 <= c < k for c in coloring):
        raise ValueError(f"color out of range 0..{k - 1}")
    n = G.n
    counts = [0] * k
    for c in coloring:
        counts[c] += 1
    pairs = [[0] * k for _ in range(k)]
    for u, w in G.edges:
        a, b = coloring[u], coloring[w]
        pairs[a][b] += 1
        if a != b:
            pairs[b][a] += 1
    return ColorStatistics(
        tuple(Fraction(c, n) for c in counts),
        tuple(tuple(Fraction(x, n) for x in row) for row in pairs),
        n,
    )


def _check_budget(G: SimpleGraph, k: int, budget: Budget | None) -> None:
    budget = budget or Budget.default()
    bits = G.n * math.log2(k) if k > 1 else 0.0
    if bits > budget.max_coloring_bits + 1e-9:
        raise BudgetExceeded(
            f"{k}^{G.n} colorings ({bits:.1f} bits) exceed max_coloring_bits={budget.max_coloring_bits}"
        )


def _coloring_chunks(n: int, k: int, chunk: int = 1 << 16):
    total = k ** n
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % k


class ColoringMoments:
    """Exact distribution of the statistic vector over all k^n colorings."""

    def __init__(self, G: SimpleGraph, k: int):
        self.G, self.k = G, k
        self.total = k ** G.n
        width = k + k * (k + 1) // 2
        table = {}
        us = np.array([u for u, _ in G.edges], dtype=np.int64)
        ws = np.array([w for _, w in G.edges], dtype=np.int64)
        pid = np.array([[pair_index(k, a, b) for b in range(k)] for a in range(k)], dtype=np.int64)
        for C in _coloring_chunks(G.n, k):
            stats = np.zeros((C.shape[0], width), dtype=np.int64)
            for i in range(k):
                stats[:, i] = (C == i).sum(axis=1)
            if G.m:
                p = pid[C[:, us], C[:, ws]]
                for q in range(k * (k + 1) // 2):
                    stats[:, k + q] = (p == q).sum(axis=1)
            rows, mult = np.unique(stats, axis=0, return_counts=True)
            for row, c in zip(map(tuple, rows.tolist()), mult.tolist()):
                table[row] = table.get(row, 0) + c
        items = sorted(table.items())
        self.rows = np.array([r for r, _ in items], dtype=np.int64).reshape(len(items), width)
        self.mult = np.array([c for _, c in items], dtype=object)
        self._obj_rows = self.rows.astype(object)
        self._moments: dict[tuple[int, ...], Fraction] = {}

    def moment(self, columns) -> Fraction:
        """E[prod of the listed statistic columns] (repeats allowed), exactly."""
        key = tuple(sorted(columns))
        if key not in self._moments:
            prod = self.mult.copy()
            for c in key:
                prod = prod * self._obj_rows[:, c]
            self._moments[key] = Fraction(int(prod.sum()), self.total)
        return self._moments[key]

    def joint_cumulant(self, columns) -> Fraction:
        columns = list(columns)
        return joint_cumulant(lambda block: self.moment([columns[i] for i in block]), len(columns))

    def log_mgf(self, mu) -> float:
        """log E exp(<mu, Z>) by a stable exact-enumeration sum."""
        s = self.rows @ np.asarray(mu, dtype=float)
        mult = [int(x) for x in self.mult]
        hi, lo = float(np.max(s)), float(np.min(s))
        if max(hi, -lo) <= 1.0:
            # expm1/log1p keeps full relative precision near the origin
            acc = math.fsum(c * math.expm1(x) for c, x in zip(mult, s.tolist()))
            return math.log1p(acc / self.total)
        acc = math.fsum(c * math.exp(x - hi) for c, x in zip(mult, s.tolist()))
        return hi + math.log(acc) - math.log(self.total)


@lru_cache(maxsize=64)
def _moments_cached(G: SimpleGraph, k: int) -> ColoringMoments:
    return ColoringMoments(G, k)


def coloring_moments(G: SimpleGraph, k: int, budget: Budget | None = None) -> ColoringMoments:
    if k < 1:
        raise ValueError("k must be positive")
    _check_budget(G, k, budget)
    return _moments_cached(G, k)


def cgf_value(G: SimpleGraph, k: int, lam: LambdaVector, budget: Budget | None = None) -> float:
    """f_{G,k}(lam) = (1/v(G)) log E exp(<lam, v(G) X(G,k)>)."""
    if lam.k != k:
        raise ValueError("lambda has the wrong number of colors")
    if G.n == 0:
        raise ValueError("f is undefined for the empty graph")
    return coloring_moments(G, k, budget).log_mgf(lam.reduced()) / G.n


# -- partitions and joint cumulants ----------------------------------------


@dataclass(frozen=True)
class SetPartition:
    blocks: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.blocks)

    @property
    def weight(self) -> int:
        """(|pi| - 1)! (-1)^{|pi| - 1}, the coefficient in the partition formula."""
        b = len(self.blocks)
        return (-1) ** (b - 1) * factorial(b - 1)


MAX_PARTITION_L = 8


@lru_cache(maxsize=None)
def enumerate_partitions(l: int) -> tuple[SetPartition, ...]:
    """All partitions of positions ``0..l-1`` in restricted-growth-string order."""
    if not 0 <= l <= MAX_PARTITION_L:
        raise ValueError(f"l must be in 0..{MAX_PARTITION_L}")
    out = []

    def grow(prefix, top):
        if len(prefix) == l:
            blocks = [[] for _ in range(top + 1)]
            for pos, b in enumerate(prefix):
                blocks[b].append(pos)
            out.append(SetPartition(tuple(tuple(b) for b in blocks if b)))
            return
        for b in range(top + 2):
            grow(prefix + [b], max(top, b))

    grow([], -1)
    return tuple(out)


def joint_cumulant(moments, l: int):
    """kappa(Z_1..Z_l) = sum_pi (|pi|-1)! (-1)^{|pi|-1} prod_B E[prod_{i in B} Z_i].

    ``moments`` maps a block (tuple of 0-based positions) to its mixed moment;
    a dict keyed by tuples is accepted as well as a callable.
    """
    if l == 0:
        return 0
    lookup = moments.__getitem__ if isinstance(moments, dict) else moments
    cache = {}
    total = 0
    for pi in enumerate_partitions(l):
        term = pi.weight
        for block in pi.blocks:
            if block not in cache:
                cache[block] = lookup(block)
            term = term * cache[block]
        total = total + term
    return total


def moments_to_cumulants(raw):
    """kappa_r = m_r - sum_{s=1}^{r-1} C(r-1, s-1) kappa_s m_{r-s}."""
    raw = list(raw)
    if len(raw) > 12:
        raise ValueError("at most 12 moments")
    kappa = []
    for r in range(1, len(raw) + 1):
        val = raw[r - 1]
        for s in range(1, r):
            val = val - comb(r - 1, s - 1) * kappa[s - 1] * raw[r - s - 1]
        kappa.append(val)
    return kappa


# -- color patterns --------------------------------------------------------


@dataclass(frozen=True)
class ColorPattern:
    """A labeled multigraph with a color on each vertex; edge p asks for colors {i_p, j_p}."""

    pattern: EdgeLabeledMultigraph
    colors: tuple[int, ...]

    def __post_init__(self):
        if len(self.colors) != self.pattern.m:
            raise ValueError("one color per pattern vertex required")

    @property
    def l(self) -> int:
        return self.pattern.l

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(tuple(sorted((self.colors[u], self.colors[v]))) for u, v in self.pattern.edge_list)

    @classmethod
    def from_pairs(cls, pairs) -> "ColorPattern":
        """One vertex per distinct color; a same-color pair gets a second vertex of that color."""
        vertex_of: dict[int, int] = {}
        colors: list[int] = []
        edges = []

        def vertex(c):
            if c not in vertex_of:
                vertex_of[c] = len(colors)
                colors.append(c)
            return vertex_of[c]

        for a, b in pairs:
            if a == b:
                u = vertex(a)
                colors.append(a)
                edges.append((u, len(colors) - 1))
            else:
                edges.append((vertex(a), vertex(b)))
        return cls(EdgeLabeledMultigraph(len(colors), tuple(edges)), tuple(colors))

    def permuted(self, sigma) -> "ColorPattern":
        return ColorPattern(self.pattern, tuple(sigma[c] for c in self.colors))


def _pairs_of(J) -> tuple[tuple[int, int], ...]:
    if isinstance(J, ColorPattern):
        return J.pairs
    return tuple(tuple(sorted(p)) for p in J)


def x_value(E: EdgeLabeledMultigraph, J, k: int) -> Fraction:
    """Probability that a uniform k-coloring of E's vertices gives every edge p
    the endpoint color multiset {i_p, j_p}."""
    pairs = _pairs_of(J)
    if len(pairs) != E.l:
        raise ValueError("E and J must have the same number of edges")
    if any(not (0 <= a < k and 0 <= b < k) for a, b in pairs):
        raise ValueError(f"J uses colors outside 0..{k - 1}")
    domains = [set(range(k)) for _ in range(E.m)]
    for (u, v), (a, b) in zip(E.edge_list, pairs):
        domains[u] &= {a, b}
        domains[v] &= {a, b}
    if any(not d for d in domains):
        return Fraction(0)
    good = 0
    for col in product(*[sorted(d) for d in domains]):
        if all(tuple(sorted((col[u], col[v]))) == p for (u, v), p in zip(E.edge_list, pairs)):
            good += 1
    return Fraction(good, k ** E.m)


def f_pi(F: EdgeLabeledMultigraph, pi: SetPartition) -> EdgeLabeledMultigraph:
    """Disjoint union of the per-block edge subgraphs, each edge keeping its label."""
    edges: list[tuple[int, int] | None] = [None] * F.l
    offset = 0
    for block in pi.blocks:
        local: dict[int, int] = {}
        for p in block:
            u, v = F.edge_list[p]
            for x in (u, v):
                if x not in local:
                    local[x] = offset + len(local)
            edges[p] = (local[u], local[v])
        offset += len(local)
    if any(e is None for e in edges):
        raise ValueError("partition does not cover the edge labels of F")
    return EdgeLabeledMultigraph(offset, tuple(edges))


def kappa_fj(F: EdgeLabeledMultigraph, J, k: int) -> Fraction:
    """kappa(F, J) = sum_pi (|pi|-1)! (-1)^{|pi|-1} x(F_pi, J)."""
    pairs = _pairs_of(J)
    if len(pairs) != F.l:
        raise ValueError("F and J must have the same number of edges")
    total = Fraction(0)
    for pi in enumerate_partitions(F.l):
        total += pi.weight * x_value(f_pi(F, pi), pairs, k)
    return total


def coordinate_cumulant(G: SimpleGraph, k: int, coords, budget: Budget | None = None) -> Fraction:
    """Joint cumulant of the statistics v(G) X_c for a list of coordinates (direct route)."""
    cm = coloring_moments(G, k, budget)
    return cm.joint_cumulant([stat_index(k, c) for c in coords])


def kappa_gj(G: SimpleGraph, J, k: int, route: str = "direct", budget: Budget | None = None) -> Fraction:
    """kappa(v(G) X_{i_1 j_1}, ..., v(G) X_{i_l j_l}) for the color pairs of J."""
    pairs = _pairs_of(J)
    if any(not (0 <= a < k and 0 <= b < k) for a, b in pairs):
        raise ValueError(f"J uses colors outside 0..{k - 1}")
    if route == "direct":
        return coordinate_cumulant(G, k, [("e", a, b) for a, b in pairs], budget)
    if route == "decomposition":
        from .counting import i_profile

        profile = i_profile(G, len(pairs), budget)
        total = Fraction(0)
        for code, count in sorted(profile.counts.items()):
            F = pattern_from_code(code)
            if F.is_connected():
                total += count * kappa_fj(F, pairs, k)
        return total
    raise ValueError(f"unknown route {route!r}")


def color_pattern_orbits(l: int, k: int) -> list[tuple[tuple[int, int], ...]]:
    """One representative pair sequence per orbit of [k]-colored l-edge patterns
    under permutations of the colors (lexicographic minimum of each orbit)."""
    all_pairs = [(a, b) for a in range(k) for b in range(a, k)]
    perms = list(permutations(range(k)))
    reps = set()
    for seq in product(all_pairs, repeat=l):
        reps.add(min(tuple(tuple(sorted((s[a], s[b]))) for a, b in seq) for s in perms))
    return sorted(reps)
