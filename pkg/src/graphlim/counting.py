"""Exact homomorphism-type counts, weighted homomorphism sums and local profiles."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .budget import Budget, BudgetExceeded
from .graphs import (
    CanonicalCode,
    SimpleGraph,
    WeightedTarget,
    canonical_rooted,
    pattern_code_from_edges,
    rooted_ball,
)


class HardCoreZero(ArithmeticError):
    """log t requested for a target where hom(G, H) = 0."""


@dataclass(frozen=True)
class PatternProfile:
    l: int
    counts: dict[CanonicalCode, int]

    def __getitem__(self, code: CanonicalCode) -> int:
        return self.counts.get(code, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class BallDistribution:
    r: int
    freqs: dict[CanonicalCode, Fraction]


# -- unweighted counts -----------------------------------------------------


def _search_order(G: SimpleGraph) -> list[int]:
    # BFS-ish order so each new vertex has as many placed neighbours as possible
    order, placed = [], set()
    remaining = set(range(G.n))
    while remaining:
        v = max(remaining, key=lambda x: (sum(1 for w in G.neighbors(x) if w in placed), G.degree(x), -x))
        order.append(v)
        placed.add(v)
        remaining.discard(v)
    return order


def _count_maps(G: SimpleGraph, H: SimpleGraph, injective: bool, induced: bool) -> int:
    if G.n == 0:
        return 1
    order = _search_order(G)
    earlier = []
    for i, v in enumerate(order):
        prev = order[:i]
        earlier.append(
            ([j for j, u in enumerate(prev) if G.has_edge(u, v)],
             [j for j, u in enumerate(prev) if not G.has_edge(u, v)])
        )
    image = [0] * G.n
    used = set()

    def extend(i: int) -> int:
        if i == G.n:
            return 1
        adj_idx, non_idx = earlier[i]
        if adj_idx:
            cands = H.neighbors(image[adj_idx[0]])
        else:
            cands = range(H.n)
        total = 0
        for c in cands:
            if injective and c in used:
                continue
            if any(not H.has_edge(image[j], c) for j in adj_idx):
                continue
            if induced and any(H.has_edge(image[j], c) for j in non_idx):
                continue
            image[i] = c
            if injective:
                used.add(c)
            total += extend(i + 1)
            if injective:
                used.discard(c)
        return total

    return extend(0)


def hom_count(G: SimpleGraph, H: SimpleGraph) -> int:
    return _count_maps(G, H, injective=False, induced=False)


def inj_count(G: SimpleGraph, H: SimpleGraph) -> int:
    return _count_maps(G, H, injective=True, induced=False)


def ind_count(G: SimpleGraph, H: SimpleGraph) -> int:
    return _count_maps(G, H, injective=True, induced=True)


# -- weighted homomorphisms ------------------------------------------------


def is_exact_target(H: WeightedTarget) -> bool:
    ws = list(H.vertex_weights) + [w for row in H.edge_weights for w in row]
    return all(isinstance(w, (int, Fraction)) and not isinstance(w, bool) for w in ws)


def _eliminate(G: SimpleGraph, vertex_vec, edge_mat, log_scaled: bool):
    """Sum-product over all maps V(G) -> [k] by greedy vertex elimination.

    Factors are (vertex tuple, ndarray). In log-scaled mode every factor is kept
    normalized to max 1 and the scale is tracked in ``log_scale``.
    """
    factors = []
    log_scale = 0.0

    def normalized(arr):
        nonlocal log_scale
        if not log_scaled:
            return arr
        mx = float(np.max(arr)) if arr.size else 0.0
        if mx <= 0.0:
            raise HardCoreZero("weighted homomorphism sum is zero")
        log_scale += math.log(mx)
        return arr / mx

    for v in range(G.n):
        factors.append(((v,), normalized(vertex_vec.copy())))
    for u, v in G.edges:
        factors.append(((u, v), normalized(edge_mat.copy())))

    result = np.ones((), dtype=vertex_vec.dtype)
    alive = set(range(G.n))
    while alive:
        def cost(x):
            scope = set()
            for vs, _ in factors:
                if x in vs:
                    scope.update(vs)
            return (len(scope), x)

        x = min(alive, key=cost)
        alive.discard(x)
        touching = [f for f in factors if x in f[0]]
        factors = [f for f in factors if x not in f[0]]
        scope = sorted({y for vs, _ in touching for y in vs})
        axis = {y: i for i, y in enumerate(scope)}
        prod = np.ones((1,) * len(scope), dtype=vertex_vec.dtype)
        for vs, arr in touching:
            # broadcast each factor into the joint scope
            arr = np.transpose(arr, sorted(range(len(vs)), key=lambda i: axis[vs[i]]))
            shape = [1] * len(scope)
            for y in vs:
                shape[axis[y]] = arr.shape[0]
            prod = prod * arr.reshape(shape)
        summed = prod.sum(axis=axis[x])
        rest = tuple(y for y in scope if y != x)
        if rest:
            factors.append((rest, normalized(summed)))
        else:
            result = result * normalized(np.asarray(summed))
    for _, arr in factors:
        result = result * arr
    return result.item() if hasattr(result, "item") else result, log_scale


def weighted_hom(G: SimpleGraph, H: WeightedTarget, exact: bool | None = None):
    """Sum over all maps of the product of vertex and edge weights.

    Exact (Fraction) arithmetic when every weight is an int or Fraction, unless
    ``exact=False`` forces floating point.
    """
    if exact is None:
        exact = is_exact_target(H)
    if exact:
        vv = np.array([Fraction(w) for w in H.vertex_weights], dtype=object)
        em = np.array([[Fraction(w) for w in row] for row in H.edge_weights], dtype=object)
        value, _ = _eliminate(G, vv, em, log_scaled=False)
        return Fraction(value)
    vv = np.array(H.vertex_weights, dtype=float)
    em = np.array(H.edge_weights, dtype=float)
    value, _ = _eliminate(G, vv, em, log_scaled=False)
    return float(value)


def log_weighted_hom(G: SimpleGraph, H: WeightedTarget) -> float:
    vv = np.array([float(w) for w in H.vertex_weights])
    em = np.array([[float(w) for w in row] for row in H.edge_weights])
    value, log_scale = _eliminate(G, vv, em, log_scaled=True)
    if value <= 0:
        raise HardCoreZero("weighted homomorphism sum is zero")
    return log_scale + math.log(value)


def t_density(G: SimpleGraph, H: WeightedTarget, exact: bool | None = None):
    total = weighted_hom(G, H, exact)
    if isinstance(total, Fraction):
        return total / Fraction(H.k) ** G.n
    return total / float(H.k) ** G.n


def log_t_density(G: SimpleGraph, H: WeightedTarget) -> float:
    return log_weighted_hom(G, H) - G.n * math.log(H.k)


def threshold_target(H: SimpleGraph) -> WeightedTarget:
    """0/1 weighted target equivalent to a simple graph."""
    ew = tuple(tuple(1 if H.has_edge(i, j) else 0 for j in range(H.n)) for i in range(H.n))
    return WeightedTarget(H.n, (1,) * H.n, ew)


def _parse_weight(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        raise ValueError("boolean weight")
    if isinstance(x, (int, float)):
        return x
    raise ValueError(f"bad weight {x!r}")


def load_target(text: str) -> WeightedTarget:
    doc = json.loads(text)
    try:
        k = int(doc["k"])
        vw = tuple(_parse_weight(x) for x in doc["vertex_weights"])
        ew = tuple(tuple(_parse_weight(x) for x in row) for row in doc["edge_weights"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed target document: {exc}") from None
    return WeightedTarget(k, vw, ew)


# -- edge-tuple profiles ---------------------------------------------------


def i_profile(G: SimpleGraph, l: int, budget: Budget | None = None) -> PatternProfile:
    budget = budget or Budget.default()
    if not 1 <= l <= budget.max_pattern_l:
        raise ValueError(f"l must be in 1..{budget.max_pattern_l}, got {l}")
    if G.m ** l > budget.max_tuples:
        raise BudgetExceeded(f"{G.m}^{l} edge tuples exceed max_tuples={budget.max_tuples}")
    edges = G.edges
    tally: Counter = Counter()
    for tup in product(range(G.m), repeat=l):
        tally[pattern_code_from_edges([edges[i] for i in tup])] += 1
    return PatternProfile(l, dict(tally))


def ball_distribution(G: SimpleGraph, r: int) -> BallDistribution:
    if G.n == 0:
        return BallDistribution(r, {})
    tally = Counter(canonical_rooted(rooted_ball(G, v, r)) for v in range(G.n))
    return BallDistribution(r, {c: Fraction(cnt, G.n) for c, cnt in sorted(tally.items())})
