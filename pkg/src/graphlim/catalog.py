"""Catalogs of edge-labeled multigraph patterns and the E, P, K coefficient matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm

from .budget import Budget
from .cumulants import (
    ColorPattern,
    enumerate_partitions,
    f_pi,
    kappa_fj,
    kappa_gj,
    x_value,
)
from .counting import i_profile
from .graphs import (
    CanonicalCode,
    EdgeLabeledMultigraph,
    SimpleGraph,
    canonical_form,
    pattern_from_code,
)

MAX_CATALOG_L = 4


def _order_key(code: CanonicalCode):
    # descending vertex count makes E literally lower-triangular
    return (-(code.count(b"|") + 1), code)


@dataclass(frozen=True)
class Catalog:
    l: int
    all_patterns: tuple[EdgeLabeledMultigraph, ...]
    connected_patterns: tuple[EdgeLabeledMultigraph, ...]
    codes: tuple[CanonicalCode, ...] = field(repr=False)
    index: dict = field(repr=False, compare=False)
    connected_index: dict = field(repr=False, compare=False)

    @classmethod
    def from_codes(cls, l: int, codes) -> "Catalog":
        codes = tuple(sorted(set(codes), key=_order_key))
        pats = tuple(pattern_from_code(c) for c in codes)
        conn = tuple(p for p in pats if p.is_connected())
        return cls(
            l, pats, conn, codes,
            {c: i for i, c in enumerate(codes)},
            {canonical_form(p): i for i, p in enumerate(conn)},
        )

    def is_connected(self, code: CanonicalCode) -> bool:
        return code in self.connected_index


def _check_l(l: int) -> None:
    if not 1 <= l <= MAX_CATALOG_L:
        raise ValueError(f"l must be in 1..{MAX_CATALOG_L}, got {l}")


def catalog_codes_edges_first(l: int) -> set[CanonicalCode]:
    """Grow patterns one labeled edge at a time, deduplicating after each step."""
    _check_l(l)
    layer = {canonical_form(EdgeLabeledMultigraph(2, ((0, 1),)))}
    for _ in range(l - 1):
        nxt = set()
        for code in layer:
            F = pattern_from_code(code)
            m = F.m
            ends = list(combinations(range(m), 2))  # both endpoints old
            ends += [(u, m) for u in range(m)]  # one new vertex
            ends.append((m, m + 1))  # two new vertices
            for u, v in ends:
                size = max(m, u + 1, v + 1)
                nxt.add(canonical_form(EdgeLabeledMultigraph(size, F.edge_list + ((u, v),))))
        layer = nxt
    return layer


def catalog_codes_vertex_first(l: int) -> set[CanonicalCode]:
    """For each vertex count, every l-sequence of pairs that covers all vertices."""
    _check_l(l)
    out = set()
    for nv in range(2, 2 * l + 1):
        pairs = list(combinations(range(nv), 2))
        for seq in product(pairs, repeat=l):
            if len({x for e in seq for x in e}) == nv:
                out.add(canonical_form(EdgeLabeledMultigraph(nv, seq)))
    return out


def enumerate_catalog(l: int) -> Catalog:
    return Catalog.from_codes(l, catalog_codes_edges_first(l))


def embed_pattern(J: EdgeLabeledMultigraph, k: int) -> ColorPattern:
    """Distinct colors 0, 1, ... on J's vertices in canonical vertex order."""
    Jc = J.canonical()
    if k < Jc.m:
        raise ValueError(f"k={k} is too small to embed a pattern on {Jc.m} vertices")
    return ColorPattern(Jc, tuple(range(Jc.m)))


# -- exact linear algebra --------------------------------------------------


def exact_rank(matrix) -> int:
    """Rank of a rational matrix by fraction-free (Bareiss) elimination."""
    rows = [list(r) for r in matrix]
    if not rows or not rows[0]:
        return 0
    M = []
    for r in rows:
        den = lcm(*(Fraction(x).denominator for x in r))
        M.append([int(Fraction(x) * den) for x in r])
    nr, nc = len(M), len(M[0])
    rank, prev = 0, 1
    for c in range(nc):
        piv = next((i for i in range(rank, nr) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(rank + 1, nr):
            for j in range(c + 1, nc):
                M[i][j] = (M[i][j] * M[rank][c] - M[i][c] * M[rank][j]) // prev
            M[i][c] = 0
        prev = M[rank][c]
        rank += 1
        if rank == nr:
            break
    return rank


def matmul(A, B):
    return [[sum((a * B[t][j] for t, a in enumerate(row)), Fraction(0)) for j in range(len(B[0]))]
            for row in A]


@dataclass(frozen=True)
class CoefficientMatrices:
    catalog: Catalog
    k: int
    E: tuple[tuple[Fraction, ...], ...]
    P: tuple[tuple[Fraction, ...], ...]
    K: tuple[tuple[Fraction, ...], ...]
    K_direct: tuple[tuple[Fraction, ...], ...]


def build_matrices(l: int, k: int) -> CoefficientMatrices:
    """E[J][F] = x(F, J embedded); P[F'][F] = sum of partition weights over pi with F_pi ~ F';
    K = E P, also computed entrywise as kappa(F, J embedded)."""
    if k < 2 * l:
        raise ValueError(f"need k >= 2l ({2 * l}), got k={k}")
    cat = enumerate_catalog(l)
    embedded = [embed_pattern(J, k) for J in cat.all_patterns]
    E = [[x_value(F, Jc, k) for F in cat.all_patterns] for Jc in embedded]
    P = [[Fraction(0)] * len(cat.connected_patterns) for _ in cat.all_patterns]
    for col, F in enumerate(cat.connected_patterns):
        for pi in enumerate_partitions(l):
            P[cat.index[canonical_form(f_pi(F, pi))]][col] += pi.weight
    K = matmul(E, P)
    K_direct = [[kappa_fj(F, Jc, k) for F in cat.connected_patterns] for Jc in embedded]
    freeze = lambda M: tuple(tuple(r) for r in M)  # noqa: E731
    return CoefficientMatrices(cat, k, freeze(E), freeze(P), freeze(K), freeze(K_direct))


def is_lower_triangular(M) -> bool:
    return all(M[i][j] == 0 for i in range(len(M)) for j in range(i + 1, len(M[i])))


def verify_rank(mats: CoefficientMatrices, graphs=(), budget: Budget | None = None) -> dict:
    """Check the linear-algebra claims; findings are reported, never raised."""
    cat = mats.catalog
    n_all, n_conn = len(cat.all_patterns), len(cat.connected_patterns)
    conn_rows = [cat.index[canonical_form(F)] for F in cat.connected_patterns]
    identity = [[Fraction(int(i == j)) for j in range(n_conn)] for i in range(n_conn)]
    report = {
        "l": cat.l,
        "k": mats.k,
        "catalog_size": n_all,
        "connected_size": n_conn,
        "E_lower_triangular": is_lower_triangular(mats.E),
        "E_diagonal_nonzero": all(mats.E[i][i] != 0 for i in range(n_all)),
        "rank_E": exact_rank(mats.E),
        "rank_P": exact_rank(mats.P),
        "rank_K": exact_rank(mats.K),
        "P_connected_rows_identity": [list(mats.P[r]) for r in conn_rows] == identity,
        "K_equals_EP_direct": mats.K == mats.K_direct,
        "graphs": [],
    }
    embedded = [embed_pattern(J, mats.k) for J in cat.all_patterns]
    report["disconnected_columns_vanish"] = all(
        kappa_fj(F, Jc, mats.k) == 0
        for F in cat.all_patterns if not F.is_connected() for Jc in embedded
    )
    report["E_invertible"] = report["rank_E"] == n_all
    report["P_full_column_rank"] = report["rank_P"] == n_conn
    report["K_full_column_rank"] = report["rank_K"] == n_conn
    for name, G in graphs:
        profile = i_profile(G, cat.l, budget)
        w = [profile[canonical_form(F)] for F in cat.connected_patterns]
        Kw = [sum((a * b for a, b in zip(row, w)), Fraction(0)) for row in mats.K]
        u = [kappa_gj(G, Jc, mats.k, "direct", budget) for Jc in embedded]
        report["graphs"].append({"graph": name, "u_equals_Kw": u == Kw})
    report["ok"] = all(
        report[key] for key in (
            "E_lower_triangular", "E_diagonal_nonzero", "E_invertible", "P_full_column_rank",
            "K_full_column_rank", "P_connected_rows_identity", "K_equals_EP_direct",
            "disconnected_columns_vanish",
        )
    ) and all(g["u_equals_Kw"] for g in report["graphs"])
    return report


def pattern_json(F: EdgeLabeledMultigraph) -> dict:
    return {"vertices": F.m, "edges": [list(e) for e in F.edge_list]}


def catalog_json(cat: Catalog) -> dict:
    return {
        "l": cat.l,
        "patterns": [
            {"code": c.decode(), **pattern_json(F), "connected": F.is_connected()}
            for c, F in zip(cat.codes, cat.all_patterns)
        ],
    }
