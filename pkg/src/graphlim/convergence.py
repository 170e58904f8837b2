"""Cumulant bounds, Taylor models of f_{G,k} and finite-prefix convergence diagnostics."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial

import numpy as np

from .budget import Budget, BudgetExceeded
from .catalog import enumerate_catalog
from .counting import ball_distribution, i_profile, ind_count, inj_count, log_t_density
from .cumulants import (
    LambdaVector,
    coloring_moments,
    joint_cumulant,
    kappa_gj,
    moments_to_cumulants,
    stat_labels,
    target_from_lambda,
)
from .graphs import SimpleGraph, canonical_form, generate, parse_family, spanning_tree_count


class RadiusWarning(UserWarning):
    pass


def radius(D: int) -> float:
    """1 / (4 e D)."""
    return 1.0 / (4.0 * math.e * D)


def majorant_radius(D: int) -> float:
    """Radius of convergence of the explicit tail majorant, 1 / (2 e (2D + 1))."""
    return 1.0 / (2.0 * math.e * (2 * D + 1))


# -- dependency graph ------------------------------------------------------


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[tuple, ...]
    adjacency: dict = field(repr=False)
    delta: int

    def support(self, node) -> frozenset[int]:
        """Vertices of G whose colors determine the variable at ``node``."""
        return frozenset(node[1:]) if node[0] == "e" else frozenset((node[1],))


def dependency_graph(G: SimpleGraph) -> DependencyGraph:
    """Vertex ``("v", i)`` joins its incident edges; edge ``("e", u, v)`` joins its
    endpoints and every edge sharing an endpoint."""
    nodes = [("v", i) for i in range(G.n)] + [("e", u, v) for u, v in G.edges]
    adj = {x: set() for x in nodes}
    for u, v in G.edges:
        e = ("e", u, v)
        for x in (u, v):
            adj[e].add(("v", x))
            adj[("v", x)].add(e)
    by_vertex: dict[int, list] = {}
    for u, v in G.edges:
        by_vertex.setdefault(u, []).append(("e", u, v))
        by_vertex.setdefault(v, []).append(("e", u, v))
    for inc in by_vertex.values():
        for a, b in combinations(inc, 2):
            adj[a].add(b)
            adj[b].add(a)
    adjacency = {x: frozenset(s) for x, s in adj.items()}
    delta = max((len(s) for s in adjacency.values()), default=0)
    return DependencyGraph(tuple(nodes), adjacency, delta)


def fmn_bound(r: int, W_size: int, delta: int, A=1):
    """2^{r-1} r^{r-2} |W| (Delta+1)^{r-1} A^r; exact when A is rational."""
    if r < 1:
        raise ValueError("r must be >= 1")
    exact = isinstance(A, (int, Fraction))
    val = 2 ** (r - 1) * Fraction(r) ** (r - 2) * W_size * (delta + 1) ** (r - 1)
    return val * Fraction(A) ** r if exact else float(val) * A ** r


# -- single-direction cumulants --------------------------------------------


@dataclass(frozen=True)
class DirectionCumulants:
    kappas: tuple
    A: float
    bounds: tuple
    v: int

    @property
    def within_bounds(self) -> bool:
        return all(abs(k) <= b for k, b in zip(self.kappas, self.bounds))

    @property
    def strictly_within(self) -> bool:
        return all(abs(k) < b for k, b in zip(self.kappas, self.bounds))


def direction_cumulants(G: SimpleGraph, k: int, lam0: LambdaVector, r_max: int,
                        budget: Budget | None = None, D: int | None = None) -> DirectionCumulants:
    """Exact cumulants of Y = <lam0, v(G) X> over all colorings.

    Each site contribution of Y is bounded by ``A = lam0.log_weight_norm()``
    (at most twice ``norm_inf``), and that ``A`` enters the bounds.
    """
    if not 1 <= r_max <= 10:
        raise ValueError("r_max must be in 1..10")
    cm = coloring_moments(G, k, budget)
    mu = [Fraction(x) for x in lam0.reduced().tolist()]
    ys = [sum((c * x for c, x in zip(row, mu)), Fraction(0)) for row in cm.rows.tolist()]
    mult = [int(x) for x in cm.mult]
    raw = []
    powers = [Fraction(1)] * len(ys)
    for _ in range(r_max):
        powers = [p * y for p, y in zip(powers, ys)]
        raw.append(sum((c * p for c, p in zip(mult, powers)), Fraction(0)) / cm.total)
    kappas = moments_to_cumulants(raw)
    A = lam0.log_weight_norm()
    A_exact = Fraction(A) if A == int(A) else A
    D = G.degree_bound if D is None else D
    bounds = tuple(fmn_bound(r, G.n + G.m, 2 * D, A_exact) for r in range(1, r_max + 1))
    return DirectionCumulants(tuple(kappas), A, bounds, G.n)


# -- spanning-tree lemma ---------------------------------------------------


def spanning_tree_cumulant_check(G: SimpleGraph, edge_tuple, pairs, k: int) -> dict:
    """Joint cumulant of edge-color indicators vs 2^{r-1} tree(H_dep), exactly."""
    r = len(edge_tuple)
    if not 1 <= r <= 4 or len(pairs) != r:
        raise ValueError("need 1..4 indicators with one color pair each")
    chosen = [G.edges[i] for i in edge_tuple]
    verts = sorted({x for e in chosen for x in e})
    pos = {v: i for i, v in enumerate(verts)}
    want = [tuple(sorted(p)) for p in pairs]
    tally: dict[tuple, int] = {}
    for col in product(range(k), repeat=len(verts)):
        key = tuple(
            int(tuple(sorted((col[pos[u]], col[pos[v]]))) == w) for (u, v), w in zip(chosen, want)
        )
        tally[key] = tally.get(key, 0) + 1
    total = k ** len(verts)

    def moment(block):
        return Fraction(sum(c for key, c in tally.items() if all(key[i] for i in block)), total)

    kappa = joint_cumulant(moment, r)
    dep_edges = tuple(
        (p, q) for p, q in combinations(range(r), 2) if set(chosen[p]) & set(chosen[q])
    )
    tree = spanning_tree_count(SimpleGraph(r, dep_edges))
    connected = SimpleGraph(r, dep_edges).is_connected()
    if not connected:
        tree = 0
    bound = 2 ** (r - 1) * tree
    return {
        "r": r,
        "kappa": kappa,
        "tree": tree,
        "bound": bound,
        "within_bound": abs(kappa) <= bound,
        "vanishes_if_disconnected": connected or kappa == 0,
    }


# -- Taylor models ---------------------------------------------------------


def _multi_indices(nvars: int, order: int):
    if order == 0:
        yield (0,) * nvars
        return
    for combo in combinations(range(nvars + order - 1), order):
        # stars and bars
        alpha = [0] * nvars
        prev = -1
        var = 0
        for c in combo:
            var += c - prev - 1
            alpha[var] += 1
            prev = c
        yield tuple(alpha)


@dataclass(frozen=True)
class TaylorModel:
    """Coefficients d^alpha f(0) / alpha! over the reduced variables.

    ``labels[i]`` names reduced variable i; an edge variable ``("e", a, b)`` with
    a < b stands for both coordinates (a, b) and (b, a), whose values are summed.
    """

    k: int
    order: int
    v: int
    degree_bound: int
    labels: tuple
    coefficients: dict = field(repr=False)
    decomposition_agrees: bool | None = None

    def derivative(self, coords) -> Fraction:
        """Partial derivative of f at 0 along the listed full coordinates."""
        from .cumulants import stat_index

        alpha = [0] * len(self.labels)
        for c in coords:
            alpha[stat_index(self.k, c)] += 1
        if sum(alpha) > self.order:
            raise ValueError("derivative order exceeds the model order")
        coef = self.coefficients.get(tuple(alpha), Fraction(0))
        return coef * math.prod(factorial(a) for a in alpha)


def taylor_model(G: SimpleGraph, k: int, m: int, budget: Budget | None = None,
                 cross_check_order: int = 2) -> TaylorModel:
    cm = coloring_moments(G, k, budget)
    labels = tuple(stat_labels(k))
    nv = len(labels)
    coeffs: dict[tuple, Fraction] = {}
    agrees = None if cross_check_order < 1 else True
    for order in range(0, m + 1):
        for alpha in _multi_indices(nv, order):
            if order == 0:
                coeffs[alpha] = Fraction(0)
                continue
            cols = [i for i, a in enumerate(alpha) for _ in range(a)]
            kappa = cm.joint_cumulant(cols)
            coeffs[alpha] = kappa / (G.n * math.prod(factorial(a) for a in alpha))
            if agrees and order <= cross_check_order and all(c >= k for c in cols):
                pairs = [labels[c][1:] for c in cols]
                agrees = kappa_gj(G, pairs, k, "decomposition", budget) == kappa
    return TaylorModel(k, m, G.n, G.degree_bound, labels, coeffs, agrees)


def taylor_eval(model: TaylorModel, lam: LambdaVector, order: int | None = None) -> float:
    order = model.order if order is None else order
    if order > model.order:
        raise ValueError("evaluation order exceeds the model order")
    if lam.norm_inf() >= radius(model.degree_bound):
        warnings.warn(
            f"|lambda|_inf = {lam.norm_inf():.4g} is outside radius(D={model.degree_bound})",
            RadiusWarning, stacklevel=2,
        )
    mu = lam.reduced()
    terms = []
    for alpha, c in model.coefficients.items():
        if sum(alpha) <= order and c:
            terms.append(float(c) * math.prod(mu[i] ** a for i, a in enumerate(alpha) if a))
    return math.fsum(terms)


def direction_coefficients(dc: DirectionCumulants) -> list[Fraction]:
    """Taylor coefficients of g(z) = f(z lam0): kappa_r / (v r!), r = 1..r_max."""
    return [kr / (dc.v * factorial(r)) for r, kr in enumerate(dc.kappas, start=1)]


def tail_term(D: int, r: int, z: float) -> float:
    """2^{r-2} r^{r-2} (D+2) (2D+1)^{r-1} z^r / r!, a bound on |kappa_r| z^r / (v r!)."""
    if z == 0:
        return 0.0
    logt = ((r - 2) * math.log(2) + (r - 2) * math.log(r) + math.log(D + 2)
            + (r - 1) * math.log(2 * D + 1) + r * math.log(abs(z)) - math.lgamma(r + 1))
    return math.exp(logt)


def tail_majorant(D: int, z: float, m: int, tol: float = 1e-30) -> float:
    """Upper bound on sum_{r>m} |kappa_r| |z|^r / (v r!) for a direction with A = 1.

    Term ratios increase towards rho = 2e(2D+1)|z|, so after the last summed
    term T the remainder is at most T rho / (1 - rho).
    """
    rho = abs(z) / majorant_radius(D)
    if rho >= 1:
        return math.inf
    total, r = 0.0, m + 1
    while True:
        t = tail_term(D, r, z)
        total += t
        if t <= tol * max(total, 1e-300) or r > 100_000:
            return total + t * rho / (1 - rho)
        r += 1


def taylor_certificate(G: SimpleGraph, k: int, lam: LambdaVector, orders=(2, 4, 6),
                       model: TaylorModel | None = None, budget: Budget | None = None) -> dict:
    """Observed errors of the Taylor polynomials at ``lam`` and their tail majorants."""
    from .cumulants import cgf_value

    model = model or taylor_model(G, k, max(orders), budget, cross_check_order=0)
    exact = cgf_value(G, k, lam, budget)
    z = lam.log_weight_norm()
    D = G.degree_bound
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RadiusWarning)
        errors = [abs(exact - taylor_eval(model, lam, m)) for m in orders]
    majorants = [tail_majorant(D, z, m) for m in orders]
    return {
        "orders": list(orders),
        "value": exact,
        "errors": errors,
        "majorants": majorants,
        "strictly_decreasing": all(a > b for a, b in zip(errors, errors[1:])),
        "majorant_dominates": all(math.isfinite(t) and t >= e for t, e in zip(majorants, errors)),
    }


# -- sequence diagnostics --------------------------------------------------


def _fmt(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    return x


def connected_simple_patterns(L: int) -> list[SimpleGraph]:
    """Connected simple graphs with 1..L edges, one per isomorphism class."""
    seen, out = set(), []
    for l in range(1, L + 1):
        for F in enumerate_catalog(l).connected_patterns:
            if len(set(F.edge_list)) != l:
                continue
            S = F.simple_reduction()
            key = min(
                tuple(sorted(tuple(sorted((p[u], p[v]))) for u, v in S.edges))
                for p in permutations(range(S.n))
            )
            if (S.n, key) not in seen:
                seen.add((S.n, key))
                out.append(SimpleGraph(S.n, key))
    return out


def _ball_digest(dist) -> str:
    blob = ";".join(f"{c.decode()}={_fmt(f)}" for c, f in sorted(dist.freqs.items()))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class SequenceReport:
    family: str
    k: int
    L: int
    columns: list[str]
    rows: list[dict]
    differences: dict
    slopes: dict
    skipped: list[dict]
    balls: dict

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "k": self.k,
            "L": self.L,
            "columns": self.columns,
            "rows": [{c: _fmt(r.get(c)) for c in self.columns} for r in self.rows],
            "differences": {c: [_fmt(d) for d in ds] for c, ds in self.differences.items()},
            "slopes": self.slopes,
            "skipped": self.skipped,
            "balls": self.balls,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c, "")) for c in self.columns])
        return buf.getvalue()


def _slope(ns, diffs) -> float | None:
    """Least-squares slope of |difference| against 1/n."""
    if len(diffs) < 2:
        return None
    x = np.array([1.0 / n for n in ns[1:]])
    y = np.array([abs(float(d)) for d in diffs])
    xc = x - x.mean()
    denom = float(xc @ xc)
    return float(xc @ (y - y.mean()) / denom) if denom else 0.0


def family_member(template: str, n: int, seed: int = 0) -> SimpleGraph:
    if "{n}" not in template:
        template = template + " {n}"
    fam, params = parse_family(template.format(n=n))
    return generate(fam, *params, seed=seed)


def sequence_report(family: str, ns, k: int, lambdas=(), L: int = 2, ball_radius: int = 2,
                    seed: int = 0, budget: Budget | None = None) -> SequenceReport:
    """Tabulate local and right-convergence statistics along a graph family.

    ``family`` is a template such as ``"cycle"``, ``"torus {n}x{n}"`` or
    ``"random_regular {n} 3"``. f values are computed through the weighted
    homomorphism route, so they are not limited by the coloring budget.
    """
    budget = budget or Budget.default()
    ns = sorted(ns)
    cats = {l: enumerate_catalog(l) for l in range(1, L + 1)}
    i_cols = [f"i[{l}:{canonical_form(F).decode()}]" for l in cats for F in cats[l].connected_patterns]
    simple = connected_simple_patterns(L)
    simple_names = [",".join(f"{u}-{v}" for u, v in S.edges) for S in simple]
    hom_cols = [f"{kind}[{name}]" for name in simple_names for kind in ("inj", "ind")]
    f_cols = [f"f[{j}]" for j in range(len(lambdas))]
    ball_cols = [f"balls[r={r}]" for r in range(ball_radius + 1)]
    columns = ["n", "v", "m"] + i_cols + hom_cols + f_cols + ball_cols
    rows, skipped, balls = [], [], {}
    for n in ns:
        try:
            G = family_member(family, n, seed)
            row = {"n": n, "v": G.n, "m": G.m}
            for l, cat in cats.items():
                prof = i_profile(G, l, budget)
                for F in cat.connected_patterns:
                    code = canonical_form(F)
                    row[f"i[{l}:{code.decode()}]"] = Fraction(prof[code], G.n)
            for S, name in zip(simple, simple_names):
                row[f"inj[{name}]"] = Fraction(inj_count(S, G), G.n)
                row[f"ind[{name}]"] = Fraction(ind_count(S, G), G.n)
            rad = radius(G.degree_bound)
            for j, lam in enumerate(lambdas):
                if lam.norm_inf() < rad:
                    row[f"f[{j}]"] = log_t_density(G, target_from_lambda(lam)) / G.n
            for r in range(ball_radius + 1):
                dist = ball_distribution(G, r)
                row[f"balls[r={r}]"] = _ball_digest(dist)
                balls.setdefault(str(n), {})[str(r)] = {c.decode(): _fmt(f) for c, f in dist.freqs.items()}
            rows.append(row)
        except (BudgetExceeded, ValueError) as exc:
            skipped.append({"n": n, "reason": str(exc)})
    differences, slopes = {}, {}
    kept = [r["n"] for r in rows]
    for c in i_cols + hom_cols + f_cols:
        vals = [r.get(c) for r in rows]
        if any(v is None for v in vals):
            continue
        diffs = [b - a for a, b in zip(vals, vals[1:])]
        differences[c] = diffs
        slopes[c] = _slope(kept, diffs)
    return SequenceReport(family, k, L, columns, rows, differences, slopes, skipped, balls)
