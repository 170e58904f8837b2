import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from graphlim.convergence import (
    RadiusWarning,
    connected_simple_patterns,
    dependency_graph,
    direction_coefficients,
    direction_cumulants,
    fmn_bound,
    majorant_radius,
    radius,
    sequence_report,
    spanning_tree_cumulant_check,
    tail_majorant,
    tail_term,
    taylor_certificate,
    taylor_eval,
    taylor_model,
)
from graphlim.cumulants import LambdaVector, cgf_value, random_lambda
from graphlim.graphs import SimpleGraph, complete, cycle, path, torus


@pytest.fixture(scope="module")
def c6_model():
    return taylor_model(cycle(6), 2, 6, cross_check_order=2)


class TestDependencyGraph:
    def test_k2(self):
        dep = dependency_graph(complete(2))
        assert len(dep.nodes) == 3 and dep.delta == 2
        assert dep.adjacency[("e", 0, 1)] == {("v", 0), ("v", 1)}

    def test_c4(self):
        assert dependency_graph(cycle(4)).delta == 4

    def test_star(self):
        star = SimpleGraph(4, ((0, 1), (0, 2), (0, 3)))
        dep = dependency_graph(star)
        assert len(dep.adjacency[("e", 0, 1)]) == 4

    @pytest.mark.parametrize("G", [cycle(7), path(6), complete(4), torus(3, 4)])
    def test_delta_at_most_twice_degree(self, G):
        assert dependency_graph(G).delta <= 2 * G.max_degree


class TestFmn:
    def test_values(self):
        assert fmn_bound(1, 8, 4) == 8
        assert fmn_bound(2, 8, 4) == 80
        assert fmn_bound(3, 10, 4) == 3000

    def test_bernoulli_direction(self):
        lam0 = LambdaVector.from_coords(2, {("e", 0, 0): 1.0})
        dc = direction_cumulants(complete(2), 2, lam0, 2)
        assert dc.kappas == (Fraction(1, 4), Fraction(3, 16))
        assert dc.within_bounds

    def test_all_ones_attains_r1(self):
        k = 2
        lam0 = LambdaVector.from_reduced(k, [1.0] * (k + k * (k + 1) // 2))
        G = cycle(5)
        dc = direction_cumulants(G, k, lam0, 4)
        assert dc.kappas[0] == G.n + G.m == dc.bounds[0]
        assert all(x == 0 for x in dc.kappas[1:])

    @pytest.mark.parametrize("G", [cycle(6), path(6), complete(4), torus(3, 3)])
    def test_random_sign_directions(self, G):
        rng = np.random.default_rng(1)
        for _ in range(5):
            lam0 = LambdaVector.from_reduced(2, rng.choice([-1.0, 1.0], 5))
            dc = direction_cumulants(G, 2, lam0, 6)
            assert dc.within_bounds
            assert all(abs(kr) < b for kr, b in zip(dc.kappas[1:], dc.bounds[1:]))

    def test_literal_coordinates_use_log_weight_norm(self):
        lam0 = LambdaVector.from_coords(2, {("e", 0, 1): 1.0, ("e", 1, 0): 1.0})
        dc = direction_cumulants(cycle(4), 2, lam0, 3)
        assert dc.A == 2.0 and dc.within_bounds


class TestSpanningTreeLemma:
    def test_disjoint(self):
        G = path(4)
        rep = spanning_tree_cumulant_check(G, (0, 2), ((0, 1), (0, 1)), 2)
        assert rep["kappa"] == 0 and rep["tree"] == 0

    def test_shared_vertex(self):
        rep = spanning_tree_cumulant_check(path(3), (0, 1), ((0, 0), (0, 0)), 2)
        assert rep["kappa"] != 0 and rep["bound"] == 2 and rep["within_bound"]

    def test_triangle(self):
        rep = spanning_tree_cumulant_check(complete(3), (0, 1, 2), ((0, 1), (0, 1), (0, 1)), 2)
        assert rep["tree"] == 3 and rep["bound"] == 12 and rep["within_bound"]

    def test_repeated_edge(self):
        rep = spanning_tree_cumulant_check(cycle(4), (1, 1), ((0, 0), (0, 0)), 2)
        assert rep["kappa"] == Fraction(3, 16) and rep["within_bound"]


class TestTaylor:
    def test_radius(self):
        assert radius(2) == pytest.approx(1 / (8 * math.e))
        assert radius(2) == pytest.approx(0.045985, abs=1e-6)
        assert majorant_radius(2) > 0.03

    def test_low_order_coefficients(self, c6_model):
        G = cycle(6)
        assert taylor_eval(c6_model, LambdaVector.zero(2)) == 0
        assert c6_model.derivative([("v", 0)]) == Fraction(1, 2)
        assert c6_model.derivative([("e", 0, 1)]) == Fraction(G.m, G.n) * Fraction(2, 4)
        assert c6_model.derivative([("e", 1, 0)]) == c6_model.derivative([("e", 0, 1)])
        assert c6_model.decomposition_agrees

    def test_matches_cgf_near_origin(self, c6_model):
        lam = random_lambda(2, np.random.default_rng(2), 0.01, reduced=True)
        assert taylor_eval(c6_model, lam) == pytest.approx(cgf_value(cycle(6), 2, lam), abs=1e-15)

    def test_radius_warning(self, c6_model):
        lam = LambdaVector.from_coords(2, {("v", 0): 0.1})
        with pytest.warns(RadiusWarning):
            taylor_eval(c6_model, lam)

    def test_no_warning_inside(self, c6_model):
        lam = LambdaVector.from_coords(2, {("v", 0): 0.01})
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            taylor_eval(c6_model, lam)

    def test_order_too_high(self, c6_model):
        with pytest.raises(ValueError):
            taylor_eval(c6_model, LambdaVector.zero(2), 7)

    def test_certificate(self, c6_model):
        rng = np.random.default_rng(4)
        for _ in range(3):
            lam = random_lambda(2, rng, 0.03, reduced=True)
            lam = lam.scaled(0.03 / lam.norm_inf())
            cert = taylor_certificate(cycle(6), 2, lam, model=c6_model)
            assert cert["strictly_decreasing"] and cert["majorant_dominates"]

    def test_errors_non_increasing_inside_90_percent(self, c6_model):
        rng = np.random.default_rng(8)
        for _ in range(5):
            lam = random_lambda(2, rng, 1.0, reduced=True)
            lam = lam.scaled(0.9 * radius(2) / lam.norm_inf())
            errs = taylor_certificate(cycle(6), 2, lam, model=c6_model)["errors"]
            assert errs[0] >= errs[1] >= errs[2]

    def test_tail_terms_bound_direction_series(self):
        G = cycle(6)
        lam0 = LambdaVector.from_reduced(2, [1.0, -1.0, 1.0, 1.0, -1.0])
        coeffs = direction_coefficients(direction_cumulants(G, 2, lam0, 8))
        for r, c in enumerate(coeffs, start=1):
            if r >= 2:
                assert abs(float(c)) * 0.03 ** r <= tail_term(2, r, 0.03)

    def test_tail_majorant_edges(self):
        assert tail_majorant(2, 0.04, 2) == math.inf
        assert tail_majorant(2, 0.0, 2) == 0.0
        assert tail_majorant(2, 0.03, 6) < tail_majorant(2, 0.03, 4) < tail_majorant(2, 0.03, 2)


class TestSequenceReport:
    def test_cycles_constant(self):
        rep = sequence_report("cycle", range(10, 16), 2, L=2, ball_radius=2)
        two_path = next(c for c in rep.columns if c.startswith("i[2:") and c.count("|") == 2)
        assert all(r[two_path] == 2 for r in rep.rows)
        edge_col = next(c for c in rep.columns if c.startswith("i[1:"))
        assert all(r[edge_col] == 1 for r in rep.rows)
        assert all(d == 0 for ds in rep.differences.values() for d in ds)
        assert len({r["balls[r=2]"] for r in rep.rows}) == 1

    def test_paths_monotone(self):
        rep = sequence_report("path", range(5, 12), 2, L=1, ball_radius=1)
        edge_col = next(c for c in rep.columns if c.startswith("i[1:"))
        vals = [r[edge_col] for r in rep.rows]
        assert vals == [Fraction(n - 1, n) for n in range(5, 12)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_f_values_and_skips(self):
        lam = LambdaVector.from_coords(2, {("e", 0, 1): 0.01})
        far = LambdaVector.from_coords(2, {("e", 0, 1): 0.5})
        rep = sequence_report("cycle", [8, 2], 2, lambdas=[lam, far], L=1, ball_radius=0)
        assert [s["n"] for s in rep.skipped] == [2]
        row = rep.rows[0]
        assert row["f[0]"] == pytest.approx(cgf_value(cycle(8), 2, lam), abs=1e-12)
        assert "f[1]" not in row

    def test_csv_columns_stable(self):
        rep = sequence_report("torus {n}x{n}", [3], 2, L=2, ball_radius=1)
        header = rep.to_csv().splitlines()[0].split(",")[:3]
        assert header == ["n", "v", "m"]

    def test_connected_simple_patterns(self):
        pats = connected_simple_patterns(3)
        # edge, 2-path, triangle, 3-path, star
        assert len(pats) == 5
