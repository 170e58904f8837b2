"""Acceptance suite: each test runs one criterion at full size and stated tolerance."""

import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from graphlim.catalog import (
    build_matrices,
    catalog_codes_vertex_first,
    enumerate_catalog,
    is_lower_triangular,
    verify_rank,
)
from graphlim.convergence import direction_cumulants, spanning_tree_cumulant_check, taylor_certificate, taylor_model
from graphlim.counting import (
    ball_distribution,
    hom_count,
    i_profile,
    ind_count,
    inj_count,
    log_t_density,
    threshold_target,
    weighted_hom,
)
from graphlim.cumulants import (
    LambdaVector,
    cgf_value,
    color_pattern_orbits,
    coordinate_cumulant,
    kappa_gj,
    random_lambda,
    target_from_lambda,
)
from graphlim.graphs import EdgeLabeledMultigraph, canonical_form, complete, cycle, path, torus
from graphlim.verify import edge_coords, finite_difference

pytestmark = pytest.mark.acceptance


def test_1_bridge_identity(criterion):
    t0 = time.perf_counter()
    graphs = {"C4": cycle(4), "C6": cycle(6), "P5": path(5), "K4": complete(4), "T3x3": torus(3, 3)}
    assert all(G.n <= 10 for G in graphs.values())
    rng = np.random.default_rng(1)
    worst, samples = 0.0, 0
    for G in graphs.values():
        for k in (2, 3):
            for _ in range(100):
                lam = random_lambda(k, rng, 0.25)
                assert lam.norm_inf() <= 0.25
                bridge = log_t_density(G, target_from_lambda(lam)) / G.n
                worst = max(worst, abs(cgf_value(G, k, lam) - bridge))
                samples += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed <= 60
    criterion("1 bridge identity", ok, f"samples={samples} max_abs_diff={worst:.2e} time={elapsed:.1f}s")
    assert ok


def test_2_decomposition_identity(criterion):
    t0 = time.perf_counter()
    cases = mismatches = 0
    for G in (cycle(4), cycle(5), path(5), complete(4)):
        for l in (1, 2, 3):
            for k in (2, 3, 4):
                for J in color_pattern_orbits(l, k):
                    cases += 1
                    mismatches += kappa_gj(G, J, k, "direct") != kappa_gj(G, J, k, "decomposition")
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed <= 300
    criterion("2 decomposition identity", ok, f"cases={cases} mismatches={mismatches} time={elapsed:.1f}s")
    assert ok


def test_3_matrix_suite(criterion):
    t0 = time.perf_counter()
    details, ok = [], True
    for l in (1, 2, 3):
        mats = build_matrices(l, 2 * l)
        rep = verify_rank(mats)
        n_conn = len(mats.catalog.connected_patterns)
        conds = (
            is_lower_triangular(mats.E),
            all(mats.E[i][i] != 0 for i in range(len(mats.E))),
            rep["P_connected_rows_identity"],
            mats.K == mats.K_direct,
            rep["rank_K"] == n_conn,
            catalog_codes_vertex_first(l) == set(mats.catalog.codes),
        )
        ok = ok and all(conds)
        details.append(f"l={l}:|F*|={len(mats.E)},rankK={rep['rank_K']}/{n_conn}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 300
    criterion("3 matrix suite", ok, f"{' '.join(details)} time={elapsed:.1f}s")
    assert ok


def test_4_derivative_consistency(criterion):
    t0 = time.perf_counter()
    k = 2
    coords = edge_coords(k)
    combos = [(c,) for c in coords] + list(combinations(coords, 2)) + [(c, c) for c in coords]
    worst = 0.0
    for G in (cycle(4), cycle(6)):
        zero = LambdaVector.zero(k)
        for combo in combos:
            exact = float(coordinate_cumulant(G, k, combo)) / G.n
            fd = finite_difference(lambda lam: cgf_value(G, k, lam), zero, combo, h=1e-4)
            worst = max(worst, abs(fd - exact) / abs(exact))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed <= 60
    criterion("4 derivative consistency", ok, f"derivatives={2 * len(combos)} max_rel_err={worst:.2e} "
                                              f"time={elapsed:.1f}s")
    assert ok


def test_5_fmn_bound(criterion):
    t0 = time.perf_counter()
    k, nred = 2, 5
    rng = np.random.default_rng(5)
    directions = [LambdaVector.from_reduced(k, [1.0] * nred)]
    directions += [LambdaVector.from_reduced(k, rng.choice([-1.0, 1.0], nred)) for _ in range(20)]
    graphs = [cycle(n) for n in (4, 5, 6, 8)] + [path(n) for n in (4, 5, 6, 8)] + [complete(4)]
    violations = strict = equal_r1_constant = 0
    for G in graphs:
        for lam0 in directions:
            assert lam0.norm_inf() == lam0.log_weight_norm() == 1
            dc = direction_cumulants(G, k, lam0, 6)
            constant = all(x == 0 for x in dc.kappas[1:])
            for r, (kr, b) in enumerate(zip(dc.kappas, dc.bounds), start=1):
                if abs(kr) > b:
                    violations += 1
                elif abs(kr) < b:
                    strict += 1
                elif r == 1 and constant:
                    # Y is a.s. equal to v+m: the r=1 bound is attained, so strictness is impossible
                    equal_r1_constant += 1
                else:
                    violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed <= 120
    criterion("5 FMN bound", ok, f"strict={strict} violations={violations} "
                                 f"attained_at_r1_constant_Y={equal_r1_constant} time={elapsed:.1f}s")
    assert ok


def test_6_spanning_tree_lemma(criterion):
    t0 = time.perf_counter()
    cases = failures = disconnected = 0
    for G in (complete(4), cycle(5)):
        for r in range(1, 5):
            for sub in combinations(range(G.m), r):
                for pairs in product([(0, 0), (0, 1), (1, 1)], repeat=r):
                    rep = spanning_tree_cumulant_check(G, sub, pairs, 2)
                    cases += 1
                    disconnected += rep["tree"] == 0
                    failures += not (rep["within_bound"] and rep["vanishes_if_disconnected"])
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed <= 120
    criterion("6 spanning-tree lemma", ok, f"cases={cases} disconnected={disconnected} failures={failures} "
                                           f"time={elapsed:.1f}s")
    assert ok


def test_7_taylor_convergence(criterion):
    t0 = time.perf_counter()
    G = cycle(6)
    model = taylor_model(G, 2, 6, cross_check_order=2)
    rng = np.random.default_rng(7)
    failures, worst_ratio = 0, 0.0
    for _ in range(20):
        lam = random_lambda(2, rng, 1.0, reduced=True)
        lam = lam.scaled(0.03 / lam.norm_inf())
        assert abs(lam.norm_inf() - 0.03) < 1e-15
        cert = taylor_certificate(G, 2, lam, (2, 4, 6), model)
        failures += not (cert["strictly_decreasing"] and cert["majorant_dominates"])
        worst_ratio = max(worst_ratio, max(e / m for e, m in zip(cert["errors"], cert["majorants"])))
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and model.decomposition_agrees and elapsed <= 180
    criterion("7 Taylor convergence", ok, f"samples=20 failures={failures} "
                                          f"max_error/majorant={worst_ratio:.2e} time={elapsed:.1f}s")
    assert ok


def test_8_cycle_constancy(criterion):
    t0 = time.perf_counter()
    cats = {l: enumerate_catalog(l) for l in (1, 2, 3)}
    ref_prof = ref_balls = None
    same = True
    for n in range(10, 41):
        G = cycle(n)
        prof = {}
        for l, cat in cats.items():
            counts = i_profile(G, l)
            for F in cat.connected_patterns:
                prof[canonical_form(F)] = Fraction(counts[canonical_form(F)], n)
        balls = [ball_distribution(G, r).freqs for r in range(4)]
        if ref_prof is None:
            ref_prof, ref_balls = prof, balls
        same = same and prof == ref_prof and balls == ref_balls
    elapsed = time.perf_counter() - t0
    ok = same and elapsed <= 120
    criterion("8 cycle constancy", ok, f"n=10..40 patterns={len(ref_prof)} time={elapsed:.1f}s")
    assert ok


def test_9_counting_cross_checks(criterion):
    t0 = time.perf_counter()
    graphs = {"K1": complete(1), "K2": complete(2), "K3": complete(3), "K4": complete(4), "P3": path(3),
              "P4": path(4), "P5": path(5), "P6": path(6), "C4": cycle(4), "C5": cycle(5), "C6": cycle(6),
              "T3x3": torus(3, 3)}
    edge = canonical_form(EdgeLabeledMultigraph(2, ((0, 1),)))
    parallel = canonical_form(EdgeLabeledMultigraph(2, ((0, 1), (0, 1))))
    two_path = canonical_form(EdgeLabeledMultigraph(3, ((0, 1), (1, 2))))
    bad, pairs = [], 0
    for name, G in graphs.items():
        inj_edge = inj_count(complete(2), G)
        if inj_edge != 2 * G.m:
            bad.append(f"inj(K2,{name})")
        if G.m:
            p1, p2 = i_profile(G, 1), i_profile(G, 2)
            if p1[edge] != inj_edge // 2 or inj_edge % 2:
                bad.append(f"i(edge,{name})")
            if p2[two_path] != inj_count(path(3), G):
                bad.append(f"i(2-path,{name})")
            if p2[parallel] != inj_edge // 2:
                bad.append(f"i(parallel,{name})")
    small = {n: G for n, G in graphs.items() if G.n <= 6}
    for (a, F), (b, H) in product(small.items(), repeat=2):
        pairs += 1
        h, i, d = hom_count(F, H), inj_count(F, H), ind_count(F, H)
        if not d <= i <= h:
            bad.append(f"order({a},{b})")
        if weighted_hom(F, threshold_target(H)) != h:
            bad.append(f"weighted({a},{b})")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed <= 120
    criterion("9 counting cross-checks", ok, f"pairs={pairs} failures={bad} time={elapsed:.1f}s")
    assert ok


def test_10_determinism(criterion):
    outputs, times = [], []
    for _ in range(2):
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "graphlim", "verify", "--tier", "smoke"],
                              capture_output=True, check=False)
        times.append(time.perf_counter() - t0)
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(proc.stdout)
    ok = outputs[0] == outputs[1] and max(times) <= 60
    criterion("10 determinism", ok, f"bytes={len(outputs[0])} identical={outputs[0] == outputs[1]} "
                                    f"times={[round(t, 1) for t in times]}s")
    assert ok
