"""Invariant suites aggregated into a single pass/fail report."""

from __future__ import annotations

import logging
import math
import time
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .catalog import build_matrices, catalog_codes_vertex_first, enumerate_catalog, verify_rank
from .counting import (
    ball_distribution,
    hom_count,
    i_profile,
    ind_count,
    inj_count,
    log_t_density,
    threshold_target,
    weighted_hom,
)
from .convergence import direction_cumulants, spanning_tree_cumulant_check, taylor_certificate, taylor_model
from .cumulants import (
    LambdaVector,
    cgf_value,
    color_pattern_orbits,
    coordinate_cumulant,
    kappa_gj,
    random_lambda,
    target_from_lambda,
)
from .graphs import canonical_form, complete, cycle, path, spanning_tree_count, torus

log = logging.getLogger(__name__)

ORACLES = {
    "cgf_k2_loop": 0.5 * math.log((math.e + 3) / 4),
    "hom_p3_c4": 16,
    "catalog_sizes": (1, 3, 16),
    "tree_c4": 4,
}

TIERS = {
    "smoke": {
        "bridge_graphs": ("C4", "P5", "K4"), "bridge_k": (2, 3), "bridge_samples": 10,
        "decomp_l": (1, 2), "decomp_k": (2, 3), "decomp_graphs": ("C4", "P5"),
        "matrix_l": (1, 2),
        "deriv_graphs": ("C4",),
        "fmn_graphs": ("C4", "P5", "K4"), "fmn_dirs": 4, "fmn_r": 4,
        "tree_graphs": ("C5",), "tree_r": 3,
        "taylor_samples": 3,
        "cycle_n": (10, 14), "cycle_l": 2, "cycle_r": 2,
        "count_graphs": ("K2", "P3", "C4", "K3"),
    },
    "full": {
        "bridge_graphs": ("C4", "C6", "P5", "K4", "T33"), "bridge_k": (2, 3), "bridge_samples": 100,
        "decomp_l": (1, 2, 3), "decomp_k": (2, 3, 4), "decomp_graphs": ("C4", "C5", "P5", "K4"),
        "matrix_l": (1, 2, 3),
        "deriv_graphs": ("C4", "C6"),
        "fmn_graphs": ("C4", "C6", "P5", "P6", "K4"), "fmn_dirs": 20, "fmn_r": 6,
        "tree_graphs": ("K4", "C5"), "tree_r": 4,
        "taylor_samples": 20,
        "cycle_n": (10, 40), "cycle_l": 3, "cycle_r": 3,
        "count_graphs": ("K1", "K2", "P3", "P4", "C4", "K3", "K4", "C5", "C6", "P6"),
    },
}

GRAPHS = {
    "K1": lambda: complete(1), "K2": lambda: complete(2), "K3": lambda: complete(3),
    "K4": lambda: complete(4), "P3": lambda: path(3), "P4": lambda: path(4),
    "P5": lambda: path(5), "P6": lambda: path(6), "C4": lambda: cycle(4),
    "C5": lambda: cycle(5), "C6": lambda: cycle(6), "T33": lambda: torus(3, 3),
}


def check_oracles(p, oracles):
    lam = LambdaVector.from_coords(2, {("e", 0, 0): 1.0})
    got = {
        "cgf_k2_loop": cgf_value(complete(2), 2, lam),
        "hom_p3_c4": hom_count(path(3), cycle(4)),
        "catalog_sizes": tuple(len(enumerate_catalog(l).all_patterns) for l in (1, 2, 3)),
        "tree_c4": spanning_tree_count(cycle(4)),
    }
    failed = []
    for name, want in oracles.items():
        have = got[name]
        ok = abs(have - want) <= 1e-12 if isinstance(want, float) else have == want
        if not ok:
            failed.append(name)
    return not failed, {"failed": failed}


def check_bridge(p, oracles):
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for name in p["bridge_graphs"]:
        G = GRAPHS[name]()
        for k in p["bridge_k"]:
            for _ in range(p["bridge_samples"]):
                lam = random_lambda(k, rng, 0.25)
                diff = abs(cgf_value(G, k, lam) - log_t_density(G, target_from_lambda(lam)) / G.n)
                worst = max(worst, diff)
    return worst <= 1e-12, {"max_abs_diff": worst}


def check_decomposition(p, oracles):
    mismatches = 0
    cases = 0
    for name in p["decomp_graphs"]:
        G = GRAPHS[name]()
        for l in p["decomp_l"]:
            for k in p["decomp_k"]:
                for J in color_pattern_orbits(l, k):
                    cases += 1
                    if kappa_gj(G, J, k, "direct") != kappa_gj(G, J, k, "decomposition"):
                        mismatches += 1
    return mismatches == 0, {"cases": cases, "mismatches": mismatches}


def check_matrices(p, oracles):
    bad = []
    for l in p["matrix_l"]:
        rep = verify_rank(build_matrices(l, 2 * l))
        if not rep["ok"]:
            bad.append(l)
        if l <= 3 and catalog_codes_vertex_first(l) != set(enumerate_catalog(l).codes):
            bad.append(f"double-generation l={l}")
    return not bad, {"failed": bad}


def finite_difference(f, lam: LambdaVector, coords, h=1e-4) -> float:
    """Central difference of order len(coords) (1 or 2) along full coordinates."""

    def at(shifts):
        return f(_shift(lam, shifts))

    if len(coords) == 1:
        (a,) = coords
        return (at({a: h}) - at({a: -h})) / (2 * h)
    a, b = coords
    if a == b:
        return (at({a: h}) - 2 * at({}) + at({a: -h})) / (h * h)
    return (at({a: h, b: h}) - at({a: h, b: -h}) - at({a: -h, b: h}) + at({a: -h, b: -h})) / (4 * h * h)


def _shift(lam: LambdaVector, shifts) -> LambdaVector:
    vals = dict(lam.coords())
    for c, d in shifts.items():
        vals[c] = vals[c] + d
    return LambdaVector.from_coords(lam.k, vals)


def edge_coords(k):
    return [("e", i, j) for i in range(k) for j in range(k)]


def check_derivatives(p, oracles):
    worst = 0.0
    k = 2
    for name in p["deriv_graphs"]:
        G = GRAPHS[name]()
        f = lambda lam: cgf_value(G, k, lam)  # noqa: E731
        zero = LambdaVector.zero(k)
        coords = edge_coords(k)
        for combo in [(c,) for c in coords] + list(combinations(coords, 2)) + [(c, c) for c in coords]:
            exact = float(coordinate_cumulant(G, k, combo)) / G.n
            fd = finite_difference(f, zero, combo)
            worst = max(worst, abs(fd - exact) / abs(exact))
    return worst <= 1e-6, {"max_rel_err": worst}


def sign_directions(k, count, seed):
    rng = np.random.default_rng(seed)
    nred = k + k * (k + 1) // 2
    dirs = [LambdaVector.from_reduced(k, [1.0] * nred)]
    for _ in range(count):
        dirs.append(LambdaVector.from_reduced(k, rng.choice([-1.0, 1.0], nred)))
    return dirs


def check_fmn(p, oracles):
    violations, strict_misses = 0, 0
    for name in p["fmn_graphs"]:
        G = GRAPHS[name]()
        for lam0 in sign_directions(2, p["fmn_dirs"], 7):
            dc = direction_cumulants(G, 2, lam0, p["fmn_r"])
            for r, (kr, b) in enumerate(zip(dc.kappas, dc.bounds), start=1):
                if abs(kr) > b:
                    violations += 1
                elif abs(kr) == b and r > 1:
                    strict_misses += 1
    return violations == 0 and strict_misses == 0, {"violations": violations, "strict_misses": strict_misses}


def check_spanning_tree(p, oracles):
    bad = 0
    cases = 0
    for name in p["tree_graphs"]:
        G = GRAPHS[name]()
        for r in range(1, p["tree_r"] + 1):
            for sub in combinations(range(G.m), r):
                for pairs in product([(0, 0), (0, 1), (1, 1)], repeat=r):
                    rep = spanning_tree_cumulant_check(G, sub, pairs, 2)
                    cases += 1
                    if not (rep["within_bound"] and rep["vanishes_if_disconnected"]):
                        bad += 1
    return bad == 0, {"cases": cases, "failures": bad}


def check_taylor(p, oracles):
    G = cycle(6)
    model = taylor_model(G, 2, 6, cross_check_order=0)
    rng = np.random.default_rng(11)
    bad = 0
    for _ in range(p["taylor_samples"]):
        lam = random_lambda(2, rng, 0.03, reduced=True)
        lam = lam.scaled(0.03 / lam.norm_inf())
        cert = taylor_certificate(G, 2, lam, model=model)
        if not (cert["strictly_decreasing"] and cert["majorant_dominates"]):
            bad += 1
    return bad == 0, {"failures": bad}


def check_cycles(p, oracles):
    lo, hi = p["cycle_n"]
    ref_profiles, ref_balls = None, None
    same = True
    for n in range(lo, hi + 1):
        G = cycle(n)
        prof = {}
        for l in range(1, p["cycle_l"] + 1):
            counts = i_profile(G, l)
            for F in enumerate_catalog(l).connected_patterns:
                c = canonical_form(F)
                prof[c] = Fraction(counts[c], n)
        balls = [ball_distribution(G, r).freqs for r in range(p["cycle_r"] + 1)]
        if ref_profiles is None:
            ref_profiles, ref_balls = prof, balls
        same = same and prof == ref_profiles and balls == ref_balls
    return same, {"n_range": [lo, hi]}


def check_counting(p, oracles):
    bad = []
    gs = {name: GRAPHS[name]() for name in p["count_graphs"]}
    for name, G in gs.items():
        if inj_count(complete(2), G) != 2 * G.m:
            bad.append(f"inj(K2,{name})")
        if G.m:
            if 2 * i_profile(G, 1)[b"1|1"] != inj_count(complete(2), G):
                bad.append(f"i(edge,{name})")
            prof = i_profile(G, 2)
            if prof[b"1|1.2|2"] != inj_count(path(3), G):
                bad.append(f"i(2-path,{name})")
    for (a, F), (b, H) in product(gs.items(), repeat=2):
        if F.n <= 6 and H.n <= 6:
            h, i, d = hom_count(F, H), inj_count(F, H), ind_count(F, H)
            if not d <= i <= h:
                bad.append(f"order({a},{b})")
            if weighted_hom(F, threshold_target(H)) != h:
                bad.append(f"weighted({a},{b})")
    return not bad, {"failed": bad}


CHECKS = {
    "oracles": check_oracles,
    "bridge_identity": check_bridge,
    "decomposition_identity": check_decomposition,
    "matrix_suite": check_matrices,
    "derivative_consistency": check_derivatives,
    "fmn_bound": check_fmn,
    "spanning_tree_lemma": check_spanning_tree,
    "taylor_convergence": check_taylor,
    "cycle_constancy": check_cycles,
    "counting_cross_checks": check_counting,
}


def verify_all(tier: str = "smoke", checks=None, oracle_overrides=None, timings: bool = False) -> dict:
    """Run the named checks (default: all) at a tier's budgets.

    The report is deterministic unless ``timings`` is set; timings always go
    to the log.
    """
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}; choose from {sorted(TIERS)}")
    params = TIERS[tier]
    oracles = {**ORACLES, **(oracle_overrides or {})}
    names = list(CHECKS) if checks is None else list(checks)
    results = []
    for name in names:
        if name not in CHECKS:
            raise ValueError(f"unknown check {name!r}")
        t0 = time.perf_counter()
        try:
            ok, detail = CHECKS[name](params, oracles)
        except Exception as exc:  # a crashing suite is a failed check, not a crashed run
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        elapsed = time.perf_counter() - t0
        log.info("check %s: %s (%.2fs)", name, "pass" if ok else "FAIL", elapsed)
        entry = {"name": name, "ok": bool(ok), "detail": detail}
        if timings:
            entry["seconds"] = round(elapsed, 3)
        results.append(entry)
    return {
        "command": "verify",
        "tier": tier,
        "ok": all(r["ok"] for r in results),
        "failed": [r["name"] for r in results if not r["ok"]],
        "checks": results,
    }
