"""Command-line interface: ``graphlim <command> ...``.

Exit status: 0 on success, 1 on input or budget errors, 2 when a verifying
command finds a violated invariant.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .budget import Budget, BudgetExceeded
from .catalog import build_matrices, catalog_json, enumerate_catalog, verify_rank
from .convergence import (
    RadiusWarning,
    family_member,
    radius,
    sequence_report,
    taylor_certificate,
    taylor_model,
    taylor_eval,
)
from .counting import (
    HardCoreZero,
    hom_count,
    i_profile,
    ind_count,
    inj_count,
    load_target,
    log_t_density,
    t_density,
)
from .cumulants import LambdaVector, cgf_value, kappa_gj, random_lambda, target_from_lambda
from .graphs import GenerationError, GraphFormatError, generate, parse_family, parse_graph, serialize_graph
from .serial import dumps
from .verify import CHECKS, ORACLES, verify_all

log = logging.getLogger("graphlim")

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class InputError(Exception):
    pass


def _read_graph(path, degree_bound=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read graph file {path}: {exc.strerror}") from None
    try:
        return parse_graph(text, degree_bound)
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_lambda(path, k):
    try:
        lam = LambdaVector.from_json(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read lambda file {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if lam.k != k:
        raise InputError(f"{path}: lambda has k={lam.k}, expected {k}")
    return lam


def _random_lambdas(args, k, D=None):
    if args.cap <= 0:
        raise InputError("--cap must be positive")
    if D is not None and args.cap >= radius(D):
        raise InputError(f"--cap {args.cap} must be below radius({D}) = {radius(D):.6f}")
    rng = np.random.default_rng(args.seed)
    return [random_lambda(k, rng, args.cap, reduced=True) for _ in range(args.random)]


def _budget(args) -> Budget:
    b = Budget.default()
    if getattr(args, "max_coloring_bits", None) is not None:
        b = replace(b, max_coloring_bits=args.max_coloring_bits)
    if getattr(args, "max_tuples", None) is not None:
        b = replace(b, max_tuples=args.max_tuples)
    try:
        b.validate()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return b


def _emit(args, text: str) -> None:
    out = getattr(args, "output", None)
    if not out:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, target)


def _graph_info(G):
    return {"n": G.n, "m": G.m, "max_degree": G.max_degree}


# -- commands --------------------------------------------------------------


def cmd_gen(args):
    fam, params = parse_family(" ".join(args.family))
    try:
        G = generate(fam, *params, seed=args.seed)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    _emit(args, serialize_graph(G))
    return EXIT_OK


def cmd_count(args):
    G = _read_graph(args.graph, args.degree_bound)
    budget = _budget(args)
    doc = {"command": "count", "graph": _graph_info(G)}
    if args.into:
        H = _read_graph(args.into)
        doc.update(hom=hom_count(G, H), inj=inj_count(G, H), ind=ind_count(G, H))
    if args.target:
        try:
            H = load_target(Path(args.target).read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"{args.target}: {exc}") from None
        doc["t"] = t_density(G, H)
        try:
            doc["log_t"] = log_t_density(G, H)
        except HardCoreZero:
            doc["log_t"] = None
    if args.pattern_l:
        doc["i_profiles"] = {
            str(l): dict(sorted(i_profile(G, l, budget).counts.items()))
            for l in range(1, args.pattern_l + 1)
        }
    _emit(args, dumps(doc))
    return EXIT_OK


def cmd_cgf(args):
    G = _read_graph(args.graph, args.degree_bound)
    budget = _budget(args)
    lam = _read_lambda(args.lam, args.k) if args.lam else LambdaVector.zero(args.k)
    f = cgf_value(G, args.k, lam, budget)
    bridge = log_t_density(G, target_from_lambda(lam)) / G.n
    _emit(args, dumps({
        "command": "cgf", "k": args.k, "f": f, "f_bridge": bridge,
        "lambda_norm_inf": lam.norm_inf(),
    }))
    return EXIT_OK


def _parse_pairs(text):
    pairs = []
    for item in text.split(","):
        a, _, b = item.strip().partition("-")
        try:
            pairs.append((int(a), int(b)))
        except ValueError:
            raise InputError(f"bad color pair {item!r}; expected e.g. 0-1,1-1") from None
    return pairs


def cmd_cumulant(args):
    G = _read_graph(args.graph, args.degree_bound)
    budget = _budget(args)
    pairs = _parse_pairs(args.pairs)
    try:
        direct = kappa_gj(G, pairs, args.k, "direct", budget)
        decomp = kappa_gj(G, pairs, args.k, "decomposition", budget)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    agree = direct == decomp
    _emit(args, dumps({
        "command": "cumulant", "k": args.k, "pairs": [list(p) for p in pairs],
        "direct": direct, "decomposition": decomp, "agree": agree,
    }))
    return EXIT_OK if agree else EXIT_VIOLATION


def cmd_catalog(args):
    try:
        cat = enumerate_catalog(args.l)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {"command": "catalog", **catalog_json(cat)}
    status = EXIT_OK
    if args.k is not None:
        try:
            mats = build_matrices(args.l, args.k)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        doc.update(E=mats.E, P=mats.P, K=mats.K)
        if args.verify:
            graphs = [(g, _read_graph(g)) for g in args.graph or ()]
            rep = verify_rank(mats, graphs, _budget(args))
            rep["summary"] = (
                f"E triangular: {str(rep['E_lower_triangular']).lower()}; "
                f"P|F_l = I: {str(rep['P_connected_rows_identity']).lower()}; "
                f"rank K = {rep['rank_K']}"
            )
            doc["report"] = rep
            print(rep["summary"], file=sys.stderr)
            status = EXIT_OK if rep["ok"] else EXIT_VIOLATION
    elif args.verify:
        raise InputError("--verify needs --k")
    _emit(args, dumps(doc))
    return status


def cmd_taylor(args):
    G = _read_graph(args.graph, args.degree_bound)
    budget = _budget(args)
    model = taylor_model(G, args.k, args.order, budget)
    lams = [_read_lambda(p, args.k) for p in args.lam or ()]
    if args.random:
        lams += _random_lambdas(args, args.k, G.degree_bound)
    evaluations, status = [], EXIT_OK
    for lam in lams:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RadiusWarning)
            value = taylor_eval(model, lam)
        orders = tuple(range(1, args.order + 1))
        cert = taylor_certificate(G, args.k, lam, orders, model, budget)
        evaluations.append({"lambda": lam.to_json(), "taylor": value, **cert})
        if lam.log_weight_norm() < radius(G.degree_bound) and not cert["majorant_dominates"]:
            status = EXIT_VIOLATION
    coeffs = [
        {"alpha": list(a), "value": c}
        for a, c in sorted(model.coefficients.items()) if c
    ]
    if model.decomposition_agrees is False:
        status = EXIT_VIOLATION
    _emit(args, dumps({
        "command": "taylor", "k": args.k, "order": args.order, "v": model.v,
        "labels": [list(x) for x in model.labels], "coefficients": coeffs,
        "decomposition_agrees": model.decomposition_agrees,
        "radius": radius(G.degree_bound), "evaluations": evaluations,
    }))
    return status


def _parse_range(text):
    parts = [int(x) for x in text.split(":")]
    if len(parts) == 1:
        return parts
    lo, hi = parts[0], parts[1]
    step = parts[2] if len(parts) > 2 else 1
    return list(range(lo, hi + 1, step))


def cmd_diagnose(args):
    budget = _budget(args)
    try:
        ns = _parse_range(args.n)
    except ValueError:
        raise InputError(f"bad --n range {args.n!r}; expected LO:HI[:STEP]") from None
    lams = [_read_lambda(p, args.k) for p in args.lam or ()]
    if args.random:
        D = family_member(args.family, ns[0], args.seed).degree_bound
        lams += _random_lambdas(args, args.k, D)
    rep = sequence_report(args.family, ns, args.k, lams, args.L, args.ball_radius, args.seed, budget)
    if args.format == "csv":
        _emit(args, rep.to_csv())
    else:
        _emit(args, dumps({"command": "diagnose", **rep.to_json()}))
    return EXIT_OK


def cmd_verify(args):
    checks = None
    if args.checks is not None:
        checks = [c for c in args.checks.split(",") if c]
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise InputError(f"unknown checks {unknown}; known: {sorted(CHECKS)}")
    overrides = None
    if args.oracles:
        try:
            overrides = json.loads(Path(args.oracles).read_text())
        except OSError as exc:
            raise InputError(f"cannot read oracle file {args.oracles}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.oracles}: {exc}") from None
        unknown = sorted(set(overrides) - set(ORACLES))
        if unknown:
            raise InputError(f"unknown oracles {unknown}; known: {sorted(ORACLES)}")
        overrides = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
    rep = verify_all(args.tier, checks, oracle_overrides=overrides, timings=args.timings)
    for c in rep["checks"]:
        log.info("%s: %s", c["name"], "pass" if c["ok"] else "FAIL")
    _emit(args, dumps(rep))
    return EXIT_OK if rep["ok"] else EXIT_VIOLATION


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphlim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph=True):
        sp.add_argument("-o", "--output", help="write here (atomically) instead of stdout")
        sp.add_argument("--max-coloring-bits", type=float)
        sp.add_argument("--max-tuples", type=int)
        if graph:
            sp.add_argument("--graph", required=True, help="edge-list file")
            sp.add_argument("--degree-bound", type=int)

    def randoms(sp):
        sp.add_argument("--random", type=int, default=0, help="number of random lambdas")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--cap", type=float, default=0.01, help="max |coordinate| of random lambdas")

    sp = sub.add_parser("gen", help="emit a generated graph as an edge list")
    sp.add_argument("family", nargs="+", help="e.g. 'cycle 8', 'torus 3x4', 'random_regular 8 3'")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("count", help="hom/inj/ind, t(G,H) and i-profiles")
    common(sp)
    sp.add_argument("--into", help="simple target graph for hom/inj/ind")
    sp.add_argument("--target", help="weighted target JSON for t and log t")
    sp.add_argument("--pattern-l", type=int, default=0)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("cgf", help="f_{G,k}(lambda) by enumeration and by the bridge")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", help="lambda JSON file (default: origin)")
    sp.set_defaults(func=cmd_cgf)

    sp = sub.add_parser("cumulant", help="kappa_G(J) by both routes")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--pairs", required=True, help="color pairs, e.g. 0-1,1-1")
    sp.set_defaults(func=cmd_cumulant)

    sp = sub.add_parser("catalog", help="pattern catalog, E/P/K and rank report")
    common(sp, graph=False)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--graph", action="append", help="graph for the u = K w check (repeatable)")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("taylor", help="Taylor model, evaluations and tail certificates")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--order", type=int, default=3)
    sp.add_argument("--lambda", dest="lam", action="append")
    randoms(sp)
    sp.set_defaults(func=cmd_taylor)

    sp = sub.add_parser("diagnose", help="sequence report along a graph family")
    common(sp, graph=False)
    sp.add_argument("--family", required=True, help="template, e.g. 'cycle' or 'torus {n}x{n}'")
    sp.add_argument("--n", required=True, help="LO:HI[:STEP] or a single n")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--L", type=int, default=2)
    sp.add_argument("--ball-radius", type=int, default=2)
    sp.add_argument("--lambda", dest="lam", action="append")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    randoms(sp)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("verify", help="run the invariant suites")
    sp.add_argument("--tier", choices=("smoke", "full"), default="smoke")
    sp.add_argument("--checks", help="comma-separated subset (empty string: none)")
    sp.add_argument("--timings", action="store_true", help="include per-check seconds in the report")
    sp.add_argument("--oracles", help="JSON object overriding reference oracle values")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"graphlim: error: {exc}", file=sys.stderr)
    except BudgetExceeded as exc:
        print(f"graphlim: budget exceeded: {exc} (raise it with flags or GRAPHLIM_BUDGET)", file=sys.stderr)
    except GenerationError as exc:
        print(f"graphlim: generation failed: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"graphlim: invalid input: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
