"""Command-line interface.

Every subcommand reads JSON inputs, runs the mapped library operation and
emits a report that embeds the exact configuration, the seed, the library
version and a hash of the configuration, so identical invocations produce
bit-identical output.  Numeric results carry a provenance tag out of
{exact, brute_force, heuristic, fitted}.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 64 unknown
subcommand.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__, embed, expander, john, markov, mazur, rayleigh, suite
from .errors import EmptyFamily, NumericalError, ValidationError
from .spaces import Configuration, MetricSpace, space_from_json

SUBCOMMANDS = (
    "gap", "gap-plus", "rayleigh-check", "mazur-check", "extrapolate",
    "john", "embed", "verify-duality", "expander", "bounds", "calibrate",
    "suite",
)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NSGAP_THREADS", "1")))
    except ValueError:
        return 1


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _emit(report: dict, config: dict, args) -> None:
    config = _jsonable(config)
    payload = {
        "command": config.get("command"),
        "version": __version__,
        "seed": config.get("seed"),
        "config": config,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest(),
        "report": _jsonable(report),
    }
    if getattr(args, "format", "json") == "csv":
        lines = ["key,value"]
        flat = payload["report"]

        def walk(prefix, node):
            if isinstance(node, dict):
                for k in sorted(node):
                    walk(f"{prefix}{k}.", node[k])
            elif isinstance(node, list):
                for i, v in enumerate(node):
                    walk(f"{prefix}{i}.", v)
            else:
                lines.append(f"{prefix[:-1]},{node}")

        walk("", flat)
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _chain_from_arg(path: str) -> markov.StochasticChain:
    if path.endswith(".json"):
        return markov.chain_from_json(_load_json(path))
    with open(path, "r", encoding="utf-8") as fh:
        return markov.chain_from_text(fh.read())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsgap")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("gap", help="nonlinear spectral gap of a chain over a space")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--method", choices=("auto", "exact", "brute", "heuristic"),
                    default="auto")
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--iters", type=int, default=500)
    common(sp)

    sp = sub.add_parser("gap-plus", help="absolute gap by pair enumeration")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--q", type=float, default=2.0)
    common(sp)

    sp = sub.add_parser("rayleigh-check", help="quotient calculus identities")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--lam", type=float, default=0.5)
    sp.add_argument("--t", type=int, default=3)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--points", default=None,
                    help="JSON n x d array; a seeded Gaussian is used if omitted")
    common(sp)

    sp = sub.add_parser("mazur-check", help="Mazur map round trip / Holder fit")
    sp.add_argument("--function", required=True)
    sp.add_argument("--function-b", default=None)
    sp.add_argument("--space", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    common(sp)

    sp = sub.add_parser("extrapolate", help="two-exponent gap comparison")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    common(sp)

    sp = sub.add_parser("john", help="Hilbertian sandwich norm and D_X")
    sp.add_argument("--space", required=True)
    common(sp)

    sp = sub.add_parser("embed", help="average-distortion Hilbert embedding")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--mu", default="uniform",
                    help='"uniform" or a path to a JSON weight vector')
    common(sp)

    sp = sub.add_parser("verify-duality", help="forward duality at a witness")
    sp.add_argument("--embedding", required=True,
                    help="JSON report produced by the embed subcommand")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--metric", required=True)
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--q", type=float, default=2.0)
    common(sp)

    sp = sub.add_parser("expander", help="sample a regular graph and check it")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    common(sp)

    sp = sub.add_parser("bounds", help="closed-form expander bound calculators")
    sp.add_argument("--formula", choices=("dimension", "distortion", "coarse"),
                    required=True)
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--D", type=float, default=1.0)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--c-q", type=float, default=1.0)
    sp.add_argument("--omega1", type=float, default=1.0)
    common(sp)

    sp = sub.add_parser("calibrate", help="fit an unspecified comparison constant")
    sp.add_argument("--constant", choices=("C_thm4", "c_q", "C_pq"), required=True)
    sp.add_argument("--family-size", type=int, default=20)
    sp.add_argument("--calibration-file", default="calibration.json")
    common(sp)

    sp = sub.add_parser("suite", help="run a named verification battery")
    sp.add_argument("--name", default="acceptance")
    common(sp)
    return parser


def _cmd_gap(args) -> dict:
    chain = _chain_from_arg(args.chain)
    space = space_from_json(_load_json(args.space))
    method = args.method
    if method == "auto":
        if space.kind == "finite":
            method = "brute"
        elif space.kind == "lp_norm" and space.p == 2.0 and args.p == 2.0:
            method = "exact"
        else:
            method = "heuristic"
    if method == "exact":
        est = rayleigh.gamma_hilbert_exact(chain)
        provenance = "exact"
    elif method == "brute":
        est = rayleigh.gamma_bruteforce(chain, space, args.p)
        provenance = "brute_force"
    else:
        est = rayleigh.gamma_heuristic(chain, space, args.p,
                                       restarts=args.restarts, iters=args.iters,
                                       seed=args.seed)
        provenance = "heuristic"
    out = est.to_json()
    out["provenance"] = provenance
    return out


def _cmd_gap_plus(args) -> dict:
    chain = _chain_from_arg(args.chain)
    space = space_from_json(_load_json(args.space))
    est = rayleigh.gamma_plus_bruteforce(chain, space, args.q)
    out = est.to_json()
    out["provenance"] = "brute_force"
    return out


def _cmd_rayleigh_check(args) -> dict:
    chain = _chain_from_arg(args.chain)
    if args.points:
        pts = np.array(_load_json(args.points), dtype=float)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        pts = rng.standard_normal((chain.n, 2))
    x = Configuration(MetricSpace.lp(2.0, pts.shape[1]), pts)
    other = markov.lazy_power(chain, 1)
    out = rayleigh.rayleigh_calculus_check(x, chain, other, args.lam, args.t, args.p)
    out["provenance"] = "exact"
    return out


def _cmd_mazur_check(args) -> dict:
    space = space_from_json(_load_json(args.space))
    f = mazur.WeightedVectorFunction.from_json(_load_json(args.function))
    if args.function_b:
        g = mazur.WeightedVectorFunction.from_json(_load_json(args.function_b))
        scales = [0.8**k for k in range(20)]
        out = mazur.mazur_holder_check(f, g, space, args.p, args.q, scales)
        out["provenance"] = "fitted"
    else:
        out = mazur.mazur_roundtrip_check(f, space, args.p, args.q)
        out["provenance"] = "exact"
    return out


def _cmd_extrapolate(args) -> dict:
    chain = _chain_from_arg(args.chain)
    space = space_from_json(_load_json(args.space))
    out = mazur.extrapolation_check(chain, space, args.p, args.q)
    out["provenance"] = {"brute_force": "brute_force"}.get(out["kind_p"], out["kind_p"])
    return out


def _cmd_john(args) -> dict:
    space = space_from_json(_load_json(args.space))
    out = john.hilbert_distance(space)
    return {
        "D_X": out["D_X"],
        "Q": out["H"].Q.tolist(),
        "approximate": out["approximate"],
        "provenance": "heuristic" if out["approximate"] else "exact",
    }


def _cmd_embed(args) -> dict:
    dist = np.array(_load_json(args.metric), dtype=float)
    if args.mu == "uniform":
        mu = np.full(dist.shape[0], 1.0 / dist.shape[0])
    else:
        mu = np.array(_load_json(args.mu), dtype=float)
    emb = embed.average_embed_hilbert(dist, mu, args.theta)
    out = emb.to_json()
    out["provenance"] = "heuristic"
    return out


def _cmd_verify_duality(args) -> dict:
    payload = _load_json(args.embedding)
    rec = payload.get("report", payload)
    emb = embed.GramEmbedding(
        G=np.array(rec["G"], dtype=float),
        factor=np.array(rec["factor"], dtype=float),
        lip_certificate=float(rec["lip"]),
        spread_certificate=float(rec["spread"]),
        iterations=int(rec.get("iterations", 0)),
    )
    chain = _chain_from_arg(args.chain)
    dist = np.array(_load_json(args.metric), dtype=float)
    out = embed.duality_forward_check(emb, chain, dist, args.theta, args.q)
    out["provenance"] = "exact"
    return out


def _cmd_expander(args) -> dict:
    g = expander.random_regular_graph(args.n, args.d, args.seed)
    chain = expander.graph_chain(g)
    spec = markov.spectral_data(chain)
    spread = expander.distance_spread_check(g)
    return {
        "graph": expander.graph_to_json(g),
        "lambda2": spec.lambda2,
        "gamma_classical": "inf" if math.isinf(spec.gamma_classical)
        else spec.gamma_classical,
        "distance_spread": spread,
        "provenance": "exact",
    }


def _cmd_bounds(args) -> dict:
    if args.formula == "dimension":
        value = expander.dimension_lower_bound(args.n, args.d, args.gamma,
                                               args.D, args.q, args.c_q)
    elif args.formula == "distortion":
        value = expander.avg_distortion_lower_bound(args.n, args.d, args.gamma,
                                                    args.q)
    else:
        value = expander.coarse_obstruction(args.gamma, args.omega1, args.p,
                                            args.n, args.d)
    return {"formula": args.formula, "value": value, "log_base": "natural",
            "provenance": "fitted"}


def _cmd_calibrate(args) -> dict:
    if args.family_size < 1:
        raise EmptyFamily("the calibration family must be nonempty")
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    ratios = []
    if args.constant == "C_thm4":
        # smallest C with gamma_heuristic(l_inf^d, p=1) <= C log(D_X+1)/(1-l2)
        for _ in range(args.family_size):
            n = int(rng.integers(3, 6))
            d = int(rng.integers(2, 5))
            chain = markov.random_reversible_chain(n, rng)
            est = rayleigh.gamma_heuristic(chain, MetricSpace.lp(float("inf"), d),
                                           1.0, restarts=4, iters=100,
                                           seed=int(rng.integers(2**32)))
            base = rayleigh.theorem4_upper_bound(chain, math.sqrt(d), 1.0)
            ratios.append(est.value / base)
    elif args.constant == "c_q":
        # largest c keeping the dimension bound below the ambient dimension n
        # (an isometric Hilbert embedding always exists there): c <= gamma ln d
        for _ in range(args.family_size):
            n = int(rng.choice([16, 32, 64]))
            g = expander.random_regular_graph(n, 3, int(rng.integers(2**32)))
            chain = expander.graph_chain(g)
            spec = markov.spectral_data(chain)
            ratios.append(spec.gamma_classical * math.log(g.d))
    else:
        # C_pq: extrapolation right-ratio gamma_p / gamma_q over cycle chains
        for k in range(args.family_size):
            n = 3 + (k % 4)
            A = np.zeros((n, n))
            for i in range(n):
                A[i, (i + 1) % n] = 0.5
                A[i, (i - 1) % n] = 0.5
            chain = markov.build_reversible_chain(A)
            rep = mazur.extrapolation_check(
                markov.lazy_power(chain, 1), MetricSpace.lp(2.0, n), 1.0, 2.0)
            ratios.append(rep["right_ratio"])
    fitted = float(np.min(ratios) if args.constant == "c_q" else np.max(ratios))
    record = {"constant": args.constant, "fitted": fitted,
              "family_size": args.family_size, "seed": args.seed,
              "ratios": [float(r) for r in ratios], "provenance": "fitted"}
    with open(args.calibration_file, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(record), fh, sort_keys=True, indent=2)
    return record


def _cmd_suite(args) -> dict:
    if args.name != "acceptance":
        raise ValidationError(f"unknown suite {args.name!r}")
    report = suite.run_acceptance(args.seed, threads=_threads())
    report["provenance"] = "exact"
    return report


_DISPATCH = {
    "gap": _cmd_gap,
    "gap-plus": _cmd_gap_plus,
    "rayleigh-check": _cmd_rayleigh_check,
    "mazur-check": _cmd_mazur_check,
    "extrapolate": _cmd_extrapolate,
    "john": _cmd_john,
    "embed": _cmd_embed,
    "verify-duality": _cmd_verify_duality,
    "expander": _cmd_expander,
    "bounds": _cmd_bounds,
    "calibrate": _cmd_calibrate,
    "suite": _cmd_suite,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-") and argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f"unknown subcommand: {argv[0]}\n")
        return 64
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2
    try:
        report = _DISPATCH[args.command](args)
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3
    except (ValidationError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return 2
    config = {k: v for k, v in vars(args).items() if k not in ("output",)}
    _emit(report, config, args)
    if args.command == "suite" and not report.get("passed", False):
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
