"""Batch experiment runner.

Builds a configuration (from a file or a generator), assembles the requested
protocol, runs seeded Monte-Carlo estimation or exact enumeration, and emits
a JSON report; sweeps additionally emit CSV rows.  Reports are byte-stable
for fixed flags and seed except for the wallclock field.

Exit codes: 0 success, 2 parameter problem, 3 enumeration or retry guard.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from fractions import Fraction

from . import adversary, pls, protocols, transforms
from .bits import width_for
from .bruteforce import domination_number
from .engine import RunReport, estimate
from .errors import BudgetViolation, GuardExceeded
from .netconfig import NetworkConfig, generate

REPORT_FIELDS = ("params", "accept_all_fraction", "sigma_bits", "gamma_bits",
                 "rho_bits", "bound", "wallclock")
SWEEP_COLUMNS = ("alpha", "q", "sigma_bits", "gamma_bits", "rho_bits",
                 "accept_all_fraction", "bound")


# -- plumbing ---------------------------------------------------------------


def _default_seed() -> int:
    return int(os.environ.get("DIP_SEED", "0"))


def _load_config(args) -> NetworkConfig:
    if getattr(args, "graph", None):
        config = NetworkConfig.load(args.graph)
    elif getattr(args, "gen", None):
        parts = args.gen.split(":")
        kind = parts[0]
        if len(parts) < 2:
            raise ValueError("generator spec must look like kind:n[:extra]")
        n = int(parts[1])
        extra = parts[2] if len(parts) > 2 else None
        if kind == "regular":
            config = generate(kind, n, d=int(extra or 3), seed=args.seed)
        elif kind == "gnp":
            config = generate(kind, n, p=float(extra or 0.5), seed=args.seed)
        else:
            config = generate(kind, n)
    else:
        raise ValueError("provide --graph FILE or --gen KIND:N")
    labels = getattr(args, "labels", "keep")
    if labels == "zeros":
        config = config.with_labels(["0"] * config.n)
    elif labels == "ones":
        config = config.with_labels(["1"] * config.n)
    elif labels == "rand":
        import random

        rng = random.Random(f"labels/{args.seed}")
        config = config.with_labels([str(rng.randrange(2)) for _ in config.ids])
    elif labels != "keep":
        raise ValueError("labels must be keep, zeros, ones, or rand")
    return config.require_valid()


def _report(params: dict, rep: RunReport | None, bound, started: float,
            extra: dict | None = None) -> dict:
    out = {
        "params": params,
        "accept_all_fraction": rep.accept_all_fraction if rep else None,
        "sigma_bits": rep.max_cert_bits if rep else None,
        "gamma_bits": rep.max_msg_bits if rep else None,
        "rho_bits": rep.max_random_bits if rep else None,
        "bound": float(bound) if bound is not None else None,
        "wallclock": round(time.perf_counter() - started, 6),
    }
    if extra:
        out.update(extra)
    return out


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        _atomic_write(out_path, text)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, rows: list[dict]) -> None:
    import csv as _csv
    import io

    buf = io.StringIO()
    writer = _csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k) for k in SWEEP_COLUMNS})
    _atomic_write(path, buf.getvalue())


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


# -- subcommand handlers -----------------------------------------------------


def _cmd_triangle(args) -> int:
    config = _load_config(args)
    alphas = _int_list(args.alpha)
    started = time.perf_counter()
    rows = []
    for alpha in alphas:
        instance = protocols.triangle_instance(config, alpha, args.c)
        prover = None
        if args.cheat == "interp":
            prover = adversary.interpolation_cheater(instance)
        builder = {
            "shared": protocols.triangle_dma_shared,
            "dist2round": protocols.triangle_dma_distributed_2round,
            "dist1round": protocols.triangle_dma_distributed_1round,
        }[args.variant]
        spec = builder(instance, prover=prover)
        rep = estimate(spec, config, args.trials, seed=args.seed)
        bound = 2 * (instance.slices - 1) / instance.field.q
        rows.append({
            "alpha": alpha,
            "q": instance.field.q,
            "sigma_bits": rep.max_cert_bits,
            "gamma_bits": rep.max_msg_bits,
            "rho_bits": rep.max_random_bits,
            "accept_all_fraction": rep.accept_all_fraction,
            "bound": bound,
        })
    params = {"command": "triangle", "gen": args.gen, "graph": args.graph,
              "alpha": args.alpha, "c": args.c, "variant": args.variant,
              "cheat": args.cheat, "trials": args.trials, "seed": args.seed}
    if len(rows) == 1:
        row = rows[0]
        report = {
            "params": params,
            "accept_all_fraction": row["accept_all_fraction"],
            "sigma_bits": row["sigma_bits"],
            "gamma_bits": row["gamma_bits"],
            "rho_bits": row["rho_bits"],
            "bound": row["bound"],
            "wallclock": round(time.perf_counter() - started, 6),
        }
    else:
        report = {"params": params, "sweep": rows,
                  "wallclock": round(time.perf_counter() - started, 6)}
    _emit(report, args.out)
    if args.csv:
        _write_csv(args.csv, rows)
    return 0


def _cmd_optval(args) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    weights = None
    if args.weights and args.weights != "unit":
        with open(args.weights, encoding="ascii") as fh:
            weights = {int(k): int(v) for k, v in json.load(fh).items()}
    threshold = args.k if args.k is not None else domination_number(config)
    instance = protocols.opt_instance(config, args.problem, threshold, weights)
    prover = None
    bound = None
    if args.cheat.startswith("forge:"):
        delta = int(args.cheat.split(":", 1)[1])
        prover = adversary.forge_sum_cheater(instance, delta)
        bound = adversary.forged_sum_acceptance(instance, delta, args.pool)
    elif args.cheat != "honest":
        raise ValueError("cheat must be honest or forge:DELTA")
    spec = protocols.optval_protocol(instance, args.mode, pool_size=args.pool,
                                     prover=prover)
    rep = estimate(spec, config, args.trials, seed=args.seed)
    params = {"command": "optval", "gen": args.gen, "graph": args.graph,
              "problem": args.problem, "k": threshold, "weights": args.weights,
              "mode": args.mode, "pool": args.pool, "cheat": args.cheat,
              "trials": args.trials, "seed": args.seed}
    _emit(_report(params, rep, bound, started), args.out)
    return 0


def _cmd_coloring(args) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    if args.colors == "greedy":
        colors = {v: cert.color for v, cert in pls.dist2_prove(config).items()}
    else:
        with open(args.colors, encoding="ascii") as fh:
            colors = {int(k): int(v) for k, v in json.load(fh).items()}
    spec = protocols.coloring_ma(config, colors, num_colors=args.num_colors,
                                 mode=args.mode, repetitions=args.repetitions)
    rep = estimate(spec, config, args.trials, seed=args.seed)
    bound = 2.0 ** -args.repetitions if args.mode == "fingerprint" else 0.0
    params = {"command": "coloring", "gen": args.gen, "graph": args.graph,
              "colors": args.colors, "num_colors": args.num_colors,
              "mode": args.mode, "repetitions": args.repetitions,
              "trials": args.trials, "seed": args.seed}
    _emit(_report(params, rep, bound, started), args.out)
    return 0


def _cmd_lucky(args) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    instance = protocols.lucky_instance(config, args.lam)
    spec = protocols.lucky_protocol(instance, args.mode, pool_size=args.pool)
    rep = estimate(spec, config, args.trials, seed=args.seed)
    params = {"command": "lucky", "gen": args.gen, "graph": args.graph,
              "lam": args.lam, "mode": args.mode, "pool": args.pool,
              "trials": args.trials, "seed": args.seed}
    _emit(_report(params, rep, None, started), args.out)
    return 0


def _even_parity(word: str) -> bool:
    return word.count("1") % 2 == 0


def _cmd_pls(args) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    id_width = width_for(max(config.ids))
    if args.scheme == "tree":
        certs = pls.tree_prove(config)
        verdicts = pls.tree_verify_all(config, certs, mode=args.mode,
                                       seed=args.seed)
        sigma = pls.tree_cert_bits(config)
        gamma = sigma + id_width
    elif args.scheme == "dist2":
        certs = pls.dist2_prove(config)
        verdicts = pls.dist2_verify(config, certs)
        count_w = width_for(config.n)
        color_w = width_for(min(config.max_degree ** 2 + 1, config.n) - 1)
        sigma = (pls.tree_cert_bits(config) + 2 * count_w + color_w)
        gamma = sigma + id_width
    elif args.scheme == "cycle":
        if all(lab == "" for lab in config.labels):
            config = config.with_labels(["0"] * config.n)
        verdicts = pls.cycle_lcp(config, _even_parity)
        sigma = config.n
        gamma = config.n
    elif args.scheme == "regular":
        certs = pls.regular_universal_prove(config, c=args.c, seed=args.seed)
        verdicts = pls.regular_universal_verify(
            config, certs, lambda edges, labels: True)
        sigma = max(len(cert.to_bits()) for cert in certs.values())
        gamma = sigma + id_width
    else:
        raise ValueError("scheme must be tree, dist2, cycle, or regular")
    accepted = all(verdicts.values())
    rep = RunReport(trials=1, accepted=int(accepted), max_cert_bits=sigma,
                    max_msg_bits=gamma, max_random_bits=0, seed=args.seed)
    params = {"command": "pls", "scheme": args.scheme, "gen": args.gen,
              "graph": args.graph, "mode": getattr(args, "mode", None),
              "c": getattr(args, "c", None), "seed": args.seed}
    _emit(_report(params, rep, None, started), args.out)
    return 0


def _cmd_compile(args) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    bound = None
    if args.boost is not None:
        base = transforms.shared_coin_spec()
        spec = transforms.boost(base, config, args.boost)
        c, p = args.boost, Fraction(2, 5)
        bound = sum(Fraction(math.comb(c, j)) * p ** j * (1 - p) ** (c - j)
                    for j in range((c + 1) // 2, c + 1))
        mode = f"boost:{args.boost}"
    elif args.derand:
        instance = protocols.triangle_instance(config, args.alpha, args.c)
        base = protocols.triangle_dma_shared(instance)
        spec = transforms.derandomize_shared(base, config, "MA")
        bound = 2 * (instance.slices - 1) / instance.field.q
        mode = "derand"
    elif args.dmam2dam:
        if all(lab == "" for lab in config.labels):
            config = config.with_labels(["0"] * config.n)
        desc = transforms.toy_dmam(config)
        spec = transforms.compile_dmam_to_dam(desc, config, k=args.k)
        k = args.k if args.k is not None else config.n * desc.sigma
        bound = 0.5 ** k
        mode = "dmam2dam"
    else:
        raise ValueError("pick one of --boost C, --derand, --dmam2dam")
    rep = estimate(spec, config, args.trials, seed=args.seed)
    params = {"command": "compile", "mode": mode, "gen": args.gen,
              "graph": args.graph, "alpha": args.alpha, "c": args.c,
              "k": args.k, "trials": args.trials, "seed": args.seed}
    _emit(_report(params, rep, bound, started), args.out)
    return 0


def _cmd_oracle(args) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    if args.target in ("cycle", "toy") and all(lab == "" for lab in config.labels):
        config = config.with_labels(["0"] * config.n)
    if args.target == "cycle":
        spec = pls.cycle_lcp_spec(config, _even_parity)
        space = [adversary.full_alphabet(config, config.n)]
    elif args.target == "toy":
        desc = transforms.toy_dmam(config)
        spec = transforms.dmam_spec(desc)
        alpha = adversary.full_alphabet(config, desc.sigma)
        space = [alpha, alpha]
    elif args.target == "triangle":
        instance = protocols.triangle_instance(config, args.alpha, args.c)
        spec = protocols.triangle_dma_shared(instance)
        space = [adversary.triangle_zero_alphabet(instance)]
    elif args.target == "optval":
        threshold = args.k if args.k is not None else domination_number(config) - 1
        instance = protocols.opt_instance(config, args.problem, threshold)
        spec = protocols.optval_protocol(instance, "plain", pool_size=args.pool)
        space = [adversary.optval_restricted_alphabet(instance)]
    else:
        raise ValueError("target must be cycle, toy, triangle, or optval")
    best = adversary.exhaustive_prover(spec, config, space)
    params = {"command": "oracle", "target": args.target, "gen": args.gen,
              "graph": args.graph, "alpha": args.alpha, "c": args.c,
              "k": args.k, "problem": args.problem, "pool": args.pool,
              "seed": args.seed}
    report = {
        "params": params,
        "accept_all_fraction": float(best),
        "exact": f"{best.numerator}/{best.denominator}",
        "sigma_bits": None,
        "gamma_bits": None,
        "rho_bits": None,
        "bound": None,
        "wallclock": round(time.perf_counter() - started, 6),
    }
    _emit(report, args.out)
    return 0


# -- argument parsing --------------------------------------------------------


def _add_common(sp, trials_default: int = 1000) -> None:
    sp.add_argument("--graph", help="configuration file (netconfig text format)")
    sp.add_argument("--gen", help="generator spec kind:n[:extra], e.g. cycle:5")
    sp.add_argument("--labels", default="keep",
                    choices=["keep", "zeros", "ones", "rand"])
    sp.add_argument("--trials", type=int, default=trials_default)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", help="write the JSON report here (atomic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diplab",
        description="randomized distributed certification experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("triangle", help="triangle-freeness protocols")
    _add_common(sp)
    sp.add_argument("--alpha", default="1",
                    help="comma-separated list sweeps and emits CSV rows")
    sp.add_argument("--c", type=int, default=protocols.DEFAULT_SOUNDNESS_C)
    sp.add_argument("--variant", default="shared",
                    choices=["shared", "dist2round", "dist1round"])
    sp.add_argument("--cheat", default="honest", choices=["honest", "interp"])
    sp.add_argument("--csv", help="sweep CSV output path")
    sp.set_defaults(func=_cmd_triangle)

    sp = sub.add_parser("optval", help="optimization-value thresholds")
    _add_common(sp)
    sp.add_argument("--problem", default="mds", choices=list(protocols.PROBLEMS))
    sp.add_argument("--k", type=int, default=None,
                    help="threshold; defaults to the true optimum")
    sp.add_argument("--weights", default="unit", help="'unit' or a JSON file")
    sp.add_argument("--mode", default="fingerprint",
                    choices=["fingerprint", "plain"])
    sp.add_argument("--pool", type=int, default=None)
    sp.add_argument("--cheat", default="honest",
                    help="'honest' or 'forge:DELTA'")
    sp.set_defaults(func=_cmd_optval)

    sp = sub.add_parser("coloring", help="proper-coloring verification")
    _add_common(sp)
    sp.add_argument("--colors", default="greedy", help="'greedy' or a JSON file")
    sp.add_argument("--num-colors", type=int, default=None)
    sp.add_argument("--mode", default="fingerprint",
                    choices=["fingerprint", "plain"])
    sp.add_argument("--repetitions", type=int, default=7)
    sp.set_defaults(func=_cmd_coloring)

    sp = sub.add_parser("lucky", help="lucky-labeling verification")
    _add_common(sp)
    sp.add_argument("--lam", type=int, default=2)
    sp.add_argument("--mode", default="fingerprint",
                    choices=["fingerprint", "plain"])
    sp.add_argument("--pool", type=int, default=None)
    sp.set_defaults(func=_cmd_lucky)

    sp = sub.add_parser("pls", help="deterministic certification schemes")
    sp.add_argument("scheme", choices=["tree", "dist2", "cycle", "regular"])
    _add_common(sp, trials_default=1)
    sp.add_argument("--mode", default="plain", choices=["plain", "fingerprint"])
    sp.add_argument("--c", type=int, default=4)
    sp.set_defaults(func=_cmd_pls)

    sp = sub.add_parser("compile", help="protocol compilers")
    _add_common(sp)
    sp.add_argument("--boost", type=int, default=None, metavar="C")
    sp.add_argument("--derand", action="store_true")
    sp.add_argument("--dmam2dam", action="store_true")
    sp.add_argument("--alpha", type=int, default=1)
    sp.add_argument("--c", type=int, default=protocols.DEFAULT_SOUNDNESS_C)
    sp.add_argument("--k", type=int, default=None)
    sp.set_defaults(func=_cmd_compile)

    sp = sub.add_parser("oracle", help="exact best-prover enumeration")
    _add_common(sp, trials_default=1)
    sp.add_argument("--target", required=True,
                    choices=["cycle", "toy", "triangle", "optval"])
    sp.add_argument("--alpha", type=int, default=1)
    sp.add_argument("--c", type=int, default=protocols.DEFAULT_SOUNDNESS_C)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--problem", default="mds", choices=list(protocols.PROBLEMS))
    sp.add_argument("--pool", type=int, default=3)
    sp.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 3
    except (ValueError, BudgetViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
