"""Batch command line front end.

Exit codes: 0 success, 2 usage error, 3 data error, 4 capacity error,
5 integrity error. Every flag can also be set through an ``INDCLUST_<FLAG>``
environment variable (e.g. ``INDCLUST_SEED=7``); explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import finite_dist
from .clustering import ExactOracle, PluginOracle, clin, clink, three_sample
from .core import CapacityError, IntegrityError, RunConfig, SeriesSet, ValidationError
from .datagen import KINDS, ProcessSpec, generate
from .estimators import COMPRESSORS, SumInformation, compression_sum_rate
from .io import SCHEMA_VERSION, DataError, dump_json, partition_json, read_csv, write_csv

log = logging.getLogger("indclust")

ENV_PREFIX = "INDCLUST_"


class UsageError(ValidationError):
    pass


def _env_default(name: str, fallback, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"bad value for {ENV_PREFIX}{name.upper()}: {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["oracle", "iid", "stationary"], default=_env_default("mode", "stationary"))
    p.add_argument("--k", type=int, default=_env_default("k", None, int))
    p.add_argument("--m-max", type=int, default=_env_default("m_max", None, int))
    p.add_argument("--l-max", type=int, default=_env_default("l_max", None, int))
    p.add_argument("--alpha", type=float, default=_env_default("alpha", 0.05, float))
    p.add_argument("--threshold-c", type=float, default=_env_default("threshold_c", 1.0, float))
    p.add_argument("--permutations", type=int, default=_env_default("permutations", 200, int))
    p.add_argument("--seed", type=int, default=_env_default("seed", 0, int))
    p.add_argument("--threads", type=int, default=_env_default("threads", 1, int))
    p.add_argument("--compressor", choices=sorted(COMPRESSORS), default=_env_default("compressor", None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indclust", description="Independence clustering of time series.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic sample as CSV plus ground truth JSON")
    g.add_argument("--kind", choices=KINDS, default="parity")
    g.add_argument("--spec", help="ProcessSpec JSON file (overrides --kind/--n/params)")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--groups", type=_int_list, help="group/cluster sizes, e.g. 3,3")
    g.add_argument("--rho", type=float, help="within-cluster correlation (gaussian_clusters)")
    g.add_argument("--delta", type=float, help="hidden-state offset (translation kinds)")
    g.add_argument("--epsilon", type=float, help="rotation jitter (perturbed_translation)")
    g.add_argument("--offset-mode", choices=["fixed", "independent"])
    g.add_argument("--seed", type=int, default=_env_default("seed", 0, int))
    g.add_argument("--output", "-o", required=True, help="CSV path; truth goes to <stem>.truth.json")

    c = sub.add_parser("cluster", help="cluster a CSV sample or a finite distribution file")
    _add_run_flags(c)
    c.add_argument("--input", "-i", required=True)
    c.add_argument("--output", "-o")

    t = sub.add_parser("three-sample", help="decide (x1,x2)|x3 versus x1|(x2,x3) for a 3-column CSV")
    _add_run_flags(t)
    t.add_argument("--input", "-i", required=True)
    t.add_argument("--output", "-o")

    o = sub.add_parser("oracle-demo", help="run CLIN with the exact oracle and compare with brute force")
    o.add_argument("--input", "-i", help="finite distribution file; default is a parity construction")
    o.add_argument("--groups", type=_int_list, default=[3, 3])
    o.add_argument("--output", "-o")

    b = sub.add_parser("bench", help="recovery fraction over a grid of sample sizes")
    _add_run_flags(b)
    b.add_argument("--kind", choices=KINDS, default="translation_clusters")
    b.add_argument("--groups", type=_int_list, default=[2, 2])
    b.add_argument("--rho", type=float, default=0.8)
    b.add_argument("--n-grid", type=_int_list, default=[1000, 10000, 100000])
    b.add_argument("--seeds", type=int, default=10)
    b.add_argument("--output", "-o")
    return parser


def _config(args) -> RunConfig:
    m_max = args.m_max
    if m_max is None and args.mode == "iid":
        # i.i.d. in time: longer blocks add no information about dependence
        m_max = 1
    return RunConfig(m_max=m_max, l_max=args.l_max, seed=args.seed, alpha=args.alpha,
                     threshold_c=args.threshold_c, permutation_count=args.permutations, threads=args.threads)


def _config_echo(cfg: RunConfig, args) -> dict:
    return {"m_max": cfg.m_max, "l_max": cfg.l_max, "alpha": cfg.alpha, "threshold_c": cfg.threshold_c,
            "permutations": cfg.permutation_count, "threads": cfg.threads, "k": getattr(args, "k", None),
            "compressor": getattr(args, "compressor", None), "input": getattr(args, "input", None)}


def _emit(obj: dict, path) -> None:
    text = dump_json(obj, path)
    if path is None:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    if args.spec:
        try:
            spec = ProcessSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"bad process spec {args.spec}: {exc}") from exc
    else:
        params = {}
        if args.groups is not None:
            params["cluster_sizes" if args.kind != "parity" else "group_sizes"] = args.groups
        for key, val in (("rho_within", args.rho), ("delta", args.delta), ("epsilon", args.epsilon),
                         ("offset_mode", args.offset_mode)):
            if val is not None:
                params[key] = val
        spec = ProcessSpec(args.kind, args.n, args.seed, params)
    out = generate(spec)
    write_csv(out.series, args.output)
    truth_path = Path(args.output).with_suffix(".truth.json")
    dump_json({"schema_version": SCHEMA_VERSION, "spec": spec.to_dict(),
               **partition_json(out.truth, out.series.names)}, truth_path)
    log.info("wrote %s and %s", args.output, truth_path)
    return 0


def cmd_cluster(args) -> int:
    cfg = _config(args)
    result = {"schema_version": SCHEMA_VERSION, "command": "cluster", "mode": args.mode, "seed": cfg.seed,
              "config": _config_echo(cfg, args), "score": None, "oracle_calls": 0, "estimator_calls": 0,
              "candidates_examined": 0}
    if args.mode == "oracle":
        try:
            d = finite_dist.loads(Path(args.input).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read {args.input}: {exc}") from exc
        except ValidationError as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"{args.input}: {exc}") from exc
        res = clin(d, ExactOracle(d))
        names = [f"x{i + 1}" for i in range(d.N)]
    else:
        s = read_csv(args.input)
        names = list(s.names)
        est = SumInformation(s, cfg)
        if args.mode == "iid":
            res = clin(s, PluginOracle(est))
        else:
            if args.k is None:
                raise UsageError("stationary mode needs --k")
            if args.k < 2 or args.k > s.N:
                raise UsageError(f"--k must lie in [2, {s.N}], got {args.k}")
            res = clink(s, args.k, est, cfg)
            result["score"] = res.score
            if args.compressor:
                result["compression_rate_bits"] = compression_sum_rate(
                    s, res.partition.blocks, args.compressor)
                result["compression_rate_note"] = "heuristic rate estimate; may be negative"
    result.update(partition_json(res.partition, names))
    result.update(oracle_calls=res.oracle_calls, estimator_calls=res.estimator_calls,
                  candidates_examined=res.candidates_examined, call_bound=res.call_bound)
    _emit(result, args.output)
    return 0


def cmd_three_sample(args) -> int:
    s = read_csv(args.input)
    if s.N != 3:
        raise DataError(f"three-sample needs exactly 3 columns, got {s.N}")
    cfg = _config(args)
    res = three_sample(*s.data, cfg=cfg)
    _emit({"schema_version": SCHEMA_VERSION, "command": "three-sample", "label": res.label,
           "margin": res.margin, "low_margin": res.low_margin, "left": res.left, "right": res.right,
           "names": list(s.names), "seed": cfg.seed}, args.output)
    return 0


def cmd_oracle_demo(args) -> int:
    if args.input:
        try:
            d = finite_dist.loads(Path(args.input).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read {args.input}: {exc}") from exc
    else:
        d = finite_dist.parity_distribution(args.groups)
    res = clin(d, ExactOracle(d))
    truth = finite_dist.brute_force_finest(d)
    names = [f"x{i + 1}" for i in range(d.N)]
    _emit({"schema_version": SCHEMA_VERSION, "command": "oracle-demo",
           "clin": res.partition.as_lists(one_based=True),
           "brute_force": truth.as_lists(one_based=True), "agree": res.partition == truth,
           "oracle_calls": res.oracle_calls, "call_bound": res.call_bound, "names": names}, args.output)
    return 0 if res.partition == truth else 5


def bench_rows(kind: str, groups, n_grid, seeds: int, mode: str, k, cfg: RunConfig, rho: float = 0.8):
    rows = []
    for n in n_grid:
        hits = 0
        for seed in range(seeds):
            params = {"group_sizes": groups} if kind == "parity" else {"cluster_sizes": groups}
            if kind == "gaussian_clusters":
                params["rho_within"] = rho
            out = generate(ProcessSpec(kind, n, cfg.seed + seed, params))
            run_cfg = RunConfig(**{**cfg.__dict__, "seed": cfg.seed + seed})
            est = SumInformation(out.series, run_cfg)
            if mode == "stationary":
                res = clink(out.series, k or out.truth.k, est, run_cfg)
            else:
                res = clin(out.series, PluginOracle(est))
            hits += res.partition == out.truth
        rows.append({"n": n, "seeds": seeds, "recovered": hits, "fraction": hits / seeds})
    return rows


def cmd_bench(args) -> int:
    if args.mode == "oracle":
        raise UsageError("bench supports iid and stationary modes")
    cfg = _config(args)
    rows = bench_rows(args.kind, args.groups, args.n_grid, args.seeds, args.mode, args.k, cfg, args.rho)
    lines = ["n,seeds,recovered,fraction"] + [f"{r['n']},{r['seeds']},{r['recovered']},{r['fraction']:.3f}"
                                              for r in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"generate": cmd_generate, "cluster": cmd_cluster, "three-sample": cmd_three_sample,
            "oracle-demo": cmd_oracle_demo, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse reports usage errors (and --help) this way
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 4
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 5
    except ValidationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
