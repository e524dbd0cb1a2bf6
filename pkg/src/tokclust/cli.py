"""Command-line harness: batch clustering, reduction, micro-benchmarks and
the staged-reduction demo.

Exit codes: 0 success, 2 I/O or file parse error, 3 invalid parameters,
4 internal error. The fallback seed comes from the ATC_SEED environment
variable when --seed is not given.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attention import random_block_weights, run_stack
from .clusterer import (
    DistanceThreshold,
    TargetClusters,
    cluster_mst_single,
    cluster_naive,
    cluster_nn_chain,
)
from .errors import TensorFileError
from .geometry import pairwise_distances
from .linkage import LinkageKind
from .reducer import StageSchedule, reduce_block, schedule_from_mapping, TokenBatch
from .tensorio import read_tensor, write_tensor

ENGINES = ("naive", "nnchain", "mst")

BENCH_CSV_COLUMNS = (
    "engine",
    "linkage",
    "n_tokens",
    "batch",
    "repeats",
    "mean_ms",
    "p50_ms",
    "p95_ms",
    "throughput_items_per_s",
    "threads",
)


class ParameterError(ValueError):
    """Bad command-line or config parameters (exit code 3)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 3
        raise ParameterError(message)


@dataclass(frozen=True)
class BenchRow:
    engine: str
    linkage: str
    n_tokens: int
    batch: int
    repeats: int
    mean_ms: float
    p50_ms: float
    p95_ms: float
    throughput_items_per_s: float
    threads: int


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("ATC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParameterError(f"ATC_SEED must be an integer, got {env!r}") from None
    return 0


def _solve_condensed(dm, engine: str, kind: LinkageKind, stop):
    if engine == "naive":
        return cluster_naive(dm, kind, stop)
    if engine == "nnchain":
        return cluster_nn_chain(dm, kind, stop)
    if engine == "mst":
        return cluster_mst_single(dm, stop)
    raise ParameterError(f"unknown engine {engine!r}")


def _solve_sequence(seq: np.ndarray, engine: str, kind: LinkageKind, stop):
    return _solve_condensed(pairwise_distances(seq), engine, kind, stop)


def _map_sequences(fn, sequences, threads: int):
    if threads <= 1:
        return [fn(s) for s in sequences]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, sequences))


def cmd_cluster(args) -> int:
    data = read_tensor(args.input).astype(np.float64)
    kind = LinkageKind.parse(args.linkage)
    if args.engine == "mst" and kind is not LinkageKind.SINGLE:
        raise ParameterError("engine 'mst' supports only single linkage")
    if (args.k is None) == (args.threshold is None):
        raise ParameterError("exactly one of --k and --threshold is required")
    stop = TargetClusters(args.k) if args.k is not None else DistanceThreshold(args.threshold)

    results = _map_sequences(
        lambda seq: _solve_sequence(seq, args.engine, kind, stop), data, args.threads
    )
    payload = {
        "engine": args.engine,
        "linkage": kind.value,
        "stop": {"k": args.k} if args.k is not None else {"threshold": args.threshold},
        "labels": [a.labels.tolist() for _, a in results],
        "heights": [[m.height for m in d.merges] for d, _ in results],
    }
    Path(args.output).write_text(json.dumps(payload, separators=(",", ":")) + "\n")
    return 0


def cmd_reduce(args) -> int:
    data = read_tensor(args.input).astype(np.float64)
    kind = LinkageKind.parse(args.linkage)
    b, n, _ = data.shape
    if args.sizes is not None:
        sizes_raw = json.loads(Path(args.sizes).read_text())
        sizes = [np.asarray(s, dtype=np.int64) for s in sizes_raw]
        if len(sizes) != b or any(s.shape != (n,) for s in sizes):
            raise ParameterError("sizes JSON must hold one length-N vector per sequence")
    else:
        sizes = [np.ones(n, dtype=np.int64) for _ in range(b)]

    batch = TokenBatch(
        features=[seq for seq in data], sizes=sizes, protected_prefix=args.protected
    )
    reduced, records = reduce_block(batch, kind, args.keep)
    out = np.stack(reduced.features)
    write_tensor(f"{args.output}.tensor", out)
    meta = {
        "linkage": kind.value,
        "keep": args.keep,
        "protected_prefix": args.protected,
        "labels": [r.assignment.labels.tolist() for r in records],
        "sizes": [s.tolist() for s in reduced.sizes],
    }
    Path(f"{args.output}.json").write_text(json.dumps(meta, separators=(",", ":")) + "\n")
    return 0


def run_benchmark(
    n_list,
    batch_list,
    engines,
    linkages,
    repeats: int = 20,
    warmup_fraction: float = 0.25,
    seed: int = 0,
    dim: int = 64,
    threads: int = 1,
    keep_fraction: float = 0.5,
) -> list[BenchRow]:
    """Time clustering over a grid of token counts, batch sizes, engines and
    linkages on seeded random features.

    The first ``warmup_fraction`` of the repeats warm caches and are excluded
    from the statistics. Distance matrices are precomputed outside the timed
    region (they are cheap batched matmuls in practice), so timings cover the
    clustering engine only and exclude all file I/O.
    """
    if not n_list or not batch_list or not engines or not linkages:
        raise ParameterError("benchmark grid lists must be non-empty")
    if repeats < 1:
        raise ParameterError("repeats must be >= 1")
    if not 0.0 <= warmup_fraction < 1.0:
        raise ParameterError("warmup fraction must be in [0, 1)")
    kinds = {name: LinkageKind.parse(name) for name in linkages}
    for engine in engines:
        if engine not in ENGINES:
            raise ParameterError(f"unknown engine {engine!r}")
        if engine == "mst" and any(k is not LinkageKind.SINGLE for k in kinds.values()):
            raise ParameterError("engine 'mst' supports only single linkage")

    rows: list[BenchRow] = []
    warmup = min(int(repeats * warmup_fraction), repeats - 1)
    for engine in engines:
        for linkage in linkages:
            kind = kinds[linkage]
            for n in n_list:
                if n < 2:
                    raise ParameterError("token counts must be >= 2")
                for batch in batch_list:
                    if batch < 1:
                        raise ParameterError("batch sizes must be >= 1")
                    rng = np.random.default_rng(seed)
                    feats = rng.standard_normal((batch, n, dim))
                    dms = [pairwise_distances(seq) for seq in feats]
                    stop = TargetClusters(max(1, int(n * keep_fraction)))
                    timings = []
                    for _ in range(repeats):
                        t0 = time.perf_counter()
                        _map_sequences(
                            lambda dm: _solve_condensed(dm, engine, kind, stop),
                            dms,
                            threads,
                        )
                        timings.append((time.perf_counter() - t0) * 1000.0)
                    kept = np.array(timings[warmup:])
                    mean_ms = float(kept.mean())
                    rows.append(
                        BenchRow(
                            engine=engine,
                            linkage=linkage,
                            n_tokens=n,
                            batch=batch,
                            repeats=repeats,
                            mean_ms=mean_ms,
                            p50_ms=float(np.percentile(kept, 50)),
                            p95_ms=float(np.percentile(kept, 95)),
                            throughput_items_per_s=batch / (mean_ms / 1000.0),
                            threads=threads,
                        )
                    )
    return rows


def write_bench_csv(path, rows: list[BenchRow]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(BENCH_CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.engine,
                    row.linkage,
                    row.n_tokens,
                    row.batch,
                    row.repeats,
                    f"{row.mean_ms:.6f}",
                    f"{row.p50_ms:.6f}",
                    f"{row.p95_ms:.6f}",
                    f"{row.throughput_items_per_s:.3f}",
                    row.threads,
                ]
            )


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"{flag} must be a comma-separated integer list") from None


def cmd_bench(args) -> int:
    rows = run_benchmark(
        n_list=_parse_int_list(args.n_list, "--n-list"),
        batch_list=_parse_int_list(args.batch_list, "--batch-list"),
        engines=[e.strip() for e in args.engine.split(",") if e.strip()],
        linkages=[l.strip() for l in args.linkage.split(",") if l.strip()],
        repeats=args.repeats,
        warmup_fraction=args.warmup,
        seed=_resolve_seed(args.seed),
        threads=args.threads,
    )
    write_bench_csv(args.output, rows)
    return 0


def _parse_config_text(text: str) -> dict[str, str]:
    config: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno} is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


def cmd_reduce_demo(args) -> int:
    config = _parse_config_text(Path(args.input).read_text())
    if args.schedule is not None:
        config["schedule"] = args.schedule
    if args.t is not None:
        config["t"] = str(args.t)
    if args.L is not None:
        config["L"] = str(args.L)
    if args.blocks is not None:
        config["blocks"] = args.blocks
    if args.keep_rate is not None:
        config["keep_rate"] = str(args.keep_rate)

    try:
        side = int(config["grid_side"])
    except KeyError:
        raise ParameterError("config needs grid_side") from None
    if side < 1:
        raise ParameterError("grid_side must be >= 1")
    try:
        schedule = schedule_from_mapping(config)
    except ValueError as e:
        raise ParameterError(str(e)) from None
    kind = LinkageKind.parse(config.get("linkage", "average"))
    seed = _resolve_seed(args.seed if args.seed is not None else _int_or_none(config.get("seed")))
    dim = int(config.get("dim", "64"))
    heads = int(config.get("heads", "4"))
    hidden = int(config.get("hidden", str(2 * dim)))
    protected = int(config.get("protected", "1"))
    if isinstance(schedule, StageSchedule):
        depth = int(config.get("L", "12"))
        if schedule.blocks and depth <= schedule.blocks[-1]:
            raise ParameterError("stack depth L must exceed the last stage block")
    else:
        depth = schedule.n_blocks

    n_patches = side * side
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((protected + n_patches, dim))
    weights = [random_block_weights(rng, dim, hidden, heads) for _ in range(depth)]
    result = run_stack(x, weights, schedule, kind, protected_prefix=protected)

    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    cumulative = np.arange(n_patches, dtype=np.int64)
    stages = []
    stage_no = 0
    for block, record in enumerate(result.records):
        if record is None:
            continue
        stage_no += 1
        cumulative = record.assignment.labels[cumulative]
        grid = cumulative.reshape(side, side)
        (out_dir / f"grid_stage_{stage_no}.json").write_text(
            json.dumps(grid.tolist(), separators=(",", ":")) + "\n"
        )
        stages.append(
            {"block": block, "pre": record.pre_count, "post": record.post_count}
        )
    counts = {
        "grid_side": side,
        "protected_prefix": protected,
        "initial_unprotected": n_patches,
        "per_block_unprotected": result.unprotected_counts,
        "stages": stages,
    }
    (out_dir / "counts.json").write_text(json.dumps(counts, separators=(",", ":")) + "\n")
    return 0


def _int_or_none(value: str | None) -> int | None:
    return None if value is None else int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tokclust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster each sequence of a tensor file")
    p.add_argument("--input", required=True, help="tensor file of (B, N, D) features")
    p.add_argument("--output", required=True, help="destination JSON path")
    p.add_argument("--linkage", default="average", help="single | complete | average")
    p.add_argument("--engine", default="nnchain", choices=ENGINES)
    p.add_argument("--k", type=int, help="target cluster count")
    p.add_argument("--threshold", type=float, help="maximum merge height")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("reduce", help="merge each sequence down to a token budget")
    p.add_argument("--input", required=True, help="tensor file of (B, N, D) features")
    p.add_argument("--output", required=True, help="output prefix (.tensor and .json)")
    p.add_argument("--sizes", help="optional JSON file of per-sequence token sizes")
    p.add_argument("--linkage", default="average")
    p.add_argument("--keep", type=int, required=True, help="unprotected tokens to keep")
    p.add_argument("--protected", type=int, default=0, help="protected prefix length")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bench", help="time the clustering engines on a grid")
    p.add_argument("--n-list", default="196,256,576,1024,4096")
    p.add_argument("--batch-list", default="1")
    p.add_argument("--engine", default="nnchain", help="comma-separated engine list")
    p.add_argument("--linkage", default="average", help="comma-separated linkage list")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--warmup", type=float, default=0.25, help="warmup fraction")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", required=True, help="destination CSV path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("reduce-demo", help="staged reduction demo over a mini stack")
    p.add_argument("--input", required=True, help="key=value config file")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--schedule", choices=("constant", "linear", "stages"))
    p.add_argument("--t", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--blocks", help="comma-separated stage block indices")
    p.add_argument("--keep-rate", dest="keep_rate", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_reduce_demo)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ParameterError as e:
        print(f"tokclust: {e}", file=sys.stderr)
        return 3
    try:
        return args.func(args)
    except ParameterError as e:
        print(f"tokclust: {e}", file=sys.stderr)
        return 3
    except (TensorFileError, OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        print(f"tokclust: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"tokclust: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # internal invariant violation
        print(f"tokclust: internal error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
