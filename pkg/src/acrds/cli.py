"""Command line entry point: ``acrds {generate,report,grid,simulate,concentrate}``.

Every subcommand writes CSV (or an edge list for ``generate``) to stdout or
``--out``. Exit codes: 0 success, 2 usage/configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import experiments as ex
from .errors import AcrdsError, ConfigError
from .graph import SbmSpec, largest_connected_component, out_block_probability, read_edge_list, sample_sbm
from .sampler import DeadBranchPolicy, Replacement, SamplingConfig, SeedStrategy

log = logging.getLogger("acrds")

EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SIMULATE_HELP = """\
config file: one `key = value` per line, `#` starts a comment.

  network             sbm | edge_list                       (default sbm)
  edge_list           path to edge list (network = edge_list)
  largest_component   true | false                          (default true)
  sbm_k               number of equal blocks
  sbm_block_size      nodes per block
  sbm_p_in            in-block edge probability
  sbm_p_out           out-block edge probability, or
  sbm_edge_ratio      expected in-block / out-block edge count (solves p_out)
  feature             block_indicator | column              (default block_indicator)
  feature_threshold   y = 1 for block ids below this value  (block_indicator)
  feature_path        one value per node, sorted external ids (column)
  coupons             referrals per participant              (default 3)
  replacement         with | without                        (default with)
  seed_strategy       uniform | stationary | feature        (default uniform)
  seed_value          feature value for seed_strategy = feature
  dead_branch_policy  prune | fallback                      (default prune)
  replications        number of replicates                  (default 100)
  fractions           comma list of sample fractions        (default 0.01,0.05,0.1)
  schemes             comma list of uniform, ac, ac-a, ac-b, coin-flip (default uniform,ac)
  estimators          comma list of rds2, ac_stationary, true_stationary (default rds2)
  base_seed           integer (overridden by --seed)

replication CSV columns: replicate, scheme, fraction, estimator, estimate,
  n_collected, target, died, population_mean
summary CSV columns: scheme, fraction, estimator, count, mean, median, q1, q3,
  iqr, bias  (quartiles by linear interpolation)
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


KNOWN_KEYS = {
    "network", "edge_list", "largest_component", "sbm_k", "sbm_block_size", "sbm_p_in", "sbm_p_out",
    "sbm_edge_ratio", "feature", "feature_threshold", "feature_path", "coupons", "replacement",
    "seed_strategy", "seed_value", "dead_branch_policy", "replications", "fractions", "schemes",
    "estimators", "base_seed",
}


def scenario_from_mapping(kv: dict[str, str]) -> ex.ScenarioConfig:
    unknown = set(kv) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        if kv.get("network", "sbm") == "sbm":
            k = int(kv["sbm_k"])
            size = int(kv["sbm_block_size"])
            p_in = float(kv["sbm_p_in"])
            if "sbm_p_out" in kv:
                p_out = float(kv["sbm_p_out"])
            else:
                p_out = out_block_probability(k, size, p_in, float(kv["sbm_edge_ratio"]))
            network = ex.SbmSource(SbmSpec.two_level((size,) * k, p_in, p_out))
        elif kv["network"] == "edge_list":
            network = ex.EdgeListSource(kv["edge_list"], _bool(kv.get("largest_component", "true")))
        else:
            raise ConfigError(f"unknown network {kv['network']!r}")
        if kv.get("feature", "block_indicator") == "block_indicator":
            feature = ex.BlockIndicator(int(kv["feature_threshold"]))
        elif kv["feature"] == "column":
            feature = ex.FeatureColumn(kv["feature_path"])
        else:
            raise ConfigError(f"unknown feature {kv['feature']!r}")
        seed_value = kv.get("seed_value")
        sampling = SamplingConfig(
            coupons=int(kv.get("coupons", 3)),
            replacement=Replacement(kv.get("replacement", "with")),
            seed_strategy=SeedStrategy(kv.get("seed_strategy", "uniform"), None if seed_value is None else float(seed_value)),
            dead_branch_policy=DeadBranchPolicy(kv.get("dead_branch_policy", "prune")),
        )
        return ex.ScenarioConfig(
            network=network,
            feature=feature,
            sampling=sampling,
            replications=int(kv.get("replications", 100)),
            base_seed=int(kv.get("base_seed", 0)),
            fractions=_floats(kv.get("fractions", "0.01,0.05,0.1")),
            schemes=tuple(s.strip() for s in kv.get("schemes", "uniform,ac").split(",")),
            estimators=tuple(s.strip() for s in kv.get("estimators", "rds2").split(",")),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="acrds", description="Respondent-driven sampling and anti-cluster RDS experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=0, help="base seed")

    p = sub.add_parser("generate", help="sample an SBM graph and print its edge list")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--block-size", type=int, help="nodes per block")
    p.add_argument("--n", type=int, help="total nodes (split equally over k blocks)")
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, default=0.0)
    p.add_argument("--blocks-out", help="also write one block id per node to this path")

    p = sub.add_parser("report", help="network statistics and lag-1 covariances (CSV)")
    common(p)
    p.add_argument("--edges", required=True)
    p.add_argument("--feature", required=True, help="feature column file")
    p.add_argument("--no-lcc", action="store_true", help="keep all components")

    p = sub.add_parser("grid", help="spectral-gap ratios over two-block unbalance grids (CSV)")
    common(p)
    p.add_argument("--ratios", default="1,2,5,10,20")
    p.add_argument("--eps", default="0.01,0.05,0.1,0.25,0.4")
    p.add_argument("--mode", choices=[*ex.GRID_MODES, "both"], default="both")
    p.add_argument("--base-size", type=int, default=100)

    p = sub.add_parser(
        "simulate",
        help="replicate referral samples and estimates (CSV)",
        epilog=SIMULATE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common(p)
    p.add_argument("--config", required=True)
    p.add_argument("--replications", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--summary", action="store_true", help="emit the per-group summary instead of raw rows")
    p.add_argument("--summary-out", help="also write the summary to this path")
    p.add_argument("--complete-only", action="store_true", help="summaries skip died trees")

    p = sub.add_parser("concentrate", help="sample-vs-population kernel distances over an N sweep (CSV)")
    common(p)
    p.add_argument("--sizes", default="200,400,800")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p-in", type=float, default=0.3)
    p.add_argument("--p-out", type=float, default=0.1)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_generate(args) -> None:
    if (args.block_size is None) == (args.n is None):
        raise ConfigError("give exactly one of --block-size or --n")
    size = args.block_size
    if size is None:
        if args.n % args.k:
            raise ConfigError("--n must be divisible by --k")
        size = args.n // args.k
    spec = SbmSpec.two_level((size,) * args.k, args.p_in, args.p_out)
    g, z = sample_sbm(spec, args.seed)
    _emit(g.to_edge_list(), args.out)
    if args.blocks_out:
        Path(args.blocks_out).write_text("".join(f"{b}\n" for b in z), encoding="utf-8")


def _cmd_report(args) -> None:
    g = read_edge_list(args.edges)
    y = ex.read_feature_column(args.feature)
    if y.size != g.n:
        raise ConfigError(f"feature file has {y.size} values for {g.n} nodes")
    if not args.no_lcc:
        g, keep = largest_connected_component(g)
        y = y[keep]
    _emit(ex.to_csv([ex.network_report(g, y)]), args.out)


def _cmd_grid(args) -> None:
    modes = ex.GRID_MODES if args.mode == "both" else (args.mode,)
    rows = [r for m in modes for r in ex.unbalance_grid(_floats(args.ratios), _floats(args.eps), m, args.base_size)]
    _emit(ex.to_csv(rows), args.out)


def _cmd_simulate(args) -> None:
    kv = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
    kv["base_seed"] = str(args.seed)
    if args.replications is not None:
        kv["replications"] = str(args.replications)
    cfg = scenario_from_mapping(kv)
    rows = ex.run_replications(cfg, workers=args.workers)
    summary = ex.to_csv(ex.summarize(rows, complete_only=args.complete_only), [f.name for f in fields(ex.SummaryRow)])
    if args.summary_out:
        Path(args.summary_out).write_text(summary, encoding="utf-8")
    _emit(summary if args.summary else ex.to_csv(rows, ex.REPLICATION_FIELDS), args.out)


def _cmd_concentrate(args) -> None:
    rows = ex.concentration_sweep(_ints(args.sizes), args.seeds, args.p_in, args.p_out, args.k, args.seed)
    _emit(ex.to_csv(rows), args.out)


COMMANDS = {
    "generate": _cmd_generate,
    "report": _cmd_report,
    "grid": _cmd_grid,
    "simulate": _cmd_simulate,
    "concentrate": _cmd_concentrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"acrds: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, AcrdsError) as exc:
        if isinstance(exc, FileNotFoundError):
            print(f"acrds: configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"acrds: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
