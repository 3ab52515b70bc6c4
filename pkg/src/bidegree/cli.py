"""Command line entry point: ``bidegree <subcommand> ...``.

Node labels in every file are 1-indexed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .estimation import FitResult, Method, P0Params, SolverConfig, Status, solve
from .graph import (
    BiSequence,
    NoisyBiSequence,
    degrees,
    read_bisequence_csv,
    read_edge_list,
    write_bisequence_csv,
    write_edge_list,
)
from .graphical import denoise_l1
from .inference import pairwise_ci, single_variance
from .noise import Mechanism, PrivacyConfig, release_bidegree
from .simulation import (
    QQ_STATISTICS,
    ExperimentConfig,
    coverage_csv,
    coverage_rows,
    distance_csv,
    export_qq,
    qq_csv,
    run_distance,
    run_replications,
)

log = logging.getLogger("bidegree")


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _privacy(args) -> PrivacyConfig:
    if args.privacy:
        cfg = PrivacyConfig.from_json(args.privacy)
    elif args.epsilon is not None:
        cfg = PrivacyConfig(args.epsilon, args.mechanism, args.seed)
    else:
        raise SystemExit("error: give --privacy JSON or --epsilon")
    return cfg


def _looks_like_csv(path) -> bool:
    with open(path) as fh:
        for line in fh:
            if line.strip():
                return line.lstrip().startswith("node")
    return False


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_release(args):
    g = read_edge_list(args.edges, n=args.n)
    cfg = _privacy(args)
    z = release_bidegree(degrees(g), cfg, np.random.default_rng(cfg.seed))
    cols = ("out_noisy", "in_noisy")
    if args.output:
        write_bisequence_csv(z, args.output, columns=cols)
    else:
        _write_seq_stdout(z, cols)


def _write_seq_stdout(seq, columns):
    sys.stdout.write(f"node,{columns[0]},{columns[1]}\n")
    for k, (o, i) in enumerate(zip(seq.outdeg, seq.indeg), 1):
        sys.stdout.write(f"{k},{_fmt(o)},{_fmt(i)}\n")


def _fmt(x):
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def cmd_denoise(args):
    z = read_bisequence_csv(args.noisy, NoisyBiSequence)
    d_hat, g = denoise_l1(z)
    if args.output:
        write_bisequence_csv(d_hat, args.output)
    else:
        _write_seq_stdout(d_hat, ("out", "in"))
    if args.emit_graph:
        write_edge_list(g, args.emit_graph)


def _solver(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, method=args.method, init=args.init)


def cmd_fit(args):
    if _looks_like_csv(args.input):
        target = read_bisequence_csv(args.input)
    else:
        target = degrees(read_edge_list(args.input, n=args.n))
    res = solve(target, _solver(args))
    th = res.theta_hat
    with _output(args.output) as fh:
        fh.write("node,alpha,beta\n")
        for k in range(th.n):
            fh.write(f"{k + 1},{float(th.alpha[k])!r},{float(th.beta[k])!r}\n")
    blob = res.diagnostics() | {
        "n": th.n,
        "alpha": th.alpha.tolist(),
        "beta": th.beta.tolist(),
        "target_out": np.asarray(res.target.outdeg, dtype=float).tolist(),
        "target_in": np.asarray(res.target.indeg, dtype=float).tolist(),
    }
    if args.diagnostics:
        Path(args.diagnostics).write_text(json.dumps(blob, indent=2) + "\n")
    if not res.converged:
        log.warning("fit status: %s", res.status.value)
    return 0 if res.converged else 3


def _load_fit(path) -> FitResult:
    blob = json.loads(Path(path).read_text())
    th = P0Params(blob["alpha"], blob["beta"])
    target = BiSequence(np.asarray(blob["target_out"]), np.asarray(blob["target_in"]))
    return FitResult(th, Status(blob["status"]), int(blob["iterations"]), float(blob["residual"]), target)


def _parse_pair(s: str):
    try:
        i, j = (int(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"pair must look like 'i,j', got {s!r}") from None
    return i, j


def cmd_infer(args):
    fit = _load_fit(args.fit)
    if not fit.converged:
        raise SystemExit(f"error: fit status is {fit.status.value}; no inference possible")
    n = fit.theta_hat.n
    priv = PrivacyConfig.from_json(args.privacy) if args.privacy else None
    for i, j in args.pair:
        if not (1 <= i <= n and 1 <= j <= n):
            raise SystemExit(f"error: pair ({i},{j}) out of range 1..{n}")

    offset = 0 if args.block == "alpha" else n
    with _output(args.se_output) as fh:
        fh.write("parameter,node,estimate,se\n")
        th = fit.theta_hat
        for name, vec, off, count in (("alpha", th.alpha, 0, n), ("beta", th.beta, n, n - 1)):
            for k in range(count):
                se = math.sqrt(single_variance(fit, off + k, priv))
                fh.write(f"{name},{k + 1},{float(vec[k])!r},{se!r}\n")
    if args.pair:
        if args.se_output is None and args.output is None:
            sys.stdout.write("\n")
        with _output(args.output) as fh:
            fh.write("i,j,center,lower,upper\n")
            for i, j in args.pair:
                ci = pairwise_ci(fit, offset + i - 1, offset + j - 1, args.level)
                fh.write(f"{i},{j},{ci.center!r},{ci.lower!r},{ci.upper!r}\n")


def _load_configs(path) -> list[dict]:
    blob = json.loads(Path(path).read_text())
    if isinstance(blob, dict) and "configs" in blob:
        blob = blob["configs"]
    return blob if isinstance(blob, list) else [blob]


def cmd_simulate(args):
    cfgs = [ExperimentConfig.from_dict(d) for d in _load_configs(args.config)]
    if args.fast:
        cfgs = [c.fast() for c in cfgs]
    if args.table == "coverage":
        rows = []
        for c in cfgs:
            rows.extend(coverage_rows(c, run_replications(c, fit=True)))
        text = coverage_csv(rows)
    elif args.table == "distance":
        text = distance_csv(cfgs, [run_distance(c) for c in cfgs])
    else:
        if len(cfgs) != 1:
            raise SystemExit("error: qq export takes exactly one config")
        text = qq_csv(export_qq(cfgs[0], args.statistic))
    with _output(args.output) as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_privacy_args(p):
    p.add_argument("--privacy", help="privacy config JSON {epsilon, mechanism, seed}")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--mechanism", default=Mechanism.DISCRETE_LAPLACE.value, choices=[m.value for m in Mechanism])
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bidegree", description="Private release and p0-model inference for directed bi-degree sequences.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("release", help="edge list -> noisy bi-degree CSV")
    p.add_argument("edges")
    p.add_argument("--n", type=int, help="node count (default: largest label)")
    p.add_argument("-o", "--output")
    _add_privacy_args(p)
    p.set_defaults(func=cmd_release)

    p = sub.add_parser("denoise", help="noisy CSV -> closest graphical bi-degree CSV")
    p.add_argument("noisy")
    p.add_argument("-o", "--output")
    p.add_argument("--emit-graph", metavar="PATH", help="write a realizing edge list")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("fit", help="degree CSV or edge list -> p0 estimates")
    p.add_argument("input")
    p.add_argument("--n", type=int, help="node count for edge-list input")
    p.add_argument("-o", "--output", help="CSV node,alpha,beta (default stdout)")
    p.add_argument("--diagnostics", metavar="JSON", help="write status, iterations, residual and estimates")
    p.add_argument("--method", default=Method.NEWTON.value, choices=[m.value for m in Method])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--init", default="zero", choices=["zero", "logit"])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("infer", help="fit JSON -> standard errors and pairwise intervals")
    p.add_argument("fit", help="JSON written by 'fit --diagnostics'")
    p.add_argument("--privacy", help="privacy config JSON; omit for a non-private fit")
    p.add_argument("--pair", type=_parse_pair, action="append", default=[], metavar="I,J")
    p.add_argument("--block", choices=["alpha", "beta"], default="alpha", help="parameter block for --pair")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--se-output")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("simulate", help="Monte Carlo tables")
    p.add_argument("--table", required=True, choices=["coverage", "distance", "qq"])
    p.add_argument("--config", required=True, help="JSON object, list, or {\"configs\": [...]}")
    p.add_argument("--statistic", default="xi", choices=QQ_STATISTICS)
    p.add_argument("--fast", action="store_true", help="cap replications at 500")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        rc = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
