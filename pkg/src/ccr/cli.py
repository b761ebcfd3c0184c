"""Command-line entry point: ``ccr <subcommand> [flags]``.

Subcommands
-----------
generate   build a task (random or named fixture) and its prompt corpus
truth      exact PNS/ATE/PN/PS for every quantity of the task
run        collect answers from a reasoner
evaluate   subsample, compute errors, classify; writes report.json and CSVs
viz        DOT rendering of the cut tree coloured by validity
simulate   convergence studies (linear-ate, inductive-pns, deductive-pns)

Every subcommand accepts ``--config FILE`` with a JSON object whose keys are
flag names (dashes or underscores); flags given on the command line win.
Errors are reported as one JSON object on stderr with exit status 2
(invalid input), 3 (transport failure) or 4 (data quality).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from ccr.errors import (CCRError, CoverageError, DataQualityError, TransportError,
                        UndefinedEstimandError)
from ccr.estimands import ExactOracle
from ccr.evaluator import EvalConfig, evaluate
from ccr.reasoner import RemoteConfig, ResponseStore, make_reasoner, pair_key, run_batch
from ccr.report import RunManifest, estimates_csv, export_cct_dot, export_plot_data
from ccr.simulate import deductive_pns, inductive_pns, linear_ate_convergence
from ccr.taskgen import (FIXTURES, GenConfig, QueryInstance, TaskSpec, cot_exemplars,
                         fixture_task, gen_dag, gen_task, make_corpus, wrap_cot)

log = logging.getLogger("ccr")

EXIT_OK, EXIT_INVALID, EXIT_TRANSPORT, EXIT_DATA = 0, 2, 3, 4


class UsageError(CCRError, ValueError):
    """Bad command-line input."""


# ---------------------------------------------------------------------------
# helpers


def _write_jsonl(path, rows):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def _read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _run_dir(args) -> Path:
    if not args.run:
        raise UsageError("--run DIR is required")
    d = Path(args.run)
    if not (d / "task.json").exists():
        raise UsageError(f"{d} has no task.json; run 'generate' first")
    return d


def _load_task(run_dir) -> TaskSpec:
    return TaskSpec.from_json((Path(run_dir) / "task.json").read_text())


def _load_truths(run_dir):
    path = Path(run_dir) / "truths.json"
    if not path.exists():
        return None
    d = json.loads(path.read_text())
    return {tuple(k.split(">")): v["pns"] for k, v in d["pairs"].items()}


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args):
    if args.fixture:
        task = fixture_task(args.fixture)
    else:
        sizes = [int(s) for s in str(args.nodes_per_bcc).split(",")]
        nodes = sizes[0] if len(sizes) == 1 else sizes
        cfg = GenConfig(args.bccs, nodes, args.bcc_type, args.theme, args.seed)
        task = gen_task(gen_dag(cfg), args.theme, args.seed)
    out = Path(args.out) / task.task_id
    out.mkdir(parents=True, exist_ok=True)
    (out / "task.json").write_text(task.to_json() + "\n")
    corpus = make_corpus(task, args.samples, args.seed)
    _write_jsonl(out / "corpus.jsonl", [q.to_dict() for q in corpus])
    man = RunManifest.load(out, task.task_id)
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    man.record(out, "task.json", "generate", cfg)
    man.record(out, "corpus.jsonl", "generate")
    man.save(out)
    _emit({"run_dir": str(out), "task_id": task.task_id, "queries": len(corpus),
           "chain": list(task.cct.chain)})


def cmd_truth(args):
    run_dir = _run_dir(args)
    task = _load_task(run_dir)
    oracle = ExactOracle(task.scm)
    pairs = {}
    for p in task.plan.pairs:
        rec = {"pns": oracle.pns(*p), "ate": oracle.ate(*p)}
        for kind in ("pn", "ps"):
            try:
                rec[kind] = getattr(oracle, kind)(*p)
            except UndefinedEstimandError:
                rec[kind] = None
        pairs[pair_key(p)] = rec
    out = {"task_id": task.task_id, "method": "exact enumeration", "pairs": pairs}
    (run_dir / "truths.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    man = RunManifest.load(run_dir, task.task_id)
    man.record(run_dir, "truths.json", "truth")
    man.save(run_dir)
    _emit({"truths": str(run_dir / "truths.json"), "pairs": len(pairs)})


def cmd_run(args):
    run_dir = _run_dir(args)
    task = _load_task(run_dir)
    corpus = [QueryInstance.from_dict(d) for d in _read_jsonl(run_dir / "corpus.jsonl")]
    remote_cfg = None
    wrap = None
    if args.reasoner == "remote":
        if not args.endpoint or not args.model:
            raise UsageError("remote reasoner needs --endpoint and --model")
        remote_cfg = RemoteConfig(args.endpoint, args.model, args.temperature, args.max_tokens,
                                  args.api_key_env, args.timeout, args.retries)
        if args.cot:
            ex = cot_exemplars(task, args.seed)
            wrap = lambda prompt: wrap_cot(prompt, ex)  # noqa: E731
    reasoner = make_reasoner(args.reasoner, task, flip_prob=args.flip_prob,
                             min_mediators=args.min_mediators, per_mediator=args.per_mediator,
                             shift=args.shift, remote_config=remote_cfg, wrap=wrap,
                             fallback=args.llm_extraction)
    path = run_dir / "responses.jsonl"
    if path.exists() and not args.resume:
        path.unlink()
    result = run_batch(reasoner, corpus, args.replicates, args.concurrency, args.seed,
                       store_path=path, resume=args.resume)
    man = RunManifest.load(run_dir, task.task_id)
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    cfg["reasoner_config"] = reasoner.config()
    man.record(run_dir, "responses.jsonl", "run", cfg)
    man.save(run_dir)
    _emit({"responses": str(path), "stored": len(result.store),
           "failures": len(result.failures)})
    if result.failures:
        raise TransportError(result.failures[0]["query_id"],
                             f"{len(result.failures)} requests failed; rerun with --resume")


def cmd_evaluate(args):
    run_dir = _run_dir(args)
    task = _load_task(run_dir)
    man = RunManifest.load(run_dir, task.task_id)
    changed = man.verify(run_dir)
    if changed:
        raise UsageError(f"artifacts changed since they were recorded: {', '.join(changed)}")
    store = ResponseStore.load(run_dir / "responses.jsonl")
    if len(store) == 0:
        raise CoverageError(["responses.jsonl"])
    truths = _load_truths(run_dir)
    reps = max(r.replicate for r in store.records()) + 1
    cfg = EvalConfig(n_exogenous_sets=args.samples or len(store.table(task.plan.global_pair)
                                                          ["sample_ids"]),
                     replicates=reps, n_subsamples=args.subsamples,
                     rae_threshold=args.delta, validity_fraction=args.valid,
                     near_valid_fraction=args.near_valid, seed=args.seed)
    report = evaluate(store, task.plan, task.dag, truths, cfg, task.task_id, task.cct.chain)
    d = report.to_dict()
    (run_dir / "report.json").write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    (run_dir / "estimates.csv").write_text(estimates_csv(report))
    plots = run_dir / "plots"
    plots.mkdir(exist_ok=True)
    for name, text in export_plot_data(report).items():
        (plots / name).write_text(text)
    man.record(run_dir, "report.json", "evaluate", cfg.to_dict())
    man.record(run_dir, "estimates.csv", "evaluate")
    man.save(run_dir)
    _emit({"report": str(run_dir / "report.json"), "label": d["label"]})


def cmd_viz(args):
    run_dir = _run_dir(args)
    report = json.loads((run_dir / "report.json").read_text())
    dot = export_cct_dot(report)
    out = Path(args.output) if args.output else run_dir / "cct.dot"
    out.write_text(dot)
    _emit({"dot": str(out)})


def cmd_simulate(args):
    if args.study == "linear-ate":
        ns = args.ns or [100, 300, 1000, 3000, 10000]
        rows = linear_ate_convergence(args.edge_x5x6, ns, args.seed)
    elif args.study == "inductive-pns":
        rows = inductive_pns(None, args.ns or [1000, 10000, 100000], args.seed)
    else:
        rows = deductive_pns(None, args.ns or [1000, 10000, 100000], args.seed)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccr", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--config", help="JSON file with default flag values")
        sp.set_defaults(func=func)
        return sp

    g = add("generate", cmd_generate, "build a task and its prompt corpus")
    g.add_argument("--bccs", type=int, default=3)
    g.add_argument("--nodes-per-bcc", default="4",
                   help="block size, or comma-separated sizes per block")
    g.add_argument("--bcc-type", choices=["cycle", "wheel"], default="cycle")
    g.add_argument("--theme", choices=["CandyParty", "FlowerGarden"], default="CandyParty")
    g.add_argument("--fixture", choices=FIXTURES)
    g.add_argument("--samples", type=int, default=1000, help="exogenous draws")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="runs")

    t = add("truth", cmd_truth, "exact estimands for the task")
    t.add_argument("--run")

    r = add("run", cmd_run, "collect reasoner answers")
    r.add_argument("--run")
    r.add_argument("--reasoner", choices=["oracle", "wrong-model", "noisy", "remote"],
                   default="oracle")
    r.add_argument("--replicates", type=int, default=5)
    r.add_argument("--concurrency", type=int, default=8)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--resume", action="store_true")
    r.add_argument("--flip-prob", type=float, default=0.15)
    r.add_argument("--min-mediators", type=int)
    r.add_argument("--per-mediator", type=float)
    r.add_argument("--shift", type=float, default=0.1)
    r.add_argument("--endpoint")
    r.add_argument("--model")
    r.add_argument("--temperature", type=float)
    r.add_argument("--max-tokens", type=int)
    r.add_argument("--api-key-env", default="CCR_API_KEY")
    r.add_argument("--timeout", type=float, default=60.0)
    r.add_argument("--retries", type=int, default=4)
    r.add_argument("--cot", action="store_true", help="prefix two worked examples")
    r.add_argument("--llm-extraction", action="store_true",
                   help="ask the endpoint to classify answers the rules cannot")

    e = add("evaluate", cmd_evaluate, "errors, taxonomy label and plot data")
    e.add_argument("--run")
    e.add_argument("--samples", type=int)
    e.add_argument("--subsamples", type=int, default=1000)
    e.add_argument("--delta", type=float, default=0.1)
    e.add_argument("--valid", type=float, default=0.9)
    e.add_argument("--near-valid", type=float, default=0.75)
    e.add_argument("--seed", type=int, default=0)

    v = add("viz", cmd_viz, "DOT rendering of the cut tree")
    v.add_argument("--run")
    v.add_argument("--output")

    s = add("simulate", cmd_simulate, "convergence studies")
    s.add_argument("study", choices=["linear-ate", "inductive-pns", "deductive-pns"])
    s.add_argument("--edge-x5x6", action="store_true")
    s.add_argument("--ns", type=int, nargs="+")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output")
    return p


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        defaults = {}
        for k, val in cfg.items():
            dest = k.replace("-", "_")
            if dest not in known:
                raise UsageError(f"unknown config key {k!r} for '{args.command}'")
            defaults[dest] = val
        # file values become defaults, so explicit flags still take precedence
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except CCRError as exc:
        return _fail(exc, EXIT_INVALID)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except TransportError as exc:
        return _fail(exc, EXIT_TRANSPORT)
    except DataQualityError as exc:
        return _fail(exc, EXIT_DATA)
    except (CCRError, ValueError, OSError, KeyError) as exc:
        return _fail(exc, EXIT_INVALID)
    return EXIT_OK


def _fail(exc, code):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
