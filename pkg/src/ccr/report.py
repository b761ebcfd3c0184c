"""Run artifacts: DOT rendering of cut trees, plot-ready CSVs and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from ccr.evaluator import EvalReport
from ccr.graph import Cct, Dag, enumerate_paths, path_pairs

# colour-blind-safe qualitative palette, cycled for path overlays
PATH_COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
               "#a6761d", "#1f78b4"]
VALID_COLOR = "black"
INVALID_COLOR = "gray"


def _q(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dag_dot(dag: Dag, name: str = "G") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    for n in dag.nodes:
        style = ', style="bold"' if n in (dag.root, dag.leaf) else ""
        lines.append(f"  {_q(n)} [shape=circle{style}];")
    for a, b in dag.edges:
        lines.append(f"  {_q(a)} -> {_q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _is_valid(frac, threshold):
    return frac is not None and frac >= threshold


def export_cct_dot(report: dict, cct: Cct | None = None, colors=PATH_COLORS) -> str:
    """CCT coloured by external validity.

    Pair edges are black when the pair's estimates are valid and gray
    otherwise. Each valid root-to-leaf path (the direct edge counts as a
    path, judged by the global pair) is drawn again as a coloured overlay.
    A node is black when every path through it is valid.
    """
    if cct is None:
        cct = Cct(tuple(report["chain"]))
    thr = report["config"]["validity_fraction"]
    q = report["quantities"]
    comps = report["compositions"]

    def pair_valid(a, b):
        rec = q.get(f"{a}>{b}", {})
        return _is_valid(rec.get("validity"), thr) and not rec.get("excluded", False)

    paths = enumerate_paths(cct)
    path_ok = {}
    for p in paths:
        if len(p) == 2:
            path_ok[p] = pair_valid(*p)
        else:
            path_ok[p] = _is_valid(comps.get(">".join(p), {}).get("validity"), thr)

    lines = ["digraph CCT {", "  rankdir=LR;", "  node [shape=circle];"]
    for n in cct.chain:
        through = [ok for p, ok in path_ok.items() if n in p]
        color = VALID_COLOR if through and all(through) else INVALID_COLOR
        lines.append(f"  {_q(n)} [color={_q(color)}, fontcolor={_q(color)}];")
    for a, b in cct.edges:
        color = VALID_COLOR if pair_valid(a, b) else INVALID_COLOR
        lines.append(f"  {_q(a)} -> {_q(b)} [color={_q(color)}];")
    k = 0
    for p in paths:
        if not path_ok[p]:
            continue
        c = colors[k % len(colors)]
        k += 1
        label = ">".join(p)
        for a, b in path_pairs(p):
            lines.append(f"  {_q(a)} -> {_q(b)} [color={_q(c)}, penwidth=2, "
                         f"tooltip={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# plot data


PLOT_SCHEMA = {
    "quadrant.csv": {
        "columns": {"composition": "path id, e.g. X>C>Y",
                    "round": "subsampling round index",
                    "internal_rae": "RAE against the same round's direct global estimate",
                    "external_rae": "RAE against the true global PNS"},
    },
    "validity.csv": {
        "columns": {"quantity": "pair or path id",
                    "kind": "pair or path",
                    "validity": "share of rounds with external RAE at or below the threshold",
                    "consistency": "share of rounds with internal RAE at or below the "
                                   "threshold (paths only)",
                    "validity_line": "fraction required for a valid quantity",
                    "near_valid_line": "fraction required for a near-valid quantity"},
    },
    "mediation.csv": {
        "columns": {"by": "distance (shortest hop count) or mediators",
                    "value": "bucket value", "n_pairs": "pairs in the bucket",
                    "mean_rae": "mean external RAE", "std_rae": "standard deviation"},
    },
}


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h)) for h in header])
    return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def export_plot_data(report: EvalReport) -> dict[str, str]:
    """CSV bundle (file name -> text) plus ``schema.json`` describing it."""
    cfg = report.config
    quad = []
    for k, rec in report.result.paths.items():
        if rec.epsilon is None:
            continue
        for i, (g, e) in enumerate(zip(rec.gamma, rec.epsilon)):
            quad.append({"composition": k, "round": i, "internal_rae": float(g),
                         "external_rae": float(e)})
    d = report.to_dict()
    val = []
    for k, rec in d["quantities"].items():
        val.append({"quantity": k, "kind": "pair", "validity": rec["validity"],
                    "validity_line": cfg.validity_fraction,
                    "near_valid_line": cfg.near_valid_fraction})
    for k, rec in d["compositions"].items():
        val.append({"quantity": k, "kind": "path", "validity": rec["validity"],
                    "consistency": rec["consistency"],
                    "validity_line": cfg.validity_fraction,
                    "near_valid_line": cfg.near_valid_fraction})
    schema = dict(PLOT_SCHEMA)
    schema["thresholds"] = {"rae": cfg.rae_threshold, "validity": cfg.validity_fraction,
                            "near_validity": cfg.near_valid_fraction}
    return {
        "quadrant.csv": _csv(quad, ["composition", "round", "internal_rae", "external_rae"]),
        "validity.csv": _csv(val, ["quantity", "kind", "validity", "consistency",
                                   "validity_line", "near_valid_line"]),
        "mediation.csv": _csv(report.mediation, ["by", "value", "n_pairs", "mean_rae",
                                                 "std_rae"]),
        "schema.json": json.dumps(schema, indent=2, sort_keys=True) + "\n",
    }


def estimates_csv(report: EvalReport) -> str:
    """Raw per-round estimates: one row per (quantity, round)."""
    rows = []
    for k, rec in report.result.pairs.items():
        for i, v in enumerate(rec.estimates):
            rows.append({"quantity": k, "kind": "pair", "round": i, "estimate": float(v)})
    for k, rec in report.result.paths.items():
        for i, v in enumerate(rec.estimates):
            rows.append({"quantity": k, "kind": "path", "round": i, "estimate": float(v)})
    return _csv(rows, ["quantity", "kind", "round", "estimate"])


# ---------------------------------------------------------------------------
# run manifest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Artifact hashes and an append-only event log for one run directory."""

    task_id: str
    config: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    FILE = "manifest.json"

    @classmethod
    def load(cls, run_dir, task_id: str | None = None) -> "RunManifest":
        path = Path(run_dir) / cls.FILE
        if path.exists():
            d = json.loads(path.read_text())
            return cls(d["task_id"], d.get("config", {}), d.get("artifacts", {}),
                       d.get("events", []))
        return cls(task_id or Path(run_dir).name)

    def record(self, run_dir, name: str, action: str, config: dict | None = None):
        path = Path(run_dir) / name
        digest = sha256_file(path)
        self.artifacts[name] = {"path": name, "sha256": digest}
        if config:
            self.config[action] = config
        self.events.append({"time": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                            "action": action, "artifact": name, "sha256": digest})

    def verify(self, run_dir) -> list[str]:
        """Names of artifacts whose current content differs from the recorded hash."""
        bad = []
        for name, info in self.artifacts.items():
            path = Path(run_dir) / info["path"]
            if not path.exists() or sha256_file(path) != info["sha256"]:
                bad.append(name)
        return bad

    def save(self, run_dir):
        path = Path(run_dir) / self.FILE
        path.write_text(json.dumps({"task_id": self.task_id, "config": self.config,
                                    "artifacts": self.artifacts, "events": self.events},
                                   indent=2, sort_keys=True) + "\n")
