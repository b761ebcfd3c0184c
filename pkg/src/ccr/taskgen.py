"""Random reasoning tasks: graph construction, SCM parameters and prompt text.

A task couples a Boolean SCM with a story. In the candy theme node ``V``
is happy when a parent condition holds or when ``V`` receives at least
``T_V`` candies, and the leak probability is ``0.1 * T_V``. In the flower
theme the leak is receiving one's favourite flower colour.

Exogenous draws are kept as uniforms ``w``; the leak bit is ``w < p`` and
the rendered candy count (or flower colour) is a deterministic function of
``w``, so the text always agrees with the bits fed to the SCM.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ccr import fixtures
from ccr.errors import AssumptionError, DomainError
from ccr.graph import Cct, Dag, QuantityPlan, build_cct, quantity_plan, validate_assumptions
from ccr.scm import BoolScm, bits_from_uniforms, exogenous_uniforms

THEMES = ("CandyParty", "FlowerGarden")
BCC_TYPES = ("cycle", "wheel")

NAME_POOL = [
    ("Xinyu", "she"), ("Ara", "he"), ("Becca", "she"), ("Celine", "she"),
    ("Daphne", "she"), ("Emma", "she"), ("Fox", "he"), ("Yasmin", "she"),
    ("Amir", "he"), ("Bruno", "he"), ("Chloe", "she"), ("Dmitri", "he"),
    ("Elif", "she"), ("Farah", "she"), ("Gus", "he"), ("Hana", "she"),
    ("Ivan", "he"), ("Jonas", "he"), ("Kemi", "she"), ("Luca", "he"),
    ("Mina", "she"), ("Nikhil", "he"), ("Olga", "she"), ("Pedro", "he"),
    ("Quinn", "she"), ("Rosa", "she"), ("Sami", "he"), ("Tomas", "he"),
    ("Uma", "she"), ("Vera", "she"), ("Wen", "she"), ("Yusuf", "he"),
    ("Zara", "she"), ("Omar", "he"), ("Ines", "she"), ("Kofi", "he"),
]
COLORS = ["red", "orange", "yellow", "green", "blue", "purple", "pink", "white",
          "violet", "crimson"]

FIXTURE_THRESHOLD = 7


# ---------------------------------------------------------------------------
# graph generation


@dataclass(frozen=True)
class GenConfig:
    n_bccs: int = 3
    nodes_per_bcc: int | Sequence[int] = 4
    bcc_type: str = "cycle"
    theme: str = "CandyParty"
    seed: int = 0

    def __post_init__(self):
        if self.n_bccs < 1:
            raise DomainError("n_bccs must be at least 1")
        sizes = self.sizes()
        if len(sizes) != self.n_bccs:
            raise DomainError(f"nodes_per_bcc lists {len(sizes)} sizes for {self.n_bccs} blocks")
        if min(sizes) < 2:
            raise DomainError("every block needs at least 2 nodes")
        if self.bcc_type not in BCC_TYPES:
            raise DomainError(f"bcc_type must be one of {BCC_TYPES}")
        if self.theme not in THEMES:
            raise DomainError(f"theme must be one of {THEMES}")

    def sizes(self) -> list[int]:
        if isinstance(self.nodes_per_bcc, int):
            return [self.nodes_per_bcc] * self.n_bccs
        return [int(k) for k in self.nodes_per_bcc]


def _orient(order, undirected):
    pos = {n: i for i, n in enumerate(order)}
    return [(a, b) if pos[a] < pos[b] else (b, a) for a, b in undirected]


def _cycle_block(nodes, rng):
    """Cycle through all block nodes, oriented as two branches from s to t."""
    s, *inner, t = nodes
    k = len(nodes)
    if k == 2:
        return [(s, t)]
    if k == 3:
        return [(s, inner[0]), (inner[0], t), (s, t)]
    split = int(rng.integers(1, len(inner)))
    left, right = inner[:split], inner[split:]
    edges = []
    for branch in (left, right):
        path = [s, *branch, t]
        edges += list(zip(path[:-1], path[1:]))
    return edges


def _wheel_block(nodes, rng):
    """Hub joined to every node of a rim cycle; s and t sit on the rim."""
    s, *inner, t = nodes
    if len(nodes) < 4:
        return _cycle_block(nodes, rng)
    hub_i = int(rng.integers(len(inner)))
    hub = inner[hub_i]
    rim_inner = inner[:hub_i] + inner[hub_i + 1:]
    split = int(rng.integers(0, len(rim_inner) + 1))
    # rim: s -> left... -> t and s -> right... -> t (the right branch may be
    # empty, giving the chord s-t)
    left, right = rim_inner[:split], rim_inner[split:]
    rim = []
    for branch in (left, right):
        path = [s, *branch, t]
        rim += list(zip(path[:-1], path[1:]))
    spokes = [(hub, v) for v in [s, *rim_inner, t]]
    order = [s, *left, hub, *right, t]
    return _orient(order, rim + spokes)


def gen_dag(config: GenConfig) -> Dag:
    """Chain ``n_bccs`` blocks end to end, consecutive blocks sharing a cutpoint.

    Nodes are named ``X``, ``V1``, ``V2``, ... and ``Y`` in causal order.
    """
    rng = np.random.default_rng([config.seed, 0x6DA6])
    sizes = config.sizes()
    total = sum(sizes) - (len(sizes) - 1)
    names = ["X"] + [f"V{i}" for i in range(1, total - 1)] + ["Y"]
    build = _cycle_block if config.bcc_type == "cycle" else _wheel_block
    edges, start = [], 0
    for k in sizes:
        block = names[start:start + k]
        edges += build(block, rng)
        start += k - 1
    dag = Dag.from_edges(edges, names, root="X", leaf="Y")
    report = validate_assumptions(dag)
    if not report.ok:
        raise AssumptionError(report)
    return dag


# ---------------------------------------------------------------------------
# task definition


@dataclass(frozen=True)
class TaskSpec:
    scm: BoolScm
    names: dict
    pronouns: dict
    thresholds: dict
    theme: str = "CandyParty"
    colors: dict = field(default_factory=dict)
    fixture: str | None = None

    def __post_init__(self):
        nodes = self.scm.dag.nodes
        if set(self.names) != set(nodes):
            raise DomainError("every node needs exactly one name")
        if len(set(self.names.values())) != len(nodes):
            raise DomainError("names must be unique")
        for n in nodes:
            if int(self.thresholds[n]) < 1:
                raise DomainError(f"threshold of {n} must be positive")
        if self.theme == "FlowerGarden" and set(self.colors) != set(nodes):
            raise DomainError("flower theme needs a colour for every node")

    @property
    def dag(self) -> Dag:
        return self.scm.dag

    @cached_property
    def cct(self) -> Cct:
        return build_cct(self.dag)

    @cached_property
    def plan(self) -> QuantityPlan:
        return quantity_plan(self.cct)

    @cached_property
    def task_id(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"theme": self.theme, "scm": self.scm.to_dict(), "names": dict(self.names),
                "pronouns": dict(self.pronouns), "thresholds": dict(self.thresholds),
                "colors": dict(self.colors), "fixture": self.fixture}

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        return cls(BoolScm.from_dict(d["scm"]), d["names"], d["pronouns"],
                   {k: int(v) for k, v in d["thresholds"].items()},
                   d.get("theme", "CandyParty"), d.get("colors", {}), d.get("fixture"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TaskSpec":
        return cls.from_dict(json.loads(text))


def _draw_threshold(rng):
    # T = 10 would make the leak certain and the root deterministic
    while True:
        t = int(rng.integers(1, 11))
        if t < 10:
            return t


def gen_task(dag: Dag, theme: str = "CandyParty", seed: int = 0, fixture: bool = False) -> TaskSpec:
    """Attach names, thresholds and mechanisms to an admissible graph.

    In fixture mode every mechanism is OR and every threshold is 7; the
    eight-node party graph additionally keeps its canonical names.
    """
    if theme not in THEMES:
        raise DomainError(f"theme must be one of {THEMES}")
    report = validate_assumptions(dag)
    if not report.ok:
        raise AssumptionError(report)
    rng = np.random.default_rng([seed, 0x7A5C])
    order = dag.topological_order()
    if len(order) > len(NAME_POOL):
        raise DomainError(f"graph has {len(order)} nodes but only {len(NAME_POOL)} names exist")

    if fixture and set(dag.nodes) == set(fixtures.PARTY_NAMES):
        people = {n: fixtures.PARTY_NAMES[n] for n in order}
    else:
        pool = list(NAME_POOL)
        perm = rng.permutation(len(pool))
        people = {n: pool[i] for n, i in zip(order, perm)}

    func, thresholds = {}, {}
    for n in order:
        if fixture:
            thresholds[n] = FIXTURE_THRESHOLD
            func[n] = "OR"
        else:
            thresholds[n] = _draw_threshold(rng)
            func[n] = "OR" if len(dag.parents(n)) < 2 else str(rng.choice(["OR", "AND"]))
    colors = {}
    if theme == "FlowerGarden":
        colors = {n: COLORS[int(rng.integers(len(COLORS)))] for n in order}
    noise = {n: round(0.1 * thresholds[n], 10) for n in order}
    scm = BoolScm(dag, func, noise)
    return TaskSpec(scm, {n: people[n][0] for n in order}, {n: people[n][1] for n in order},
                    thresholds, theme, colors, "party" if fixture else None)


# ---------------------------------------------------------------------------
# rendering


def _join(items, conj="and"):
    items = list(items)
    if len(items) == 1:
        return items[0]
    if len(items) == 2:
        return f"{items[0]} {conj} {items[1]}"
    return ", ".join(items[:-1]) + f", {conj} " + items[-1]


def _a(word):
    return f"an {word}" if word[0] in "aeiou" else f"a {word}"


def _candies(k):
    return "candy" if k == 1 else "candies"


def counts_from_uniforms(task: TaskSpec, w: dict) -> dict:
    """Candy counts consistent with the leak bits ``w < p``.

    A leak of 1 maps to a count in ``[T, 10]``, a leak of 0 to ``[0, T-1]``,
    each uniformly in ``w``.
    """
    out = {}
    for n in task.dag.nodes:
        t, p, u = task.thresholds[n], task.scm.noise_p[n], float(w[n])
        if u < p:
            k = t + math.floor(u / p * (11 - t))
            out[n] = min(max(k, t), 10)
        else:
            k = math.floor((u - p) / (1 - p) * t) if p < 1 else 0
            out[n] = min(max(k, 0), t - 1)
    return out


def flowers_from_uniforms(task: TaskSpec, w: dict) -> dict:
    out = {}
    for n in task.dag.nodes:
        fav, p, u = task.colors[n], task.scm.noise_p[n], float(w[n])
        if u < p:
            out[n] = fav
        else:
            others = [c for c in COLORS if c != fav]
            i = math.floor((u - p) / (1 - p) * len(others))
            out[n] = others[min(max(i, 0), len(others) - 1)]
    return out


def _own_clause(task, n):
    pron = task.pronouns[n]
    if task.theme == "FlowerGarden":
        return f"if {pron} gets {_a(task.colors[n])} flower"
    # the template keeps "candies" even for a threshold of 1
    return f"if {pron} gets at least {task.thresholds[n]} candies"


def rule_sentence(task: TaskSpec, n: str) -> str:
    name = task.names[n]
    parents = task.dag.parents(n)
    own = _own_clause(task, n)
    if not parents:
        return f"{name} will be happy {own}."
    conds = [f"if {task.names[p]} is happy" for p in parents]
    if task.scm.func[n] == "AND" and len(parents) > 1:
        return f"{name} will be happy {' and '.join(conds)}, or {own}."
    return f"{name} will be happy {' or '.join(conds)} or {own}."


def render_rules(task: TaskSpec) -> str:
    order = task.dag.topological_order()
    people = _join([task.names[n] for n in order])
    if task.theme == "FlowerGarden":
        intro = (f"{people} are visiting a flower garden, where the gardener is going to "
                 f"hand out flowers.")
    else:
        intro = f"{people} are going to a party, where the host is going to distribute candies."
    return " ".join([intro] + [rule_sentence(task, n) for n in order])


def render_distribution(task: TaskSpec, values: dict) -> str:
    """Sample clause; ``values`` maps node to a candy count or flower colour."""
    nodes = task.dag.topological_order()
    if task.theme == "FlowerGarden":
        parts = [f"{task.names[n]} gets {_a(values[n])} flower" for n in nodes]
        return f"After handing out the flowers, {_join(parts)}."
    parts = [f"{task.names[n]} gets {values[n]}" for n in nodes]
    return f"After distributing the candies, {_join(parts)}."


def render_context(task: TaskSpec, values: dict) -> str:
    return f"{render_rules(task)} {render_distribution(task, values)}"


def _regardless(task):
    return ("regardless of the flower colors" if task.theme == "FlowerGarden"
            else "regardless of the candy distribution")


def factual_question(task: TaskSpec, effect: str) -> str:
    return f"Is {task.names[effect]} happy? Be as concise as possible."


def assumption_sentence(task: TaskSpec, cause: str, do_value: bool) -> str:
    state = "happy" if do_value else "not happy"
    return f"Now, suppose that {task.names[cause]} is {state} {_regardless(task)}."


def counterfactual_question(task: TaskSpec, cause: str, effect: str, do_value: bool) -> str:
    return (f"{assumption_sentence(task, cause, do_value)} With this assumption, "
            f"is {task.names[effect]} happy? Be as concise as possible.")


@dataclass(frozen=True)
class QueryInstance:
    task_id: str
    sample_id: int
    pair: tuple
    do_value: bool
    factual: str
    counterfactual: str
    draw: dict

    @property
    def query_id(self) -> str:
        return f"{self.task_id}/{self.pair[0]}>{self.pair[1]}/{self.sample_id}"

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "sample_id": self.sample_id,
                "pair": list(self.pair), "do_value": self.do_value,
                "factual": self.factual, "counterfactual": self.counterfactual,
                "draw": self.draw}

    @classmethod
    def from_dict(cls, d: dict) -> "QueryInstance":
        return cls(d["task_id"], int(d["sample_id"]), tuple(d["pair"]), bool(d["do_value"]),
                   d["factual"], d["counterfactual"], d["draw"])


def draw_samples(task: TaskSpec, n: int, seed: int, start: int = 0) -> list[dict]:
    """Exogenous draws: per sample the uniforms ``w`` and the rendered values."""
    raw = exogenous_uniforms(task.scm, start, n, seed)
    leak, _ = bits_from_uniforms(task.scm, raw)
    out = []
    for i in range(n):
        w = {node: float(raw[(kind, node)][i]) for kind, node, _ in task.scm.exogenous()
             if kind == "U"}
        inhib = {node: float(raw[(kind, node)][i]) for kind, node, _ in task.scm.exogenous()
                 if kind == "I"}
        draw = {"w": w}
        if inhib:
            draw["w_inhibit"] = inhib
        if task.theme == "FlowerGarden":
            draw["values"] = flowers_from_uniforms(task, w)
        else:
            draw["values"] = counts_from_uniforms(task, w)
        out.append(draw)
    return out


def draw_bits(scm: BoolScm, draw: dict) -> tuple[dict, dict]:
    """Leak and inhibitor bits of one draw under ``scm``'s probabilities."""
    leak = {n: np.array([draw["w"][n] < scm.noise_p[n]]) for n in scm.dag.nodes}
    inhibit = {n: np.array([draw.get("w_inhibit", {}).get(n, 1.0) < p])
               for n, p in scm.inhibit_p.items()}
    return leak, inhibit


def render_queries(task: TaskSpec, pair, sample: dict, do_value: bool | None = None,
                   sample_id: int = 0) -> QueryInstance:
    """Factual and counterfactual prompts for one pair and one draw.

    ``do_value`` defaults to the opposite of the cause's factual value, so the
    counterfactual always changes the cause.
    """
    pair = tuple(pair)
    if pair not in task.plan.pairs:
        raise DomainError(f"pair {pair} is not a quantity of the task")
    cause, effect = pair
    if do_value is None:
        leak, inhibit = draw_bits(task.scm, sample)
        factual = task.scm.evaluate(leak, inhibit)
        do_value = not bool(factual[cause][0])
    context = render_context(task, sample["values"])
    return QueryInstance(
        task.task_id, sample_id, pair, bool(do_value),
        f"{context} {factual_question(task, effect)}",
        f"{context} {counterfactual_question(task, cause, effect, do_value)}",
        sample,
    )


def make_corpus(task: TaskSpec, n_samples: int = 1000, seed: int = 0,
                pairs: Sequence | None = None) -> list[QueryInstance]:
    """One query per (pair, exogenous draw); all pairs share the same draws."""
    samples = draw_samples(task, n_samples, seed)
    pairs = list(pairs) if pairs is not None else list(task.plan.pairs)
    return [render_queries(task, pair, s, sample_id=i)
            for pair in pairs for i, s in enumerate(samples)]


# ---------------------------------------------------------------------------
# worked-example prompting


def wrap_cot(prompt: str, exemplars: Sequence[tuple[str, str]] = ()) -> str:
    """Prefix worked QUESTION/ANSWER pairs and end with an open ANSWER cue."""
    if not exemplars:
        return prompt
    blocks = [f"QUESTION: {q}\n\nANSWER: {a}" for q, a in exemplars]
    return "\n\n".join(blocks + [f"QUESTION: {prompt}\n\nANSWER:"])


def _root_phrase(task, root, values):
    name, pron = task.names[root], task.pronouns[root]
    if task.theme == "FlowerGarden":
        got, fav = values[root], task.colors[root]
        if got == fav:
            return f"Since {name} gets {_a(got)} flower, {pron} is happy."
        return f"Since {name} gets {_a(got)} flower, not {_a(fav)} one, {pron} is not happy."
    k, t = values[root], task.thresholds[root]
    if k >= t:
        cmp = "more than" if k > t else "equal to"
        return f"Since {name} gets {k} {_candies(k)}, which is {cmp} {t}, {pron} is happy."
    return f"Since {name} gets {k} {_candies(k)}, which is less than {t}, {pron} is not happy."


def _child_phrase(task, root, child, values, root_happy):
    cname, pron = task.names[child], task.pronouns[child]
    if root_happy:
        what = "what flower" if task.theme == "FlowerGarden" else "how many candies"
        return (f"In that case, {cname} is happy no matter {what} {pron} got, because "
                f"{pron} will be happy if {task.names[root]} is happy. "
                f"Therefore, yes, {cname} is happy!")
    if task.theme == "FlowerGarden":
        fav, got = task.colors[child], values[child]
        lead = f"In that case, {cname} is happy only if {pron} gets {_a(fav)} flower."
        if got == fav:
            return f"{lead} {cname} gets {_a(got)} flower. Therefore, yes, {cname} is happy!"
        return (f"{lead} {cname} gets {_a(got)} flower. "
                f"Therefore, no, {cname} is not happy!")
    t, k = task.thresholds[child], values[child]
    lead = f"In that case, {cname} is happy only if {pron} gets at least {t} candies."
    if k >= t:
        cmp = "more than" if k > t else "equal to"
        return (f"{lead} {cname} gets {k} {_candies(k)}, which is {cmp} {t}. "
                f"Therefore, yes, {cname} is happy!")
    return (f"{lead} {cname} gets {k} {_candies(k)}, which is less than {t}. "
            f"Therefore, no, {cname} is not happy!")


def worked_answers(task: TaskSpec, child: str, values: dict, do_value: bool) -> tuple[str, str]:
    """Step-by-step factual and counterfactual answers for a child of the root
    whose only parent is the root."""
    root = task.dag.root
    if task.dag.parents(child) != (root,):
        raise DomainError(f"{child} must have the root as its only parent")
    leak = {n: np.array([_leak_from_values(task, n, values)]) for n in task.dag.nodes}
    root_happy = bool(leak[root][0])
    factual = f"{_root_phrase(task, root, values)} " + _child_phrase(
        task, root, child, values, root_happy)
    state = "happy" if do_value else "not happy"
    cf = (f"{_root_phrase(task, root, values)} However, we are asked to assume "
          f"{task.names[root]} is {state} regardless. "
          + _child_phrase(task, root, child, values, do_value))
    return factual, cf


def _leak_from_values(task, n, values):
    if task.theme == "FlowerGarden":
        return values[n] == task.colors[n]
    return values[n] >= task.thresholds[n]


def cot_exemplars(task: TaskSpec, seed: int = 0) -> list[tuple[str, str]]:
    """Two worked examples on a re-parameterised copy of the task's story.

    The copy keeps graph and names but redraws thresholds (or colours) and the
    sample; the factual exemplar has the root happy and the counterfactual one
    assumes it is not, mirroring the usual one-factual/one-counterfactual pair.
    """
    root = task.dag.root
    children = [c for c in task.dag.children(root) if task.dag.parents(c) == (root,)]
    if not children:
        raise DomainError("no child of the root has the root as its only parent")
    rng = np.random.default_rng([seed, 0xC07])
    redraw = gen_task(task.dag, task.theme, seed=int(rng.integers(2**31)))
    noise = {n: round(0.1 * t, 10) for n, t in redraw.thresholds.items()}
    ex = TaskSpec(BoolScm(task.dag, task.scm.func, noise), task.names, task.pronouns,
                  redraw.thresholds, task.theme, redraw.colors)
    child = children[int(rng.integers(len(children)))]
    for attempt in range(1000):
        (draw,) = draw_samples(ex, 1, seed=int(rng.integers(2**31)))
        values = draw["values"]
        if _leak_from_values(ex, root, values):
            break
    else:  # pragma: no cover - root leak probability is at least 0.1
        raise DomainError("could not draw an exemplar with a happy root")
    fact_a, cf_a = worked_answers(ex, child, values, do_value=False)
    context = render_context(ex, values)
    q1 = f"{context} {factual_question(ex, child)}"
    q2 = f"{context} {counterfactual_question(ex, root, child, False)}"
    return [(q1, fact_a), (q2, cf_a)]


FIXTURES = ("candyparty-fig4", "flowergarden-fig4", "taxonomy-fig4")


def fixture_task(name: str) -> TaskSpec:
    """Named tasks on the eight-node party graph.

    ``taxonomy-fig4`` keeps the story of ``candyparty-fig4`` but lowers every
    non-root leak to 0.05 (root 0.5). With leak 0.7 the end-to-end PNS is
    about 2e-4, too small to estimate from 1000 samples, whereas leak 0.05
    keeps every pair's PNS above 0.69 so sampling error stays well inside
    the 0.1 relative-error threshold.
    """
    dag = fixtures.party_dag()
    if name == "candyparty-fig4":
        return gen_task(dag, "CandyParty", fixture=True)
    if name == "flowergarden-fig4":
        task = gen_task(dag, "FlowerGarden", fixture=True)
        return TaskSpec(task.scm, task.names, task.pronouns, task.thresholds, task.theme,
                        task.colors, name)
    if name == "taxonomy-fig4":
        task = gen_task(dag, "CandyParty", fixture=True)
        noise = {n: 0.05 for n in dag.nodes}
        noise[dag.root] = 0.5
        return TaskSpec(task.scm.with_noise(noise), task.names, task.pronouns,
                        task.thresholds, task.theme, task.colors, name)
    raise DomainError(f"unknown fixture {name!r}; choose from {FIXTURES}")
