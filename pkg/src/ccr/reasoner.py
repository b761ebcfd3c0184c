"""Things that answer factual and counterfactual yes/no questions.

Synthetic reasoners (:class:`Oracle`, :class:`WrongModelOracle`,
:class:`NoisyOracle`) read the exogenous draw attached to each query and
answer from an SCM; :class:`Remote` sends the prompt to a chat-completion
endpoint. Free-text replies are mapped to TRUE/FALSE/UNKNOWN by
:func:`extract_boolean`.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import zlib
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import httpx
import numpy as np

from ccr.errors import DomainError, TransportError
from ccr.graph import path_stats
from ccr.scm import BoolScm
from ccr.taskgen import QueryInstance, TaskSpec

log = logging.getLogger(__name__)

TRUE, FALSE, UNKNOWN = "TRUE", "FALSE", "UNKNOWN"
WHICH = ("factual", "counterfactual")

EXTRACTION_PROMPT = (
    "I will give you a question and its answer. Determine whether the meaning of the answer "
    "is 'TRUE' or 'FALSE'. An answer is 'TRUE' if it contains phrases like 'yes', 'it holds', "
    "'correct', 'true', or similar affirmations. An answer is 'FALSE' if it contains phrases "
    "like 'no', 'it does not hold', 'incorrect', 'false', or similar negations. Respond only "
    "with one word: 'TRUE' or 'FALSE'. Question: '{question}' Answer: '{answer}' Is the "
    "meaning 'TRUE' or 'FALSE'?"
)


def pair_key(pair) -> str:
    return f"{pair[0]}>{pair[1]}"


@dataclass(frozen=True)
class RawResponse:
    query_id: str
    pair: tuple
    sample_id: int
    which: str
    replicate: int
    do_value: bool
    text: str
    boolean: str
    latency_ms: float = 0.0

    @property
    def key(self):
        return (pair_key(self.pair), self.sample_id, self.which, self.replicate)

    def to_dict(self) -> dict:
        return {"query_id": self.query_id, "pair": pair_key(self.pair),
                "sample_id": self.sample_id, "which": self.which, "replicate": self.replicate,
                "do_value": self.do_value, "text": self.text, "boolean": self.boolean,
                "latency_ms": self.latency_ms}

    @classmethod
    def from_dict(cls, d: dict) -> "RawResponse":
        return cls(d["query_id"], tuple(d["pair"].split(">")), int(d["sample_id"]), d["which"],
                   int(d["replicate"]), bool(d["do_value"]), d["text"], d["boolean"],
                   float(d.get("latency_ms", 0.0)))


# ---------------------------------------------------------------------------
# Boolean extraction

_SENT_SPLIT = re.compile(r"(?<=[.!?])\s+|\n+")
_SUBJECT_Q = re.compile(r"\bis\s+([A-Z][\w'-]*)\s+happy\s*\?", re.IGNORECASE)
_CONDITIONAL = re.compile(r"\bhappy\s+(?:only\s+)?(?:if|when|unless|as long as)\b", re.I)
# embedded questions ("cannot tell whether Fox is happy") assert nothing
_EMBEDDED = re.compile(r"\b(?:whether|(?:check|see|know|determine|tell|decide)\s+if)\b[^.?!]*?"
                       r"\bhappy\b", re.I)
_NEG_STATE = r"(?:is\s+not|isn't|is\s+never|would\s+not\s+be|wouldn't\s+be|will\s+not\s+be|won't\s+be|cannot\s+be|can't\s+be|is\s+un)"
_POS_STATE = r"(?:is|would\s+be|will\s+be|is\s+indeed|is\s+still|remains|would\s+still\s+be|will\s+still\s+be)"
_GENERIC = [
    (re.compile(r"\byes\b", re.I), TRUE),
    (re.compile(r"\bno\b(?!\s+matter)(?!\s+one\b)", re.I), FALSE),
    (re.compile(r"\bunhappy\b", re.I), FALSE),
    (re.compile(r"\bnot\s+happy\b", re.I), FALSE),
    (re.compile(r"\bincorrect\b|\bdoes\s+not\s+hold\b|\bfalse\b", re.I), FALSE),
    (re.compile(r"(?<!in)\bcorrect\b|\bit\s+holds\b|\btrue\b", re.I), TRUE),
]


def _subject_patterns(name):
    n = re.escape(name)
    subj = rf"(?:{n}|she|he)"
    return [
        (re.compile(rf"\b{n}\s*:\s*(?:not\s+|un)happy\b", re.I), FALSE),
        (re.compile(rf"\b{n}\s*:\s*happy\b", re.I), TRUE),
        (re.compile(rf"\b{subj}\s+{_NEG_STATE}\s*happy\b", re.I), FALSE),
        (re.compile(rf"\b{subj}\s+(?:is\s+)?unhappy\b", re.I), FALSE),
        (re.compile(rf"\b{subj}\s+{_POS_STATE}\s+happy\b(?!\s+(?:only\s+)?(?:if|when|unless))",
                    re.I), TRUE),
    ]


_OTHER_STATE = re.compile(rf"\b([A-Z][\w'-]*)\s+(?:{_NEG_STATE}\s*|{_POS_STATE}\s+)happy\b")


def _mask_other_subjects(sentence, subject):
    """Blank out state phrases about other named people."""
    def repl(m):
        if subject and m.group(1).lower() == subject.lower():
            return m.group(0)
        if m.group(1).lower() in ("she", "he", "they", "therefore", "so", "thus"):
            return m.group(0)
        return " " * len(m.group(0))
    return _OTHER_STATE.sub(repl, sentence)


def _verdict(sentence, subject):
    blank = lambda m: " " * len(m.group(0))  # noqa: E731
    sentence = _EMBEDDED.sub(blank, _CONDITIONAL.sub(blank, sentence))
    hits = []
    if subject:
        for pat, val in _subject_patterns(subject):
            hits += [(m.end(), val) for m in pat.finditer(sentence)]
        if hits:
            return max(hits)[1]
    masked = _mask_other_subjects(sentence, subject)
    for pat, val in _GENERIC:
        hits += [(m.end(), val) for m in pat.finditer(masked)]
    if hits:
        return max(hits)[1]
    return None


def rule_extract(question: str, answer: str) -> str:
    """Rule-based verdict: scan sentences from the end, last match wins."""
    subjects = _SUBJECT_Q.findall(question or "")
    subject = subjects[-1] if subjects else None
    text = (answer or "").replace("*", "").strip()
    sentences = [s for s in _SENT_SPLIT.split(text) if s.strip()]
    for sentence in reversed(sentences):
        v = _verdict(sentence, subject)
        if v is not None:
            return v
    return UNKNOWN


def parse_true_false(text: str) -> str:
    words = re.findall(r"\b(TRUE|FALSE)\b", (text or "").upper())
    return words[0] if len(set(words)) == 1 else UNKNOWN


def extract_boolean(question: str, answer: str,
                    fallback: Callable[[str], str] | None = None) -> str:
    """TRUE / FALSE / UNKNOWN for a free-text answer to a yes/no question.

    ``fallback`` is called with the extraction prompt (a language model
    completion function, typically) only when the rules find no verdict.
    """
    verdict = rule_extract(question, answer)
    if verdict == UNKNOWN and fallback is not None:
        verdict = parse_true_false(fallback(EXTRACTION_PROMPT.format(question=question,
                                                                     answer=answer)))
    return verdict


# ---------------------------------------------------------------------------
# synthetic reasoners


def _stream(seed, *parts):
    return np.random.default_rng([seed, *parts])


def _stable(s: str) -> int:
    return zlib.crc32(s.encode())


def _verbal(task, effect, value):
    name = task.names[effect]
    return f"Yes, {name} is happy." if value else f"No, {name} is not happy."


class SyntheticReasoner:
    """Base for reasoners that answer from an SCM evaluated on the query's draw."""

    name = "synthetic"
    replicate_invariant = True

    def __init__(self, task: TaskSpec):
        self.task = task

    def model(self) -> BoolScm:
        return self.task.scm

    def _truth(self, queries: Sequence[QueryInstance], which: str) -> np.ndarray:
        scm = self.model()
        nodes = scm.dag.nodes
        leak = {n: np.array([q.draw["w"][n] < scm.noise_p[n] for q in queries]) for n in nodes}
        inhibit = {n: np.array([q.draw.get("w_inhibit", {}).get(n, 1.0) < p for q in queries])
                   for n, p in scm.inhibit_p.items()}
        out = np.empty(len(queries), dtype=bool)
        # group by (cause, effect, do_value) so each group is one vector evaluation
        groups = {}
        for i, q in enumerate(queries):
            key = (q.pair, q.do_value if which == "counterfactual" else None)
            groups.setdefault(key, []).append(i)
        for (pair, do), idx in groups.items():
            idx = np.array(idx)
            sub_leak = {n: v[idx] for n, v in leak.items()}
            sub_inh = {n: v[idx] for n, v in inhibit.items()}
            iv = {pair[0]: do} if do is not None else None
            out[idx] = scm.evaluate(sub_leak, sub_inh, iv)[pair[1]]
        return out

    def decide(self, queries, which, replicate, seed) -> np.ndarray:
        return self._truth(queries, which)

    def answer_batch(self, queries: Sequence[QueryInstance], which: str, replicate: int = 0,
                     seed: int = 0) -> list[RawResponse]:
        values = self.decide(queries, which, replicate, seed)
        out = []
        for q, v in zip(queries, values):
            out.append(RawResponse(q.query_id, q.pair, q.sample_id, which, replicate,
                                   q.do_value, _verbal(self.task, q.pair[1], bool(v)),
                                   TRUE if v else FALSE))
        return out

    def answer(self, query: QueryInstance, which: str, seed: int = 0,
               replicate: int = 0) -> RawResponse:
        return self.answer_batch([query], which, replicate, seed)[0]

    def config(self) -> dict:
        return {"kind": self.name}


class Oracle(SyntheticReasoner):
    """Exact answers from the task's own SCM."""

    name = "oracle"


class WrongModelOracle(SyntheticReasoner):
    """Exact answers from a structurally identical SCM with other leak probabilities.

    The same uniforms drive both models, so the alternative answers are a
    coupled perturbation of the truth rather than independent noise.

    By default only the nodes after the last cutpoint are shifted. Every
    cause in the plan is the root or a cutpoint, so its factual value is then
    the same in both models and the factual answer still describes the world
    the counterfactual flips. Shifting a cause's own mechanism would make
    the reasoner's factual world disagree with the prompt, which mixes two
    worlds in one estimate and breaks internal consistency as well.
    """

    name = "wrong-model"

    def __init__(self, task: TaskSpec, alt_scm: BoolScm | None = None, shift: float = 0.1,
                 nodes: Sequence[str] | None = None):
        super().__init__(task)
        if alt_scm is None:
            if nodes is None:
                nodes = final_block_nodes(task)
            noise = dict(task.scm.noise_p)
            for n in nodes:
                noise[n] = min(1.0, max(0.0, noise[n] + shift))
            alt_scm = task.scm.with_noise(noise)
        if (alt_scm.dag.nodes != task.dag.nodes
                or set(alt_scm.dag.edges) != set(task.dag.edges)):
            raise DomainError("alternative model must share the task's graph")
        self.alt = alt_scm
        self.shift = shift

    def model(self):
        return self.alt

    def config(self):
        return {"kind": self.name, "noise_p": dict(self.alt.noise_p)}


def final_block_nodes(task: TaskSpec) -> list[str]:
    """Nodes strictly downstream of the last cutpoint."""
    last = task.cct.chain[-2]
    return [n for n in task.dag.topological_order() if n in task.dag.descendants(last)]


class NoisyOracle(SyntheticReasoner):
    """Oracle answers flipped independently with a per-pair probability."""

    name = "noisy"
    replicate_invariant = False

    def __init__(self, task: TaskSpec, flip_prob: float | Mapping = 0.0):
        super().__init__(task)
        if isinstance(flip_prob, Mapping):
            probs = {tuple(k) if not isinstance(k, str) else tuple(k.split(">")): float(v)
                     for k, v in flip_prob.items()}
            default = 0.0
        else:
            probs, default = {}, float(flip_prob)
        for v in list(probs.values()) + [default]:
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"flip probability {v} outside [0,1]")
        self.probs, self.default = probs, default

    def flip_prob(self, pair) -> float:
        return self.probs.get(tuple(pair), self.default)

    def decide(self, queries, which, replicate, seed):
        truth = self._truth(queries, which)
        out = truth.copy()
        by_pair = {}
        for i, q in enumerate(queries):
            by_pair.setdefault(q.pair, []).append(i)
        for pair, idx in by_pair.items():
            p = self.flip_prob(pair)
            if p == 0:
                continue
            w = _stream(seed, _stable(pair_key(pair)), WHICH.index(which), replicate)
            # one uniform per sample id, so answers do not depend on batching
            ids = np.array([queries[i].sample_id for i in idx])
            u = w.random(int(ids.max()) + 1)[ids]
            flip = u < p
            out[idx] = np.where(flip, ~truth[idx], truth[idx])
        return out

    def config(self):
        return {"kind": self.name, "default": self.default,
                "flip_prob": {pair_key(k): v for k, v in self.probs.items()}}


def flips_by_mediators(task: TaskSpec, prob: float, min_mediators: int = 2) -> dict:
    """Flip probability ``prob`` on plan pairs with at least ``min_mediators`` mediators."""
    return {pair: prob for pair in task.plan.pairs
            if path_stats(task.dag, *pair).mediator_count >= min_mediators}


def flips_growing(task: TaskSpec, per_mediator: float) -> dict:
    """Flip probability proportional to the mediator count of each pair."""
    return {pair: min(0.5, per_mediator * path_stats(task.dag, *pair).mediator_count)
            for pair in task.plan.pairs}


# ---------------------------------------------------------------------------
# remote chat-completion client


@dataclass
class RemoteConfig:
    base_url: str
    model: str
    temperature: float | None = None
    max_tokens: int | None = None
    api_key_env: str | None = "CCR_API_KEY"
    timeout: float = 60.0
    max_retries: int = 4
    backoff: float = 1.0
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RemoteConfig":
        known = {k: d[k] for k in ("base_url", "model", "temperature", "max_tokens",
                                   "api_key_env", "timeout", "max_retries", "backoff") if k in d}
        return cls(**known, extra=dict(d.get("extra", {})))

    def to_dict(self) -> dict:
        return {"base_url": self.base_url, "model": self.model, "temperature": self.temperature,
                "max_tokens": self.max_tokens, "api_key_env": self.api_key_env,
                "timeout": self.timeout, "max_retries": self.max_retries,
                "backoff": self.backoff, "extra": self.extra}


class Remote:
    """Client for an OpenAI-style ``/chat/completions`` endpoint."""

    name = "remote"
    replicate_invariant = False

    def __init__(self, config: RemoteConfig, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep,
                 wrap: Callable[[str], str] | None = None,
                 fallback_extraction: bool = False):
        self.cfg = config
        headers = {}
        key = os.environ.get(config.api_key_env) if config.api_key_env else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self.client = client or httpx.Client(timeout=config.timeout)
        self.headers = headers
        self.sleep = sleep
        self.wrap = wrap
        self.fallback_extraction = fallback_extraction

    def complete(self, prompt: str, query_id: str = "-") -> str:
        body = {"model": self.cfg.model, "messages": [{"role": "user", "content": prompt}]}
        if self.cfg.temperature is not None:
            body["temperature"] = self.cfg.temperature
        if self.cfg.max_tokens is not None:
            body["max_tokens"] = self.cfg.max_tokens
        body.update(self.cfg.extra)
        url = self.cfg.base_url.rstrip("/") + "/chat/completions"
        last = "no attempt made"
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                self.sleep(self.cfg.backoff * 2 ** (attempt - 1))
            try:
                r = self.client.post(url, json=body, headers=self.headers,
                                     timeout=self.cfg.timeout)
            except httpx.HTTPError as exc:
                last = f"{type(exc).__name__}: {exc}"
                log.warning("request %s failed (%s), attempt %d", query_id, last, attempt + 1)
                continue
            if r.status_code == 429 or r.status_code >= 500:
                last = f"HTTP {r.status_code}"
                log.warning("request %s got %s, attempt %d", query_id, last, attempt + 1)
                continue
            if r.status_code >= 400:
                raise TransportError(query_id, f"HTTP {r.status_code}: {r.text[:200]}")
            try:
                return r.json()["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(query_id, f"malformed response: {exc}") from exc
        raise TransportError(query_id, f"gave up after {self.cfg.max_retries + 1} attempts ({last})")

    def answer(self, query: QueryInstance, which: str, seed: int = 0,
               replicate: int = 0) -> RawResponse:
        prompt = query.factual if which == "factual" else query.counterfactual
        if self.wrap is not None:
            prompt = self.wrap(prompt)
        t0 = time.perf_counter()
        text = self.complete(prompt, f"{query.query_id}/{which}/{replicate}")
        latency = (time.perf_counter() - t0) * 1000.0
        fallback = (lambda p: self.complete(p, query.query_id)) if self.fallback_extraction else None
        question = query.factual if which == "factual" else query.counterfactual
        return RawResponse(query.query_id, query.pair, query.sample_id, which, replicate,
                           query.do_value, text, extract_boolean(question, text, fallback),
                           round(latency, 3))

    def config(self):
        return {"kind": self.name, **{k: v for k, v in self.cfg.to_dict().items()}}


# ---------------------------------------------------------------------------
# response store and batch runner


class ResponseStore:
    """Responses keyed by (pair, sample_id, which, replicate)."""

    def __init__(self, records: Iterable[RawResponse] = ()):
        self._records = {}
        for r in records:
            self._records[r.key] = r

    def __len__(self):
        return len(self._records)

    def __contains__(self, key):
        return key in self._records

    def add(self, r: RawResponse):
        self._records[r.key] = r

    def records(self) -> list[RawResponse]:
        return [self._records[k] for k in sorted(self._records, key=_sort_key)]

    def pairs(self) -> list[tuple]:
        return sorted({r.pair for r in self._records.values()})

    def count(self, pair=None) -> int:
        if pair is None:
            return len(self)
        k = pair_key(pair)
        return sum(1 for key in self._records if key[0] == k)

    def unknown_rate(self, pair=None) -> float:
        recs = [r for r in self._records.values() if pair is None or r.pair == tuple(pair)]
        return sum(r.boolean == UNKNOWN for r in recs) / max(len(recs), 1)

    def table(self, pair) -> dict:
        """Arrays for one pair: answers[which] of shape (samples, replicates)
        holding 1/0 (or -1 for UNKNOWN/missing), and the do value per sample."""
        k = pair_key(pair)
        recs = [r for key, r in self._records.items() if key[0] == k]
        if not recs:
            return {"sample_ids": np.array([], int), "do_value": np.array([], bool),
                    "factual": np.zeros((0, 0), int), "counterfactual": np.zeros((0, 0), int)}
        sample_ids = sorted({r.sample_id for r in recs})
        reps = max(r.replicate for r in recs) + 1
        pos = {s: i for i, s in enumerate(sample_ids)}
        ans = {w: np.full((len(sample_ids), reps), -1, dtype=np.int8) for w in WHICH}
        do_value = np.zeros(len(sample_ids), dtype=bool)
        for r in recs:
            i = pos[r.sample_id]
            ans[r.which][i, r.replicate] = {TRUE: 1, FALSE: 0}.get(r.boolean, -1)
            do_value[i] = r.do_value
        return {"sample_ids": np.array(sample_ids), "do_value": do_value, **ans}

    def save(self, path):
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w") as fh:
            for r in self.records():
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "ResponseStore":
        store = cls()
        path = Path(path)
        if not path.exists():
            return store
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    store.add(RawResponse.from_dict(json.loads(line)))
                except (ValueError, KeyError):
                    # a torn final line from an interrupted append
                    log.warning("skipping unreadable response line in %s", path)
        return store


def _sort_key(key):
    pair, sample_id, which, rep = key
    return (pair, sample_id, WHICH.index(which), rep)


@dataclass
class BatchResult:
    store: ResponseStore
    failures: list


def run_batch(reasoner, queries: Sequence[QueryInstance], replicates: int = 5,
              concurrency_limit: int = 8, seed: int = 0, store_path=None,
              resume: bool = False) -> BatchResult:
    """Collect ``replicates`` answers per (query, factual/counterfactual).

    Synthetic reasoners are answered in vectorised batches. Remote ones run
    in a thread pool capped at ``concurrency_limit``; each finished response
    is appended to ``store_path`` so an interrupted run can be resumed, and
    the final file is rewritten in canonical order.
    """
    if replicates < 1:
        raise DomainError("replicates must be at least 1")
    store = ResponseStore.load(store_path) if (resume and store_path) else ResponseStore()
    failures = []
    if isinstance(reasoner, SyntheticReasoner):
        by_pair = {}
        for q in queries:
            by_pair.setdefault(q.pair, []).append(q)
        for pair, qs in by_pair.items():
            for which in WHICH:
                base = None
                for rep in range(replicates):
                    todo = [q for q in qs if (pair_key(pair), q.sample_id, which, rep) not in store]
                    if not todo:
                        continue
                    if reasoner.replicate_invariant and base is not None and len(todo) == len(qs):
                        batch = [RawResponse(r.query_id, r.pair, r.sample_id, which, rep,
                                             r.do_value, r.text, r.boolean) for r in base]
                    else:
                        batch = reasoner.answer_batch(todo, which, rep, seed)
                        if len(todo) == len(qs):
                            base = batch
                    for r in batch:
                        store.add(r)
    else:
        jobs = [(q, which, rep) for q in queries for which in WHICH for rep in range(replicates)
                if (pair_key(q.pair), q.sample_id, which, rep) not in store]
        lock = threading.Lock()
        fh = open(store_path, "a") if store_path else None
        try:
            with ThreadPoolExecutor(max_workers=max(1, concurrency_limit)) as pool:
                futures = {pool.submit(reasoner.answer, q, which, seed, rep): (q, which, rep)
                           for q, which, rep in jobs}
                for fut in as_completed(futures):
                    q, which, rep = futures[fut]
                    try:
                        r = fut.result()
                    except TransportError as exc:
                        failures.append({"query_id": q.query_id, "which": which,
                                         "replicate": rep, "error": str(exc)})
                        continue
                    with lock:
                        store.add(r)
                        if fh:
                            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
                            fh.flush()
        finally:
            if fh:
                fh.close()
    if store_path:
        store.save(store_path)
        manifest = Path(str(store_path) + ".failures.json")
        if failures:
            manifest.write_text(json.dumps(sorted(failures, key=lambda f: (
                f["query_id"], f["which"], f["replicate"])), indent=2))
        elif manifest.exists():
            manifest.unlink()
    return BatchResult(store, failures)


def make_reasoner(kind: str, task: TaskSpec, **kw):
    """Build a reasoner from a short name and keyword options."""
    if kind == "oracle":
        return Oracle(task)
    if kind == "wrong-model":
        return WrongModelOracle(task, shift=float(kw.get("shift", 0.1)))
    if kind == "noisy":
        if "min_mediators" in kw and kw["min_mediators"] is not None:
            return NoisyOracle(task, flips_by_mediators(task, float(kw.get("flip_prob", 0.15)),
                                                        int(kw["min_mediators"])))
        if kw.get("per_mediator") is not None:
            return NoisyOracle(task, flips_growing(task, float(kw["per_mediator"])))
        return NoisyOracle(task, float(kw.get("flip_prob", 0.15)))
    if kind == "remote":
        cfg = kw.get("remote_config")
        if cfg is None:
            raise DomainError("remote reasoner needs an endpoint configuration")
        return Remote(cfg if isinstance(cfg, RemoteConfig) else RemoteConfig.from_dict(cfg),
                      wrap=kw.get("wrap"), fallback_extraction=bool(kw.get("fallback")))
    raise DomainError(f"unknown reasoner kind {kind!r}")
