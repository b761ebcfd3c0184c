import json
import threading

import httpx
import numpy as np
import pytest

from ccr.errors import DomainError, TransportError
from ccr.estimands import ExactOracle
from ccr.evaluator import EvalConfig, subsample_pns
from ccr.graph import path_stats
from ccr.reasoner import (EXTRACTION_PROMPT, FALSE, TRUE, UNKNOWN, NoisyOracle, Oracle,
                          RawResponse, Remote, RemoteConfig, ResponseStore, WrongModelOracle,
                          extract_boolean, final_block_nodes, flips_by_mediators, flips_growing,
                          make_reasoner, parse_true_false, run_batch)
from ccr.taskgen import fixture_task, make_corpus

from conftest import DATA


def load_transcripts():
    with open(DATA / "extraction_transcripts.jsonl") as fh:
        return [json.loads(line) for line in fh]


def question_for(name):
    return f"Some story. Is {name} happy? Be as concise as possible."


# ---------------------------------------------------------------------------
# extraction


def test_verdict_examples():
    assert extract_boolean(question_for("Becca"), "Therefore, yes, Becca is happy!") == TRUE
    assert extract_boolean(question_for("Yasmin"), "Therefore, no, Yasmin is not happy.") == FALSE
    assert extract_boolean(question_for("Yasmin"), "It depends on the distribution.") == UNKNOWN


def test_transcript_accuracy():
    rows = load_transcripts()
    assert len(rows) >= 100
    correct = [extract_boolean(question_for(r["subject"]), r["answer"]) == r["label"]
               for r in rows]
    assert np.mean(correct) >= 0.95


def test_no_errors_on_explicit_verdicts():
    rows = [r for r in load_transcripts() if r["verdict"]]
    assert len(rows) >= 20
    wrong = [r["id"] for r in rows
             if extract_boolean(question_for(r["subject"]), r["answer"]) != r["label"]]
    assert wrong == []


def test_other_people_do_not_decide_the_verdict():
    answer = "Emma is happy. Fox is happy. Yasmin gets 2 candies and is not happy."
    assert extract_boolean(question_for("Yasmin"), answer) == FALSE


def test_rules_are_not_verdicts():
    answer = "Yasmin will be happy if Emma is happy or if Fox is happy."
    assert extract_boolean(question_for("Yasmin"), answer) == UNKNOWN


def test_fallback_only_when_rules_fail():
    calls = []

    def fb(prompt):
        calls.append(prompt)
        return "TRUE"

    assert extract_boolean(question_for("Fox"), "Yes.", fb) == TRUE
    assert calls == []
    assert extract_boolean(question_for("Fox"), "Hmm, hard to say.", fb) == TRUE
    assert calls and calls[0].startswith("I will give you a question and its answer.")
    assert "Answer: 'Hmm, hard to say.'" in calls[0]


def test_parse_true_false():
    assert parse_true_false("TRUE") == TRUE
    assert parse_true_false("'false'") == FALSE
    assert parse_true_false("TRUE or FALSE") == UNKNOWN
    assert parse_true_false("") == UNKNOWN


def test_extraction_prompt_placeholders():
    text = EXTRACTION_PROMPT.format(question="q?", answer="a.")
    assert "Question: 'q?' Answer: 'a.'" in text


# ---------------------------------------------------------------------------
# synthetic reasoners


@pytest.fixture(scope="module")
def task():
    return fixture_task("taxonomy-fig4")


@pytest.fixture(scope="module")
def corpus(task):
    return make_corpus(task, 1000, seed=0)


def test_oracle_matches_scm(task, corpus):
    answers = Oracle(task).answer_batch(corpus[:200], "counterfactual")
    for q, r in zip(corpus[:200], answers):
        leak = {n: np.array([q.draw["w"][n] < task.scm.noise_p[n]]) for n in task.dag.nodes}
        truth = task.scm.evaluate(leak, None, {q.pair[0]: q.do_value})[q.pair[1]][0]
        assert r.boolean == (TRUE if truth else FALSE)
        assert extract_boolean(q.counterfactual, r.text) == r.boolean


def test_full_oracle_run_counts(task, corpus):
    result = run_batch(Oracle(task), corpus, replicates=5)
    for pair in task.plan.pairs:
        assert result.store.count(pair) == 10000
    assert result.failures == []


def test_noisy_half_flip_destroys_contrast(task, corpus):
    store = run_batch(NoisyOracle(task, 0.5), corpus, replicates=5, seed=1).store
    cfg = EvalConfig()
    for pair in task.plan.pairs:
        est = subsample_pns(store, pair, cfg)
        # each estimate is a difference of two means of 1000 fair coins
        sd = np.sqrt(2 * 0.25 / 1000)
        assert abs(est.mean()) < 3 * sd


def test_noisy_flip_rate(task, corpus):
    store = run_batch(NoisyOracle(task, 0.2), corpus[:1000], replicates=2, seed=3).store
    truth = run_batch(Oracle(task), corpus[:1000], replicates=2).store
    recs = store.records()
    ref = {r.key: r.boolean for r in truth.records()}
    rate = np.mean([r.boolean != ref[r.key] for r in recs])
    assert abs(rate - 0.2) < 0.03


def test_noisy_answers_do_not_depend_on_batching(task, corpus):
    r = NoisyOracle(task, 0.3)
    whole = r.answer_batch(corpus[:100], "factual", 2, seed=5)
    parts = r.answer_batch(corpus[:37], "factual", 2, seed=5) + \
        r.answer_batch(corpus[37:100], "factual", 2, seed=5)
    assert [a.boolean for a in whole] == [a.boolean for a in parts]


def test_noisy_rejects_bad_probability(task):
    with pytest.raises(DomainError):
        NoisyOracle(task, 1.5)


def test_flip_schedules(task):
    by_med = flips_by_mediators(task, 0.15)
    assert set(by_med) == {p for p in task.plan.pairs if p != ("C", "D")}
    grow = flips_growing(task, 0.03)
    for pair, p in grow.items():
        assert p == pytest.approx(0.03 * path_stats(task.dag, *pair).mediator_count)


def test_wrong_model_shares_graph(task):
    r = WrongModelOracle(task, shift=0.1)
    assert r.alt.dag == task.dag
    assert final_block_nodes(task) == ["E", "F", "Y"]
    assert r.alt.noise_p["Y"] == pytest.approx(0.15)
    assert r.alt.noise_p["C"] == task.scm.noise_p["C"]
    with pytest.raises(DomainError):
        WrongModelOracle(task, alt_scm=_chain_scm())


def _chain_scm():
    from ccr.graph import Dag
    from ccr.scm import BoolScm
    return BoolScm.uniform(Dag.from_edges([("X", "Y")]), 0.5)


def test_wrong_model_biases_truth(task):
    r = WrongModelOracle(task, shift=0.1)
    alt, true = ExactOracle(r.alt), ExactOracle(task.scm)
    assert alt.pns("X", "Y") < true.pns("X", "Y") - 0.05


def test_make_reasoner(task):
    assert isinstance(make_reasoner("oracle", task), Oracle)
    assert isinstance(make_reasoner("wrong-model", task), WrongModelOracle)
    noisy = make_reasoner("noisy", task, flip_prob=0.15, min_mediators=2)
    assert noisy.flip_prob(("C", "D")) == 0 and noisy.flip_prob(("X", "Y")) == 0.15
    with pytest.raises(DomainError):
        make_reasoner("remote", task)
    with pytest.raises(DomainError):
        make_reasoner("psychic", task)


# ---------------------------------------------------------------------------
# response store


def test_store_round_trip_and_torn_line(tmp_path, task, corpus):
    store = run_batch(Oracle(task), corpus[:10], replicates=2).store
    path = tmp_path / "r.jsonl"
    store.save(path)
    with open(path, "a") as fh:
        fh.write('{"query_id": "x", "pair"')
    again = ResponseStore.load(path)
    assert [r.to_dict() for r in again.records()] == [r.to_dict() for r in store.records()]


def test_store_table_marks_unknown(task, corpus):
    q = corpus[0]
    store = ResponseStore([
        RawResponse(q.query_id, q.pair, 0, "factual", 0, q.do_value, "?", UNKNOWN),
        RawResponse(q.query_id, q.pair, 0, "counterfactual", 0, q.do_value, "Yes.", TRUE),
    ])
    t = store.table(q.pair)
    assert t["factual"][0, 0] == -1 and t["counterfactual"][0, 0] == 1
    assert store.unknown_rate() == 0.5


def test_resume_after_interrupt_gives_same_store(tmp_path, task, corpus):
    qs = corpus[:300]
    full = run_batch(NoisyOracle(task, 0.2), qs, replicates=3, seed=2).store
    path = tmp_path / "responses.jsonl"
    partial = run_batch(NoisyOracle(task, 0.2), qs[:120], replicates=3, seed=2, store_path=path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[: len(lines) // 2]) + "\n" + lines[len(lines) // 2][:20])
    resumed = run_batch(NoisyOracle(task, 0.2), qs, replicates=3, seed=2, store_path=path,
                        resume=True)
    assert len(partial.store) < len(full)
    assert [r.to_dict() for r in resumed.store.records()] == \
        [r.to_dict() for r in full.records()]
    assert ResponseStore.load(path).count() == len(full)


# ---------------------------------------------------------------------------
# remote client


class FakeEndpoint:
    """Chat-completion stand-in that answers like the oracle.

    Failures can be scripted per prompt: a list of status codes returned on
    the first calls before a normal answer.
    """

    def __init__(self, answers, failures=None, always_fail=()):
        self.answers = answers
        self.failures = {k: list(v) for k, v in (failures or {}).items()}
        self.always_fail = set(always_fail)
        self.lock = threading.Lock()
        self.calls = 0
        self.bodies = []
        self.headers = []

    def __call__(self, request):
        body = json.loads(request.content)
        prompt = body["messages"][0]["content"]
        with self.lock:
            self.calls += 1
            self.bodies.append(body)
            self.headers.append(dict(request.headers))
            script = self.failures.get(prompt)
            if prompt in self.always_fail:
                return httpx.Response(503)
            if script:
                return httpx.Response(script.pop(0), text="busy")
        text = self.answers.get(prompt, "I am not sure.")
        return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def oracle_answers(task, queries):
    out = {}
    o = Oracle(task)
    for which in ("factual", "counterfactual"):
        for q, r in zip(queries, o.answer_batch(queries, which)):
            prompt = q.factual if which == "factual" else q.counterfactual
            name = task.names[q.pair[1]]
            out[prompt] = (f"Let me think. Therefore, yes, {name} is happy!" if r.boolean == TRUE
                           else f"Let me think. Therefore, no, {name} is not happy.")
    return out


def remote(endpoint, **kw):
    client = httpx.Client(transport=httpx.MockTransport(endpoint))
    cfg = RemoteConfig("http://test/v1", "m", temperature=0.0, max_tokens=64, **kw)
    return Remote(cfg, client=client, sleep=lambda s: None)


def _content(store):
    return [(r.key, r.text, r.boolean) for r in store.records()]


def test_remote_answers_match_oracle(task, corpus):
    qs = corpus[:40]
    ep = FakeEndpoint(oracle_answers(task, qs))
    got = run_batch(remote(ep), qs, replicates=2, concurrency_limit=4).store
    ref = run_batch(Oracle(task), qs, replicates=2).store
    assert [(r.key, r.boolean) for r in got.records()] == \
        [(r.key, r.boolean) for r in ref.records()]
    assert ep.bodies[0]["model"] == "m" and ep.bodies[0]["temperature"] == 0.0


def test_remote_sends_bearer_token(monkeypatch, task, corpus):
    monkeypatch.setenv("CCR_TEST_KEY", "sekrit")
    ep = FakeEndpoint(oracle_answers(task, corpus[:1]))
    remote(ep, api_key_env="CCR_TEST_KEY").answer(corpus[0], "factual")
    assert ep.headers[0]["authorization"] == "Bearer sekrit"


def test_concurrency_does_not_change_results(task, corpus):
    qs = corpus[:60]
    answers = oracle_answers(task, qs)
    stores = [run_batch(remote(FakeEndpoint(answers)), qs, replicates=2,
                        concurrency_limit=c).store for c in (1, 3, 16)]
    assert _content(stores[0]) == _content(stores[1]) == _content(stores[2])


def test_retries_then_succeeds(task, corpus):
    q = corpus[0]
    answers = oracle_answers(task, [q])
    delays = []
    ep = FakeEndpoint(answers, failures={q.factual: [429, 500, 502]})
    client = httpx.Client(transport=httpx.MockTransport(ep))
    r = Remote(RemoteConfig("http://test", "m", backoff=0.5), client=client, sleep=delays.append)
    out = r.answer(q, "factual")
    assert out.boolean in (TRUE, FALSE)
    assert delays == [0.5, 1.0, 2.0]


def test_gives_up_with_query_id(task, corpus):
    q = corpus[0]
    ep = FakeEndpoint({}, always_fail=[q.factual])
    with pytest.raises(TransportError) as exc:
        remote(ep, max_retries=2).answer(q, "factual")
    assert q.query_id in exc.value.query_id
    assert ep.calls == 3


def test_client_error_is_not_retried(task, corpus):
    q = corpus[0]
    ep = FakeEndpoint({}, failures={q.factual: [400]})
    with pytest.raises(TransportError):
        remote(ep).answer(q, "factual")
    assert ep.calls == 1


def test_malformed_body(task, corpus):
    client = httpx.Client(transport=httpx.MockTransport(
        lambda req: httpx.Response(200, json={"nothing": []})))
    r = Remote(RemoteConfig("http://test", "m"), client=client, sleep=lambda s: None)
    with pytest.raises(TransportError, match="malformed"):
        r.answer(corpus[0], "factual")


def test_partial_failure_manifest_and_resume(tmp_path, task, corpus):
    qs = corpus[:20]
    answers = oracle_answers(task, qs)
    bad = qs[3].counterfactual
    path = tmp_path / "responses.jsonl"
    first = run_batch(remote(FakeEndpoint(answers, always_fail=[bad]), max_retries=1), qs,
                      replicates=2, store_path=path)
    assert len(first.failures) == 2
    manifest = json.loads((tmp_path / "responses.jsonl.failures.json").read_text())
    assert {f["query_id"] for f in manifest} == {qs[3].query_id}
    ep = FakeEndpoint(answers)
    second = run_batch(remote(ep), qs, replicates=2, store_path=path, resume=True)
    assert second.failures == [] and ep.calls == 2
    assert not (tmp_path / "responses.jsonl.failures.json").exists()
    ref = run_batch(remote(FakeEndpoint(answers)), qs, replicates=2).store
    assert _content(second.store) == _content(ref)


def test_wrapped_prompt_is_sent(task, corpus):
    q = corpus[0]
    seen = []

    def handler(req):
        seen.append(json.loads(req.content)["messages"][0]["content"])
        return httpx.Response(200, json={"choices": [{"message": {"content": "Yes."}}]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    r = Remote(RemoteConfig("http://test", "m"), client=client, wrap=lambda p: "PRE " + p)
    assert r.answer(q, "factual").boolean == TRUE
    assert seen == ["PRE " + q.factual]


def test_llm_fallback_extraction(task, corpus):
    q = corpus[0]

    def handler(req):
        prompt = json.loads(req.content)["messages"][0]["content"]
        text = "FALSE" if prompt.startswith("I will give you") else "Hard to say."
        return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    r = Remote(RemoteConfig("http://test", "m"), client=client, fallback_extraction=True)
    assert r.answer(q, "factual").boolean == FALSE
