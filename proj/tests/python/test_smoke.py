import math

import numpy as np
import pytest

import albias


@pytest.fixture(scope="module")
def corpus():
    return albias.Corpus.synthetic(num_classes=4, docs_per_class=100, seed=5)


@pytest.fixture(scope="module")
def test_split():
    return albias.Corpus.synthetic(num_classes=4, docs_per_class=20, seed=6)


def test_corpus_basics(corpus):
    assert len(corpus) == 400
    assert corpus.num_classes == 4
    assert corpus.label_histogram() == [100, 100, 100, 100]
    assert corpus == albias.Corpus.synthetic(num_classes=4, docs_per_class=100, seed=5)
    small = albias.Corpus([(0, "alpha beta"), (1, "gamma delta")], 2)
    assert small.text(1) == "gamma delta"
    assert small.labels() == [0, 1]


def test_corpus_errors():
    with pytest.raises(albias.DataError):
        albias.Corpus([(2, "x")], 2)
    with pytest.raises(albias.DataError):
        albias.Corpus.load_csv("/nonexistent.csv", 2)
    with pytest.raises(albias.UsageError):
        albias.Corpus.synthetic(noise_rate=2.0)


def test_csv_round_trip(corpus, tmp_path):
    corpus.write_csv(tmp_path / "train.csv")
    back = albias.Corpus.load_csv(tmp_path / "train.csv", 4)
    assert back.labels() == corpus.labels()
    assert [back.text(i) for i in range(len(back))] == [corpus.text(i) for i in range(len(corpus))]


def test_run_is_deterministic(corpus, test_split):
    a = albias.run(corpus, test_split, strategy="entropy", k=10, rounds=3, seed=1, epochs=3)
    b = albias.run(corpus, test_split, strategy="entropy", k=10, rounds=3, seed=1, epochs=3)
    assert a.to_jsonl() == b.to_jsonl()
    assert len(a.acquired) == 30
    assert len(a.queries) == 3
    assert len(a.curve) == 4
    assert a.label == "ftext-entropy-k10-b3-s1"
    back = albias.RunLog.parse(a.to_jsonl())
    assert back.train_sets == a.train_sets


def test_run_rejects_bad_config(corpus):
    with pytest.raises(albias.UsageError):
        albias.run(corpus, strategy="bogus", k=10, rounds=2)
    with pytest.raises(albias.UsageError):
        albias.run(corpus, k=300, rounds=2)


def test_classifiers(corpus):
    ft = albias.FastText.train(corpus, epochs=3, seed=2)
    p = ft.predict_proba(corpus.text(0))
    assert len(p) == 4 and math.isclose(sum(p), 1.0, rel_tol=1e-12)
    probs = ft.predict_proba_corpus(corpus, [0, 1, 2])
    assert probs.shape == (3, 4)
    emb = ft.embed_corpus(corpus)
    assert emb.shape == (400, 25)

    nb = albias.NaiveBayes.train(corpus, list(range(200)))
    q = nb.predict_proba(corpus.text(300))
    assert math.isclose(sum(q), 1.0, rel_tol=1e-12)

    supports = albias.svm_support_ids(emb, corpus.labels())
    assert 0 < len(supports) < len(corpus)


def test_diagnostics(corpus):
    assert albias.label_entropy([3, 1]) == pytest.approx(0.5493061443340549, abs=1e-12)
    assert albias.label_entropy([5, 5, 5, 5]) == pytest.approx(math.log(4), abs=1e-15)
    assert albias.overlap_pct([1, 2, 3, 4], [3, 4, 5]) == 50.0
    assert albias.chance_overlap(1000, 100, 200) == pytest.approx(20.0)
    assert albias.fnv1a64(b"") == 0xCBF29CE484222325
    assert albias.fnv1a64(b"foobar") == 0x85944171F73967E8
    assert albias.select_topk([7, 3, 5], [0.5, 0.5, 0.9], 2) == [5, 3]
    assert albias.score_entropy([0.5, 0.5]) == pytest.approx(math.log(2))

    probs = np.array([[0.7, 0.3], [0.2, 0.8], [0.6, 0.4]])
    cal = albias.calibration(probs, [0, 1, 1])
    assert cal["count"] == 3
    assert cal["nll"] == pytest.approx(-(math.log(0.7) + math.log(0.8) + math.log(0.4)) / 3)

    log = albias.run(corpus, k=10, rounds=2, seed=3, epochs=3)
    q_mean, q_std, final = albias.class_bias(log, corpus)
    assert final <= math.log(4) + 1e-12
    assert q_std >= 0
