import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from flowembed.estimator import FlowGraphClassifier, GraphVectorizer
from flowembed.synthetic import synthetic_corpus

CODES = [
    "int f(int a){ return a + 1; }",
    'void g(){ char *s = NULL; use(s); }',
    "void h(unsigned int n){ int x = n; }",
]


def test_vectorizer_params_round_trip():
    v = GraphVectorizer(embed_dim=16, seed=3)
    params = v.get_params()
    assert params["embed_dim"] == 16
    v2 = clone(v)
    assert v2.get_params() == params


def test_vectorizer_requires_fit():
    with pytest.raises(NotFittedError):
        GraphVectorizer().transform(CODES)


def test_vectorizer_transform_shape_and_determinism():
    v = GraphVectorizer(embed_dim=12, seed=0).fit(CODES)
    out1 = v.transform(CODES)
    out2 = v.transform(CODES)
    assert out1.shape == (3, 12)
    assert np.array_equal(out1, out2)


def test_vectorizer_rejects_bad_input():
    v = GraphVectorizer()
    with pytest.raises(ValueError):
        v.fit([])
    with pytest.raises(ValueError):
        v.fit(["int a;", "   "])


def test_vectorizer_unparseable_code_becomes_zero_row():
    v = GraphVectorizer(embed_dim=8, seed=0, pe="off").fit(CODES)
    out = v.transform(["@@@ not C at all ???"])
    # error nodes contribute nothing; pooled empty graph is all-zero
    assert np.allclose(out[0], 0.0)


def test_classifier_fit_predict_shapes():
    corpus = synthetic_corpus(n=40, seed=2)
    codes = [s.code for s in corpus]
    labels = [s.label for s in corpus]
    clf = FlowGraphClassifier(embed_dim=16, seq_dim=4, epochs=3,
                              learning_rate=0.05, seed=0)
    clf.fit(codes, labels)
    assert list(clf.classes_) == [0, 1]
    preds = clf.predict(codes[:5])
    assert preds.shape == (5,)
    assert set(preds) <= {0, 1}
    probs = clf.predict_proba(codes[:5])
    assert probs.shape == (5, 2)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_classifier_requires_fit():
    with pytest.raises(NotFittedError):
        FlowGraphClassifier().predict(CODES)


def test_classifier_rejects_nonbinary_labels():
    clf = FlowGraphClassifier(epochs=1)
    with pytest.raises(ValueError):
        clf.fit(CODES, [0, 1, 2])


def test_classifier_label_length_mismatch():
    clf = FlowGraphClassifier(epochs=1)
    with pytest.raises(ValueError):
        clf.fit(CODES, [0, 1])


def test_classifier_clone_and_params():
    clf = FlowGraphClassifier(gnn="ggnn", pool="max", epochs=2)
    c2 = clone(clf)
    assert c2.get_params()["gnn"] == "ggnn"
    assert c2.get_params()["pool"] == "max"
    c2.set_params(pool="sum")
    assert c2.pool == "sum"
