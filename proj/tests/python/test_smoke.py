"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import factline


def test_porter_stem():
    assert factline.porter_stem("vaccines") == "vaccin"
    assert factline.porter_stem("cured") == "cure"
    assert factline.porter_stem("sky") == "sky"


def test_preprocess():
    assert factline.preprocess("Vaccines CURED!!!") == ["vaccin", "cure"]
    assert factline.preprocess("5G 5G 5G") == ["5g", "5g", "5g"]
    assert factline.preprocess("the virus", stopwords=["the"]) == ["viru"]


def test_harmonize_validity():
    assert factline.harmonize_validity("Pants on fire") == "False"
    assert factline.harmonize_validity("Correct Attribution") == "True"
    assert factline.harmonize_validity("Unproven") == "Unknown"
    with pytest.raises(factline.FactlineError):
        factline.harmonize_validity("totally bogus")
    assert factline.harmonize_validity("totally bogus",
                                       fallback_to_unknown=True) == "Unknown"


def test_mode_validity():
    assert factline.mode_validity(["False", "False", "True"]) == "False"
    assert factline.mode_validity(["True", "False"]) == "True"


def test_cosine_similarity():
    u = np.array([1.0, 0.0])
    v = np.array([0.0, 1.0])
    assert factline.cosine_similarity(u, u) == pytest.approx(1.0)
    assert factline.cosine_similarity(u, v) == pytest.approx(0.0)


def test_pca_roundtrip():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(30, 5))
    model = factline.pca_fit(x, components=5)
    assert len(model.explained_ratio) == 5
    assert sum(model.explained_ratio) <= 1.0 + 1e-8
    y = model.transform(x)
    assert y.shape == (30, 5)
    back = model.inverse_transform(y)
    assert np.allclose(back, x, atol=1e-8)

    # agreement with numpy's covariance eigenvalues
    cov = np.cov(x, rowvar=False)
    eig = np.sort(np.linalg.eigvalsh(cov))[::-1]
    assert np.allclose(model.eigenvalues, eig, atol=1e-8)


def test_kmeans_and_elbow():
    rng = np.random.default_rng(3)
    centers = np.eye(6) * 20.0
    x = np.vstack([c + rng.normal(scale=0.5, size=(20, 6)) for c in centers])
    model = factline.kmeans_fit(x, 6, seed=11)
    assert model.k == 6
    assert len(set(model.assignments)) == 6
    assert model.wss == pytest.approx(
        min(factline.kmeans_fit(x, 6, seed=11).wss, model.wss))
    history = model.wss_history
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    curve = factline.wss_curve(x, list(range(1, 13)), seed=5)
    assert factline.select_k_elbow(curve) == 6


def test_evaluate_f1():
    scores = factline.evaluate_f1(["A", "A", "B"], ["A", "B", "B"])
    assert scores["micro_f1"] == pytest.approx(2 / 3)
    assert scores["f1"] == [pytest.approx(2 / 3), pytest.approx(2 / 3)]


def test_random_baseline():
    gold = ["x"] * 7 + ["y"] * 2 + ["z"]
    uniform = factline.random_baseline(gold, mode="uniform")
    assert uniform["expected_accuracy"] == pytest.approx(1 / 3)
    freq = factline.random_baseline(gold, mode="frequency", trials=2000, seed=1)
    assert freq["expected_accuracy"] == pytest.approx(0.54)
    assert math.isclose(freq["mc_accuracy"], 0.54, abs_tol=0.05)


def test_classify_nn_type():
    annotated = [
        ("idB", [1.0, 0.0], "Right"),
        ("idA", [0.0, 1.0], "Up"),
    ]
    assert factline.classify_nn_type(np.array([0.9, 0.1]), annotated) == "Right"
    # exact tie resolves to the smaller id
    assert factline.classify_nn_type(np.array([1.0, 1.0]), annotated) == "Up"
