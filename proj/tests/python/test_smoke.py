"""Smoke tests for the Python module."""

import math

import numpy as np
import pytest

import myoeval


def test_frames_and_features():
    assert myoeval.frame_count(3000) == 178
    assert myoeval.frame_count(100) == 0
    rng = np.random.default_rng(1)
    channels = rng.normal(size=(3, 3000))
    feats = myoeval.extract_features(channels)
    assert feats.shape == (178, 12)
    first = channels[0, :160]
    assert feats[0, 0] == pytest.approx(np.mean(np.abs(first)))
    assert feats[0, 1] == pytest.approx(np.sum(np.abs(np.diff(first))))
    assert myoeval.zc(np.array([1.0, -1.0, 1.0]), 2.0) == 2
    assert myoeval.ssc(np.array([0.0, 2.0, 1.0, 3.0, 0.0]), 2.5) == 1


def test_bandstop_removes_line_noise():
    t = np.arange(6000) / 1000.0
    y = myoeval.bandstop_filter(np.sin(2 * math.pi * 60 * t), 1000.0, 60.0)
    assert np.sqrt(np.mean(y[3000:] ** 2)) < 0.1


def test_classifiers_and_cross_validation():
    rng = np.random.default_rng(2)
    classes = myoeval.CLASSES
    labels, rows, sets = [], [], []
    for s in range(3):
        for i, c in enumerate(classes):
            for _ in range(20):
                rows.append(10.0 * i + rng.normal(size=2))
                labels.append(c)
                sets.append(s)
    x = np.array(rows)
    for kind in ("LDA", "QDA", "KNN"):
        model = myoeval.train(kind, x, labels)
        assert model.kind == kind
        predicted, confidence = model.predict(x)
        assert predicted == labels
        assert np.all((confidence > 0) & (confidence <= 1))
        assert myoeval.leave_one_set_out(kind, x, labels, sets)["mean_error"] == 0.0
    with pytest.raises(myoeval.NotImplementedError):
        myoeval.train("SVM", x, labels)
    with pytest.raises(myoeval.ParameterError):
        myoeval.train("LDA", x, labels[:-1])


def test_stream_segmentation_and_metrics():
    labels = ["NM"] * 50 + ["WF"] * 50 + ["NM"] * 50
    smoothed = myoeval.majority_vote(labels)
    assert smoothed[:55] == ["NM"] * 54 + ["WF"]
    timeline = [(0.0, "NM"), (0.8, "WF"), (1.6, "NM")]
    seg = myoeval.segment(smoothed, timeline)
    assert [s[0] for s in seg["steady"]] == ["NM", "WF", "NM"]
    assert [t["group"] for t in seg["transitions"]] == ["R2A", "A2R"]
    for t in seg["transitions"]:
        assert t["T_TRANSITION"] == t["T_ONSET"] - t["T_OFFSET"]
    assert myoeval.steady_metrics(["WF"] * 8 + ["NM", "WE"], "WF")["TER"] == pytest.approx(20.0)
    m = myoeval.transition_metrics(["WF", "NM", "CG", "WE", "WE"], "WF", "WE")
    assert (m["group"], m["TCE"], m["PNM"]) == ("A2A", pytest.approx(20.0), pytest.approx(20.0))


def test_statistics():
    r, p = myoeval.pearson([1, 2, 3, 4], [1, 3, 2, 4])
    assert abs(r - 0.8) < 1e-12
    assert 0 < p < 1
    kw = myoeval.kruskal_wallis([[1, 2, 3], [100, 101, 102]])
    assert kw["p_chi_square"] < 0.05
    assert kw["p_exact"] == pytest.approx(0.1)
    assert len(myoeval.dunn_sidak([[1, 2, 3], [4, 5, 6], [7, 8, 9]])) == 3
    assert myoeval.sidak_adjust(0.01, 3) == pytest.approx(1 - 0.99 ** 3)


def test_generation_and_experiment():
    config = """
experiment:
  subjects: 1
  training_sets: 2
  test_sets: 1
  threads: 1
signal:
  prompt_duration_s: 1.0
  rep_duration_s: 1.0
classifiers:
  kinds: [LDA]
"""
    subject = myoeval.generate_subject(config, 1)
    assert len(subject["training"]) == 14
    assert subject["tests"][0]["channels"].shape[0] == 8
    assert len(subject["tests"][0]["timeline"]) == 43

    report = myoeval.run_experiment(config)
    assert report["format"] == "myoeval-report"
    assert [row["classifier"] for row in report["tables"]["R2A"]["rows"]] == ["LDA"]
    files, summary = myoeval.render_report(report)
    assert set(files) == {"report.json", "offline.csv", "steady.csv", "R2A.csv", "A2R.csv", "A2A.csv"}
    assert "T_TRANSITION" in summary
    assert myoeval.run_experiment(config) == report
    with pytest.raises(myoeval.FormatError):
        myoeval.run_experiment("experiment:\n  subjcts: 1\n")
