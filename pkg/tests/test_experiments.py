import numpy as np
import pytest

from raga_moodkit.audio import DEFAULT_BI_SAMPLE_PLAN, SegmentPlan
from raga_moodkit.errors import (
    EmptyInput,
    MoodkitError,
    NoEligibleModel,
    ValidationError,
)
from raga_moodkit.errors import ClassTooSmall
from raga_moodkit.experiments import (
    ExperimentConfig,
    ExperimentReport,
    accuracy,
    confusion_matrix,
    evaluate_bundle,
    grid_points,
    grid_search,
    grid_search_cv,
    kfold_indices,
    precision_recall,
    run_on_features,
    select_final_model,
    split_table,
)
from raga_moodkit.mfcc import MfccConfig
from raga_moodkit.store import FeatureTable, segment_id


class TestAccuracy:
    def test_perfect(self):
        assert accuracy(["a", "b"], ["a", "b"]) == 1.0

    def test_disjoint(self):
        assert accuracy(["a", "a"], ["b", "b"]) == 0.0

    def test_three_of_four(self):
        assert accuracy(["a", "b", "a", "a"], ["a", "b", "a", "b"]) == 0.75

    def test_empty(self):
        with pytest.raises(EmptyInput):
            accuracy([], [])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            accuracy(["a"], ["a", "b"])


class TestConfusion:
    def test_perfect_is_diagonal(self):
        labels = ["a", "b", "c", "a"]
        matrix = confusion_matrix(labels, labels, classes=("a", "b", "c"))
        assert np.all(matrix == np.diag([2, 1, 1]))

    def test_single_error_off_diagonal(self):
        matrix = confusion_matrix(["b"], ["a"], classes=("a", "b"))
        assert matrix[0, 1] == 1 and matrix.sum() == 1

    def test_trace_over_total_is_accuracy(self):
        rng = np.random.default_rng(0)
        labels = rng.choice(list("abc"), 100)
        predictions = rng.choice(list("abc"), 100)
        matrix = confusion_matrix(predictions, labels, classes=("a", "b", "c"))
        assert np.trace(matrix) / matrix.sum() == pytest.approx(accuracy(predictions, labels))

    def test_row_sums_are_class_counts(self):
        labels = ["a", "a", "b"]
        matrix = confusion_matrix(["b", "a", "b"], labels, classes=("a", "b"))
        np.testing.assert_array_equal(matrix.sum(axis=1), [2, 1])

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            confusion_matrix(["zz"], ["a"], classes=("a", "b"))

    def test_precision_recall(self):
        matrix = np.array([[8, 2], [1, 9]])
        precision, recall = precision_recall(matrix)
        assert precision[0] == pytest.approx(8 / 9)
        assert recall[0] == pytest.approx(0.8)
        # degenerate column
        precision, recall = precision_recall(np.array([[2, 0], [1, 0]]))
        assert precision[1] == 0.0


class TestGridSearch:
    def _data(self):
        rng = np.random.default_rng(1)
        X_train = np.vstack([rng.normal(-2, 0.5, (20, 2)), rng.normal(2, 0.5, (20, 2))])
        y_train = np.array(["lo"] * 20 + ["hi"] * 20)
        X_val = np.vstack([rng.normal(-2, 0.5, (10, 2)), rng.normal(2, 0.5, (10, 2))])
        y_val = np.array(["lo"] * 10 + ["hi"] * 10)
        return (X_train, y_train), (X_val, y_val)

    def test_grid_points_lexicographic(self):
        points = grid_points({"gamma": [0.1, 0.2], "C": [1, 10]})
        assert points == [
            {"C": 1, "gamma": 0.1},
            {"C": 1, "gamma": 0.2},
            {"C": 10, "gamma": 0.1},
            {"C": 10, "gamma": 0.2},
        ]

    def test_single_point(self):
        train, val = self._data()
        best, rows = grid_search("knn", {"k": [3]}, train, val)
        assert best == {"k": 3}
        assert len(rows) == 1

    def test_best_equals_exhaustive_oracle(self):
        train, val = self._data()
        grid = {"C": [1, 10], "gamma": [0.01, 0.1]}
        best, rows = grid_search("svm", grid, train, val, base_params={"seed": 0})
        # independent exhaustive re-evaluation in the same order
        from raga_moodkit.models import make_classifier

        expected, expected_accuracy = None, -1.0
        for point in grid_points(grid):
            model = make_classifier("svm", seed=0, **point)
            model.fit(*train)
            point_accuracy = np.mean(model.predict(val[0]) == val[1])
            if point_accuracy > expected_accuracy:
                expected, expected_accuracy = point, point_accuracy
        assert best == expected
        assert len(rows) == 4
        assert all(r.error is None for r in rows)

    def test_all_tie_takes_first(self):
        train, val = self._data()
        best, rows = grid_search("knn", {"k": [3, 5, 7]}, train, val)
        accuracies = [r.validation_accuracy for r in rows]
        assert all(a == accuracies[0] for a in accuracies)
        assert best == {"k": 3}

    def test_failed_points_recorded_not_fatal(self):
        train, val = self._data()
        best, rows = grid_search("knn", {"k": [3, 4000]}, train, val)
        assert best == {"k": 3}
        assert rows[1].error is not None and rows[1].validation_accuracy is None

    def test_all_points_failing_raises(self):
        train, val = self._data()
        with pytest.raises(MoodkitError):
            grid_search("knn", {"k": [4000, 5000]}, train, val)

    def test_empty_grid(self):
        train, val = self._data()
        with pytest.raises(ValidationError):
            grid_search("knn", {}, train, val)


def synthetic_table(
    n_songs_per_class=6, classes=("Karuna", "Veera"), n_coeffs=4, cuts=2, seed=0, prefix=""
):
    """Feature rows with class-dependent means, two cuts per 'song'."""
    rng = np.random.default_rng(seed)
    ids, labels, rows = [], [], []
    for c, cls in enumerate(classes):
        for s in range(n_songs_per_class):
            song = f"{prefix}{cls.lower()}_{s:02d}"
            for cut in range(cuts):
                ids.append(segment_id(song, cut))
                labels.append(cls)
                rows.append(rng.normal(3.0 * c, 0.3, n_coeffs))
    return FeatureTable(
        segment_ids=ids,
        labels=np.asarray(labels, dtype=str),
        X=np.vstack(rows),
        mfcc=MfccConfig(n_filters=8, n_coeffs=n_coeffs),
        plan=DEFAULT_BI_SAMPLE_PLAN if cuts == 2 else SegmentPlan(((0.0, 60.0),)),
    )


class TestSplitTable:
    def test_file_level_never_splits_a_song(self):
        table = synthetic_table()
        train_idx, val_idx = split_table(table, "file", 0.25, seed=3)
        train_songs = {table.song_ids[i] for i in train_idx}
        val_songs = {table.song_ids[i] for i in val_idx}
        assert not train_songs & val_songs
        assert len(train_idx) + len(val_idx) == len(table)

    def test_segment_level_can_split_songs(self):
        table = synthetic_table()
        train_idx, val_idx = split_table(table, "segment", 0.25, seed=3)
        train_songs = {table.song_ids[i] for i in train_idx}
        val_songs = {table.song_ids[i] for i in val_idx}
        assert train_songs & val_songs  # leaky by design

    def test_deterministic(self):
        table = synthetic_table()
        one = split_table(table, "file", 0.25, seed=9)
        two = split_table(table, "file", 0.25, seed=9)
        np.testing.assert_array_equal(one[0], two[0])
        np.testing.assert_array_equal(one[1], two[1])


class TestRunOnFeatures:
    def test_report_structure_and_consistency(self):
        table = synthetic_table()
        config = ExperimentConfig(family="knn", params={"k": 3}, seed=1, mfcc=table.mfcc)
        report = run_on_features(table, config)
        assert report.validation_accuracy == 1.0  # trivially separable
        matrix = np.asarray(report.confusion)
        assert np.trace(matrix) / matrix.sum() == pytest.approx(report.validation_accuracy)
        assert matrix.sum() == report.n_val_rows
        assert report.bundle is not None
        assert report.bundle.metrics["validation_accuracy"] == report.validation_accuracy
        assert set(report.per_class) == {"Karuna", "Veera"}

    def test_grid_inside_experiment(self):
        table = synthetic_table()
        config = ExperimentConfig(
            family="knn", grid={"k": [1, 3]}, seed=1, mfcc=table.mfcc
        )
        report = run_on_features(table, config)
        assert report.grid_rows is not None and len(report.grid_rows) == 2
        assert report.params["k"] in (1, 3)
        assert report.config["params"] == report.params

    def test_deterministic_reports(self):
        table = synthetic_table()
        config = ExperimentConfig(family="svm", params={"C": 10.0, "gamma": 0.1}, seed=2, mfcc=table.mfcc)
        one = run_on_features(table, config)
        two = run_on_features(table, config)
        assert one.to_json() == two.to_json()

    def test_wall_clock_not_serialized(self):
        table = synthetic_table()
        config = ExperimentConfig(family="knn", params={"k": 1}, seed=1, mfcc=table.mfcc)
        report = run_on_features(table, config)
        assert report.wall_clock_s > 0
        assert "wall_clock" not in report.to_json()

    def test_markdown_table_shape(self):
        table = synthetic_table()
        config = ExperimentConfig(family="knn", params={"k": 3}, seed=1, mfcc=table.mfcc)
        markdown = run_on_features(table, config).to_markdown()
        assert "Validation Classification Accuracy" in markdown
        assert "2 Segments - 0s-60s and 20s-80s" in markdown

    def test_evaluate_bundle_consistency(self):
        table = synthetic_table()
        config = ExperimentConfig(family="gnb", seed=4, mfcc=table.mfcc)
        report = run_on_features(table, config)
        evaluated = evaluate_bundle(report.bundle, table)
        assert evaluated.train_accuracy == pytest.approx(report.train_accuracy)
        assert evaluated.validation_accuracy == pytest.approx(report.validation_accuracy)

    def test_evaluate_bundle_fresh_store_is_all_validation(self):
        table = synthetic_table()
        config = ExperimentConfig(family="gnb", seed=4, mfcc=table.mfcc)
        report = run_on_features(table, config)
        fresh = synthetic_table(seed=77, prefix="new_")
        evaluated = evaluate_bundle(report.bundle, fresh)
        assert evaluated.train_accuracy is None
        assert evaluated.n_val_rows == len(fresh)

    def test_scaler_none(self):
        table = synthetic_table()
        config = ExperimentConfig(family="knn", params={"k": 1}, scaler="none", seed=1, mfcc=table.mfcc)
        report = run_on_features(table, config)
        assert report.bundle.scaler is None


class TestKFold:
    def test_folds_partition_and_stratify(self):
        labels = np.repeat(["a", "b", "c"], 12)
        folds = kfold_indices(labels, 4, seed=0)
        assert len(folds) == 4
        all_val = np.concatenate([val for _, val in folds])
        np.testing.assert_array_equal(np.sort(all_val), np.arange(36))
        for train_idx, val_idx in folds:
            assert not set(train_idx) & set(val_idx)
            assert len(train_idx) + len(val_idx) == 36
            for cls in "abc":
                assert np.sum(labels[val_idx] == cls) == 3

    def test_deterministic(self):
        labels = np.repeat(["a", "b"], 10)
        one = kfold_indices(labels, 5, seed=2)
        two = kfold_indices(labels, 5, seed=2)
        for (t1, v1), (t2, v2) in zip(one, two):
            np.testing.assert_array_equal(v1, v2)

    def test_class_too_small(self):
        with pytest.raises(ClassTooSmall):
            kfold_indices(["a", "a", "b", "b", "b"], 3, seed=0)

    def test_bad_fold_count(self):
        with pytest.raises(ValidationError):
            kfold_indices(["a", "a", "b", "b"], 1, seed=0)


class TestGridSearchCv:
    def test_matches_manual_fold_oracle(self):
        rng = np.random.default_rng(21)
        X = np.vstack([rng.normal(-2, 1.2, (15, 2)), rng.normal(2, 1.2, (15, 2))])
        y = np.array(["lo"] * 15 + ["hi"] * 15)
        grid = {"k": [1, 3, 5]}
        best, rows = grid_search_cv("knn", grid, X, y, n_folds=3, seed=4)

        from raga_moodkit.models import make_classifier

        folds = kfold_indices(y, 3, seed=4)
        expected_best, expected_accuracy = None, -1.0
        for point in grid_points(grid):
            scores = []
            for train_idx, val_idx in folds:
                model = make_classifier("knn", **point).fit(X[train_idx], y[train_idx])
                scores.append(float(np.mean(model.predict(X[val_idx]) == y[val_idx])))
            mean_accuracy = float(np.mean(scores))
            if mean_accuracy > expected_accuracy:
                expected_best, expected_accuracy = point, mean_accuracy
        assert best == expected_best
        assert len(rows) == 3
        chosen = [r for r in rows if r.params == best][0]
        assert chosen.validation_accuracy == pytest.approx(expected_accuracy)

    def test_run_on_features_with_cv(self):
        table = synthetic_table()
        config = ExperimentConfig(
            family="knn", grid={"k": [1, 3]}, seed=1, mfcc=table.mfcc, cv=2
        )
        report = run_on_features(table, config)
        assert report.grid_rows is not None and len(report.grid_rows) == 2
        assert report.config["cv"] == 2
        assert report.validation_accuracy == 1.0

    def test_bad_cv_rejected(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(cv=1)


def _report(family, params, validation_accuracy):
    return ExperimentReport(
        config={"plan": [[0, 60]], "scaler": "zscore"},
        family=family,
        params=params,
        train_accuracy=1.0,
        validation_accuracy=validation_accuracy,
        classes=["a", "b"],
        confusion=[[1, 0], [0, 1]],
        per_class={},
        n_train_rows=8,
        n_val_rows=2,
    )


class TestSelectFinalModel:
    def test_knn_k1_rejected_in_favor_of_svm(self):
        knn = _report("knn", {"k": 1, "metric": "manhattan"}, 0.84)
        svm = _report("svm", {"C": 10, "gamma": 0.1}, 0.77)
        assert select_final_model([knn, svm]) is svm

    def test_single_eligible(self):
        only = _report("forest", {"n_estimators": 10}, 0.5)
        assert select_final_model([only]) is only

    def test_all_k1_raises(self):
        with pytest.raises(NoEligibleModel):
            select_final_model([_report("knn", {"k": 1}, 0.9), _report("knn", {"k": 1}, 0.8)])

    def test_knn_with_larger_k_is_eligible(self):
        knn3 = _report("knn", {"k": 3}, 0.84)
        svm = _report("svm", {"C": 10}, 0.77)
        assert select_final_model([knn3, svm]) is knn3

    def test_tie_prefers_fewer_params(self):
        lean = _report("svm", {"C": 10}, 0.8)
        verbose = _report("svm", {"C": 10, "gamma": 0.1, "tol": 1e-3}, 0.8)
        assert select_final_model([verbose, lean]) is lean

    def test_tie_prefers_family_order(self):
        knn = _report("knn", {"k": 3}, 0.8)
        gnb = _report("gnb", {"x": 1}, 0.8)
        assert select_final_model([gnb, knn]) is knn  # knn earlier in family order

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            select_final_model([])
