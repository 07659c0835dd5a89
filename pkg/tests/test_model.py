import numpy as np
import pytest
from fpradar.lib import const
from fpradar.lib.config import EmbedSettings, ForestSettings, PipelineConfig
from fpradar.lib.graph import TemporalGraph, YearSlice, make_pair, normalize_year
from fpradar.lib.model import FeatureBuilder, TrainingSet, assemble_training_set, evaluate, \
        predict_edges, run_yearly_protocol, select_features, train_forest
from fpradar.lib.model.training import sample_training_pairs
from fpradar.lib.synthetic import synthetic_temporal_graph
from conftest import counted_graph

SMALL_EMBED = EmbedSettings(dims=16, walks_per_node=5, walk_length=10, epochs=3)


def _graph_with_positives(n_positives):
    nodes = [f'n{i:02d}' for i in range(16)]
    first = YearSlice(2010, set(nodes), {make_pair(nodes[i], nodes[i + 1]): 1 for i in range(15)})
    pairs = [make_pair(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
    second = YearSlice(2011, set(nodes), {p: 1 for p in pairs[:n_positives]})
    return TemporalGraph({2010: normalize_year(first), 2011: normalize_year(second)}, (2010, 2011))


def _toy_set(X, y):
    positives = [('p', f'{i:04d}') for i in range(int(sum(y)))]
    negatives = [('q', f'{i:04d}') for i in range(len(y) - int(sum(y)))]
    order = np.argsort(-np.asarray(y), kind='stable')
    return TrainingSet(0, positives, negatives, np.asarray(X)[order])


def test_negatives_are_half_the_positives():
    positives, negatives = sample_training_pairs(_graph_with_positives(10), 2011, seed=1)
    assert len(positives) == 10
    assert len(negatives) == 5
    assert not set(positives) & set(negatives)


def test_single_positive_gets_one_negative():
    positives, negatives = sample_training_pairs(_graph_with_positives(1), 2011, seed=1)
    assert (len(positives), len(negatives)) == (1, 1)


def test_negative_sample_is_seeded():
    graph = _graph_with_positives(10)
    assert sample_training_pairs(graph, 2011, seed=5) == sample_training_pairs(graph, 2011, seed=5)


def test_degenerate_years():
    graph = _graph_with_positives(10)
    with pytest.raises(ValueError, match='second window year'):
        sample_training_pairs(graph, 2010, seed=0)
    empty = counted_graph({2010: {('a', 'b'): 1}, 2011: {('c', 'd'): 1}})
    with pytest.raises(ValueError, match='No co-occurring candidate pairs'):
        sample_training_pairs(empty, 2011, seed=0)


def test_training_set_features_condition_on_previous_year():
    seen = []

    def features(year, pairs):
        seen.append(year)
        return np.zeros((len(pairs), 3))

    ts = assemble_training_set(_graph_with_positives(4), 2011, features, seed=0)
    assert seen == [2010]
    assert ts.X.shape == (6, 3)
    assert list(ts.y) == [1, 1, 1, 1, 0, 0]


def test_separable_set():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(400, 3))
    y = (X[:, 0] > 0.5).astype(int)
    forest = train_forest(_toy_set(X[:300], y[:300]), n_trees=50, seed=0)
    assert forest.feature_subset_size == 2
    assert len(forest.trees) == 50
    predictions = forest.positive_proba(X[300:]) >= 0.5
    assert np.mean(predictions == y[300:]) >= 0.95


def test_constant_features_predict_majority():
    ts = _toy_set(np.zeros((40, 4)), [1] * 30 + [0] * 10)
    forest = train_forest(ts, n_trees=20, seed=0)
    candidates = [('a', str(i)) for i in range(5)]
    predictions = predict_edges(forest, candidates, np.zeros((5, 4)))
    assert all(label for _, label in predictions.values())


def test_same_seed_same_predictions():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(100, 5))
    y = (X[:, 1] + rng.normal(scale=0.5, size=100) > 0).astype(int)
    queries = rng.normal(size=(50, 5))
    first = train_forest(_toy_set(X, y), n_trees=30, seed=4).positive_proba(queries)
    second = train_forest(_toy_set(X, y), n_trees=30, seed=4).positive_proba(queries)
    assert np.array_equal(first, second)


def test_single_class_rejected():
    with pytest.raises(ValueError, match='single class'):
        train_forest(_toy_set(np.zeros((5, 2)), [1] * 5))


def test_random_labels_score_at_chance():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(2000, 6))
    y = rng.integers(0, 2, 2000)
    forest = train_forest(_toy_set(X, y), n_trees=50, seed=0)
    fresh = rng.normal(size=(4000, 6))
    labels = rng.integers(0, 2, 4000)
    accuracy = np.mean((forest.positive_proba(fresh) >= 0.5) == labels)
    assert abs(accuracy - 0.5) <= 0.05


def test_monotone_transform_invariance():
    rng = np.random.default_rng(3)
    X = rng.uniform(0, 3, size=(120, 4))
    y = (X[:, 0] + X[:, 2] > 3).astype(int)
    ts = _toy_set(X, y)
    transformed = ts.X.copy()
    transformed[:, 0] = np.exp(transformed[:, 0])
    base = train_forest(ts, n_trees=25, seed=6).positive_proba(ts.X)
    other = train_forest(TrainingSet(0, ts.positives, ts.negatives, transformed), n_trees=25,
                         seed=6).positive_proba(transformed)
    assert np.array_equal(base, other)


class FixedForest:
    def __init__(self, proba):
        self.proba = np.asarray(proba)

    def positive_proba(self, X):
        return self.proba


def test_decision_threshold_ties_are_positive():
    pairs = [('a', 'b'), ('a', 'c'), ('b', 'c')]
    predictions = predict_edges(FixedForest([1.0, 0.5, 0.49]), pairs, np.zeros((3, 1)))
    assert predictions == {('a', 'b'): (1.0, True), ('a', 'c'): (0.5, True),
                           ('b', 'c'): (0.49, False)}


def test_confusion_arithmetic():
    predictions, truth = {}, set()
    for i in range(10):
        pair = ('k', f'{i:02d}')
        label = i < 4
        predictions[pair] = (0.9 if label else 0.1, label)
        # TP: 0-2, FP: 3, FN: 4, TN: 5-9
        if i < 3 or i == 4:
            truth.add(pair)
    report = evaluate(predictions, truth, 2014)
    assert report.accuracy == pytest.approx(0.8)
    assert report.precision == pytest.approx(0.75)
    assert report.recall == pytest.approx(0.75)
    assert report.n == 10


def test_perfect_predictions():
    predictions = {('a', 'b'): (0.9, True), ('a', 'c'): (0.2, False)}
    report = evaluate(predictions, {('a', 'b')}, 2014)
    assert (report.accuracy, report.precision, report.recall, report.auc) == (1.0, 1.0, 1.0, 1.0)


def test_select_features():
    X = np.arange(2 * 20).reshape(2, 20)
    assert select_features(X, const.FEATURES_HAND).shape == (2, 12)
    assert select_features(X, const.FEATURES_EMB).shape == (2, 8)
    assert select_features(X, const.FEATURES_COMB).shape == (2, 20)
    with pytest.raises(ValueError):
        select_features(X, 'both')


def _config(first, last, **changes):
    return PipelineConfig(window=(first, last), embed=SMALL_EMBED,
                          forest=ForestSettings(n_trees=50), **changes)


def test_protocol_needs_three_years():
    graph = counted_graph({2010: {('a', 'b'): 1}, 2011: {('a', 'b'): 1}})
    with pytest.raises(ValueError, match='at least 3 years'):
        run_yearly_protocol(graph, _config(2010, 2011))


def test_protocol_predicts_persistent_edges():
    graph = synthetic_temporal_graph(first_year=2010, n_years=4, persistence=0.7, seed=0)
    result = run_yearly_protocol(graph, _config(2010, 2013))
    assert [r.year for r in result.reports[const.FEATURES_COMB]] == [2012, 2013]
    comb = np.mean([r.auc for r in result.reports[const.FEATURES_COMB]])
    hand = np.mean([r.auc for r in result.reports[const.FEATURES_HAND]])
    assert comb >= 0.85
    assert hand >= 0.75
    assert sorted(result.predictions) == [2012, 2013, 2014]
    for report in result.reports[const.FEATURES_EMB] + result.sampled_reports[const.FEATURES_HAND]:
        assert 0 <= report.accuracy <= 1
        assert 0 <= report.precision <= 1
        assert 0 <= report.recall <= 1


def test_protocol_is_deterministic():
    graph = synthetic_temporal_graph(n_years=3, seed=2)
    config = _config(2010, 2012, embedding=False, feature_sets=(const.FEATURES_HAND,))
    first = run_yearly_protocol(graph, config)
    second = run_yearly_protocol(graph, config)
    assert first.reports == second.reports
    assert first.predictions == second.predictions


def test_canary_edge_does_not_leak():
    graph = synthetic_temporal_graph(n_years=4, seed=3)
    target = 2013
    nodes = sorted(graph.slices[target - 1].nodes)
    canary = next(make_pair(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]
                  if make_pair(a, b) not in graph.slices[target].edge_counts)
    counts = dict(graph.slices[target].edge_counts)
    counts[canary] = 1
    slices = dict(graph.slices)
    slices[target] = normalize_year(YearSlice(target, graph.slices[target].nodes | set(canary),
                                              counts))
    poisoned = TemporalGraph(slices, graph.window)

    pairs = [canary] + sorted(graph.slices[target].edge_counts)[:20]
    clean = FeatureBuilder(graph, seed=0, embed=SMALL_EMBED).matrix(target - 1, pairs)
    dirty = FeatureBuilder(poisoned, seed=0, embed=SMALL_EMBED).matrix(target - 1, pairs)
    assert np.array_equal(clean, dirty)
