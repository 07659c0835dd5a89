import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import List, Optional
import joblib
import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.metrics import accuracy_score, precision_score, recall_score, roc_auc_score
from .. import const
from ..features import N_FEATURES
from ..graph import aggregate_to, candidate_pairs

logger = logging.getLogger(__name__)


@dataclass
class TrainingSet:
    year: int
    positives: List[tuple]
    negatives: List[tuple]
    X: np.ndarray = field(repr=False)

    @property
    def pairs(self):
        return self.positives + self.negatives

    @property
    def y(self):
        return np.array([1] * len(self.positives) + [0] * len(self.negatives))


@dataclass
class Forest:
    model: RandomForestClassifier = field(repr=False)
    n_trees: int
    feature_subset_size: int
    seed: int
    feature_set: str = const.FEATURES_COMB

    @property
    def trees(self):
        return self.model.estimators_

    def positive_proba(self, X):
        proba = self.model.predict_proba(np.asarray(X, dtype=float))
        return proba[:, list(self.model.classes_).index(1)]


@dataclass
class EvalReport:
    year: int
    accuracy: float
    precision: float
    recall: float
    auc: Optional[float] = None
    n: int = 0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def select_features(X, feature_set):
    """Column view of a combined matrix: 12 hand-crafted values, then the edge embedding."""
    if feature_set == const.FEATURES_HAND:
        return X[:, :N_FEATURES]
    if feature_set == const.FEATURES_EMB:
        return X[:, N_FEATURES:]
    if feature_set == const.FEATURES_COMB:
        return X
    raise ValueError(f'Unknown feature set: {feature_set}')


def sample_training_pairs(graph, year, seed, negative_ratio=0.5):
    first, _ = graph.window
    if year < first + 1:
        raise ValueError(f'Training year {year} must be at least the second window year {first + 1}')
    candidates = candidate_pairs(aggregate_to(graph, year - 1))
    present = graph.slice(year).edge_counts
    positives = [p for p in candidates if p in present]
    if not positives:
        raise ValueError(f'No co-occurring candidate pairs in {year}')
    pool = [p for p in candidates if p not in present]
    n_negatives = min(len(pool), max(1, math.floor(len(positives) * negative_ratio)))
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(pool), size=n_negatives, replace=False)) if pool else []
    return positives, [pool[i] for i in chosen]


def assemble_training_set(graph, year, features, seed, negative_ratio=0.5):
    """features(conditioning_year, pairs) -> matrix; the conditioning year is year - 1."""
    positives, negatives = sample_training_pairs(graph, year, seed, negative_ratio)
    X = features(year - 1, positives + negatives)
    logger.info('Training set for %d: %d positives, %d negatives', year,
                len(positives), len(negatives))
    return TrainingSet(year, positives, negatives, X)


def train_forest(ts, n_trees=100, seed=0, *, min_samples_leaf=2, jobs=1,
                 feature_set=const.FEATURES_COMB):
    X, y = np.asarray(ts.X, dtype=float), ts.y
    if len(np.unique(y)) < 2:
        raise ValueError(f'Training set for {ts.year} holds a single class')
    subset = max(1, math.ceil(math.sqrt(X.shape[1])))
    model = RandomForestClassifier(n_estimators=n_trees,
                                   criterion='entropy',
                                   max_features=subset,
                                   min_samples_leaf=min_samples_leaf,
                                   bootstrap=True,
                                   random_state=seed,
                                   n_jobs=jobs)
    model.fit(X, y)
    return Forest(model, n_trees, subset, seed, feature_set)


def predict_edges(forest, candidates, X, threshold=0.5):
    if not candidates:
        return {}
    proba = forest.positive_proba(X)
    return {pair: (float(p), bool(p >= threshold)) for pair, p in zip(candidates, proba)}


def evaluate(predictions, truth, year=None):
    """truth: the pairs that co-occur in the evaluated year."""
    pairs = sorted(predictions)
    y_true = np.array([1 if p in truth else 0 for p in pairs])
    y_pred = np.array([1 if predictions[p][1] else 0 for p in pairs])
    scores = np.array([predictions[p][0] for p in pairs])
    if not pairs:
        return EvalReport(year, 0.0, 0.0, 0.0, None, 0)
    auc = float(roc_auc_score(y_true, scores)) if len(np.unique(y_true)) == 2 else None
    return EvalReport(year,
                      float(accuracy_score(y_true, y_pred)),
                      float(precision_score(y_true, y_pred, zero_division=0)),
                      float(recall_score(y_true, y_pred, zero_division=0)),
                      auc,
                      len(pairs))


def dump_forest(forest, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    joblib.dump(forest, path)


def load_forest(path):
    return joblib.load(path)


def write_predictions(predictions, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for (a, b), (p, label) in sorted(predictions.items()):
            f.write(f'{a}\t{b}\t{p!r}\t{int(label)}\n')


def read_predictions(path):
    predictions = {}
    with open(path, encoding='utf-8') as f:
        for line in f:
            if not line.strip():
                continue
            a, b, p, label = line.rstrip('\n').split('\t')
            predictions[(a, b)] = (float(p), label == '1')
    return predictions
