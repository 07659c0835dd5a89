"""
Iterative predict-next-year protocol.

A forest is trained on every transition G(Y-1) -> slice Y. The row reported
for year Y comes from the forest trained into Y-1 predicting slice Y from the
G(Y-1) candidates, and the forest trained into Y predicts Y+1 from G(Y). No
forest ever sees the year it is evaluated on.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple
import numpy as np
from ... import utils
from ..config import EmbedSettings
from ..embed import WalkConfig, edge_embedding, generate_temporal_walks, train_embeddings
from ..features import HandcraftedFeatures, decayed_weight
from ..graph import aggregate_to, candidate_pairs
from .training import (assemble_training_set, evaluate, predict_edges, select_features,
                       train_forest)

logger = logging.getLogger(__name__)


class FeatureBuilder:
    """
    Feature matrices for a conditioning year, cached per year.

    Everything is computed on the graph truncated to the conditioning year, so
    no later slice can leak into the features.
    """

    def __init__(self, graph, seed=0, embed=None, embedding=True, jobs=1, embeddings=None):
        self.graph = graph
        self.seed = seed
        self.embed = embed or EmbedSettings()
        self.embedding = embedding
        self.jobs = jobs
        self.__handcrafted = {}
        self.__embeddings = dict(embeddings or {})

    def handcrafted(self, year):
        if year not in self.__handcrafted:
            known = self.graph.truncate(year)
            self.__handcrafted[year] = HandcraftedFeatures(aggregate_to(known, year),
                                                           decayed_weight(known, year))
        return self.__handcrafted[year]

    def node_embedding(self, year):
        if year not in self.__embeddings:
            known = self.graph.truncate(year)
            cfg = WalkConfig(self.embed.walks_per_node, self.embed.walk_length,
                             self.embed.recency_bias, utils.derive_seed(self.seed, 'walks', year))
            walks = generate_temporal_walks(known, year, cfg, self.jobs)
            nodes = aggregate_to(known, year).nodes
            if not walks:
                raise ValueError(f'No walks for {year}: the graph is empty')
            self.__embeddings[year] = train_embeddings(
                    walks, self.embed.dims, self.embed.epochs,
                    utils.derive_seed(self.seed, 'skipgram', year),
                    window=self.embed.window,
                    negatives=self.embed.negatives,
                    learning_rate=self.embed.learning_rate,
                    nodes=nodes)
        return self.__embeddings[year]

    @property
    def embeddings(self):
        return dict(self.__embeddings)

    def matrix(self, year, pairs):
        hand = self.handcrafted(year).matrix(pairs)
        if not self.embedding:
            return hand
        emb = self.node_embedding(year)
        if pairs:
            edges = np.vstack([edge_embedding(emb.vector(a), emb.vector(b)) for a, b in pairs])
        else:
            edges = np.zeros((0, emb.dims))
        return np.hstack([hand, edges])

    __call__ = matrix


@dataclass
class ProtocolResult:
    # feature set -> one report per evaluated year, over every candidate pair
    reports: Dict[str, List] = field(default_factory=dict)
    # same, over positives plus the downsampled negatives
    sampled_reports: Dict[str, List] = field(default_factory=dict)
    # target year -> pair -> (probability, label), from the primary feature set
    predictions: Dict[int, Dict[Tuple[str, str], Tuple[float, bool]]] = field(default_factory=dict)
    forests: Dict[Tuple[int, str], object] = field(default_factory=dict)
    training_sets: Dict[int, object] = field(default_factory=dict)


def run_yearly_protocol(graph, config, builder=None):
    first, last = graph.window
    if last - first + 1 < 3:
        raise ValueError(f'The yearly protocol needs at least 3 years, got {first}-{last}')
    builder = builder or FeatureBuilder(graph, config.seed, config.embed, config.embedding,
                                        config.jobs)
    primary = config.primary_feature_set
    result = ProtocolResult({fs: [] for fs in config.feature_sets},
                            {fs: [] for fs in config.feature_sets})

    candidates = {}

    def candidates_at(year):
        if year not in candidates:
            pairs = candidate_pairs(aggregate_to(graph, year))
            candidates[year] = (pairs, builder.matrix(year, pairs))
        return candidates[year]

    for year in range(first + 1, last + 1):
        try:
            ts = assemble_training_set(graph, year, builder.matrix,
                                       utils.derive_seed(config.seed, 'negatives', year),
                                       config.negative_ratio)
        except ValueError as e:
            logger.warning('Skipping the transition into %d: %s', year, e)
            continue
        result.training_sets[year] = ts
        for fs in config.feature_sets:
            features = replace(ts, X=select_features(ts.X, fs))
            result.forests[(year, fs)] = train_forest(
                    features, config.forest.n_trees,
                    utils.derive_seed(config.seed, 'forest', year, fs),
                    min_samples_leaf=config.forest.min_samples_leaf,
                    jobs=config.jobs,
                    feature_set=fs)

    for year in range(first + 2, last + 1):
        if (year - 1) not in result.training_sets or year not in result.training_sets:
            continue
        pairs, X = candidates_at(year - 1)
        truth = set(graph.slice(year).edge_counts)
        sampled = result.training_sets[year]
        for fs in config.feature_sets:
            forest = result.forests[(year - 1, fs)]
            full = predict_edges(forest, pairs, select_features(X, fs), config.decision_threshold)
            report = evaluate(full, truth, year)
            result.reports[fs].append(report)
            part = predict_edges(forest, sampled.pairs, select_features(sampled.X, fs),
                                 config.decision_threshold)
            result.sampled_reports[fs].append(evaluate(part, truth, year))
            logger.info('%d [%s]: accuracy %.4f precision %.4f recall %.4f', year, fs,
                        report.accuracy, report.precision, report.recall)

    for year in range(first + 1, last + 1):
        if (year, primary) not in result.forests:
            continue
        pairs, X = candidates_at(year)
        result.predictions[year + 1] = predict_edges(result.forests[(year, primary)], pairs,
                                                     select_features(X, primary),
                                                     config.decision_threshold)
        positives = sum(label for _, label in result.predictions[year + 1].values())
        logger.info('Predicted %d co-occurring pairs for %d', positives, year + 1)
    return result
