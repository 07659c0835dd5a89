"""
Weighted-temporal link prediction features.

Every similarity index is computed over wtf, the per-pair sum of yearly
normalised weights scaled by a time factor that grows by one per year from the
window start, so recent co-occurrence counts more.
"""
import math
from dataclasses import dataclass, field
from typing import Dict
import numpy as np
import pandas as pd
from sklearn.tree import DecisionTreeClassifier
from .graph import Pair, make_pair

FEATURE_NAMES = ('CN_WT', 'AA_WT', 'HP_WT', 'HD_WT', 'JC_WT', 'LHN_WT', 'RA_WT',
                 'SA_WT', 'SO_WT', 'EdgeWeight', 'TemporalEdgeWeight', 'AverageDegree')
N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class DecayedWeights:
    reference_year: int
    wtf: Dict[Pair, float] = field(repr=False)

    def get(self, a, b):
        return self.wtf.get(make_pair(a, b), 0.0)


def time_factor(year, reference_year, first_year):
    k = reference_year - first_year + 1
    return max(1, k - (reference_year - year))


def decayed_weight(graph, year):
    first, last = graph.window
    if not first <= year <= last:
        raise ValueError(f'Reference year {year} is outside the window {graph.window}')
    wtf = {}
    for y in range(first, year + 1):
        tau = time_factor(y, year, first)
        for pair, w in graph.slices[y].edge_weights.items():
            wtf[pair] = wtf.get(pair, 0.0) + w * tau
    return DecayedWeights(year, wtf)


def _ratio(num, den):
    return num / den if den else 0.0


class HandcraftedFeatures:
    def __init__(self, view, dw):
        self.view = view
        self.dw = dw
        self.neighbors = view.neighbors
        self.strength = {
                node: sum(dw.get(node, n) for n in adjacent)
                for node, adjacent in self.neighbors.items()
                }

    def vector(self, pair):
        x, y = pair
        nx_, ny = self.neighbors.get(x, set()), self.neighbors.get(y, set())
        sx, sy = self.strength.get(x, 0.0), self.strength.get(y, 0.0)

        cn = aa = ra = 0.0
        for z in sorted(nx_ & ny):
            shared = self.dw.get(x, z) + self.dw.get(y, z)
            cn += shared
            sz = self.strength[z]
            aa += _ratio(shared, math.log1p(sz))
            ra += _ratio(shared, sz)

        return np.array([
                cn,
                aa,
                _ratio(cn, min(sx, sy)),
                _ratio(cn, max(sx, sy)),
                _ratio(cn, sx + sy),
                _ratio(cn, sx * sy),
                ra,
                _ratio(cn, math.sqrt(sx * sy)),
                _ratio(2 * cn, sx + sy),
                self.view.agg_weight.get(make_pair(x, y), 0.0),
                self.dw.get(x, y),
                (len(nx_) + len(ny)) / 2,
                ], dtype=float)

    def matrix(self, pairs):
        if not pairs:
            return np.zeros((0, N_FEATURES))
        return np.vstack([self.vector(p) for p in pairs])


def handcrafted_vector(pair, view, dw):
    return HandcraftedFeatures(view, dw).vector(pair)


def information_gain(X, y, feature_index):
    """Gain of the best single-threshold split, in percent of the label entropy."""
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        return 0.0
    column = np.asarray(X, dtype=float)[:, [feature_index]]
    stump = DecisionTreeClassifier(max_depth=1, criterion='entropy', random_state=0)
    stump.fit(column, y)
    tree = stump.tree_
    root = tree.impurity[0]
    if tree.node_count < 3 or root <= 0:
        return 0.0
    left, right = tree.children_left[0], tree.children_right[0]
    n = tree.weighted_n_node_samples
    children = (n[left] * tree.impurity[left] + n[right] * tree.impurity[right]) / n[0]
    return max(0.0, 100.0 * (root - children) / root)


def information_gain_table(datasets):
    """datasets: (X, y) per training transition -> mean/std gain per feature."""
    gains = np.array([[information_gain(X, y, i) for i in range(N_FEATURES)]
                      for X, y in datasets])
    if not len(gains):
        gains = np.zeros((0, N_FEATURES))
    table = pd.DataFrame({
            'feature': FEATURE_NAMES,
            'mean': gains.mean(axis=0) if len(gains) else np.zeros(N_FEATURES),
            'std': gains.std(axis=0) if len(gains) else np.zeros(N_FEATURES),
            })
    return table.sort_values(['mean', 'feature'], ascending=[False, True]).reset_index(drop=True)


def write_feature_table(pairs, matrix, path):
    table = pd.DataFrame(np.asarray(matrix).reshape(len(pairs), N_FEATURES),
                         columns=FEATURE_NAMES)
    table.insert(0, 'pair_b', [b for _, b in pairs])
    table.insert(0, 'pair_a', [a for a, _ in pairs])
    table.to_csv(path, index=False, float_format='%.12g')


def read_feature_table(path):
    table = pd.read_csv(path, keep_default_na=False)
    pairs = list(zip(table['pair_a'].astype(str), table['pair_b'].astype(str)))
    return pairs, table[list(FEATURE_NAMES)].to_numpy(dtype=float)
