import json
import logging
import statistics
from dataclasses import dataclass, field
from typing import FrozenSet, List, Tuple
import networkx as nx
from ... import utils

logger = logging.getLogger(__name__)

MODULARITY_TOLERANCE = 1e-12


@dataclass
class YearPartition:
    year: int
    clusters: List[Tuple[str, FrozenSet[str]]] = field(default_factory=list)
    modularity: float = 0.0
    level_modularities: List[float] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)

    @property
    def nodes(self):
        return {k for _, members in self.clusters for k in members}

    def cluster_of(self, keyword):
        for cid, members in self.clusters:
            if keyword in members:
                return cid
        return None

    def to_dict(self):
        return {
                'year': self.year,
                'modularity': self.modularity,
                'level_modularities': self.level_modularities,
                'flags': self.flags,
                'clusters': [{'id': cid, 'members': sorted(m)} for cid, m in self.clusters],
                }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['year']),
                   [(c['id'], frozenset(c['members'])) for c in data['clusters']],
                   float(data['modularity']),
                   list(data.get('level_modularities', [])),
                   list(data.get('flags', [])))


def build_cluster_graph(view, predictions=None, median_scale=True):
    """
    The aggregated graph, plus predicted-positive pairs it lacks at weight
    probability x median observed weight.
    """
    graph = view.to_networkx()
    if not predictions:
        return graph
    scale = statistics.median(view.agg_weight.values()) \
            if median_scale and view.agg_weight else 1.0
    added = 0
    for (a, b), (probability, label) in sorted(predictions.items()):
        if not label or graph.has_edge(a, b):
            continue
        graph.add_edge(a, b, weight=probability * scale)
        added += 1
    logger.info('Added %d predicted edges to the %d cluster graph', added, view.reference_year)
    return graph


def modularity(graph, communities):
    if graph.number_of_edges() == 0 or graph.size(weight='weight') == 0:
        return 0.0
    return nx.community.modularity(graph, communities, weight='weight')


def _order(communities):
    return sorted((frozenset(c) for c in communities), key=lambda c: (-len(c), min(c)))


def _louvain_levels(graph, seed):
    if graph.number_of_edges() == 0:
        return [_order({n} for n in graph.nodes)]
    return [_order(level) for level in
            nx.community.louvain_partitions(graph, weight='weight', resolution=1, seed=seed)]


def _numbered(year, communities):
    return [(f'{year}-{i}', members) for i, members in enumerate(_order(communities))]


def louvain_partition(graph, seed=0, year=0):
    if graph.number_of_nodes() == 0:
        return YearPartition(year)
    levels = _louvain_levels(graph, seed)
    level_modularities = [modularity(graph, level) for level in levels]
    flags = []
    for before, after in zip(level_modularities, level_modularities[1:]):
        if after < before - MODULARITY_TOLERANCE:
            logger.warning('Modularity decreased between Louvain levels in %d: %f -> %f',
                           year, before, after)
            flags.append('non_monotone')
            break
    final = levels[-1]
    partition = YearPartition(year, _numbered(year, final), modularity(graph, final),
                              level_modularities, flags)
    logger.info('Year %d: %d clusters, modularity %.4f', year, len(partition.clusters),
                partition.modularity)
    return partition


def split_oversized(partition, graph, total_keywords, threshold=1 / 3, seed=0):
    """Re-partition clusters larger than threshold x total_keywords until none remain or none splits."""
    limit = total_keywords * threshold
    communities = [members for _, members in partition.clusters]
    indivisible = set()
    changed = True
    while changed:
        changed = False
        result = []
        for members in communities:
            if len(members) <= limit or members in indivisible:
                result.append(members)
                continue
            sub = graph.subgraph(members)
            parts = _louvain_levels(sub, utils.derive_seed(seed, 'split', min(members)))[-1] \
                    if sub.number_of_edges() else [members]
            if len(parts) <= 1:
                logger.warning('Cluster of %d keywords in %d cannot be split',
                               len(members), partition.year)
                indivisible.add(members)
                result.append(members)
            else:
                result.extend(parts)
                changed = True
        communities = result

    flags = list(partition.flags)
    if indivisible:
        flags.append('indivisible')
    if len(communities) == len(partition.clusters):
        return YearPartition(partition.year, list(partition.clusters), partition.modularity,
                             list(partition.level_modularities), flags)
    return YearPartition(partition.year, _numbered(partition.year, communities),
                         modularity(graph, communities), list(partition.level_modularities),
                         flags)


def dump_partitions(partitions, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump([p.to_dict() for p in partitions], f, indent=2, sort_keys=True)


def load_partitions(path):
    with open(path, encoding='utf-8') as f:
        return [YearPartition.from_dict(p) for p in json.load(f)]
