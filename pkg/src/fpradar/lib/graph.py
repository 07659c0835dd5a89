"""
Yearly keyword co-occurrence slices and their aggregation over time.

An edge joins two keywords used by the same script. Each slice keeps raw pair
counts plus weights normalised by the slice-wide pair total; an aggregated view
sums the normalised weights of every year up to a reference year.
"""
import itertools
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Set, Tuple
import networkx as nx

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


def make_pair(a, b) -> Pair:
    if a == b:
        raise ValueError(f'Self-loop on {a}')
    return (a, b) if a < b else (b, a)


@dataclass
class YearSlice:
    year: int
    nodes: Set[str] = field(default_factory=set)
    edge_counts: Dict[Pair, int] = field(default_factory=dict)
    edge_weights: Dict[Pair, float] = field(default_factory=dict)

    @property
    def total_count(self):
        return sum(self.edge_counts.values())

    @property
    def n_edges(self):
        return len(self.edge_counts)


@dataclass
class TemporalGraph:
    slices: Dict[int, YearSlice]
    window: Tuple[int, int]
    missing: Tuple[int, ...] = ()

    @property
    def years(self):
        return list(range(self.window[0], self.window[1] + 1))

    @property
    def first_year(self):
        return self.window[0]

    def slice(self, year):
        if year not in self.slices:
            raise ValueError(f'Year {year} is outside the window {self.window}')
        return self.slices[year]

    def truncate(self, year):
        """The graph as it was known at the end of year."""
        if year < self.window[0]:
            raise ValueError(f'Year {year} precedes the window {self.window}')
        last = min(year, self.window[1])
        return TemporalGraph({y: s for y, s in self.slices.items() if y <= last},
                             (self.window[0], last),
                             tuple(y for y in self.missing if y <= last))


@dataclass(frozen=True)
class AggregatedView:
    reference_year: int
    nodes: FrozenSet[str]
    agg_weight: Dict[Pair, float] = field(repr=False)
    edge_years: Dict[Pair, FrozenSet[int]] = field(repr=False)

    @cached_property
    def neighbors(self) -> Dict[str, Set[str]]:
        adjacency = {n: set() for n in self.nodes}
        for a, b in self.agg_weight:
            adjacency[a].add(b)
            adjacency[b].add(a)
        return adjacency

    def earliest_year(self, pair):
        return min(self.edge_years[pair])

    def weight(self, a, b):
        return self.agg_weight.get(make_pair(a, b), 0.0)

    def to_networkx(self):
        graph = nx.Graph()
        graph.add_nodes_from(sorted(self.nodes))
        graph.add_weighted_edges_from((a, b, w) for (a, b), w in sorted(self.agg_weight.items()))
        return graph


def build_year_slice(year, sets):
    counts = defaultdict(int)
    nodes = set()
    for s in sets:
        if s.year != year:
            raise ValueError(f'Script {s.script_id} belongs to {s.year}, not {year}')
        nodes.update(s.keywords)
        for a, b in itertools.combinations(sorted(s.keywords), 2):
            counts[(a, b)] += 1
    return YearSlice(year, nodes, dict(counts))


def normalize_year(year_slice):
    total = year_slice.total_count
    if not total:
        logger.warning('Year %d has no co-occurring keywords', year_slice.year)
        return YearSlice(year_slice.year, set(year_slice.nodes), dict(year_slice.edge_counts), {})
    weights = {pair: count / total for pair, count in year_slice.edge_counts.items()}
    return YearSlice(year_slice.year, set(year_slice.nodes), dict(year_slice.edge_counts), weights)


def build_temporal_graph(sets, window):
    first, last = window
    by_year = defaultdict(list)
    for s in sets:
        if not first <= s.year <= last:
            raise ValueError(f'Script {s.script_id} year {s.year} is outside {first}-{last}')
        by_year[s.year].append(s)

    slices = {}
    for year in range(first, last + 1):
        slices[year] = normalize_year(build_year_slice(year, by_year.get(year, [])))
        logger.info('Year %d: %d nodes, %d edges', year,
                    len(slices[year].nodes), slices[year].n_edges)
    missing = tuple(y for y in range(first, last + 1) if y not in by_year)
    if missing:
        logger.warning('No scripts for years %s, using empty slices', list(missing))
    return TemporalGraph(slices, window, missing)


def aggregate_to(graph, year):
    first, last = graph.window
    if year < first:
        raise ValueError(f'Reference year {year} precedes the window start {first}')
    if year > last:
        raise ValueError(f'Reference year {year} is after the window end {last}')
    nodes = set()
    weights = defaultdict(float)
    years = defaultdict(set)
    for y in range(first, year + 1):
        s = graph.slices[y]
        nodes.update(s.nodes)
        for pair, w in s.edge_weights.items():
            weights[pair] += w
            years[pair].add(y)
    return AggregatedView(year, frozenset(nodes), dict(weights),
                          {p: frozenset(ys) for p, ys in years.items()})


def candidate_pairs(view):
    return list(itertools.combinations(sorted(view.nodes), 2))


def write_slice(year_slice, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    isolated = set(year_slice.nodes)
    for a, b in year_slice.edge_counts:
        isolated.discard(a)
        isolated.discard(b)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f'# year\t{year_slice.year}\tnodes\t{len(year_slice.nodes)}'
                f'\tedges\t{year_slice.n_edges}\ttotal\t{year_slice.total_count}\n')
        f.write('\t'.join(['# isolated'] + sorted(isolated)) + '\n')
        for (a, b), count in sorted(year_slice.edge_counts.items()):
            f.write(f'{a}\t{b}\t{count}\t{year_slice.edge_weights.get((a, b), 0.0)!r}\n')


def read_slice(path):
    with open(path, encoding='utf-8') as f:
        header = f.readline().rstrip('\n').split('\t')
        if not header or header[0] != '# year':
            raise ValueError(f'Malformed edge list header in {path}')
        year = int(header[1])
        isolated = f.readline().rstrip('\n').split('\t')[1:]
        nodes = set(isolated)
        counts, weights = {}, {}
        for line in f:
            if not line.strip():
                continue
            a, b, count, weight = line.rstrip('\n').split('\t')
            pair = make_pair(a, b)
            nodes.update(pair)
            counts[pair] = int(count)
            weights[pair] = float(weight)
    return YearSlice(year, nodes, counts, weights if any(weights.values()) else {})
