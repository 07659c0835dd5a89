import networkx as nx
import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score
from fpradar.lib import const
from fpradar.lib.cluster import (YearPartition, build_cluster_graph, filter_short_lived, jaccard,
                                 link_partitions, louvain_partition, modularity, split_oversized,
                                 sweep_thresholds)
from fpradar.lib.cluster.tracking import dump_chains, load_chains
from fpradar.lib.graph import aggregate_to
from conftest import weighted_graph


def _graph(edges):
    graph = nx.Graph()
    graph.add_weighted_edges_from((a, b, 1.0) for a, b in edges)
    return graph


TWO_TRIANGLES = [('a', 'b'), ('b', 'c'), ('a', 'c'), ('d', 'e'), ('e', 'f'), ('d', 'f'), ('c', 'd')]


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [partition[i] | {first}] + partition[i + 1:]
        yield partition + [{first}]


def _partition(year, *groups):
    return YearPartition(year, [(f'{year}-{i}', frozenset(g)) for i, g in enumerate(groups)])


def test_two_triangles_reach_the_best_modularity():
    graph = _graph(TWO_TRIANGLES)
    best = max(nx.community.modularity(graph, p) for p in _set_partitions(sorted(graph.nodes)))
    partition = louvain_partition(graph, seed=0, year=2014)
    assert [m for _, m in partition.clusters] == [frozenset('abc'), frozenset('def')]
    assert [cid for cid, _ in partition.clusters] == ['2014-0', '2014-1']
    assert partition.modularity == pytest.approx(best, abs=1e-9)
    assert partition.modularity == pytest.approx(5 / 14, abs=1e-9)


def test_single_triangle_is_one_cluster():
    partition = louvain_partition(_graph([('a', 'b'), ('b', 'c'), ('a', 'c')]), seed=3)
    assert [m for _, m in partition.clusters] == [frozenset('abc')]
    assert partition.modularity == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('seed', range(20))
def test_planted_blocks_are_recovered(seed):
    rng = np.random.default_rng(7)
    truth = {f'n{i:02d}': i // 20 for i in range(80)}
    nodes = sorted(truth)
    edges = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]
             if rng.random() < (0.9 if truth[a] == truth[b] else 0.05)]
    partition = louvain_partition(_graph(edges), seed=seed)
    found = {k: i for i, (_, members) in enumerate(partition.clusters) for k in members}
    assert adjusted_rand_score([truth[n] for n in nodes], [found[n] for n in nodes]) >= 0.9


def test_reported_modularity_is_direct_and_levels_never_decrease():
    rng = np.random.default_rng(11)
    nodes = [f'k{i}' for i in range(40)]
    graph = nx.Graph()
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if rng.random() < 0.12:
                graph.add_edge(a, b, weight=float(rng.uniform(0.1, 2.0)))
    partition = louvain_partition(graph, seed=5)
    communities = [set(m) for _, m in partition.clusters]
    assert partition.modularity == pytest.approx(
            nx.community.modularity(graph, communities, weight='weight'), abs=1e-9)
    assert all(after >= before - 1e-12 for before, after in
               zip(partition.level_modularities, partition.level_modularities[1:]))
    assert 'non_monotone' not in partition.flags
    assert partition.nodes == set(graph.nodes)
    assert sum(len(m) for m in communities) == graph.number_of_nodes()


def test_empty_and_edgeless_graphs():
    assert louvain_partition(nx.Graph(), year=2012).clusters == []
    graph = nx.Graph()
    graph.add_nodes_from(['x', 'y'])
    partition = louvain_partition(graph, year=2012)
    assert [m for _, m in partition.clusters] == [frozenset('x'), frozenset('y')]
    assert partition.modularity == 0.0
    assert modularity(graph, [{'x'}, {'y'}]) == 0.0


def test_oversized_cluster_is_split():
    graph = _graph(TWO_TRIANGLES)
    whole = _partition(2014, 'abcdef')
    result = split_oversized(whole, graph, total_keywords=12)
    assert [m for _, m in result.clusters] == [frozenset('abc'), frozenset('def')]
    assert 'indivisible' not in result.flags
    assert result.modularity == pytest.approx(5 / 14, abs=1e-9)


def test_split_repeats_until_parts_are_indivisible(caplog):
    graph = _graph(TWO_TRIANGLES)
    result = split_oversized(_partition(2014, 'abcdef'), graph, total_keywords=6)
    # each triangle still exceeds 6/3 keywords and is a clique
    assert [m for _, m in result.clusters] == [frozenset('abc'), frozenset('def')]
    assert 'indivisible' in result.flags
    assert 'cannot be split' in caplog.text


def test_small_clusters_are_left_alone():
    graph = _graph(TWO_TRIANGLES)
    partition = _partition(2014, 'abc', 'def')
    result = split_oversized(partition, graph, total_keywords=9)
    assert result.clusters == partition.clusters
    assert result.flags == []


def test_indivisible_clique_keeps_its_cluster():
    graph = _graph([(a, b) for i, a in enumerate('abcde') for b in 'abcde'[i + 1:]])
    partition = _partition(2014, 'abcde', 'z')
    result = split_oversized(partition, graph, total_keywords=6)
    assert result.clusters == partition.clusters
    assert result.flags == ['indivisible']


def test_cluster_graph_adds_predicted_edges_at_median_weight():
    view = aggregate_to(weighted_graph({2010: {('a', 'b'): 0.5, ('b', 'c'): 0.3,
                                               ('c', 'd'): 0.2}}), 2010)
    predictions = {('a', 'c'): (0.8, True), ('a', 'b'): (0.9, True), ('b', 'd'): (0.4, False)}
    graph = build_cluster_graph(view, predictions)
    assert graph['a']['c']['weight'] == pytest.approx(0.24)
    assert graph['a']['b']['weight'] == pytest.approx(0.5)
    assert not graph.has_edge('b', 'd')
    assert build_cluster_graph(view, predictions, median_scale=False)['a']['c']['weight'] == 0.8
    assert sorted(build_cluster_graph(view).edges) == [('a', 'b'), ('b', 'c'), ('c', 'd')]


def test_overlapping_clusters_link():
    chains = link_partitions([_partition(2010, 'abc'), _partition(2011, 'bcd')])
    assert len(chains) == 1
    assert chains[0].lifespan == 2
    assert chains[0].chain == {2010: {'2010-0'}, 2011: {'2011-0'}}


def test_weak_overlap_starts_a_new_chain():
    assert jaccard(set('abcde'), set('afghi')) == pytest.approx(1 / 9)
    chains = link_partitions([_partition(2010, 'abcde'), _partition(2011, 'afghi')])
    assert [c.id for c in chains] == ['T1', 'T2']
    assert chains[0].events == [{'type': const.EVENT_BIRTH, 'year': 2010, 'cluster': '2010-0'},
                                {'type': const.EVENT_DORMANT, 'year': 2011}]


def test_linking_is_strict_at_the_threshold():
    # 1 shared of 5 -> exactly 0.2
    chains = link_partitions([_partition(2010, 'abc'), _partition(2011, 'cde')], theta=0.2)
    assert len(chains) == 2


def test_dormant_chain_is_picked_up_later():
    chains = link_partitions([_partition(2010, 'abc', 'xy'), _partition(2011, 'abc'),
                              _partition(2012, 'abc', 'xyz')])
    dormant = chains[1]
    assert dormant.years == [2010, 2012]
    assert dormant.lifespan == 2
    assert [e['type'] for e in dormant.events] == [const.EVENT_BIRTH, const.EVENT_DORMANT]


GOLDEN = [
        _partition(2010, 'abcd', 'efgh', 'pq'),
        _partition(2011, 'abcdefgh', 'rs'),
        _partition(2012, 'abcd', 'efgh', 'pqt'),
        _partition(2013, 'abcd', 'efgh', 'xy', 'pqt'),
        ]


def test_golden_chains():
    chains = link_partitions(GOLDEN)
    assert [c.id for c in chains] == ['T1', 'T3', 'T4', 'T5']
    main = chains[0]
    assert main.chain == {2010: {'2010-0', '2010-1'}, 2011: {'2011-0'},
                          2012: {'2012-0', '2012-1'}, 2013: {'2013-0', '2013-1'}}
    assert all(members == frozenset('abcdefgh') for members in main.members.values())
    assert main.events == [
            {'type': const.EVENT_BIRTH, 'year': 2010, 'cluster': '2010-0'},
            {'type': const.EVENT_BIRTH, 'year': 2010, 'cluster': '2010-1'},
            {'type': const.EVENT_MERGE, 'year': 2011, 'cluster': '2011-0',
             'clusters': ['2010-0', '2010-1'], 'chains': ['T1', 'T2']},
            {'type': const.EVENT_SPLIT, 'year': 2012, 'cluster': '2011-0',
             'clusters': ['2012-0', '2012-1']},
            ]
    assert chains[1].years == [2010, 2012, 2013]
    assert chains[1].events == [{'type': const.EVENT_BIRTH, 'year': 2010, 'cluster': '2010-2'},
                                {'type': const.EVENT_DORMANT, 'year': 2011}]
    assert chains[2].events[-1] == {'type': const.EVENT_DORMANT, 'year': 2012}
    assert [c.id for c in filter_short_lived(chains)] == ['T1', 'T3']


def test_lifespan_boundary():
    chains = link_partitions([_partition(2010, 'ab', 'xy'), _partition(2011, 'ab', 'xy'),
                              _partition(2012, 'ab')])
    assert [c.lifespan for c in chains] == [3, 2]
    assert [c.id for c in filter_short_lived(chains)] == ['T1']


def test_cluster_ids_do_not_change_chains():
    renamed = [YearPartition(p.year, [(f'{p.year}-{len(p.clusters) - 1 - i}', m)
                                      for i, (_, m) in enumerate(p.clusters)])
               for p in GOLDEN]
    shape = [(c.lifespan, sorted(c.members.items())) for c in link_partitions(GOLDEN)]
    other = [(c.lifespan, sorted(c.members.items())) for c in link_partitions(renamed)]
    assert sorted(shape) == sorted(other)


def test_chain_dump(tmp_path):
    chains = link_partitions(GOLDEN)
    path = tmp_path / 'chains.json'
    dump_chains(chains, path)
    loaded = load_chains(path)
    assert [c.to_dict() for c in loaded] == [c.to_dict() for c in chains]


def _drifting(shifts, years=5, size=10):
    partitions = []
    for t in range(years):
        groups = [{f'c{c}-{i}' for i in range(t * s, t * s + size)} for c, s in enumerate(shifts)]
        partitions.append(_partition(2010 + t, *groups))
    return partitions


def test_threshold_sweep():
    rows = sweep_thresholds(_drifting((2, 5, 8)), [0.0, 0.1, 0.2, 0.4, 0.7, 1.0])
    assert [r['theta'] for r in rows] == [0.0, 0.1, 0.2, 0.4, 0.7, 1.0]
    assert [r['short_lived'] for r in rows] == [0, 0, 5, 10, 15, 15]
    assert [r['chains'] for r in rows] == [3, 3, 7, 11, 15, 15]
    assert all(r['merges'] == 0 and r['splits'] == 0 for r in rows)


def test_sweep_needs_two_thresholds():
    with pytest.raises(ValueError):
        sweep_thresholds(_drifting((2,)), [0.2])
