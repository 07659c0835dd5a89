import json
import pytest
from fpradar.lib.extract import KeywordSet
from fpradar.lib.graph import TemporalGraph, YearSlice, make_pair, normalize_year


def taxonomy_json(apis):
    """apis: api name -> interface name -> keywords."""
    return json.dumps({'apis': [
            {'name': api, 'interfaces': [{'name': name, 'keywords': list(keywords)}
                                         for name, keywords in interfaces.items()]}
            for api, interfaces in apis.items()]})


def weighted_graph(weights_by_year):
    """year -> {(a, b): weight}; counts are set to 1 so slices carry the given weights as-is."""
    slices = {}
    for year, weights in weights_by_year.items():
        pairs = {make_pair(a, b): w for (a, b), w in weights.items()}
        nodes = {n for pair in pairs for n in pair}
        slices[year] = YearSlice(year, nodes, {p: 1 for p in pairs}, pairs)
    years = sorted(slices)
    return TemporalGraph(slices, (years[0], years[-1]))


def counted_graph(edges_by_year):
    """year -> {(a, b): count}; weights are normalised the way the pipeline does it."""
    slices = {}
    for year, counts in edges_by_year.items():
        pairs = {make_pair(a, b): c for (a, b), c in counts.items()}
        nodes = {n for pair in pairs for n in pair}
        slices[year] = normalize_year(YearSlice(year, nodes, pairs))
    years = sorted(slices)
    return TemporalGraph(slices, (years[0], years[-1]))


def keyword_sets(year, *groups):
    return [KeywordSet(f's{year}-{i}', year, frozenset(g)) for i, g in enumerate(groups)]


@pytest.fixture
def taxonomy_file(tmp_path):
    def write(apis, name='taxonomy.json'):
        path = tmp_path / name
        path.write_text(taxonomy_json(apis), encoding='utf-8')
        return str(path)
    return write
