"""
Synthetic corpora with a planted fingerprinting keyword group, so the whole
pipeline runs offline and its outcome is known in advance.
"""
import logging
import os
import numpy as np
import pandas as pd
import yaml
from . import const
from .corpus.manifest import ScriptRecord, content_digest, write_manifest
from .graph import TemporalGraph, YearSlice, make_pair, normalize_year

logger = logging.getLogger(__name__)

FP_GROUP = ('userAgent', 'platform', 'plugins', 'hardwareConcurrency', 'deviceMemory',
            'getBattery', 'chargingTime', 'getGamepads', 'toDataURL', 'getParameter',
            'colorDepth', 'UNMASKED_RENDERER_WEBGL')
STORAGE_GROUP = ('getItem', 'setItem', 'localStorage', 'sessionStorage', 'fetch', 'send',
                 'setRequestHeader', 'responseText', 'onreadystatechange', 'indexedDB')
DOM_GROUP = ('createElement', 'getElementById', 'querySelector', 'appendChild', 'setAttribute',
             'innerHTML', 'classList', 'addEventListener', 'preventDefault',
             'removeEventListener')
MEDIA_GROUP = ('play', 'pause', 'currentTime', 'volume', 'pushState', 'replaceState', 'href',
               'pathname', 'setTimeout', 'requestAnimationFrame')
BENIGN_GROUPS = (STORAGE_GROUP, DOM_GROUP, MEDIA_GROUP)

# keywords of the planted group that only show up some years after the window start
LATE_FP_KEYWORDS = {'getGamepads': 1, 'chargingTime': 2, 'deviceMemory': 3}
FPJS_EXTRA = ('localStorage', 'sessionStorage')


def _body(keywords, rng, tag):
    lines = [f'// build {tag}', '(function(){']
    for i, keyword in enumerate(keywords):
        if rng.random() < 0.25:
            lines.append(f'  var v{i} = window["{keyword}"];')
        else:
            lines.append(f'  var v{i} = window.{keyword};')
    lines.append('})();')
    return '\n'.join(lines) + '\n'


def _fp_pool(year, first_year):
    return [k for k in FP_GROUP if year - first_year >= LATE_FP_KEYWORDS.get(k, 0)]


def generate_corpus(out_dir, first_year=2010, last_year=2014, scripts_per_year=24,
                    fp_per_year=8, unknown_per_year=2, seed=0):
    """Write scripts, manifest, labels, fpjs list, metadata and a config; return the config path."""
    rng = np.random.default_rng(seed)
    scripts_dir = os.path.join(out_dir, 'scripts')
    os.makedirs(scripts_dir, exist_ok=True)
    records, labels = [], []
    for year in range(first_year, last_year + 1):
        for i in range(scripts_per_year):
            if i < fp_per_year:
                pool = _fp_pool(year, first_year)
                keywords = list(rng.choice(pool, size=min(len(pool), int(rng.integers(7, 10))),
                                           replace=False))
                if rng.random() < 0.5:
                    keywords.append(str(rng.choice(FPJS_EXTRA)))
                label = 'fp'
            else:
                group = BENIGN_GROUPS[i % len(BENIGN_GROUPS)]
                keywords = list(rng.choice(group, size=int(rng.integers(5, 9)), replace=False))
                if rng.random() < 0.2:
                    other = BENIGN_GROUPS[(i + 1) % len(BENIGN_GROUPS)]
                    keywords.append(str(rng.choice(other)))
                label = 'non_fp' if i < scripts_per_year - unknown_per_year else None
            keywords = [str(k) for k in keywords]
            script_id = f's{year}-{i:03d}'
            body = _body(keywords, rng, script_id).encode('utf-8')
            body_ref = f'scripts/{script_id}.js'
            with open(os.path.join(out_dir, body_ref), 'wb') as f:
                f.write(body)
            url = f'https://site{i:03d}.example/{"fp" if label == "fp" else "app"}-{year}.js'
            records.append(ScriptRecord(script_id, url, year, content_digest(body), body_ref,
                                        site_rank=i + 1))
            if label:
                labels.append({'script_url': url, 'label': label})

    write_manifest(records, os.path.join(out_dir, 'corpus.jsonl'))
    pd.DataFrame(labels, columns=['script_url', 'label']).to_csv(
            os.path.join(out_dir, 'labels.csv'), index=False)
    with open(os.path.join(out_dir, 'fpjs.txt'), 'w', encoding='utf-8') as f:
        f.write('\n'.join(sorted(set(FP_GROUP[:10]) | set(FPJS_EXTRA))) + '\n')
    _write_metadata(os.path.join(out_dir, 'metadata.csv'), first_year)

    config = {
            const.CONFIG_WINDOW: {const.CONFIG_FIRST_YEAR: first_year,
                                  const.CONFIG_LAST_YEAR: last_year},
            const.CONFIG_PATHS: {
                    const.CONFIG_CORPUS: os.path.join(out_dir, 'corpus.jsonl'),
                    const.CONFIG_LABELS: os.path.join(out_dir, 'labels.csv'),
                    const.CONFIG_FPJS: os.path.join(out_dir, 'fpjs.txt'),
                    const.CONFIG_METADATA: os.path.join(out_dir, 'metadata.csv'),
                    const.CONFIG_OUTPUT_DIR: os.path.join(out_dir, 'out'),
                    },
            const.CONFIG_SEED: seed,
            const.CONFIG_EMBED: {const.CONFIG_DIMS: 16, const.CONFIG_WALKS_PER_NODE: 5,
                                 const.CONFIG_WALK_LENGTH: 10, const.CONFIG_EPOCHS: 3},
            const.CONFIG_FOREST: {const.CONFIG_N_TREES: 50},
            }
    path = os.path.join(out_dir, 'config.yaml')
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(config, f, sort_keys=True)
    logger.info('Wrote %d synthetic scripts over %d-%d to %s', len(records), first_year,
                last_year, out_dir)
    return path


def _write_metadata(path, first_year):
    rows = [
            ('getGamepads', first_year + 1, first_year + 1, first_year + 7),
            ('deviceMemory', first_year + 3, first_year + 3, None),
            ('chargingTime', first_year + 2, first_year + 2, first_year + 2),
            ('plugins', None, first_year, first_year - 1),
            ]
    table = pd.DataFrame(rows, columns=['keyword', 'release_year', 'appearance_year',
                                        'disclosure_year'])
    table.to_csv(path, index=False, float_format='%.0f')


def synthetic_temporal_graph(first_year=2010, n_years=4, initial_nodes=30, new_nodes=8,
                             attach=3, persistence=0.7, new_edges=20, seed=0):
    """
    Yearly slices where each edge of the previous year survives with the given
    probability and new edges attach preferentially to high-degree nodes.
    """
    rng = np.random.default_rng(seed)
    nodes = [f'k{i:03d}' for i in range(initial_nodes)]
    degree = {n: 0 for n in nodes}

    def preferential(exclude, k):
        pool = [n for n in nodes if n not in exclude]
        weights = np.array([degree[n] + 1.0 for n in pool])
        chosen = rng.choice(len(pool), size=min(k, len(pool)), replace=False,
                            p=weights / weights.sum())
        return [pool[i] for i in chosen]

    def fresh_edges(count):
        edges = set()
        for _ in range(count):
            a = preferential((), 1)[0]
            b = preferential((a,), 1)[0]
            edges.add(make_pair(a, b))
        return edges

    slices = {}
    edges = fresh_edges(initial_nodes * 2)
    for offset in range(n_years):
        year = first_year + offset
        if offset:
            edges = {e for e in sorted(edges) if rng.random() < persistence}
            for _ in range(new_nodes):
                node = f'k{len(nodes):03d}'
                targets = preferential((), attach)
                nodes.append(node)
                degree[node] = 0
                edges.update(make_pair(node, t) for t in targets)
            edges |= fresh_edges(new_edges)
        for a, b in edges:
            degree[a] += 1
            degree[b] += 1
        counts = {e: int(rng.integers(1, 6)) for e in sorted(edges)}
        present = {n for e in edges for n in e}
        slices[year] = normalize_year(YearSlice(year, present, counts))
    return TemporalGraph(slices, (first_year, first_year + n_years - 1))
