import json
import logging
import os
import pandas as pd
from . import const
from .errors import StageError

logger = logging.getLogger(__name__)

EVAL_COLUMNS = ['year', 'nodes', 'edges',
                'acc_hand', 'prec_hand', 'rec_hand',
                'acc_emb', 'prec_emb', 'rec_emb',
                'acc_comb', 'prec_comb', 'rec_comb']
CLUSTER_COLUMNS = ['id', 'size', 'lifespan', 'first_year', 'last_year', 'merges', 'splits',
                   'fingerprinting', 'dominant_apis']
METRIC_COLUMNS = ['id', 'size', 'pct_in_fp_scripts', 'pct_in_fpjs2', 'pct_only_fp_scripts',
                  'fp_ratio', 'fp_ratio_keywords', 'fingerprinting']
TIMELINE_COLUMNS = ['keyword', 'apis', 'release', 'appearance', 'disclosure', 'detection',
                    'category', 'detail']
SWEEP_COLUMNS = ['theta', 'chains', 'short_lived', 'merges', 'splits']

# report kind -> (artifacts it reads, command that produces them)
_prerequisites = {
    const.REPORT_EVAL: ((const.EVAL_FILE,), 'train'),
    const.REPORT_CLUSTERS: ((const.CHAINS_FILE, const.LABEL_FILE), 'label'),
    const.REPORT_METRICS: ((const.LABEL_FILE,), 'label'),
    const.REPORT_TIMELINE: ((const.LABEL_FILE,), 'label'),
    const.REPORT_SWEEP: ((const.SWEEP_FILE,), 'sweep'),
}


def _load(output_dir, artifact, command):
    path = os.path.join(output_dir, artifact)
    if not os.path.exists(path):
        raise StageError(const.STAGE_REPORT,
                         f'missing {artifact}; run `fpradar {command}` first')
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def eval_table(evaluation, sampled=False):
    reports = evaluation['sampled' if sampled else 'full']
    graph = evaluation['graph']
    rows = {}
    for fs, year_reports in reports.items():
        for report in year_reports:
            year = report['year']
            row = rows.setdefault(year, {'year': year,
                                         'nodes': graph[str(year)]['nodes'],
                                         'edges': graph[str(year)]['edges']})
            row[f'acc_{fs}'] = report['accuracy']
            row[f'prec_{fs}'] = report['precision']
            row[f'rec_{fs}'] = report['recall']
    return pd.DataFrame([rows[y] for y in sorted(rows)], columns=EVAL_COLUMNS)


def clusters_table(chains, labeling):
    rows = []
    for chain in chains:
        members = {k for m in chain['members'].values() for k in m}
        years = sorted(int(y) for y, m in chain['members'].items() if m)
        dominance = labeling['dominance'].get(chain['id'], [])
        rows.append({
                'id': chain['id'],
                'size': len(members),
                'lifespan': chain['lifespan'],
                'first_year': years[0] if years else None,
                'last_year': years[-1] if years else None,
                'merges': sum(1 for e in chain['events'] if e['type'] == const.EVENT_MERGE),
                'splits': sum(1 for e in chain['events'] if e['type'] == const.EVENT_SPLIT),
                'fingerprinting': chain['id'] == labeling['fp_chain'],
                'dominant_apis': '; '.join(f'{e["api"]} ({e["dominance"]:.2f})'
                                           for e in dominance[:3]),
                })
    table = pd.DataFrame(rows, columns=CLUSTER_COLUMNS)
    return _by_size(table)


def _by_size(table):
    # rows sorted by cluster size, largest first
    if table.empty:
        return table
    table = table.assign(_n=table['id'].str.len())
    table = table.sort_values(['size', '_n', 'id'], ascending=[False, True, True], kind='stable')
    return table.drop(columns='_n').reset_index(drop=True)


def metrics_table(labeling):
    rows = []
    for cid, metrics in labeling['metrics'].items():
        rows.append(dict(id=cid, size=labeling['sizes'][cid],
                         fingerprinting=cid == labeling['fp_chain'], **metrics))
    return _by_size(pd.DataFrame(rows, columns=METRIC_COLUMNS))


def timeline_table(labeling):
    rows = [dict(t, apis='; '.join(t.get('apis', []))) for t in labeling['timelines']]
    table = pd.DataFrame(rows, columns=TIMELINE_COLUMNS)
    for column in ('release', 'appearance', 'disclosure', 'detection'):
        table[column] = table[column].astype('Int64')
    return table


def sweep_table(sweep):
    return pd.DataFrame(sweep, columns=SWEEP_COLUMNS)


def build_report(kind, output_dir):
    if kind not in _prerequisites:
        raise ValueError(f'Unknown report kind: {kind}')
    artifacts, command = _prerequisites[kind]
    data = [_load(output_dir, artifact, command) for artifact in artifacts]
    if kind == const.REPORT_EVAL:
        return {'eval': eval_table(data[0]), 'eval_sampled': eval_table(data[0], sampled=True)}
    if kind == const.REPORT_CLUSTERS:
        return {'clusters': clusters_table(*data)}
    if kind == const.REPORT_METRICS:
        return {'metrics': metrics_table(data[0])}
    if kind == const.REPORT_TIMELINE:
        return {'timeline': timeline_table(data[0])}
    return {'sweep': sweep_table(data[0])}


def write_table(table, path):
    """The same values twice: CSV for machines, an aligned text table for people."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    table.to_csv(f'{path}.csv', index=False, float_format='%.6f')
    with open(f'{path}.txt', 'w', encoding='utf-8') as f:
        f.write(table.to_string(index=False, float_format=lambda v: f'{v:.6f}', na_rep='')
                + '\n')


def emit_report(kind, out_path, output_dir):
    """Write <out_path>/<name>.csv and .txt for every table of the report kind."""
    written = []
    for name, table in build_report(kind, output_dir).items():
        path = os.path.join(out_path, name)
        write_table(table, path)
        written.append(f'{path}.csv')
    logger.info('Wrote %s report: %s', kind, ', '.join(written))
    return written
