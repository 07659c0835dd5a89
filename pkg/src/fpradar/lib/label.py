"""
Fingerprinting attribution of temporal clusters.

Four metrics score every chain; the chain that leads on at least three of them
is the fingerprinting cluster. Its members get detection years, which are set
against the dates a keyword shipped, appeared in the corpus and was publicly
disclosed as a fingerprinting vector.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple
import pandas as pd
from .. import utils
from . import const
from .errors import AmbiguousClusterError

logger = logging.getLogger(__name__)

METRIC_NAMES = ('pct_in_fp_scripts', 'pct_in_fpjs2', 'pct_only_fp_scripts', 'fp_ratio')
METADATA_COLUMNS = ('keyword', 'release_year', 'appearance_year', 'disclosure_year')


def load_labels(path):
    """script_url,label CSV -> url -> label."""
    table = pd.read_csv(path, dtype=str, keep_default_na=False)
    for column in ('script_url', 'label'):
        if column not in table.columns:
            raise ValueError(f'The labels file doesn\'t contain {column}')
    labels = {}
    for url, value in zip(table['script_url'], table['label']):
        value = value.strip()
        if value not in const.LABEL_FILE_VALUES:
            raise ValueError(f'Unknown label {value!r} for {url}')
        labels[url.strip()] = const.LABEL_FILE_VALUES[value]
    logger.info('Loaded %d script labels', len(labels))
    return labels


def load_fpjs(path=None):
    if path is None:
        text = utils.get_data(const.FPJS_FILE).decode('utf-8')
    else:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    return {line.strip() for line in text.splitlines() if line.strip()}


def _year(value):
    value = str(value).strip()
    return int(value) if value else None


def load_metadata(path):
    """keyword -> (release, appearance, disclosure); blank cells are None."""
    table = pd.read_csv(path, dtype=str, keep_default_na=False)
    for column in METADATA_COLUMNS:
        if column not in table.columns:
            raise ValueError(f'The metadata file doesn\'t contain {column}')
    return {row.keyword.strip(): (_year(row.release_year), _year(row.appearance_year),
                                  _year(row.disclosure_year))
            for row in table.itertuples(index=False)}


def script_labels(manifest, labels_by_url):
    """script_id -> label, from the labels file first and the manifest second."""
    return {r.script_id: labels_by_url.get(r.url, r.fp_label) for r in manifest.records}


@dataclass(frozen=True)
class ClusterMetrics:
    pct_in_fp_scripts: float
    pct_in_fpjs2: float
    pct_only_fp_scripts: float
    fp_ratio: float
    fp_ratio_keywords: float = 0.0

    def value(self, name):
        return getattr(self, name)

    def to_dict(self):
        return asdict(self)


def _ratio(num, den):
    if den == 0:
        return math.inf if num > 0 else 0.0
    return num / den


def cluster_metrics(tc, idx, fpjs):
    members = getattr(tc, 'union_members', tc)
    n = len(members)
    if not n:
        return ClusterMetrics(0.0, 0.0, 0.0, 0.0, 0.0)
    fp = {k for k in members if idx.fp_appearances(k) > 0}
    non_fp = {k for k in members if idx.non_fp_appearances(k) > 0}
    only_fp = {k for k in fp if k not in non_fp and idx.unknown_appearances(k) == 0}

    # unknown-label appearances stay out of both sides of the ratio
    total_fp = sum(idx.fp_counts.values())
    total_non_fp = sum(idx.non_fp_counts.values())
    cluster_fp = sum(idx.fp_appearances(k) for k in members)
    cluster_non_fp = sum(idx.non_fp_appearances(k) for k in members)
    fp_share = cluster_fp / total_fp if total_fp else 0.0
    non_fp_share = cluster_non_fp / total_non_fp if total_non_fp else 0.0

    return ClusterMetrics(100.0 * len(fp) / n,
                          100.0 * len(members & set(fpjs)) / n,
                          100.0 * len(only_fp) / n,
                          _ratio(fp_share, non_fp_share),
                          _ratio(len(fp) / n, len(non_fp) / n))


def _chain_key(chain_id):
    return (len(chain_id), chain_id)


def select_fp_cluster(metrics):
    if not metrics:
        raise ValueError('No temporal clusters to select from')
    if len(metrics) == 1:
        return next(iter(metrics))

    def ranking(name):
        return sorted(metrics, key=lambda cid: (-metrics[cid].value(name),
                                                -metrics[cid].fp_ratio,
                                                -metrics[cid].pct_in_fp_scripts,
                                                _chain_key(cid)))

    rankings = {name: ranking(name) for name in METRIC_NAMES}
    leads = {}
    for order in rankings.values():
        leads[order[0]] = leads.get(order[0], 0) + 1
    for cid, count in sorted(leads.items(), key=lambda item: (-item[1], _chain_key(item[0]))):
        if count >= 3:
            logger.info('Fingerprinting cluster: %s (leads %d metrics)', cid, count)
            return cid
    raise AmbiguousClusterError({name: order[:2] for name, order in rankings.items()})


@dataclass(frozen=True)
class DominanceEntry:
    api: str
    dominance: float
    keywords: Tuple[str, ...]

    def to_dict(self):
        return {'api': self.api, 'dominance': self.dominance, 'keywords': list(self.keywords)}


def dominant_apis(tc, taxonomy):
    generic = taxonomy.prune_generic_keywords()
    members = set(getattr(tc, 'union_members', tc)) - generic
    entries = []
    for api in taxonomy.apis:
        keywords = api.keywords - generic
        present = keywords & members
        if not present:
            continue
        entries.append(DominanceEntry(api.name, len(present) / len(keywords), tuple(sorted(present))))
    return sorted(entries, key=lambda e: (-e.dominance, e.api))


@dataclass
class KeywordTimeline:
    keyword: str
    release: Optional[int] = None
    appearance: Optional[int] = None
    disclosure: Optional[int] = None
    detection: Optional[int] = None
    category: Optional[str] = None
    detail: Optional[str] = None

    def to_dict(self):
        return asdict(self)


def _categorize(tl):
    if tl.detection is None:
        raise ValueError(f'{tl.keyword} has no detection year')
    if tl.disclosure is None:
        return const.CATEGORY_UNDISCLOSED, None
    if tl.detection < tl.disclosure:
        return const.CATEGORY_EARLY, None
    if tl.detection == tl.disclosure:
        return const.CATEGORY_ON_TIME, const.DETAIL_AT_DISCLOSURE
    if tl.detection == tl.appearance:
        return const.CATEGORY_ON_TIME, const.DETAIL_FIRST_OPPORTUNITY
    return const.CATEGORY_LATE, None


def categorize_keyword(tl):
    return _categorize(tl)[0]


def detection_timeline(tc, metadata, idx=None, window_start=None):
    """
    One timeline per chain member and per metadata keyword.

    Appearance falls back to the keyword's first corpus year; it never
    precedes window_start when that is given.
    """
    keywords = sorted(set(tc.union_members) | set(metadata))
    timelines = []
    for keyword in keywords:
        release, appearance, disclosure = metadata.get(keyword, (None, None, None))
        if appearance is None and idx is not None:
            appearance = idx.first_year.get(keyword)
        if appearance is not None and window_start is not None:
            appearance = max(appearance, window_start)
        years = [y for y, members in tc.members.items() if keyword in members]
        tl = KeywordTimeline(keyword, release, appearance, disclosure, min(years) if years else None)
        if tl.detection is not None:
            tl.category, tl.detail = _categorize(tl)
        timelines.append(tl)
    counts = {}
    for tl in timelines:
        if tl.category:
            counts[tl.category] = counts.get(tl.category, 0) + 1
    logger.info('Detection categories: %s', dict(sorted(counts.items())))
    return timelines
