import hashlib
import json
import logging
import os
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple
from .. import const
from ..errors import IngestError

logger = logging.getLogger(__name__)

MANIFEST_FIELDS = ('script_id', 'url', 'site_rank', 'year', 'digest', 'body_ref', 'fp_label')


@dataclass(frozen=True)
class ScriptRecord:
    script_id: str
    url: str
    year: int
    digest: str
    body_ref: str
    site_rank: Optional[int] = None
    fp_label: str = const.LABEL_UNKNOWN

    def to_dict(self):
        return {k: asdict(self)[k] for k in MANIFEST_FIELDS}

    @classmethod
    def from_dict(cls, data):
        for key in ('script_id', 'url', 'year', 'digest', 'body_ref'):
            if key not in data:
                raise ValueError(f'The manifest record doesn\'t contain {key}')
        label = data.get('fp_label') or const.LABEL_UNKNOWN
        if label not in const.LABELS:
            raise ValueError(f'Unknown fp_label {label} for {data["script_id"]}')
        rank = data.get('site_rank')
        return cls(script_id=str(data['script_id']),
                   url=data['url'],
                   year=int(data['year']),
                   digest=data['digest'].lower(),
                   body_ref=data['body_ref'],
                   site_rank=int(rank) if rank is not None else None,
                   fp_label=label)


@dataclass
class CorpusManifest:
    records: List[ScriptRecord]
    window: Tuple[int, int]
    base_dir: str = field(default='.', repr=False)

    @property
    def years(self):
        return list(range(self.window[0], self.window[1] + 1))

    def year_counts(self):
        counts = Counter(r.year for r in self.records)
        return {y: counts.get(y, 0) for y in self.years}

    def records_for_year(self, year):
        return [r for r in self.records if r.year == year]

    def body_path(self, record):
        return os.path.join(self.base_dir, record.body_ref)

    def read_body(self, record):
        with open(self.body_path(record), 'rb') as f:
            return f.read()


def content_digest(body: bytes) -> str:
    return hashlib.sha1(body).hexdigest()


def deduplicate(records):
    """Collapse records sharing (digest, year); the lowest script_id survives."""
    kept = {}
    for record in sorted(records, key=lambda r: r.script_id):
        kept.setdefault((record.digest, record.year), record)
    return sorted(kept.values(), key=lambda r: r.script_id)


def ingest_manifest(path, window=None, verify=False):
    base_dir = os.path.dirname(os.path.abspath(path))
    records = []
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                records.append(ScriptRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as e:
                raise IngestError(f'Malformed manifest line {lineno}: {e.msg}') from e

    if window is None:
        if not records:
            raise IngestError(f'Empty manifest {path} and no study window given')
        window = (min(r.year for r in records), max(r.year for r in records))
    first, last = window
    if first > last:
        raise ValueError(f'Empty study window {first}-{last}')

    outside = [r.script_id for r in records if not first <= r.year <= last]
    if outside:
        raise IngestError(f'Records outside the study window {first}-{last}', outside)
    missing = [r.script_id for r in records
               if not os.path.isfile(os.path.join(base_dir, r.body_ref))]
    if missing:
        raise IngestError('Unresolvable body_ref', missing)
    if verify:
        mismatched = []
        for r in records:
            with open(os.path.join(base_dir, r.body_ref), 'rb') as f:
                if content_digest(f.read()) != r.digest:
                    mismatched.append(r.script_id)
        if mismatched:
            raise IngestError('Digest does not match body', mismatched)

    manifest = CorpusManifest(deduplicate(records), (first, last), base_dir)
    dropped = len(records) - len(manifest.records)
    logger.info('Ingested %d records (%d duplicates dropped), per year: %s',
                len(manifest.records), dropped, manifest.year_counts())
    return manifest


def write_manifest(records, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for record in sorted(records, key=lambda r: r.script_id):
            f.write(json.dumps(record.to_dict(), sort_keys=True) + '\n')
