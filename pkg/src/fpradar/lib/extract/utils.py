import json
import logging
from ... import utils as fp_utils
from .. import const
from ..utils.parallel_executor import map_in_parallel
from .extractor import KeywordSet
from .lexical import LexicalExtractor
from .syntax_tree import AstExtractor

logger = logging.getLogger(__name__)

BINARY_PROBE = 512

_extractor_mapping: dict = {
    const.MODE_LEXICAL: LexicalExtractor,
    const.MODE_AST: AstExtractor,
}


def get_extractor(mode):
    if mode not in _extractor_mapping:
        raise ValueError(f'Unknown extraction mode: {mode}')
    return _extractor_mapping[mode]()


def decode_body(body):
    """Return (text, is_binary)."""
    if isinstance(body, str):
        return body, '\0' in body[:BINARY_PROBE]
    if b'\0' in body[:BINARY_PROBE]:
        return '', True
    return body.decode('utf-8', errors='replace'), False


def extract_keywords(body, vocab, mode=const.MODE_LEXICAL, *, script_id='', year=0):
    text, binary = decode_body(body)
    if binary:
        logger.warning('Skipping binary body %s', script_id or '<inline>')
        return KeywordSet(script_id, year, frozenset(), skipped=True)
    if not text:
        return KeywordSet(script_id, year, frozenset())

    extractor = get_extractor(mode)
    fallback = False
    try:
        keywords = extractor.extract(text, vocab)
    except Exception as e:  # esprima raises its own error types and RecursionError
        if mode == const.MODE_LEXICAL:
            raise
        logger.warning('AST parse failed for %s, using lexical mode: %s',
                       script_id or '<inline>', e)
        keywords = get_extractor(const.MODE_LEXICAL).extract(text, vocab)
        fallback = True
    return KeywordSet(script_id, year, frozenset(keywords), fallback=fallback)


def extract_corpus(manifest, vocab, mode=const.MODE_LEXICAL, jobs=1):
    def extract_record(record):
        return extract_keywords(manifest.read_body(record), vocab, mode,
                                script_id=record.script_id, year=record.year)

    records = sorted(manifest.records, key=lambda r: r.script_id)
    sets = map_in_parallel(extract_record, records, jobs)
    fallbacks = sum(s.fallback for s in sets)
    skipped = sum(s.skipped for s in sets)
    logger.info('Extracted keywords from %d scripts (%d fallbacks, %d skipped)',
                len(sets), fallbacks, skipped)
    return sets


def dump_keyword_sets(sets, path):
    with open(path, 'w', encoding='utf-8') as f:
        for s in sorted(sets, key=lambda s: s.script_id):
            f.write(json.dumps(s.to_dict(), sort_keys=True) + '\n')
    return fp_utils.file_digest(path)


def load_keyword_sets(path):
    with open(path, encoding='utf-8') as f:
        return [KeywordSet.from_dict(json.loads(line)) for line in f if line.strip()]
