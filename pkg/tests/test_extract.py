import pytest
from hypothesis import given, settings, strategies as st
from fpradar.lib import const
from fpradar.lib.extract import build_keyword_index, extract_corpus, extract_keywords
from fpradar.lib.extract.syntax_tree import AstExtractor
from fpradar.lib.synthetic import generate_corpus
from fpradar.lib.corpus import ingest_manifest
from fpradar.lib.taxonomy import load_taxonomy

VOCAB = frozenset({'userAgent', 'toDataURL', 'getGamepads', 'platform', 'plugins', 'getContext',
                   'fillText', 'chargingchange', 'levelchange', 'addEventListener',
                   'hardwareConcurrency', 'colorDepth', 'getParameter', 'language'})
MODES = (const.MODE_LEXICAL, const.MODE_AST)

FIXTURE_SCRIPTS = [
    # battery event names probed through strings
    '''
    var events = ["chargingchange", "levelchange"];
    for (var i = 0; i < events.length; i++) {
      battery.addEventListener(events[i], function () { update(); });
    }
    ''',
    # canvas
    '''
    function canvasHash() {
      var c = document.createElement("canvas");
      var ctx = c.getContext("2d");
      ctx.font = "14px Arial"; /* toDataURL is read below */
      ctx.fillText("fp", 2, 2);
      return c.toDataURL();
    }
    ''',
    # navigator dictionary
    '''
    var nvgtr = {};
    nvgtr.ua = navigator.userAgent, nvgtr.p = navigator["platform"],
    nvgtr.pl = navigator.plugins, nvgtr.hc = navigator.hardwareConcurrency;
    // navigator.language is skipped
    ''',
    # gamepad presence check
    '''
    function isPresent(obj, name) { return typeof obj[name] !== 'undefined'; }
    if (isPresent(navigator, 'getGamepads')) { var pads = navigator.getGamepads(); }
    var re = /colorDepth/g;
    ''',
    # template literal
    '''
    const key = `${screen.colorDepth}|${gl.getParameter(37445)}|language`;
    ''',
]
FIXTURE_KEYWORDS = [
    {'chargingchange', 'levelchange', 'addEventListener'},
    {'getContext', 'fillText', 'toDataURL'},
    {'userAgent', 'platform', 'plugins', 'hardwareConcurrency'},
    {'getGamepads'},
    {'colorDepth', 'getParameter'},
]


@pytest.mark.parametrize('mode', MODES)
def test_direct_match(mode):
    result = extract_keywords('navigator.userAgent; c.toDataURL()', VOCAB, mode)
    assert result.keywords == {'userAgent', 'toDataURL'}
    assert not result.fallback


@pytest.mark.parametrize('mode', MODES)
def test_comment_only(mode):
    assert extract_keywords('// userAgent', VOCAB, mode).keywords == set()
    assert extract_keywords('/* userAgent\n platform */', VOCAB, mode).keywords == set()


@pytest.mark.parametrize('mode', MODES)
def test_set_semantics(mode):
    body = 'a.userAgent; b.userAgent; c["userAgent"];'
    assert extract_keywords(body, VOCAB, mode).keywords == {'userAgent'}


@pytest.mark.parametrize('mode', MODES)
def test_empty_body(mode):
    assert extract_keywords(b'', VOCAB, mode).keywords == set()


def test_partial_string_does_not_match():
    assert extract_keywords('x = "the userAgent string"', VOCAB).keywords == set()


@pytest.mark.parametrize('mode', MODES)
@pytest.mark.parametrize('index', range(len(FIXTURE_SCRIPTS)))
def test_fixture_scripts(mode, index):
    assert extract_keywords(FIXTURE_SCRIPTS[index], VOCAB, mode).keywords == FIXTURE_KEYWORDS[index]


def test_ast_failure_falls_back_to_lexical(monkeypatch):
    def broken(self, body, vocab):
        raise RecursionError('too deep')
    monkeypatch.setattr(AstExtractor, 'extract', broken)
    result = extract_keywords('navigator.userAgent', VOCAB, const.MODE_AST, script_id='s1')
    assert result.fallback
    assert result.keywords == {'userAgent'}


def test_binary_body_skipped(caplog):
    result = extract_keywords(b'\x00\x01userAgent', VOCAB, script_id='bin')
    assert result.skipped
    assert result.keywords == set()
    assert 'Skipping binary body bin' in caplog.text


def test_invalid_utf8_is_replaced():
    assert extract_keywords(b'\xff\xfe navigator.userAgent', VOCAB).keywords == {'userAgent'}


def test_unknown_mode():
    with pytest.raises(ValueError, match='Unknown extraction mode'):
        extract_keywords('x', VOCAB, 'regex')


@settings(deadline=None, max_examples=200)
@given(st.lists(st.sampled_from(sorted(VOCAB) + ['//', '/*', '*/', '"', "'", '`', '${', '}',
                                                  '{', '/', '.', ';', '\n', ' ', 'x', '\\']),
                max_size=40))
def test_lexical_output_within_vocab(pieces):
    result = extract_keywords(''.join(pieces), VOCAB)
    assert result.keywords <= VOCAB


def test_extraction_is_pure():
    body = FIXTURE_SCRIPTS[2]
    assert extract_keywords(body, VOCAB) == extract_keywords(body, VOCAB)


def test_index_postings_and_counts():
    from conftest import keyword_sets
    sets = keyword_sets(2014, {'webgl', 'a'}, {'webgl'}, {'a', 'b'}, {'b'})
    labels = {'s2014-0': const.LABEL_FP, 's2014-1': const.LABEL_FP,
              's2014-2': const.LABEL_NON_FP}
    index = build_keyword_index(sets, labels)
    assert index.scripts('webgl', 2014) == {'s2014-0', 's2014-1'}
    assert index.fp_appearances('webgl') == 2
    assert index.non_fp_appearances('webgl') == 0
    assert (index.fp_appearances('a'), index.non_fp_appearances('a')) == (1, 1)
    assert (index.fp_appearances('b'), index.non_fp_appearances('b'),
            index.unknown_appearances('b')) == (0, 1, 1)
    assert index.keywords == {'webgl', 'a', 'b'}


def test_index_first_year():
    from conftest import keyword_sets
    sets = keyword_sets(2012, {'a'}) + keyword_sets(2010, {'a', 'b'})
    assert build_keyword_index(sets).first_year == {'a': 2010, 'b': 2010}


def test_extract_corpus_independent_of_jobs(tmp_path):
    config = generate_corpus(str(tmp_path), 2010, 2011, scripts_per_year=6, fp_per_year=2,
                             unknown_per_year=1)
    assert config.endswith('config.yaml')
    manifest = ingest_manifest(str(tmp_path / 'corpus.jsonl'), (2010, 2011))
    vocab = load_taxonomy().vocabulary
    serial = extract_corpus(manifest, vocab, const.MODE_LEXICAL, jobs=1)
    parallel = extract_corpus(manifest, vocab, const.MODE_LEXICAL, jobs=4)
    assert serial == parallel
    assert [s.script_id for s in serial] == sorted(s.script_id for s in serial)
    assert all(s.keywords for s in serial)


def test_modes_agree_on_synthetic_corpus(tmp_path):
    generate_corpus(str(tmp_path), 2010, 2010, scripts_per_year=12, fp_per_year=4)
    manifest = ingest_manifest(str(tmp_path / 'corpus.jsonl'), (2010, 2010))
    vocab = load_taxonomy().vocabulary
    lexical = extract_corpus(manifest, vocab, const.MODE_LEXICAL)
    ast = extract_corpus(manifest, vocab, const.MODE_AST)
    assert [s.keywords for s in lexical] == [s.keywords for s in ast]
    assert not any(s.fallback for s in ast)
