from .extractor import KeywordExtractor, KeywordSet
from .index import KeywordIndex, build_keyword_index
from .utils import (dump_keyword_sets, extract_corpus, extract_keywords,
                    get_extractor, load_keyword_sets)
