from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Set, Tuple
from .. import const


@dataclass
class KeywordIndex:
    # (keyword, year) -> script ids
    postings: Dict[Tuple[str, int], Set[str]] = field(default_factory=dict)
    # (keyword, year) -> script count per label
    fp_counts: Dict[Tuple[str, int], int] = field(default_factory=dict)
    non_fp_counts: Dict[Tuple[str, int], int] = field(default_factory=dict)
    unknown_counts: Dict[Tuple[str, int], int] = field(default_factory=dict)
    first_year: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.__totals = {}
        for name, table in (('fp', self.fp_counts),
                            ('non_fp', self.non_fp_counts),
                            ('unknown', self.unknown_counts)):
            totals = Counter()
            for (keyword, _), n in table.items():
                totals[keyword] += n
            self.__totals[name] = totals

    def fp_appearances(self, keyword):
        return self.__totals['fp'][keyword]

    def non_fp_appearances(self, keyword):
        return self.__totals['non_fp'][keyword]

    def unknown_appearances(self, keyword):
        return self.__totals['unknown'][keyword]

    def scripts(self, keyword, year):
        return self.postings.get((keyword, year), set())

    @property
    def keywords(self):
        return set(self.first_year)


def build_keyword_index(sets, labels=None):
    """labels maps script_id -> label; absent ids count as unknown."""
    labels = labels or {}
    postings = defaultdict(set)
    counts = {label: defaultdict(int) for label in const.LABELS}
    first_year = {}
    for s in sets:
        label = labels.get(s.script_id, const.LABEL_UNKNOWN)
        for keyword in s.keywords:
            postings[(keyword, s.year)].add(s.script_id)
            counts[label][(keyword, s.year)] += 1
            if keyword not in first_year or s.year < first_year[keyword]:
                first_year[keyword] = s.year
    return KeywordIndex(dict(postings),
                        dict(counts[const.LABEL_FP]),
                        dict(counts[const.LABEL_NON_FP]),
                        dict(counts[const.LABEL_UNKNOWN]),
                        first_year)
