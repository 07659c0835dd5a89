"""
Hierarchical web API taxonomy: API -> interfaces -> keywords.

The taxonomy defines the graph vocabulary and attributes keywords back to the
APIs that implement them.
"""
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Tuple
from .. import utils
from . import const
from .errors import TaxonomyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApiEntry:
    name: str
    interfaces: Tuple[Tuple[str, Tuple[str, ...]], ...]

    @property
    def keywords(self) -> FrozenSet[str]:
        # keywords repeated across interfaces of one API count once
        return frozenset(k for _, keywords in self.interfaces for k in keywords)


@dataclass(frozen=True, eq=False)
class ApiTaxonomy:
    apis: Tuple[ApiEntry, ...]
    keyword_index: Dict[str, FrozenSet[str]] = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, ApiTaxonomy):
            return NotImplemented
        return self.apis == other.apis and self.keyword_index == other.keyword_index

    @cached_property
    def vocabulary(self) -> FrozenSet[str]:
        return frozenset(self.keyword_index)

    @property
    def n_apis(self):
        return len(self.apis)

    @property
    def n_interfaces(self):
        return sum(len(api.interfaces) for api in self.apis)

    @property
    def n_keywords(self):
        return len(self.keyword_index)

    def keywords_of(self, api_name):
        for api in self.apis:
            if api.name == api_name:
                return api.keywords
        raise ValueError(f'Unknown API: {api_name}')

    def resolve_keyword(self, keyword):
        return resolve_keyword(self, keyword)

    def prune_generic_keywords(self):
        return prune_generic_keywords(self)


def _require(node, key, kind, where):
    if not isinstance(node, dict) or key not in node:
        raise TaxonomyError(f'The {where} doesn\'t contain {key}')
    value = node[key]
    if not isinstance(value, kind):
        raise TaxonomyError(f'The {key} of {where} must be a {kind.__name__}')
    return value


def parse_taxonomy(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise TaxonomyError(f'Malformed taxonomy: {e.msg}', e.lineno, e.colno) from e

    apis = []
    index = {}
    for api in _require(data, 'apis', list, 'taxonomy'):
        name = _require(api, 'name', str, 'api entry')
        seen_interfaces = set()
        interfaces = []
        for interface in _require(api, 'interfaces', list, f'api {name}'):
            iname = _require(interface, 'name', str, f'an interface of {name}')
            if iname in seen_interfaces:
                raise TaxonomyError(f'Duplicated interface {iname} in api {name}')
            seen_interfaces.add(iname)
            keywords = _require(interface, 'keywords', list, f'interface {name}.{iname}')
            seen = set()
            for keyword in keywords:
                if not isinstance(keyword, str) or not keyword:
                    raise TaxonomyError(f'Invalid keyword {keyword!r} in {name}.{iname}')
                if keyword in seen:
                    raise TaxonomyError(f'Duplicated keyword {keyword} in {name}.{iname}')
                seen.add(keyword)
                index.setdefault(keyword, set()).add(name)
            interfaces.append((iname, tuple(keywords)))
        apis.append(ApiEntry(name, tuple(interfaces)))
    return ApiTaxonomy(tuple(apis), {k: frozenset(v) for k, v in sorted(index.items())})


def load_taxonomy(path=None):
    """Load a taxonomy file, or the packaged one when path is None."""
    if path is None:
        text = utils.get_data(const.TAXONOMY_FILE).decode('utf-8')
    else:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    taxonomy = parse_taxonomy(text)
    logger.info('Loaded taxonomy: %d APIs, %d interfaces, %d keywords',
                taxonomy.n_apis, taxonomy.n_interfaces, taxonomy.n_keywords)
    return taxonomy


def resolve_keyword(taxonomy, keyword):
    return set(taxonomy.keyword_index.get(keyword, ()))


def prune_generic_keywords(taxonomy):
    """Keywords implemented by more than one API; kept as nodes, skipped for attribution."""
    return {k for k, apis in taxonomy.keyword_index.items() if len(apis) > 1}
