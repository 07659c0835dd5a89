"""
Chains of yearly clusters.

A cluster of year Y extends every chain whose latest clusters it overlaps with
Jaccard similarity above the threshold. Chains that stop matching stay dormant
and can be picked up again in any later year.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Set
from .. import const

logger = logging.getLogger(__name__)


def jaccard(a, b):
    union = len(a | b)
    return len(a & b) / union if union else 0.0


@dataclass
class TemporalCluster:
    id: str
    chain: Dict[int, Set[str]] = field(default_factory=dict)
    members: Dict[int, FrozenSet[str]] = field(default_factory=dict)
    events: List[dict] = field(default_factory=list)
    dormant: bool = field(default=False, repr=False)

    @property
    def number(self):
        return int(self.id[1:])

    @property
    def lifespan(self):
        return sum(1 for m in self.members.values() if m)

    @property
    def years(self):
        return sorted(y for y, m in self.members.items() if m)

    @property
    def last_year(self):
        return max(self.members)

    @property
    def union_members(self):
        return frozenset(k for m in self.members.values() for k in m)

    def count_events(self, kind):
        return sum(1 for e in self.events if e['type'] == kind)

    def add(self, year, cluster_id, members):
        self.chain.setdefault(year, set()).add(cluster_id)
        self.members[year] = self.members.get(year, frozenset()) | members
        self.dormant = False

    def absorb(self, other):
        for year, ids in other.chain.items():
            self.chain.setdefault(year, set()).update(ids)
        for year, members in other.members.items():
            self.members[year] = self.members.get(year, frozenset()) | members
        self.events = sorted(self.events + other.events, key=lambda e: e['year'])

    def to_dict(self):
        return {
                'id': self.id,
                'lifespan': self.lifespan,
                'chain': {str(y): sorted(ids) for y, ids in sorted(self.chain.items())},
                'members': {str(y): sorted(m) for y, m in sorted(self.members.items())},
                'events': self.events,
                }

    @classmethod
    def from_dict(cls, data):
        return cls(data['id'],
                   {int(y): set(ids) for y, ids in data['chain'].items()},
                   {int(y): frozenset(m) for y, m in data['members'].items()},
                   list(data['events']))


class ChainLinker:
    def __init__(self, theta):
        self.theta = theta
        self.chains: Dict[str, TemporalCluster] = {}
        self.counter = 0
        self.__cluster_members = {}

    def __new_chain(self, year, cluster_id, members):
        self.counter += 1
        chain = TemporalCluster(f'T{self.counter}')
        chain.add(year, cluster_id, members)
        chain.events.append({'type': const.EVENT_BIRTH, 'year': year, 'cluster': cluster_id})
        self.chains[chain.id] = chain

    def link(self, partition):
        year = partition.year
        # prior cluster id -> (chain id, members), over the latest year of every chain
        tails = {}
        for chain in sorted(self.chains.values(), key=lambda c: c.number):
            for cluster_id in sorted(chain.chain[chain.last_year]):
                tails[cluster_id] = (chain.id, self.__cluster_members[cluster_id])
        previous = set(self.chains)
        resolved = {cid: cid for cid in previous}

        def find(cid):
            while resolved[cid] != cid:
                cid = resolved[cid]
            return cid

        hits = {}
        for cluster_id, members in partition.clusters:
            matched = [prior for prior, (_, m) in tails.items() if jaccard(members, m) > self.theta]
            if not matched:
                self.__new_chain(year, cluster_id, members)
                continue
            for prior in matched:
                hits.setdefault(prior, []).append(cluster_id)
            targets = sorted({find(tails[prior][0]) for prior in matched},
                             key=lambda cid: int(cid[1:]))
            target = self.chains[targets[0]]
            for cid in targets[1:]:
                target.absorb(self.chains.pop(cid))
                resolved[cid] = target.id
            if len(matched) > 1:
                target.events.append({'type': const.EVENT_MERGE, 'year': year,
                                      'cluster': cluster_id, 'clusters': sorted(matched),
                                      'chains': targets})
            target.add(year, cluster_id, members)

        for prior, current in sorted(hits.items()):
            if len(current) > 1:
                self.chains[find(tails[prior][0])].events.append(
                        {'type': const.EVENT_SPLIT, 'year': year, 'cluster': prior,
                         'clusters': current})
        for chain in self.chains.values():
            if chain.id in previous and year not in chain.members and not chain.dormant:
                chain.dormant = True
                chain.events.append({'type': const.EVENT_DORMANT, 'year': year})
        for cluster_id, members in partition.clusters:
            self.__cluster_members[cluster_id] = frozenset(members)

    def run(self, partitions):
        for partition in sorted(partitions, key=lambda p: p.year):
            self.link(partition)
        return sorted(self.chains.values(), key=lambda c: c.number)


def link_partitions(partitions, theta=0.2):
    chains = ChainLinker(theta).run(partitions)
    logger.info('Linked %d partitions into %d temporal clusters (theta %.2f)',
                len(partitions), len(chains), theta)
    return chains


def filter_short_lived(chains, min_lifespan=3):
    kept = [c for c in chains if c.lifespan >= min_lifespan]
    logger.info('Kept %d of %d temporal clusters living at least %d years',
                len(kept), len(chains), min_lifespan)
    return kept


def sweep_thresholds(partitions, thetas):
    if len(thetas) < 2:
        raise ValueError('A threshold sweep needs at least two values')
    rows = []
    for theta in thetas:
        chains = ChainLinker(theta).run(partitions)
        rows.append({
                'theta': theta,
                'chains': len(chains),
                'short_lived': sum(1 for c in chains if c.lifespan <= 2),
                'merges': sum(c.count_events(const.EVENT_MERGE) for c in chains),
                'splits': sum(c.count_events(const.EVENT_SPLIT) for c in chains),
                })
    return rows


def dump_chains(chains, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump([c.to_dict() for c in chains], f, indent=2, sort_keys=True)


def load_chains(path):
    with open(path, encoding='utf-8') as f:
        return [TemporalCluster.from_dict(c) for c in json.load(f)]
