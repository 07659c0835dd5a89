from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import FrozenSet


@dataclass(frozen=True)
class KeywordSet:
    script_id: str
    year: int
    keywords: FrozenSet[str] = field(default_factory=frozenset)
    fallback: bool = False
    skipped: bool = False

    def to_dict(self):
        return {
                'script_id': self.script_id,
                'year': self.year,
                'keywords': sorted(self.keywords),
                }

    @classmethod
    def from_dict(cls, data):
        return cls(str(data['script_id']), int(data['year']), frozenset(data['keywords']))


class KeywordExtractor(ABC):
    @abstractmethod
    def extract(self, body, vocab):
        """Return the vocabulary keywords used by body."""
        return NotImplemented
