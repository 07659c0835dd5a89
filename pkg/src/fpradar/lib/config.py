import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Tuple
from . import const

DEFAULT_SWEEP = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class EmbedSettings:
    dims: int = 64
    walks_per_node: int = 10
    walk_length: int = 20
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    recency_bias: float = 1.0
    learning_rate: float = 0.01


@dataclass(frozen=True)
class ForestSettings:
    n_trees: int = 100
    min_samples_leaf: int = 2


@dataclass(frozen=True)
class PipelineConfig:
    window: Tuple[int, int]
    corpus: Optional[str] = None
    taxonomy: Optional[str] = None
    labels: Optional[str] = None
    fpjs: Optional[str] = None
    metadata: Optional[str] = None
    output_dir: str = 'fpradar-out'
    store_dir: Optional[str] = None
    seed: int = 0
    jobs: int = 1
    embedding: bool = True
    predicted_edges: bool = True
    feature_sets: Tuple[str, ...] = const.FEATURE_SETS
    theta: float = 0.2
    split_fraction: float = 1 / 3
    negative_ratio: float = 0.5
    decision_threshold: float = 0.5
    sweep: Tuple[float, ...] = DEFAULT_SWEEP
    extract_mode: str = const.MODE_LEXICAL
    embed: EmbedSettings = field(default_factory=EmbedSettings)
    forest: ForestSettings = field(default_factory=ForestSettings)
    cdx: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        first, last = self.window
        if first > last:
            raise ValueError(f'Empty study window {first}-{last}')
        if not 0 <= self.theta <= 1:
            raise ValueError(f'theta must be within [0, 1], got {self.theta}')
        if not 0 < self.split_fraction <= 1:
            raise ValueError(f'split_fraction must be within (0, 1], got {self.split_fraction}')
        if self.negative_ratio <= 0:
            raise ValueError(f'negative_ratio must be positive, got {self.negative_ratio}')
        for fs in self.feature_sets:
            if fs not in const.FEATURE_SETS:
                raise ValueError(f'Unknown feature set: {fs}')
        if not self.feature_sets:
            raise ValueError('At least one feature set is required')
        if not self.embedding and set(self.feature_sets) - {const.FEATURES_HAND}:
            raise ValueError('Embedding feature sets need the embedding stage enabled')
        if self.extract_mode not in (const.MODE_LEXICAL, const.MODE_AST):
            raise ValueError(f'Unknown extraction mode: {self.extract_mode}')

    @property
    def years(self):
        return list(range(self.window[0], self.window[1] + 1))

    @property
    def primary_feature_set(self):
        for fs in (const.FEATURES_COMB, const.FEATURES_HAND, const.FEATURES_EMB):
            if fs in self.feature_sets:
                return fs

    @classmethod
    def from_dict(cls, config):
        if const.CONFIG_WINDOW not in config:
            raise ValueError(f'The config doesn\'t contain {const.CONFIG_WINDOW}')
        window = config[const.CONFIG_WINDOW]
        for key in (const.CONFIG_FIRST_YEAR, const.CONFIG_LAST_YEAR):
            if key not in window:
                raise ValueError(f'The config doesn\'t contain {const.CONFIG_WINDOW}.{key}')

        paths = config.get(const.CONFIG_PATHS) or {}
        stages = config.get(const.CONFIG_STAGES) or {}
        thresholds = config.get(const.CONFIG_THRESHOLDS) or {}
        extract = config.get(const.CONFIG_EXTRACT) or {}
        kwargs = {}
        for key in (const.CONFIG_CORPUS, const.CONFIG_TAXONOMY, const.CONFIG_LABELS,
                    const.CONFIG_FPJS, const.CONFIG_METADATA, const.CONFIG_OUTPUT_DIR,
                    const.CONFIG_STORE_DIR):
            if paths.get(key) is not None:
                kwargs[key] = str(paths[key])
        for key in (const.CONFIG_SEED, const.CONFIG_JOBS):
            if config.get(key) is not None:
                kwargs[key] = int(config[key])
        for key in (const.CONFIG_EMBEDDING, const.CONFIG_PREDICTED_EDGES):
            if key in stages:
                kwargs[key] = bool(stages[key])
        unknown = set(stages) - {const.CONFIG_EMBEDDING, const.CONFIG_PREDICTED_EDGES,
                                 const.CONFIG_FEATURE_SETS}
        if unknown:
            raise ValueError(f'Unknown stage flags: {", ".join(sorted(unknown))}')
        if const.CONFIG_FEATURE_SETS in stages:
            kwargs[const.CONFIG_FEATURE_SETS] = tuple(stages[const.CONFIG_FEATURE_SETS])
        for key in (const.CONFIG_THETA, const.CONFIG_SPLIT_FRACTION,
                    const.CONFIG_NEGATIVE_RATIO, const.CONFIG_DECISION_THRESHOLD):
            if key in thresholds:
                kwargs[key] = float(thresholds[key])
        if const.CONFIG_SWEEP in thresholds:
            kwargs[const.CONFIG_SWEEP] = tuple(float(t) for t in thresholds[const.CONFIG_SWEEP])
        if const.CONFIG_MODE in extract:
            kwargs['extract_mode'] = extract[const.CONFIG_MODE]
        kwargs[const.CONFIG_EMBED] = _settings(EmbedSettings, config.get(const.CONFIG_EMBED))
        kwargs[const.CONFIG_FOREST] = _settings(ForestSettings, config.get(const.CONFIG_FOREST))
        kwargs[const.CONFIG_CDX] = dict(config.get(const.CONFIG_CDX) or {})
        return cls(window=(int(window[const.CONFIG_FIRST_YEAR]), int(window[const.CONFIG_LAST_YEAR])),
                   **kwargs)

    def replace(self, **changes):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update({k: v for k, v in changes.items() if v is not None})
        return PipelineConfig(**data)

    def to_dict(self):
        return asdict(self)

    def digest(self):
        text = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def _settings(cls, section):
    section = section or {}
    known = {f.name for f in fields(cls)}
    unknown = set(section) - set(known)
    if unknown:
        raise ValueError(f'Unknown {cls.__name__} keys: {", ".join(sorted(unknown))}')
    defaults = cls()
    return cls(**{k: type(getattr(defaults, k))(v) for k, v in section.items()})
