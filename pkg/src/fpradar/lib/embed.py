"""
Node embeddings learned from time-respecting random walks.

A walk only follows edges whose first year is not earlier than the first year
of the edge it just crossed, preferring edges with high decayed weight. A
skip-gram model with negative sampling turns the walks into vectors.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Tuple
import numpy as np
import torch
from torch import nn
from torch.nn import functional as F
from .. import utils
from .features import decayed_weight
from .graph import aggregate_to, make_pair
from .utils.parallel_executor import map_in_parallel

logger = logging.getLogger(__name__)

BATCH_SIZE = 1024


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 20
    recency_bias: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError(f'walks_per_node must be >= 1, got {self.walks_per_node}')
        if self.walk_length < 2:
            raise ValueError(f'walk_length must be >= 2, got {self.walk_length}')
        if self.recency_bias < 0:
            raise ValueError(f'recency_bias must be >= 0, got {self.recency_bias}')


@dataclass
class NodeEmbedding:
    dims: int
    vectors: Dict[str, np.ndarray] = field(repr=False)
    missing: Tuple[str, ...] = ()

    def vector(self, keyword):
        if keyword in self.vectors:
            return self.vectors[keyword]
        return np.zeros(self.dims)

    def matrix(self, keywords):
        return np.vstack([self.vector(k) for k in keywords]) if keywords \
                else np.zeros((0, self.dims))


class TemporalWalker:
    def __init__(self, graph, year, cfg):
        self.cfg = cfg
        self.view = aggregate_to(graph, year)
        self.dw = decayed_weight(graph, year)
        self.neighbors = {n: sorted(adj) for n, adj in self.view.neighbors.items()}

    def __step(self, rng, current, last_edge, last_year):
        options, weights = [], []
        for n in self.neighbors[current]:
            edge = make_pair(current, n)
            if edge == last_edge:
                continue
            year = self.view.earliest_year(edge)
            if last_year is not None and year < last_year:
                continue
            options.append((n, edge, year))
            weights.append(self.dw.get(current, n) ** (1 + self.cfg.recency_bias))
        if not options:
            return None
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        probs = weights / total if total > 0 else np.full(len(options), 1 / len(options))
        return options[rng.choice(len(options), p=probs)]

    def walks_from(self, node):
        rng = np.random.default_rng(utils.derive_seed(self.cfg.seed, node))
        walks = []
        for _ in range(self.cfg.walks_per_node):
            walk = [node]
            last_edge, last_year = None, None
            while len(walk) < self.cfg.walk_length:
                step = self.__step(rng, walk[-1], last_edge, last_year)
                if step is None:
                    break
                n, last_edge, last_year = step
                walk.append(n)
            walks.append(walk)
        return walks


def generate_temporal_walks(graph, year, cfg, jobs=1):
    walker = TemporalWalker(graph, year, cfg)
    nodes = sorted(walker.view.nodes)
    per_node = map_in_parallel(walker.walks_from, nodes, jobs)
    walks = [w for walks in per_node for w in walks]
    logger.info('Generated %d walks over %d nodes for %d', len(walks), len(nodes), year)
    return walks


class SkipGram(nn.Module):
    def __init__(self, n_nodes, dims):
        super().__init__()
        self.center = nn.Embedding(n_nodes, dims)
        self.context = nn.Embedding(n_nodes, dims)

    def reset_parameters(self, generator):
        bound = 0.5 / self.center.embedding_dim
        with torch.no_grad():
            self.center.weight.uniform_(-bound, bound, generator=generator)
            self.context.weight.zero_()

    def forward(self, centers, contexts, negatives):
        u = self.center(centers)
        v = self.context(contexts)
        pos = F.logsigmoid((u * v).sum(dim=1))
        neg = F.logsigmoid(-torch.bmm(self.context(negatives), u.unsqueeze(2)).squeeze(2)).sum(dim=1)
        return -(pos + neg).mean()


def _context_pairs(walks, index, window):
    pairs = []
    for walk in walks:
        ids = [index[n] for n in walk]
        for i, center in enumerate(ids):
            for j in range(max(0, i - window), min(len(ids), i + window + 1)):
                if j != i:
                    pairs.append((center, ids[j]))
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def train_embeddings(walks, dims=64, epochs=5, seed=0, *, window=5, negatives=5,
                     learning_rate=0.01, nodes=None, workers=1):
    """
    Skip-gram with negative sampling over a symmetric context window.

    nodes optionally lists keywords that must get a vector; those absent from
    every walk get a zero vector and are reported in NodeEmbedding.missing.
    workers=1 is bit-for-bit reproducible for a fixed seed.
    """
    if not walks:
        raise ValueError('Cannot train embeddings without walks')
    vocab = sorted({n for walk in walks for n in walk})
    index = {n: i for i, n in enumerate(vocab)}
    pairs = _context_pairs(walks, index, window)

    counts = np.zeros(len(vocab))
    for walk in walks:
        for n in walk:
            counts[index[n]] += 1
    noise = torch.as_tensor(counts ** 0.75 / (counts ** 0.75).sum(), dtype=torch.float)

    threads = torch.get_num_threads()
    torch.set_num_threads(max(1, workers))
    try:
        generator = torch.Generator().manual_seed(seed)
        model = SkipGram(len(vocab), dims)
        model.reset_parameters(generator)
        if len(pairs):
            optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)
            data = torch.as_tensor(pairs)
            for epoch in range(epochs):
                order = torch.randperm(len(data), generator=generator)
                total = 0.0
                for start in range(0, len(data), BATCH_SIZE):
                    batch = data[order[start:start + BATCH_SIZE]]
                    neg = torch.multinomial(noise, len(batch) * negatives, replacement=True,
                                            generator=generator).view(len(batch), negatives)
                    optimizer.zero_grad()
                    loss = model(batch[:, 0], batch[:, 1], neg)
                    loss.backward()
                    optimizer.step()
                    total += loss.item() * len(batch)
                logger.debug('Epoch %d loss %.6f', epoch, total / len(data))
        weights = model.center.weight.detach().numpy().astype(np.float64)
    finally:
        torch.set_num_threads(threads)

    vectors = {n: weights[i].copy() for n, i in index.items()}
    missing = tuple(sorted(set(nodes or ()) - set(vectors)))
    if missing:
        logger.warning('%d nodes absent from all walks get zero vectors', len(missing))
        for n in missing:
            vectors[n] = np.zeros(dims)
    return NodeEmbedding(dims, vectors, missing)


def edge_embedding(u, v):
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f'Embedding dimension mismatch: {u.shape} vs {v.shape}')
    return (u - v) ** 2


def sidecar_path(path):
    return os.path.splitext(path)[0] + '.keywords.txt'


def dump_embedding(embedding, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    keywords = sorted(embedding.vectors)
    np.save(path, embedding.matrix(keywords))
    missing = set(embedding.missing)
    with open(sidecar_path(path), 'w', encoding='utf-8') as f:
        for k in keywords:
            f.write(f'{k}\tmissing\n' if k in missing else f'{k}\n')


def load_embedding(path):
    matrix = np.load(path)
    keywords, missing = [], []
    with open(sidecar_path(path), encoding='utf-8') as f:
        for line in f:
            name, *flag = line.rstrip('\n').split('\t')
            keywords.append(name)
            if flag:
                missing.append(name)
    dims = matrix.shape[1] if matrix.ndim == 2 else 0
    return NodeEmbedding(dims, {k: matrix[i] for i, k in enumerate(keywords)}, tuple(missing))
