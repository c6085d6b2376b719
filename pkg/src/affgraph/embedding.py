"""Graph embeddings: WL rooted-subgraph tokens and negative-sampling training."""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

_HASH_ABOVE = 4096  # token strings longer than this are digest-compressed


def _compress(token: str) -> str:
    if len(token) <= _HASH_ABOVE:
        return token
    return "h:" + hashlib.sha256(token.encode("utf-8")).hexdigest()


def wl_tokens(labels: list[str], edges: list[tuple[int, int]], depth: int) -> Counter:
    """Multiset of rooted-subgraph tokens over WL iterations 0..depth.

    Iteration 0 tokens are the raw vertex labels; each next iteration
    concatenates a vertex's token with the sorted tokens of its neighbors.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = len(labels)
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    current = [_compress(t) for t in labels]
    tokens: Counter = Counter(current)
    for _ in range(depth):
        # compress each round so label length stays bounded across iterations
        current = [
            _compress(
                current[v] + "(" + ",".join(sorted(current[u] for u in adj[v])) + ")"
            )
            for v in range(n)
        ]
        tokens.update(current)
    return tokens


@dataclass
class Vocabulary:
    index: dict[str, int] = field(default_factory=dict)
    counts: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.index)

    @property
    def tokens(self) -> list[str]:
        inverse = [""] * len(self.index)
        for tok, i in self.index.items():
            inverse[i] = tok
        return inverse


def build_vocabulary(corpus_tokens: list[Counter]) -> Vocabulary:
    """Index every distinct token across the corpus, recording counts."""
    if not corpus_tokens:
        raise ValueError("empty corpus")
    vocab = Vocabulary()
    for tokens in corpus_tokens:
        for tok, count in sorted(tokens.items()):
            if tok not in vocab.index:
                vocab.index[tok] = len(vocab.counts)
                vocab.counts.append(0)
            vocab.counts[vocab.index[tok]] += count
    return vocab


@dataclass
class TrainConfig:
    embedding_dim: int = 128
    learning_rate: float = 0.5
    batch_size: int = 512
    wl_depth: int = 14
    negatives: int = 5
    epochs: int = 200
    seed: int = 0
    full_softmax: bool = False
    min_lr_factor: float = 1e-4

    def validate(self) -> None:
        if self.embedding_dim <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise ValueError("embedding_dim, batch_size, epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.wl_depth < 0:
            raise ValueError("wl_depth must be >= 0")
        if self.negatives <= 0 and not self.full_softmax:
            raise ValueError("negatives must be positive")


class DivergenceError(RuntimeError):
    """Raised when the training loss blows up past the divergence guard."""


@dataclass
class EmbeddingTable:
    graph_ids: list[str]
    vectors: np.ndarray  # (n_graphs, dim)
    loss_history: list[float] = field(default_factory=list)

    def vector(self, graph_id: str) -> np.ndarray:
        return self.vectors[self.graph_ids.index(graph_id)]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def train(
    corpus_ids: list[str],
    corpus_tokens: list[Counter],
    vocab: Vocabulary,
    cfg: TrainConfig,
) -> EmbeddingTable:
    """Train per-graph vectors so each graph predicts its own WL tokens.

    Negative-sampling surrogate of the softmax output layer by default;
    ``full_softmax`` trains the exact softmax for small vocabularies.
    Deterministic under a fixed seed.
    """
    cfg.validate()
    n_graphs = len(corpus_ids)
    n_vocab = len(vocab)
    if n_graphs == 0 or n_vocab == 0:
        raise ValueError("empty corpus or vocabulary")
    rng = np.random.default_rng(cfg.seed)
    dim = cfg.embedding_dim
    graph_vecs = (rng.random((n_graphs, dim)) - 0.5) / dim
    token_vecs = np.zeros((n_vocab, dim))

    pairs = np.array(
        [
            (gi, vocab.index[tok])
            for gi, tokens in enumerate(corpus_tokens)
            for tok, count in sorted(tokens.items())
            for _ in range(count)
        ],
        dtype=np.int64,
    )
    noise = np.asarray(vocab.counts, dtype=float) ** 0.75
    noise /= noise.sum()

    total_steps = cfg.epochs * max(1, (len(pairs) + cfg.batch_size - 1) // cfg.batch_size)
    step = 0
    initial_loss = None
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pairs))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(pairs), cfg.batch_size):
            batch = pairs[order[start : start + cfg.batch_size]]
            frac = step / max(1, total_steps)
            lr = cfg.learning_rate * max(cfg.min_lr_factor, 1.0 - frac)
            step += 1
            g_idx = batch[:, 0]
            t_idx = batch[:, 1]
            g = graph_vecs[g_idx]
            if cfg.full_softmax:
                logits = g @ token_vecs.T
                logits -= logits.max(axis=1, keepdims=True)
                probs = np.exp(logits)
                probs /= probs.sum(axis=1, keepdims=True)
                loss = -np.mean(np.log(probs[np.arange(len(batch)), t_idx] + 1e-12))
                grad_logits = probs
                grad_logits[np.arange(len(batch)), t_idx] -= 1.0
                grad_g = grad_logits @ token_vecs
                grad_tokens = grad_logits.T @ g
                token_vecs -= lr * grad_tokens / len(batch)
                np.add.at(graph_vecs, g_idx, -lr * grad_g / len(batch))
            else:
                neg_idx = rng.choice(n_vocab, size=(len(batch), cfg.negatives), p=noise)
                t = token_vecs[t_idx]
                pos_score = _sigmoid(np.einsum("bd,bd->b", g, t))
                neg = token_vecs[neg_idx]  # (b, k, d)
                neg_score = _sigmoid(np.einsum("bd,bkd->bk", g, neg))
                loss = float(
                    -np.mean(np.log(pos_score + 1e-12)
                             + np.sum(np.log(1.0 - neg_score + 1e-12), axis=1))
                )
                grad_pos = (pos_score - 1.0)[:, None]  # d/d(g.t)
                grad_g = grad_pos * t + np.einsum("bk,bkd->bd", neg_score, neg)
                grad_t = grad_pos * g
                grad_neg = neg_score[:, :, None] * g[:, None, :]
                # batch SGD: average the accumulated per-pair gradients
                scale = lr / len(batch)
                np.add.at(graph_vecs, g_idx, -scale * grad_g)
                np.add.at(token_vecs, t_idx, -scale * grad_t)
                np.add.at(token_vecs, neg_idx.ravel(),
                          -scale * grad_neg.reshape(-1, dim))
            epoch_loss += float(loss)
            n_batches += 1
        mean_loss = epoch_loss / max(1, n_batches)
        history.append(mean_loss)
        if not np.isfinite(mean_loss):
            raise DivergenceError(
                f"epoch {epoch}: non-finite mean loss; lower the learning rate"
            )
        if initial_loss is None:
            initial_loss = mean_loss
        elif mean_loss > initial_loss * 10:
            raise DivergenceError(
                f"epoch {epoch}: mean loss {mean_loss:.4f} exceeds 10x initial "
                f"{initial_loss:.4f}; lower the learning rate"
            )
    return EmbeddingTable(graph_ids=list(corpus_ids), vectors=graph_vecs,
                          loss_history=history)


def save_embeddings(table: EmbeddingTable, path: str) -> None:
    """Line-delimited export: graph id, dimension, decimal vector entries."""
    with open(path, "w", encoding="utf-8") as fh:
        for gid, vec in zip(table.graph_ids, table.vectors):
            values = " ".join(repr(float(x)) for x in vec)
            fh.write(f"{gid}\t{len(vec)}\t{values}\n")


def load_embeddings(path: str) -> EmbeddingTable:
    ids: list[str] = []
    rows: list[np.ndarray] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            gid, dim, values = line.rstrip("\n").split("\t")
            vec = np.array([float(x) for x in values.split()])
            if len(vec) != int(dim):
                raise ValueError(f"{path}: vector length mismatch for {gid}")
            ids.append(gid)
            rows.append(vec)
    return EmbeddingTable(graph_ids=ids, vectors=np.vstack(rows))


def save_vocabulary(vocab: Vocabulary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok, idx in sorted(vocab.index.items(), key=lambda kv: kv[1]):
            fh.write(f"{idx}\t{vocab.counts[idx]}\t{tok}\n")
