"""Losses, Adam, and the train/validate/test loops with per-epoch timing."""

from __future__ import annotations

import copy
import dataclasses
import time

import numpy as np

from . import autodiff as ad
from .autodiff import Node, Tape
from .graphs import (
    EdgeSplit,
    Graph,
    graph_from_train_edges,
    normalized_adjacency,
    sample_negative_edges,
    split_nodes,
)
from .layers import (
    ClassificationHead,
    DecoderConfig,
    GraphModel,
    ModelConfig,
    RegressionHead,
    fermi_dirac_edge_scores,
)
from .metrics import classification_metrics, mean_absolute_error, roc_auc
from .precision import Precision

_CLAMP = 1e-12


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------


def lp_loss(pos_scores: Node, neg_scores: Node) -> Node:
    """Binary cross-entropy over edge probabilities:
    -mean(log pos) - mean(log(1 - neg))."""
    for s in (pos_scores, neg_scores):
        if np.any(s.data < 0.0) or np.any(s.data > 1.0):
            raise ValueError("scores must lie in [0, 1]")
    pos = ad.clamp(pos_scores, _CLAMP, 1.0 - _CLAMP)
    neg = ad.clamp(neg_scores, _CLAMP, 1.0 - _CLAMP)
    one = neg.tape.constant(1.0, mode=neg.mode)
    return -(ad.mean_all(ad.log(pos))) - ad.mean_all(ad.log(one - neg))


def nc_loss(logits: Node, labels) -> Node:
    """Mean softmax cross-entropy."""
    return ad.cross_entropy(logits, labels)


def gr_loss(pred: Node, target) -> Node:
    """Mean absolute error against scalar graph targets."""
    target = np.asarray(target, dtype=np.float64).reshape(-1, 1)
    diff = pred - pred.tape.constant(target, mode=pred.mode)
    return ad.mean_all(ad.relu(diff) + ad.relu(-diff))


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class OptimizerState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    step_count: int = 0
    m: dict = dataclasses.field(default_factory=dict)
    v: dict = dataclasses.field(default_factory=dict)


def adam_init(params: dict, lr: float = 0.01, beta1: float = 0.9,
              beta2: float = 0.999, eps_adam: float = 1e-8) -> OptimizerState:
    state = OptimizerState(lr=lr, beta1=beta1, beta2=beta2, eps_adam=eps_adam)
    for name, value in params.items():
        state.m[name] = np.zeros_like(np.asarray(value, dtype=np.float64))
        state.v[name] = np.zeros_like(state.m[name])
    return state


def adam_step(state: OptimizerState, params: dict, grads: dict) -> dict:
    """One bias-corrected update, computed in double.  Returns new params."""
    state.step_count += 1
    t = state.step_count
    out = {}
    for name, value in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != np.asarray(value).shape:
            raise ValueError(f"gradient shape mismatch for {name!r}")
        state.m[name] = state.beta1 * state.m[name] + (1 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1 - state.beta2) * g * g
        m_hat = state.m[name] / (1 - state.beta1**t)
        v_hat = state.v[name] / (1 - state.beta2**t)
        out[name] = np.asarray(value, dtype=np.float64) - state.lr * m_hat / (
            np.sqrt(v_hat) + state.eps_adam
        )
    return out


# ---------------------------------------------------------------------------
# training loops
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_metric: float
    wall_time_seconds: float


@dataclasses.dataclass
class TrainResult:
    params: dict
    records: list
    test_metrics: dict
    epoch_times: np.ndarray  # seconds, one per epoch (forward+backward+step only)


def _grads_of(nodes: dict) -> dict:
    return {name: node.grad for name, node in nodes.items()}


def _lp_eval(model: GraphModel, adj, features, pos, neg, decoder: DecoderConfig,
             mode: Precision) -> float:
    if len(pos) == 0 or len(neg) == 0:
        return float("nan")
    tape = Tape()
    z, _ = model.forward(tape, adj, features, mode)
    pos_s = fermi_dirac_edge_scores(z, pos, decoder.r, decoder.t).data.reshape(-1)
    neg_s = fermi_dirac_edge_scores(z, neg, decoder.r, decoder.t).data.reshape(-1)
    scores = np.concatenate([pos_s, neg_s])
    labels = np.concatenate([np.ones(len(pos_s)), np.zeros(len(neg_s))])
    return roc_auc(scores, labels)


def train_link_prediction(config: ModelConfig, graph: Graph, split: EdgeSplit,
                          seed: int = 0, epochs: int = 200, patience: int = 100,
                          lr: float = 0.01, decoder: DecoderConfig = DecoderConfig(),
                          mode: Precision = Precision.DOUBLE) -> TrainResult:
    """Fermi-Dirac link prediction.  Messages pass over the training edges
    only; training negatives are resampled each epoch while the validation
    and test negatives stay frozen in the split."""
    train_graph = graph_from_train_edges(graph, split)
    adj = normalized_adjacency(train_graph)
    model = GraphModel(config, graph.features.shape[1], seed=seed)
    opt = adam_init(model.parameters(), lr=lr)
    neg_rng = np.random.default_rng(seed + 101)
    drop_rng = np.random.default_rng(seed + 211)

    records: list[EpochRecord] = []
    times = []
    best_val, best_params, stale = -np.inf, copy.deepcopy(model.parameters()), 0
    for epoch in range(epochs):
        start = time.perf_counter()
        tape = Tape()
        z, nodes = model.forward(tape, adj, graph.features, mode, drop_rng)
        train_neg = sample_negative_edges(graph, len(split.train_pos), neg_rng)
        pos = fermi_dirac_edge_scores(z, split.train_pos, decoder.r, decoder.t)
        neg = fermi_dirac_edge_scores(z, train_neg, decoder.r, decoder.t)
        loss = lp_loss(pos, neg)
        tape.backward(loss)
        new_params = adam_step(opt, model.parameters(), _grads_of(nodes))
        model.set_parameters(new_params)
        elapsed = time.perf_counter() - start
        times.append(elapsed)

        val = _lp_eval(model, adj, graph.features, split.val_pos, split.val_neg,
                       decoder, mode)
        records.append(EpochRecord(epoch, loss.item(), val, elapsed))
        if np.isfinite(val):
            if val > best_val:
                best_val, best_params, stale = val, copy.deepcopy(new_params), 0
            else:
                stale += 1
                if stale >= patience:
                    break
        else:
            best_params = copy.deepcopy(new_params)

    model.set_parameters(best_params)
    test_auc = _lp_eval(model, adj, graph.features, split.test_pos, split.test_neg,
                        decoder, mode)
    return TrainResult(best_params, records, {"auc": test_auc}, np.asarray(times))


def train_node_classification(config: ModelConfig, graph: Graph,
                              node_split=None, seed: int = 0, epochs: int = 200,
                              patience: int = 100, lr: float = 0.01,
                              ratios=(0.85, 0.05, 0.10),
                              mode: Precision = Precision.DOUBLE) -> TrainResult:
    """Cross-entropy node classification over the full-graph adjacency with
    a Euclidean logistic-regression head."""
    if graph.labels is None:
        raise ValueError("node classification needs labels")
    if node_split is None:
        node_split = split_nodes(graph.n, ratios, seed)
    train_idx, val_idx, test_idx = node_split
    num_classes = int(graph.labels.max()) + 1
    adj = normalized_adjacency(graph)
    model = GraphModel(config, graph.features.shape[1], seed=seed)
    head = ClassificationHead(config.hidden_dim, num_classes, seed=seed + 1)
    all_params = {**model.parameters(), **head.parameters()}
    opt = adam_init(all_params, lr=lr)
    drop_rng = np.random.default_rng(seed + 211)

    def set_all(params):
        model.set_parameters(params)
        head.set_parameters(params)

    def predict():
        tape = Tape()
        z, _ = model.forward(tape, adj, graph.features, mode)
        logits, _ = head.forward(tape, z, mode)
        return logits.data.argmax(axis=1)

    records: list[EpochRecord] = []
    times = []
    best_val, best_params, stale = -np.inf, copy.deepcopy(all_params), 0
    for epoch in range(epochs):
        start = time.perf_counter()
        tape = Tape()
        z, nodes = model.forward(tape, adj, graph.features, mode, drop_rng)
        logits, head_nodes = head.forward(tape, z, mode)
        train_logits = ad.gather_rows(logits, train_idx)
        loss = nc_loss(train_logits, graph.labels[train_idx])
        tape.backward(loss)
        nodes.update(head_nodes)
        params = {**model.parameters(), **head.parameters()}
        new_params = adam_step(opt, params, _grads_of(nodes))
        set_all(new_params)
        elapsed = time.perf_counter() - start
        times.append(elapsed)

        preds = predict()
        val = (
            float(np.mean(preds[val_idx] == graph.labels[val_idx]))
            if len(val_idx)
            else float("nan")
        )
        records.append(EpochRecord(epoch, loss.item(), val, elapsed))
        if np.isfinite(val):
            if val > best_val:
                best_val, best_params, stale = val, copy.deepcopy(new_params), 0
            else:
                stale += 1
                if stale >= patience:
                    break
        else:
            best_params = copy.deepcopy(new_params)

    set_all(best_params)
    preds = predict()
    average = "binary" if num_classes == 2 else "macro"
    metrics = classification_metrics(preds[test_idx], graph.labels[test_idx], average)
    return TrainResult(best_params, records, metrics, np.asarray(times))


def _disjoint_union(graphs: list[Graph]):
    offsets = np.cumsum([0] + [g.n for g in graphs[:-1]])
    edges = np.concatenate(
        [g.edges + off for g, off in zip(graphs, offsets) if len(g.edges)]
    ) if any(len(g.edges) for g in graphs) else np.zeros((0, 2), dtype=np.int64)
    feats = np.concatenate([g.features for g in graphs])
    membership = np.concatenate(
        [np.full(g.n, i, dtype=np.int64) for i, g in enumerate(graphs)]
    )
    total = sum(g.n for g in graphs)
    return Graph(total, edges, feats), membership


def train_graph_regression(config: ModelConfig, graphs: list[Graph],
                           seed: int = 0, epochs: int = 200, patience: int = 100,
                           lr: float = 0.01, ratios=(0.7, 0.15, 0.15),
                           mode: Precision = Precision.DOUBLE) -> TrainResult:
    """Graph-level regression: encoder, median pooling over each graph's
    nodes, MLP readout, mean-absolute-error loss.  Graphs are batched as a
    disjoint union, so messages never cross graph boundaries."""
    targets = np.array([g.graph_target for g in graphs], dtype=np.float64)
    if np.any(~np.isfinite(targets)):
        raise ValueError("every graph needs a finite graph_target")
    union, membership = _disjoint_union(graphs)
    adj = normalized_adjacency(union)
    train_g, val_g, test_g = split_nodes(len(graphs), ratios, seed)
    model = GraphModel(config, union.features.shape[1], seed=seed)
    head = RegressionHead(config.hidden_dim, config.hidden_dim, seed=seed + 1)
    all_params = {**model.parameters(), **head.parameters()}
    opt = adam_init(all_params, lr=lr)

    def set_all(params):
        model.set_parameters(params)
        head.set_parameters(params)

    def predictions():
        tape = Tape()
        z, _ = model.forward(tape, adj, union.features, mode)
        pred, _ = head.forward(tape, z, membership, mode)
        return pred.data.reshape(-1)

    records: list[EpochRecord] = []
    times = []
    best_val, best_params, stale = np.inf, copy.deepcopy(all_params), 0
    for epoch in range(epochs):
        start = time.perf_counter()
        tape = Tape()
        z, nodes = model.forward(tape, adj, union.features, mode)
        pred, head_nodes = head.forward(tape, z, membership, mode)
        train_pred = ad.gather_rows(pred, train_g)
        loss = gr_loss(train_pred, targets[train_g])
        tape.backward(loss)
        nodes.update(head_nodes)
        params = {**model.parameters(), **head.parameters()}
        new_params = adam_step(opt, params, _grads_of(nodes))
        set_all(new_params)
        elapsed = time.perf_counter() - start
        times.append(elapsed)

        preds = predictions()
        val = (
            mean_absolute_error(preds[val_g], targets[val_g])
            if len(val_g)
            else float("nan")
        )
        records.append(EpochRecord(epoch, loss.item(), val, elapsed))
        if np.isfinite(val):
            if val < best_val:
                best_val, best_params, stale = val, copy.deepcopy(new_params), 0
            else:
                stale += 1
                if stale >= patience:
                    break
        else:
            best_params = copy.deepcopy(new_params)

    set_all(best_params)
    preds = predictions()
    metrics = {"mae": mean_absolute_error(preds[test_g], targets[test_g])}
    return TrainResult(best_params, records, metrics, np.asarray(times))


def train_model(config: ModelConfig, graph: Graph, split, task: str = "lp",
                seed: int = 0, epochs: int = 200, patience: int = 100,
                lr: float = 0.01, decoder: DecoderConfig = DecoderConfig(),
                mode: Precision = Precision.DOUBLE) -> TrainResult:
    """Dispatch on task.  Deterministic under (config, seed): identical
    arguments give identical parameter trajectories."""
    if task == "lp":
        return train_link_prediction(config, graph, split, seed, epochs,
                                     patience, lr, decoder, mode)
    if task == "nc":
        return train_node_classification(config, graph, split, seed, epochs,
                                         patience, lr, mode=mode)
    raise ValueError(f"unknown task {task!r} (use train_graph_regression for gr)")


# ---------------------------------------------------------------------------
# benchmark harness
# ---------------------------------------------------------------------------

WARMUP_EPOCHS = 5


@dataclasses.dataclass
class BenchResult:
    kind: str
    times: np.ndarray  # post-warmup per-epoch seconds, all runs concatenated
    mean: float
    se: float


def benchmark_models(kinds, graph: Graph, split: EdgeSplit, seed: int = 0,
                     epochs: int = 50, runs: int = 3,
                     config_base: ModelConfig | None = None,
                     decoder: DecoderConfig = DecoderConfig(),
                     lr: float = 0.01) -> list[BenchResult]:
    """Identical graph/split/seed across model kinds; per-epoch wall time is
    measured around forward+backward+step only and the first WARMUP_EPOCHS
    epochs of each run are discarded.  Runs are sequential on purpose to
    keep timings comparable."""
    if epochs <= WARMUP_EPOCHS:
        raise ValueError(f"need more than {WARMUP_EPOCHS} epochs to benchmark")
    results = []
    for kind in kinds:
        base = config_base or ModelConfig()
        config = dataclasses.replace(base, layer_kind=kind)
        chunks = []
        for run in range(runs):
            res = train_link_prediction(
                config, graph, split, seed=seed + run, epochs=epochs,
                patience=epochs + 1, lr=lr, decoder=decoder,
            )
            chunks.append(res.epoch_times[WARMUP_EPOCHS:])
        times = np.concatenate(chunks)
        mean = float(times.mean())
        se = float(times.std(ddof=1) / np.sqrt(len(times)))
        results.append(BenchResult(kind, times, mean, se))
    return results


def speedup_with_ci(baseline: BenchResult, subject: BenchResult, z: float = 1.96):
    """Ratio of mean epoch times with a delta-method confidence interval."""
    ratio = baseline.mean / subject.mean
    rel = np.sqrt((baseline.se / baseline.mean) ** 2 + (subject.se / subject.mean) ** 2)
    half = z * ratio * float(rel)
    return ratio, ratio - half, ratio + half
