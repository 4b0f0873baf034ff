"""Model zoo: simplified hyperbolic GCN layer, the redundant-map hyperbolic
baseline it streamlines, a vanilla GCN layer, decoder heads, and graph-level
pooling.

The simplified layer keeps one exponential/Möbius/logarithm round per layer
and aggregates in the tangent space at the origin:

    H_out = act( A_tilde . log0( exp0(H W^T) (+)_c exp0(b) ) )

The baseline layer implements the message-passing rule literally, including
the exp/log pairs that cancel in exact arithmetic (ball-valued hidden state,
re-exponentiation after aggregation and around the activation).  Keeping
both makes the cost and the low-precision accuracy gap measurable.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import autodiff as ad
from .autodiff import Matrix, Node, Tape
from .errors import ShapeError
from .geometry import (
    PoincarePoint,
    default_projection_eps,
    exp0_array,
    mobius_add_array,
    project_array,
)
from .precision import Precision

LAYER_KINDS = ("shgcn", "hgcn-agg0", "gcn")
ACTIVATIONS = ("relu", "identity")


def softplus_float(x: float) -> float:
    return math.log1p(math.exp(-abs(x))) + max(x, 0.0)


def inverse_softplus(c: float) -> float:
    if c <= 0:
        raise ValueError("curvature must be positive")
    return math.log(math.expm1(c))


@dataclasses.dataclass
class LayerParams:
    """One layer's trainables: weight (d_out, d_in), Euclidean bias (d_out,),
    and a raw curvature parameter with c = softplus(theta_c) > 0."""

    weight: np.ndarray
    bias: np.ndarray
    theta_c: float

    @property
    def curvature(self) -> float:
        return softplus_float(self.theta_c)


@dataclasses.dataclass(frozen=True)
class ModelConfig:
    layer_kind: str = "shgcn"
    num_layers: int = 2
    hidden_dim: int = 16
    activation: str = "relu"
    init_curvature: float = 1.0
    dropout: float = 0.0

    def __post_init__(self):
        if self.layer_kind not in LAYER_KINDS:
            raise ValueError(f"layer_kind must be one of {LAYER_KINDS}")
        if self.num_layers < 1 or self.hidden_dim < 1:
            raise ValueError("need num_layers >= 1 and hidden_dim >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclasses.dataclass(frozen=True)
class DecoderConfig:
    r: float = 2.0
    t: float = 1.0
    task: str = "link_prediction"

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("Fermi-Dirac temperature t must be positive")
        if self.task not in ("link_prediction", "node_classification", "graph_regression"):
            raise ValueError(f"unknown task {self.task!r}")


# ---------------------------------------------------------------------------
# row-wise hyperbolic tape ops
# ---------------------------------------------------------------------------


def exp0_rows(u: Node, c: Node) -> Node:
    """Origin exponential map applied to every row; c is a (1,1) node."""
    arg = ad.row_norm(u) * ad.sqrt(c)
    return u * ad.tanhc(arg)


def log0_rows(y: Node, c: Node) -> Node:
    """Origin logarithm applied to every row; rows must be inside the ball."""
    arg = ad.row_norm(y) * ad.sqrt(c)
    return y * ad.artanhc(arg)


def project_rows(x: Node, c: Node, eps: float) -> Node:
    """Clip rows with sqrt(c)||x|| >= 1 - eps back to norm (1-eps)/sqrt(c)."""
    norms = ad.row_norm(x)
    cap = x.tape.constant(1.0 - eps, mode=x.mode) / ad.sqrt(c)
    scale = ad.minimum(x.tape.constant(1.0, mode=x.mode), cap / norms)
    return x * scale


def mobius_add_rows(x: Node, y: Node, c: Node) -> Node:
    """Row-wise gyrovector addition; y may be a single broadcast row."""
    xy = ad.row_sum(x * y)
    x2 = ad.row_sum(x * x)
    y2 = ad.row_sum(y * y)
    one = x.tape.constant(1.0, mode=x.mode)
    two_c_xy = 2.0 * (c * xy)
    ax = one + two_c_xy + c * y2
    ay = one - c * x2
    num = ax * x + ay * y
    den = one + two_c_xy + (c * c) * (x2 * y2)
    return num / den


# ---------------------------------------------------------------------------
# layer forwards
# ---------------------------------------------------------------------------


def _activate(x: Node, activation: str) -> Node:
    if activation == "relu":
        return ad.relu(x)
    if activation == "identity":
        return x
    raise ValueError(f"unknown activation {activation!r}")


def _hyperbolic_transform(h: Node, w: Node, b: Node, c: Node, eps: float) -> Node:
    """exp0(h W^T) (+)_c exp0(b), projected after every map."""
    u = h @ w.T
    p = project_rows(exp0_rows(u, c), c, eps)
    bp = project_rows(exp0_rows(b, c), c, eps)
    return project_rows(mobius_add_rows(p, bp, c), c, eps)


def shgcn_layer_forward(h: Node, adj, w: Node, b: Node, theta_c: Node,
                        activation: str = "relu", eps: float | None = None) -> Node:
    """Simplified hyperbolic layer: Euclidean rows in, Euclidean rows out,
    one hyperbolic transform sandwiched between them."""
    if eps is None:
        eps = default_projection_eps(h.mode)
    c = ad.softplus(theta_c)
    m = _hyperbolic_transform(h, w, b, c, eps)
    t = log0_rows(m, c)
    s = ad.sparse_matmul(_csr(adj), t)
    return _activate(s, activation)


def hgcn_agg0_layer_forward(h_ball: Node, adj, w: Node, b: Node, theta_c: Node,
                            theta_c_out: Node, activation: str = "relu",
                            eps: float | None = None) -> Node:
    """Baseline hyperbolic layer, evaluated literally: ball rows in, ball
    rows out, with the redundant exp/log pairs and projections retained.
    In exact arithmetic those pairs are identities; in low precision they
    are where the collapse happens."""
    if eps is None:
        eps = default_projection_eps(h_ball.mode)
    c_in = ad.softplus(theta_c)
    c_out = ad.softplus(theta_c_out)
    t0 = log0_rows(h_ball, c_in)
    m = _hyperbolic_transform(t0, w, b, c_in, eps)
    t_agg = log0_rows(m, c_in)
    s = ad.sparse_matmul(_csr(adj), t_agg)
    y = project_rows(exp0_rows(s, c_in), c_in, eps)
    z = log0_rows(y, c_in)
    a = _activate(z, activation)
    return project_rows(exp0_rows(a, c_out), c_out, eps)


def gcn_layer_forward(h: Node, adj, w: Node, b: Node,
                      activation: str = "relu") -> Node:
    """sigma( A_tilde (H W^T + 1 b^T) )."""
    s = ad.sparse_matmul(_csr(adj), h @ w.T + b)
    return _activate(s, activation)


def ballify_rows(x: Node, theta_c: Node, eps: float | None = None) -> Node:
    """Map Euclidean feature rows onto the ball (layer-0 input of the
    baseline model)."""
    if eps is None:
        eps = default_projection_eps(x.mode)
    c = ad.softplus(theta_c)
    return project_rows(exp0_rows(x, c), c, eps)


def _csr(adj):
    return adj.matrix if hasattr(adj, "matrix") else adj


# ---------------------------------------------------------------------------
# vector-level feature transform (audit path against the geometry module)
# ---------------------------------------------------------------------------


def feature_transform(x, params: LayerParams, mode: Precision = Precision.DOUBLE) -> PoincarePoint:
    """exp0(W x) (+)_c exp0(b) for a single feature vector."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if params.weight.shape[1] != x.size:
        raise ShapeError(
            f"weight expects dimension {params.weight.shape[1]}, got {x.size}"
        )
    c = params.curvature
    eps = default_projection_eps(mode)
    p = project_array(exp0_array(params.weight @ x, c, mode), c, eps, mode)
    bp = project_array(exp0_array(params.bias, c, mode), c, eps, mode)
    out = project_array(mobius_add_array(p, bp, c, mode), c, eps, mode)
    return PoincarePoint(out, c)


# ---------------------------------------------------------------------------
# decoder heads
# ---------------------------------------------------------------------------


def fermi_dirac_score(zi, zj, r: float = 2.0, t: float = 1.0) -> float:
    """Edge probability 1 / (exp((||zi - zj||^2 - r)/t) + 1).

    The distance is the plain squared Euclidean one: embeddings live in
    Euclidean space by the time they reach the decoder.
    """
    if t <= 0:
        raise ValueError("temperature t must be positive")
    zi = np.asarray(zi, dtype=np.float64).reshape(-1)
    zj = np.asarray(zj, dtype=np.float64).reshape(-1)
    if zi.shape != zj.shape:
        raise ShapeError(f"shape mismatch: {zi.shape} vs {zj.shape}")
    d2 = float(np.sum((zi - zj) ** 2))
    return float(1.0 / (1.0 + math.exp(min((d2 - r) / t, 700.0))))


def fermi_dirac_edge_scores(z: Node, pairs, r: float = 2.0, t: float = 1.0) -> Node:
    """Tape version: probabilities for a (m, 2) array of node-index pairs."""
    pairs = np.asarray(pairs, dtype=np.intp)
    zi = ad.gather_rows(z, pairs[:, 0])
    zj = ad.gather_rows(z, pairs[:, 1])
    diff = zi - zj
    d2 = ad.row_sum(diff * diff)
    return ad.sigmoid((r - d2) * (1.0 / t))


def nc_head_forward(h: Node, wc: Node, bc: Node) -> Node:
    """Class logits H Wc^T + bc (softmax lives inside the loss)."""
    return h @ wc.T + bc


def median_pool(h: Node, membership) -> Node:
    """Per-graph, per-dimension median of node rows."""
    return ad.median_pool(h, membership)


def mlp_readout(pooled: Node, w1: Node, b1: Node, w2: Node, b2: Node) -> Node:
    """Two-layer readout mapping pooled graph vectors to scalar predictions."""
    hidden = ad.relu(pooled @ w1.T + b1)
    return hidden @ w2.T + b2


# ---------------------------------------------------------------------------
# parameter containers / full models
# ---------------------------------------------------------------------------


def _init_layer(rng, d_in: int, d_out: int, init_curvature: float) -> LayerParams:
    bound = 1.0 / math.sqrt(d_in)
    weight = rng.uniform(-bound, bound, size=(d_out, d_in))
    return LayerParams(weight, np.zeros(d_out), inverse_softplus(init_curvature))


class GraphModel:
    """A stack of layers of one kind plus its trainable state.

    Parameters live as plain float64 arrays; each forward pass re-registers
    them on a fresh tape, so one training step builds and consumes one tape.
    """

    def __init__(self, config: ModelConfig, in_dim: int, seed: int = 0):
        self.config = config
        self.in_dim = in_dim
        rng = np.random.default_rng(seed)
        dims = [in_dim] + [config.hidden_dim] * config.num_layers
        self.layers = [
            _init_layer(rng, dims[i], dims[i + 1], config.init_curvature)
            for i in range(config.num_layers)
        ]
        # the baseline model needs curvatures at both ends of the stack:
        # one for mapping the input onto the ball (consumed as each layer's
        # input curvature) and one closing the final activation map.
        self.theta_c_out = (
            inverse_softplus(config.init_curvature)
            if config.layer_kind == "hgcn-agg0"
            else None
        )

    # -- parameter plumbing ---------------------------------------------
    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            out[f"w{i}"] = layer.weight
            out[f"b{i}"] = layer.bias.reshape(1, -1)
            out[f"c{i}"] = np.array([[layer.theta_c]])
        if self.theta_c_out is not None:
            out["c_out"] = np.array([[self.theta_c_out]])
        return out

    def set_parameters(self, params: dict[str, np.ndarray]) -> None:
        for i, layer in enumerate(self.layers):
            layer.weight = np.asarray(params[f"w{i}"], dtype=np.float64)
            layer.bias = np.asarray(params[f"b{i}"], dtype=np.float64).reshape(-1)
            layer.theta_c = float(np.asarray(params[f"c{i}"]).reshape(()))
        if self.theta_c_out is not None:
            self.theta_c_out = float(np.asarray(params["c_out"]).reshape(()))

    def _register(self, tape: Tape, mode: Precision) -> dict[str, Node]:
        return {
            name: tape.variable(Matrix(value, mode))
            for name, value in self.parameters().items()
        }

    # -- forward ----------------------------------------------------------
    def forward(self, tape: Tape, adj, features, mode: Precision = Precision.DOUBLE,
                dropout_rng: np.random.Generator | None = None):
        """Euclidean embeddings (n, hidden_dim) plus the parameter node map
        (for reading gradients after backward)."""
        nodes = self._register(tape, mode)
        h = tape.variable(Matrix(features, mode))
        kind = self.config.layer_kind
        n_layers = self.config.num_layers

        def act(i):
            return self.config.activation if i < n_layers - 1 else "identity"

        def drop(x):
            if dropout_rng is not None and self.config.dropout > 0:
                return ad.dropout(x, self.config.dropout, dropout_rng)
            return x

        if kind == "gcn":
            for i in range(n_layers):
                h = gcn_layer_forward(drop(h), adj, nodes[f"w{i}"], nodes[f"b{i}"], act(i))
        elif kind == "shgcn":
            for i in range(n_layers):
                h = shgcn_layer_forward(
                    drop(h), adj, nodes[f"w{i}"], nodes[f"b{i}"], nodes[f"c{i}"], act(i)
                )
        else:  # hgcn-agg0
            h = ballify_rows(drop(h), nodes["c0"])
            for i in range(n_layers):
                theta_next = nodes[f"c{i + 1}"] if i + 1 < n_layers else nodes["c_out"]
                h = hgcn_agg0_layer_forward(
                    h, adj, nodes[f"w{i}"], nodes[f"b{i}"], nodes[f"c{i}"],
                    theta_next, act(i),
                )
            # decoders consume Euclidean rows: map the ball output back
            h = log0_rows(h, ad.softplus(nodes["c_out"]))
        return h, nodes


class ClassificationHead:
    """Euclidean multinomial logistic regression on the embeddings."""

    def __init__(self, in_dim: int, num_classes: int, seed: int = 0):
        rng = np.random.default_rng(seed)
        bound = 1.0 / math.sqrt(in_dim)
        self.weight = rng.uniform(-bound, bound, size=(num_classes, in_dim))
        self.bias = np.zeros(num_classes)

    def parameters(self) -> dict[str, np.ndarray]:
        return {"wc": self.weight, "bc": self.bias.reshape(1, -1)}

    def set_parameters(self, params) -> None:
        self.weight = np.asarray(params["wc"], dtype=np.float64)
        self.bias = np.asarray(params["bc"], dtype=np.float64).reshape(-1)

    def forward(self, tape: Tape, h: Node, mode: Precision = Precision.DOUBLE):
        wc = tape.variable(Matrix(self.weight, mode))
        bc = tape.variable(Matrix(self.bias, mode))
        return nc_head_forward(h, wc, bc), {"wc": wc, "bc": bc}


class RegressionHead:
    """Median pooling followed by a small MLP readout."""

    def __init__(self, in_dim: int, hidden: int = 16, seed: int = 0):
        rng = np.random.default_rng(seed)
        b1 = 1.0 / math.sqrt(in_dim)
        b2 = 1.0 / math.sqrt(hidden)
        self.w1 = rng.uniform(-b1, b1, size=(hidden, in_dim))
        self.b1 = np.zeros(hidden)
        self.w2 = rng.uniform(-b2, b2, size=(1, hidden))
        self.b2 = np.zeros(1)

    def parameters(self) -> dict[str, np.ndarray]:
        return {"r_w1": self.w1, "r_b1": self.b1.reshape(1, -1),
                "r_w2": self.w2, "r_b2": self.b2.reshape(1, -1)}

    def set_parameters(self, params) -> None:
        self.w1 = np.asarray(params["r_w1"], dtype=np.float64)
        self.b1 = np.asarray(params["r_b1"], dtype=np.float64).reshape(-1)
        self.w2 = np.asarray(params["r_w2"], dtype=np.float64)
        self.b2 = np.asarray(params["r_b2"], dtype=np.float64).reshape(-1)

    def forward(self, tape: Tape, h: Node, membership, mode: Precision = Precision.DOUBLE):
        pooled = median_pool(h, membership)
        nodes = {
            name: tape.variable(Matrix(value, mode))
            for name, value in self.parameters().items()
        }
        pred = mlp_readout(pooled, nodes["r_w1"], nodes["r_b1"], nodes["r_w2"], nodes["r_b2"])
        return pred, nodes
