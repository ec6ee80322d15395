"""Per-edge Q-value network: jointly trained node embeddings, a single-head
graph-attention node encoder over live 1-hop neighborhoods, a node MLP that
mixes in degrees and the edge-kept ratio, a symmetric edge encoder, and a
scalar value head.

Every edge in a candidate subgraph runs through the same network, so the
subgraph length is not fixed: any number of candidate edges can be scored.
"""

import json

import numpy as np

from . import nnet
from .errors import DeadEdgeError, PruneRLError, ShapeError
from .nnet import Linear, Tensor

ATTENTION_SLOPE = 0.2  # leaky slope inside attention scoring
HIDDEN_SLOPE = 0.01  # leaky slope in the encoder MLPs


class QModel:
    """Q-value function over candidate prune edges of one fixed graph.

    The embedding table is per-node, so a trained model is tied to the graph
    it was trained on (transductive).
    """

    def __init__(self, node_count, directed=False, emb_dim=64, hidden_dim=128,
                 rng=None, emb_scale=0.1):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.node_count = node_count
        self.directed = directed
        self.emb_dim = emb_dim
        self.hidden_dim = hidden_dim
        deg_dims = 2 if directed else 1

        self.embeddings = Tensor(
            rng.uniform(-emb_scale, emb_scale, size=(node_count, emb_dim)),
            name="embeddings",
        )
        self.gat_proj = Linear(emb_dim, emb_dim, rng, bias=False, name="gat_proj")
        self.gat_score = Linear(2 * emb_dim, 1, rng, name="gat_score")
        self.node_fc1 = Linear(emb_dim + deg_dims + 1, hidden_dim, rng, name="node_fc1")
        self.node_fc2 = Linear(hidden_dim, hidden_dim, rng, name="node_fc2")
        in_edge = hidden_dim if not directed else 2 * hidden_dim
        self.edge_fc1 = Linear(in_edge, hidden_dim, rng, name="edge_fc1")
        self.edge_fc2 = Linear(hidden_dim, hidden_dim, rng, name="edge_fc2")
        self.head = Linear(hidden_dim, 1, rng, name="head")

    # -------------------------------------------------------------- parameters

    def parameters(self):
        out = [self.embeddings]
        for layer in (self.gat_proj, self.gat_score, self.node_fc1,
                      self.node_fc2, self.edge_fc1, self.edge_fc2, self.head):
            out.extend(layer.parameters())
        return out

    def param_names(self):
        return [p.name for p in self.parameters()]

    def copy_from(self, other):
        for dst, src in zip(self.parameters(), other.parameters()):
            dst.data = src.data.copy()

    def soft_update_from(self, policy, rate):
        """Blend this model's parameters toward the policy's by `rate`."""
        for dst, src in zip(self.parameters(), policy.parameters()):
            dst.data = (1.0 - rate) * dst.data + rate * src.data

    # ------------------------------------------------------------------ layers

    def gat_node_encode(self, neighborhoods, nodes):
        """Attention-weighted 1-hop aggregation for the given nodes.

        `neighborhoods` maps node id -> iterable of neighbor ids (a Graph's
        live adjacency or a CandidateSubgraph snapshot). Each neighborhood is
        extended with the node itself, so isolated nodes attend only to
        themselves. Returns a Tensor of shape (len(nodes), emb_dim) aligned
        with `nodes`.
        """
        centers = []
        nbrs = []
        segments = []
        for i, n in enumerate(nodes):
            hood = [n] + sorted(neighborhoods[n])
            centers.extend([n] * len(hood))
            nbrs.extend(hood)
            segments.extend([i] * len(hood))
        proj_centers = self.gat_proj(nnet.embed_lookup(self.embeddings, centers))
        proj_nbrs = self.gat_proj(nnet.embed_lookup(self.embeddings, nbrs))
        scores = self.gat_score(nnet.concat([proj_centers, proj_nbrs], axis=1))
        scores = nnet.leaky_relu(nnet.reshape(scores, (-1,)), ATTENTION_SLOPE)
        weights = nnet.segment_softmax(scores, segments, len(nodes))
        weighted = nnet.mul(nnet.reshape(weights, (-1, 1)), proj_nbrs)
        return nnet.segment_sum(weighted, segments, len(nodes))

    def _encode_nodes(self, neighborhoods, nodes, node_degrees, edge_ratio):
        gat_out = self.gat_node_encode(neighborhoods, nodes)
        if self.directed:
            degs = np.array([node_degrees[n] for n in nodes], dtype=np.float64)
        else:
            degs = np.array([[node_degrees[n]] for n in nodes], dtype=np.float64)
        degs = degs / max(1, self.node_count - 1)  # feature scaling only
        ratio = np.full((len(nodes), 1), edge_ratio)
        x = nnet.concat([gat_out, Tensor(degs), Tensor(ratio)], axis=1)
        h = nnet.leaky_relu(self.node_fc1(x), HIDDEN_SLOPE)
        return nnet.leaky_relu(self.node_fc2(h), HIDDEN_SLOPE)

    def q_forward(self, sub, require_live_in=None):
        """Q-value per candidate edge; Tensor of shape (len(sub),).

        Neighborhoods, degrees, and the edge ratio come from the subgraph's
        snapshot, so replayed states stay evaluable after further pruning.
        Pass a graph as `require_live_in` to reject stale snapshots (acting
        and evaluation paths do; replay training does not).
        """
        if len(sub) == 0:
            raise PruneRLError("q_forward needs a nonempty candidate subgraph")
        if require_live_in is not None:
            for e in sub.edges:
                if not require_live_in.is_alive(e.eid):
                    raise DeadEdgeError(f"stale candidate edge {e}")
        nodes = sorted({n for e in sub.edges for n in (e.u, e.v)})
        pos = {n: i for i, n in enumerate(nodes)}
        enc = self._encode_nodes(sub.neighborhoods, nodes, sub.node_degrees, sub.edge_ratio)
        u_idx = [pos[e.u] for e in sub.edges]
        v_idx = [pos[e.v] for e in sub.edges]
        enc_u = nnet.gather_rows(enc, u_idx)
        enc_v = nnet.gather_rows(enc, v_idx)
        if self.directed:
            pair = nnet.concat([enc_u, enc_v], axis=1)
        else:
            pair = nnet.add(enc_u, enc_v)  # order-insensitive: Q(u,v) = Q(v,u)
        h = nnet.leaky_relu(self.edge_fc1(pair), HIDDEN_SLOPE)
        h = nnet.leaky_relu(self.edge_fc2(h), HIDDEN_SLOPE)
        return nnet.reshape(self.head(h), (-1,))

    def q_values(self, sub, require_live_in=None):
        """Numpy view of q_forward, for action selection."""
        return self.q_forward(sub, require_live_in=require_live_in).data.copy()

    # -------------------------------------------------------------- checkpoint

    def config(self):
        return {
            "node_count": self.node_count,
            "directed": self.directed,
            "emb_dim": self.emb_dim,
            "hidden_dim": self.hidden_dim,
        }

    def state_arrays(self):
        return {f"param_{i}_{p.name}": p.data for i, p in enumerate(self.parameters())}

    def load_state_arrays(self, arrays):
        for i, p in enumerate(self.parameters()):
            key = f"param_{i}_{p.name}"
            if key not in arrays:
                raise PruneRLError(f"checkpoint missing parameter {key}")
            data = np.asarray(arrays[key], dtype=np.float64)
            if data.shape != p.data.shape:
                raise ShapeError(
                    f"checkpoint shape {data.shape} != model shape {p.data.shape} for {p.name}"
                )
            p.data = data.copy()

    @classmethod
    def from_config(cls, cfg, rng=None):
        return cls(
            node_count=int(cfg["node_count"]),
            directed=bool(cfg["directed"]),
            emb_dim=int(cfg["emb_dim"]),
            hidden_dim=int(cfg["hidden_dim"]),
            rng=rng,
        )


def save_checkpoint(path, model, extra=None, optimizer=None, agent_state=None,
                    extra_arrays=None):
    """Versioned binary checkpoint: parameter tensors with shape headers plus
    a JSON header describing the model and optional training state."""
    header = {
        "format_version": 1,
        "model": model.config(),
        "extra": extra or {},
        "agent_state": agent_state or {},
    }
    arrays = dict(model.state_arrays())
    if extra_arrays:
        arrays.update(extra_arrays)
    if optimizer is not None:
        header["optimizer"] = {"step_count": optimizer.step_count}
        for i, m in enumerate(optimizer.m):
            arrays[f"opt_m_{i}"] = m
        for i, v in enumerate(optimizer.v):
            arrays[f"opt_v_{i}"] = v
    arrays["__header__"] = np.frombuffer(
        json.dumps(header, sort_keys=True).encode(), dtype=np.uint8
    )
    np.savez(path, **arrays)


def load_checkpoint(path, rng=None):
    """Load a checkpoint. Returns (model, header, raw arrays)."""
    with np.load(path if str(path).endswith(".npz") else str(path)) as z:
        arrays = {k: z[k] for k in z.files}
    header = json.loads(bytes(arrays.pop("__header__")).decode())
    if header.get("format_version") != 1:
        raise PruneRLError(f"unsupported checkpoint version {header.get('format_version')}")
    model = QModel.from_config(header["model"], rng=rng)
    model.load_state_arrays(arrays)
    return model, header, arrays
