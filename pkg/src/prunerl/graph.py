"""Graph representation, edge-list ingestion, pruning, and subgraph sampling.

The graph keeps a stable id per original edge. Pruning flips a liveness flag
and removes the edge from the adjacency structure, so stale EdgeRefs held by
a replay buffer remain resolvable long after the edge is gone.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CommunityFileError, DeadEdgeError, EdgeListParseError, PruneRLError


@dataclass(frozen=True)
class EdgeRef:
    """A live-or-dead edge named by its endpoints and stable id."""

    u: int
    v: int
    eid: int


@dataclass
class CandidateSubgraph:
    """A uniformly sampled batch of live edges presented to the agent.

    Degrees, 1-hop neighborhoods, and the edge-kept ratio are snapshots taken
    at sampling time, so a stored state stays evaluable after further pruning.
    """

    edges: list  # list[EdgeRef]
    degrees: np.ndarray  # per-edge endpoint degrees
    node_degrees: dict  # node id -> degree snapshot (int or (in, out) tuple)
    neighborhoods: dict  # node id -> tuple of live neighbors at snapshot time
    edge_ratio: float

    def __len__(self):
        return len(self.edges)


class Graph:
    """Mutable edge-set view over an immutable original edge list.

    Undirected edges are stored once logically: (u, v) and (v, u) resolve to
    the same stable edge id. Self-loops and duplicates are rejected by the
    constructor (ingestion drops them before construction).
    """

    def __init__(self, node_count, edges, directed=False, id_map=None):
        if node_count <= 0:
            raise PruneRLError("graph must have at least one node")
        self.node_count = node_count
        self.directed = directed
        # original ids of compacted nodes; identity when not loaded from file
        self.id_map = id_map if id_map is not None else {i: i for i in range(node_count)}
        self.inverse_id_map = {c: o for o, c in self.id_map.items()}

        m = len(edges)
        self.src = np.empty(m, dtype=np.int64)
        self.dst = np.empty(m, dtype=np.int64)
        self.adj = [dict() for _ in range(node_count)]  # u -> {v: eid}
        for eid, (u, v) in enumerate(edges):
            if u == v:
                raise PruneRLError(f"self-loop ({u},{u}) not allowed")
            if v in self.adj[u]:
                raise PruneRLError(f"duplicate edge ({u},{v})")
            self.src[eid] = u
            self.dst[eid] = v
            self.adj[u][v] = eid
            if not directed:
                self.adj[v][u] = eid

        self.alive = np.ones(m, dtype=bool)
        self.original_edge_count = m
        self.edge_count = m
        # swap-remove list of live edge ids for O(1) uniform sampling
        self._live_ids = np.arange(m, dtype=np.int64)
        self._live_pos = np.arange(m, dtype=np.int64)

        if directed:
            self.out_degree = np.zeros(node_count, dtype=np.int64)
            self.in_degree = np.zeros(node_count, dtype=np.int64)
            np.add.at(self.out_degree, self.src, 1)
            np.add.at(self.in_degree, self.dst, 1)
        else:
            self.degree = np.zeros(node_count, dtype=np.int64)
            np.add.at(self.degree, self.src, 1)
            np.add.at(self.degree, self.dst, 1)

    # ------------------------------------------------------------------ basics

    def copy(self):
        g = object.__new__(Graph)
        g.node_count = self.node_count
        g.directed = self.directed
        g.id_map = self.id_map
        g.inverse_id_map = self.inverse_id_map
        g.src = self.src
        g.dst = self.dst
        g.adj = [d.copy() for d in self.adj]
        g.alive = self.alive.copy()
        g.original_edge_count = self.original_edge_count
        g.edge_count = self.edge_count
        g._live_ids = self._live_ids.copy()
        g._live_pos = self._live_pos.copy()
        if self.directed:
            g.out_degree = self.out_degree.copy()
            g.in_degree = self.in_degree.copy()
        else:
            g.degree = self.degree.copy()
        return g

    def edge_ref(self, eid):
        return EdgeRef(int(self.src[eid]), int(self.dst[eid]), int(eid))

    def edge_id(self, u, v):
        """Stable id of edge (u, v), or None if it never existed."""
        eid = self.adj[u].get(v)
        if eid is not None:
            return eid
        # may have been pruned (removed from adj); scan the original arrays
        hits = np.nonzero((self.src == u) & (self.dst == v))[0]
        if not self.directed and hits.size == 0:
            hits = np.nonzero((self.src == v) & (self.dst == u))[0]
        return int(hits[0]) if hits.size else None

    def is_alive(self, eid):
        return bool(self.alive[eid])

    def live_edge_ids(self):
        return self._live_ids[: self.edge_count].copy()

    def live_edges(self):
        return [self.edge_ref(e) for e in self.live_edge_ids()]

    def neighbors(self, u):
        """Live neighbors of u (out-neighbors when directed)."""
        return list(self.adj[u].keys())

    def degree_of(self, u):
        if self.directed:
            return (int(self.in_degree[u]), int(self.out_degree[u]))
        return int(self.degree[u])

    def edge_kept_ratio(self):
        return self.edge_count / self.original_edge_count

    # ----------------------------------------------------------------- pruning

    def prune_edge(self, edge):
        """Remove a live edge. Pruning a dead edge is a bookkeeping bug."""
        eid = edge.eid if isinstance(edge, EdgeRef) else int(edge)
        if not self.alive[eid]:
            raise DeadEdgeError(f"edge id {eid} is already pruned")
        u, v = int(self.src[eid]), int(self.dst[eid])
        self.alive[eid] = False
        del self.adj[u][v]
        if not self.directed:
            del self.adj[v][u]
            self.degree[u] -= 1
            self.degree[v] -= 1
        else:
            self.out_degree[u] -= 1
            self.in_degree[v] -= 1
        # swap-remove from the live id list
        pos = self._live_pos[eid]
        last = self._live_ids[self.edge_count - 1]
        self._live_ids[pos] = last
        self._live_pos[last] = pos
        self.edge_count -= 1

    def random_prune(self, count, rng):
        """Prune `count` distinct live edges uniformly at random."""
        if count < 0 or count > self.edge_count:
            raise PruneRLError(
                f"cannot prune {count} of {self.edge_count} live edges"
            )
        for _ in range(count):
            pos = int(rng.integers(self.edge_count))
            self.prune_edge(int(self._live_ids[pos]))

    def sample_subgraph(self, size, rng):
        """Sample min(size, live) distinct live edges uniformly, with snapshots."""
        if size < 1:
            raise PruneRLError("subgraph size must be >= 1")
        if self.edge_count == 0:
            raise PruneRLError("cannot sample a subgraph from an edgeless graph")
        k = min(size, self.edge_count)
        picked = rng.choice(self._live_ids[: self.edge_count], size=k, replace=False)
        edges = [self.edge_ref(int(e)) for e in picked]
        node_degrees = {}
        neighborhoods = {}
        for e in edges:
            for n in (e.u, e.v):
                if n not in node_degrees:
                    node_degrees[n] = self.degree_of(n)
                    neighborhoods[n] = tuple(sorted(self.adj[n].keys()))
        if self.directed:
            degs = np.array(
                [[*node_degrees[e.u], *node_degrees[e.v]] for e in edges],
                dtype=np.float64,
            )
        else:
            degs = np.array(
                [[node_degrees[e.u], node_degrees[e.v]] for e in edges],
                dtype=np.float64,
            )
        return CandidateSubgraph(
            edges=edges,
            degrees=degs,
            node_degrees=node_degrees,
            neighborhoods=neighborhoods,
            edge_ratio=self.edge_kept_ratio(),
        )

    # --------------------------------------------------------------------- io

    def save_edge_list(self, path, header_lines=()):
        """Write live edges in stable edge-id order using original node ids."""
        with open(path, "w") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            for eid in sorted(self.live_edge_ids()):
                u = self.inverse_id_map[int(self.src[eid])]
                v = self.inverse_id_map[int(self.dst[eid])]
                f.write(f"{u} {v}\n")

    def live_edge_set(self):
        """Frozenset of live edges in original ids (canonical order if undirected)."""
        out = set()
        for eid in self.live_edge_ids():
            u = self.inverse_id_map[int(self.src[eid])]
            v = self.inverse_id_map[int(self.dst[eid])]
            out.add((u, v) if self.directed else (min(u, v), max(u, v)))
        return frozenset(out)


def load_edge_list(path, directed=False):
    """Load a whitespace-separated "u v" edge list ('#' lines are comments).

    Node ids are compacted to 0..|V|-1; the original ids are kept in
    ``Graph.id_map``. Self-loops and duplicate edges are dropped and counted
    in ``Graph.dropped_self_loops`` / ``Graph.dropped_duplicates``.
    """
    pairs = []
    with open(path) as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListParseError(path, line_no, raw.rstrip("\n"))
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(path, line_no, raw.rstrip("\n")) from None
            pairs.append((u, v))
    if not pairs:
        raise PruneRLError(f"{path}: empty edge set")

    id_map = {}
    for u, v in pairs:
        for x in (u, v):
            if x not in id_map:
                id_map[x] = len(id_map)

    seen = set()
    edges = []
    self_loops = 0
    duplicates = 0
    for u, v in pairs:
        cu, cv = id_map[u], id_map[v]
        if cu == cv:
            self_loops += 1
            continue
        key = (cu, cv) if directed else (min(cu, cv), max(cu, cv))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        edges.append((cu, cv))
    if not edges:
        raise PruneRLError(f"{path}: no usable edges after dropping loops/duplicates")

    g = Graph(len(id_map), edges, directed=directed, id_map=id_map)
    g.dropped_self_loops = self_loops
    g.dropped_duplicates = duplicates
    return g


def load_communities(path, graph):
    """Load ground-truth communities: one community per line, space-separated ids.

    Returns a dict mapping compact node id -> community index. Communities
    must be non-overlapping, and every listed id must exist in the graph.
    """
    labels = {}
    with open(path) as f:
        idx = 0
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            for tok in line.split():
                node = int(tok)
                if node not in graph.id_map:
                    raise CommunityFileError(f"{path}: node id {node} not in graph")
                cid = graph.id_map[node]
                if cid in labels:
                    raise CommunityFileError(
                        f"{path}: node id {node} appears in more than one community"
                    )
                labels[cid] = idx
            idx += 1
    return labels
