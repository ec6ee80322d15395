"""Pluggable reward functions binding sparsification objectives to the agent:
PageRank rank preservation, community structure, shortest-path preservation,
and raw modularity preservation.

Each reward spec caches its baseline metric on the original graph once, and
exposes before_prune/after_prune hooks so objectives that need pre-prune
context (shortest paths) can grab it.
"""

import math

import numpy as np

from .errors import ConfigError, PruneRLError
from .metrics import (
    PathQuerySet,
    adjusted_rand_index,
    batch_spsp,
    bfs_distances,
    louvain,
    modularity,
    pagerank,
    spearman_rho,
)


def reward_pagerank(g, gp):
    """Spearman rho between PageRank(G) and PageRank(G'), minus the constant
    self-correlation of 1, so an unchanged graph scores 0 and damage goes
    negative. Rank-degenerate score vectors are an error here; the training
    hook (PagerankReward) maps them to the worst reward instead."""
    base = pagerank(g)
    after = pagerank(gp)
    return spearman_rho(base, after) - 1.0


def reward_community(g, gp, labels, pruned_edge, base_ari, louvain_rng,
                     label_sign=1.0):
    """ARI(Louvain(G'), labels) - ARI(Louvain(G), labels), plus the label
    bonus: +label_sign when the pruned edge joins two same-label nodes,
    -label_sign otherwise."""
    lu = labels.get(pruned_edge.u)
    lv = labels.get(pruned_edge.v)
    if lu is None or lv is None:
        raise PruneRLError(
            f"pruned edge ({pruned_edge.u},{pruned_edge.v}) has an unlabeled endpoint"
        )
    part = louvain(gp, louvain_rng)
    ari = adjusted_rand_index(part.labels, labels)
    r_label = label_sign if lu == lv else -label_sign
    return ari - base_ari + r_label


def reward_spsp(g, gp, queries):
    """Mean shortest-path increase over the query set (a penalty: lower is
    better). Pairs that become unreachable count as |V|; pairs that were
    already unreachable in the baseline contribute 0."""
    dists = batch_spsp(gp, queries.pairs)
    diffs = []
    for d0, d1 in zip(queries.baseline, dists):
        if d1 == math.inf:
            diffs.append(0.0 if d0 == math.inf else float(g.node_count))
        else:
            diffs.append(float(d1 - d0))
    return float(np.mean(diffs)) if diffs else 0.0


def sample_training_pairs(gp, edge, k, rng):
    """Pair k random nodes against both endpoints of the edge about to be
    pruned, with baseline distances taken on the pre-prune graph. Exploits
    the fact that only paths through the pruned edge can change."""
    if k < 1:
        raise PruneRLError("need at least one sampled node per endpoint")
    n = gp.node_count
    candidates = [x for x in range(n) if x not in (edge.u, edge.v)]
    if not candidates:
        raise PruneRLError("graph too small to sample shortest-path pairs")
    others = rng.choice(candidates, size=k, replace=len(candidates) < k)
    pairs = []
    baseline = []
    for endpoint in (edge.u, edge.v):
        dist = bfs_distances(gp, endpoint)
        for o in others:
            pairs.append((endpoint, int(o)))
            baseline.append(dist[int(o)])
    q = PathQuerySet(pairs=pairs)
    q.baseline = baseline
    return q


def reward_modularity(g, gp, base_q, louvain_rng):
    """Louvain modularity of G' minus the cached Louvain modularity of G."""
    return louvain(gp, louvain_rng).modularity - base_q


# ---------------------------------------------------------------- reward specs


class RewardSpec:
    """Objective plus its evaluation context. Subclasses implement the
    before_prune/after_prune pair used inside episodes."""

    tag = None

    def on_episode_start(self, g_original, g_working, rng):
        pass

    def before_prune(self, g, edge, rng):
        return None

    def after_prune(self, g, edge, ctx, rng):
        raise NotImplementedError


class PagerankReward(RewardSpec):
    tag = "pagerank"

    def __init__(self, g):
        self._base_scores = pagerank(g)

    def after_prune(self, g, edge, ctx, rng):
        # heavy episode pre-pruning can leave a graph whose PageRank is
        # uniform; that ranking carries no information, so score rho as 0
        # rather than aborting the episode
        try:
            return spearman_rho(self._base_scores, pagerank(g)) - 1.0
        except PruneRLError:
            return -1.0


class CommunityReward(RewardSpec):
    tag = "community"

    def __init__(self, g, labels, label_sign=1.0, louvain_seed=0):
        if not labels:
            raise ConfigError("community objective requires ground-truth labels")
        missing = [n for n in range(g.node_count) if n not in labels]
        if missing:
            raise ConfigError(f"labels missing for {len(missing)} nodes (e.g. {missing[0]})")
        self.labels = labels
        self.label_sign = label_sign
        self._louvain_seed = louvain_seed
        self._episode_seed = louvain_seed
        base = louvain(g, np.random.default_rng(louvain_seed))
        self._base_ari = adjusted_rand_index(base.labels, labels)

    def on_episode_start(self, g_original, g_working, rng):
        # fixed per episode to cut reward variance between steps
        self._episode_seed = int(rng.integers(1 << 31))

    def after_prune(self, g, edge, ctx, rng):
        return reward_community(
            g, g, self.labels, edge, self._base_ari,
            np.random.default_rng(self._episode_seed),
            label_sign=self.label_sign,
        )


class SpspReward(RewardSpec):
    """Shortest-path preservation. During training the query set is refreshed
    every timestep from the pruned edge's endpoints; the agent is paid the
    negated penalty so bigger damage means lower reward."""

    tag = "spsp"

    def __init__(self, g, pairs_per_endpoint=16):
        self.pairs_per_endpoint = pairs_per_endpoint
        self.last_raw_penalty = None

    def before_prune(self, g, edge, rng):
        return sample_training_pairs(g, edge, self.pairs_per_endpoint, rng)

    def after_prune(self, g, edge, queries, rng):
        self.last_raw_penalty = reward_spsp(g, g, queries)
        return -self.last_raw_penalty


class ModularityReward(RewardSpec):
    tag = "modularity"

    def __init__(self, g, louvain_seed=0):
        self._episode_seed = louvain_seed
        self._base_q = louvain(g, np.random.default_rng(louvain_seed)).modularity

    def on_episode_start(self, g_original, g_working, rng):
        self._episode_seed = int(rng.integers(1 << 31))

    def after_prune(self, g, edge, ctx, rng):
        return louvain(g, np.random.default_rng(self._episode_seed)).modularity - self._base_q


def make_reward_spec(tag, g, labels=None, **kwargs):
    """Build a RewardSpec from its objective tag, checking context up front."""
    if tag == "pagerank":
        return PagerankReward(g)
    if tag == "community":
        return CommunityReward(g, labels, **kwargs)
    if tag == "spsp":
        return SpspReward(g, **kwargs)
    if tag == "modularity":
        return ModularityReward(g, **kwargs)
    raise ConfigError(f"unknown objective tag {tag!r}")
