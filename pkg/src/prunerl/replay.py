"""Prioritized experience replay over a sum tree.

Items are sampled with probability priority^alpha / sum(priority^alpha) and
corrected with importance weights (N * P(i))^-beta, normalized by the
largest weight in the buffer.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PruneRLError
from .graph import CandidateSubgraph


@dataclass
class Transition:
    """One agent step: state, chosen edge index, reward, next state."""

    state: CandidateSubgraph
    action: int
    reward: float
    next_state: CandidateSubgraph  # ignored when done
    done: bool

    def __post_init__(self):
        if not (0 <= self.action < len(self.state)):
            raise PruneRLError(
                f"action index {self.action} out of range for state of length {len(self.state)}"
            )


class SumTree:
    """Complete binary tree whose leaves hold priorities; internal nodes hold
    subtree sums, so prefix sampling is O(log n)."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.tree = np.zeros(2 * capacity - 1)

    def update(self, leaf, value):
        idx = leaf + self.capacity - 1
        change = value - self.tree[idx]
        self.tree[idx] = value
        while idx != 0:
            idx = (idx - 1) // 2
            self.tree[idx] += change

    def get(self, leaf):
        return self.tree[leaf + self.capacity - 1]

    def total(self):
        return self.tree[0]

    def find(self, value):
        """Leaf index whose cumulative-priority interval contains value."""
        idx = 0
        while True:
            left = 2 * idx + 1
            if left >= len(self.tree):
                return idx - (self.capacity - 1)
            if value <= self.tree[left]:
                idx = left
            else:
                value -= self.tree[left]
                idx = left + 1


class ReplayBuffer:
    """Ring buffer of transitions with proportional prioritized sampling."""

    def __init__(self, capacity, alpha=0.6, beta=0.4, priority_floor=1e-3):
        if capacity < 1:
            raise PruneRLError("replay capacity must be >= 1")
        self.capacity = capacity
        self.alpha = alpha
        self.beta = beta
        self.priority_floor = priority_floor
        self.tree = SumTree(capacity)
        self.data = [None] * capacity
        self.raw_priority = np.zeros(capacity)
        self.write = 0
        self.size = 0
        self.max_priority = 1.0

    def __len__(self):
        return self.size

    def add(self, transition, priority=None):
        """Insert with the given raw priority (defaults to the current max,
        so fresh transitions are sampled at least once soon)."""
        p = self.max_priority if priority is None else priority
        if p <= 0:
            raise PruneRLError("transition priority must be positive")
        self.data[self.write] = transition
        self.raw_priority[self.write] = p
        self.tree.update(self.write, p ** self.alpha)
        self.write = (self.write + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.max_priority = max(self.max_priority, p)

    def sample(self, batch_size, rng):
        """Proportional sample; returns (indices, transitions, weights)."""
        if self.size == 0:
            raise PruneRLError("cannot sample from an empty replay buffer")
        total = self.tree.total()
        idx = np.empty(batch_size, dtype=np.int64)
        for i in range(batch_size):
            idx[i] = self.tree.find(rng.random() * total)
        probs = np.array([self.tree.get(j) for j in idx]) / total
        weights = (self.size * probs) ** (-self.beta)
        # normalize by the largest weight over the whole buffer (min priority)
        min_prob = (self.raw_priority[: self.size] ** self.alpha).min() / total
        weights /= (self.size * min_prob) ** (-self.beta)
        return idx, [self.data[j] for j in idx], weights

    def update_priorities(self, indices, td_errors):
        """Set priority to |TD error| plus the floor so nothing starves."""
        for j, td in zip(indices, td_errors):
            p = abs(float(td)) + self.priority_floor
            self.raw_priority[j] = p
            self.tree.update(int(j), p ** self.alpha)
            self.max_priority = max(self.max_priority, p)

    def sampling_probabilities(self):
        """p_i^alpha / sum p_j^alpha over stored items (test hook)."""
        pa = self.raw_priority[: self.size] ** self.alpha
        return pa / pa.sum()
