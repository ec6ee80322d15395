"""Double DQN agent: epsilon-greedy acting over candidate subgraphs,
prioritized-replay training with soft target updates, the episode loop with
random-start pruning, and greedy evaluation-time sparsification.
"""

import csv
from dataclasses import dataclass, field, asdict

import numpy as np

from . import nnet
from .errors import PruneRLError
from .nnet import Adam, Tensor
from .qmodel import QModel, load_checkpoint, save_checkpoint
from .replay import ReplayBuffer, Transition


@dataclass
class AgentConfig:
    gamma: float = 0.95
    eps_start: float = 0.99
    eps_end: float = 0.05
    eps_decay_steps: int = 10_000
    soft_update_rate: float = 0.001  # Polyak rate toward the policy net
    t_max: int = 8
    train_subgraph_len: int = 32
    lr: float = 0.0002
    buffer_capacity: int = 100_000
    batch_size: int = 32
    replay_alpha: float = 0.6
    replay_beta: float = 0.4
    priority_floor: float = 1e-3
    emb_dim: int = 64
    hidden_dim: int = 128
    seed: int = 0

    def __post_init__(self):
        for name in ("gamma", "eps_start", "eps_end", "soft_update_rate"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise PruneRLError(f"{name} must be in (0, 1), got {v}")
        if self.t_max < 1:
            raise PruneRLError("t_max must be >= 1")


def epsilon_at(config, step):
    """Linear decay from eps_start at step 0 to eps_end at eps_decay_steps."""
    if step >= config.eps_decay_steps:
        return config.eps_end
    frac = step / config.eps_decay_steps
    return config.eps_start + (config.eps_end - config.eps_start) * frac


def select_action(qvals, epsilon, rng):
    """Epsilon-greedy over Q-values; exact ties resolve to the lowest index."""
    qvals = np.asarray(qvals)
    if qvals.size == 0:
        raise PruneRLError("select_action needs at least one Q-value")
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(qvals.size))
    return int(np.argmax(qvals))


def double_dqn_target(batch, policy, target, gamma):
    """Per-item TD target: r, or r + gamma * Q_target(s', argmax Q_policy(s'))."""
    out = np.empty(len(batch))
    for i, tr in enumerate(batch):
        if tr.done or gamma == 0.0:
            out[i] = tr.reward
        else:
            a = int(np.argmax(policy.q_values(tr.next_state)))
            out[i] = tr.reward + gamma * target.q_values(tr.next_state)[a]
    return out


@dataclass
class EpisodeRecord:
    prunes: list = field(default_factory=list)  # EdgeRefs in prune order
    rewards: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    t_planned: int = 0
    t_preprune: int = 0
    terminated_early: bool = False


class Agent:
    """Owns the policy/target networks, optimizer, replay buffer, and the
    step counter that drives the epsilon schedule."""

    def __init__(self, graph, config=None, rng=None):
        self.config = config or AgentConfig()
        self.graph = graph  # the frozen original graph
        rng = rng if rng is not None else np.random.default_rng(self.config.seed)
        self.policy = QModel(
            graph.node_count, directed=graph.directed,
            emb_dim=self.config.emb_dim, hidden_dim=self.config.hidden_dim, rng=rng,
        )
        self.target = QModel(
            graph.node_count, directed=graph.directed,
            emb_dim=self.config.emb_dim, hidden_dim=self.config.hidden_dim, rng=rng,
        )
        self.target.copy_from(self.policy)
        self.optimizer = Adam(self.policy.parameters(), lr=self.config.lr)
        self.buffer = ReplayBuffer(
            self.config.buffer_capacity,
            alpha=self.config.replay_alpha,
            beta=self.config.replay_beta,
            priority_floor=self.config.priority_floor,
        )
        self.update_steps = 0
        self.episodes_done = 0

    @property
    def epsilon(self):
        return epsilon_at(self.config, self.update_steps)

    # --------------------------------------------------------------- training

    def train_step(self, rng):
        """One prioritized batch: weighted squared TD-error loss, Adam step,
        priority refresh, then a soft target update."""
        cfg = self.config
        if len(self.buffer) < cfg.batch_size:
            raise PruneRLError(
                f"buffer holds {len(self.buffer)} < batch size {cfg.batch_size}"
            )
        idx, batch, weights = self.buffer.sample(cfg.batch_size, rng)
        targets = double_dqn_target(batch, self.policy, self.target, cfg.gamma)

        qs = []
        for tr in batch:
            q = self.policy.q_forward(tr.state)
            qs.append(nnet.gather_rows(nnet.reshape(q, (-1, 1)), [tr.action]))
        pred = nnet.reshape(nnet.concat(qs, axis=0), (-1,))
        diff = pred - Tensor(targets)
        loss = nnet.mean_all(nnet.mul(Tensor(weights), nnet.mul(diff, diff)))

        self.optimizer.zero_grad()
        loss.backward()
        td_errors = diff.data.copy()
        self.optimizer.step()
        self.buffer.update_priorities(idx, td_errors)
        self.target.soft_update_from(self.policy, cfg.soft_update_rate)
        self.update_steps += 1
        return float(loss.data), td_errors

    def run_episode(self, reward_spec, rng, train=True):
        """One training episode over a fresh clone of the original graph.

        Draws the episode length T ~ U(1, T_max) and a random-start prune
        count T_p ~ U(1, |E| - T), then alternates sample / act / prune /
        reward / store / train for T steps.
        """
        cfg = self.config
        g = self.graph.copy()
        if g.edge_count <= cfg.t_max:
            raise PruneRLError("graph too small for the configured episode length")
        t_steps = int(rng.integers(1, cfg.t_max + 1))
        t_pre = int(rng.integers(1, g.edge_count - t_steps + 1))
        g.random_prune(t_pre, rng)
        reward_spec.on_episode_start(self.graph, g, rng)

        record = EpisodeRecord(t_planned=t_steps, t_preprune=t_pre)
        state = g.sample_subgraph(cfg.train_subgraph_len, rng)
        for t in range(t_steps):
            qvals = self.policy.q_values(state, require_live_in=g)
            action = select_action(qvals, self.epsilon if train else 0.0, rng)
            edge = state.edges[action]
            pre_ctx = reward_spec.before_prune(g, edge, rng)
            g.prune_edge(edge)
            reward = reward_spec.after_prune(g, edge, pre_ctx, rng)
            record.prunes.append(edge)
            record.rewards.append(reward)

            exhausted = g.edge_count == 0
            done = exhausted  # time-limit truncation still bootstraps
            next_state = state if exhausted else g.sample_subgraph(cfg.train_subgraph_len, rng)
            if train:
                self.buffer.add(Transition(state, action, reward, next_state, done))
                if len(self.buffer) >= cfg.batch_size:
                    loss, _ = self.train_step(rng)
                    record.losses.append(loss)
            if exhausted:
                record.terminated_early = True
                break
            state = next_state
        self.episodes_done += 1
        return record

    # ------------------------------------------------------------- evaluation

    def sparsify(self, g, target_ratio, eval_subgraph_len, rng):
        """Greedy pruning with the learned policy until round(target_ratio *
        |E_original|) live edges remain. Returns a pruned copy."""
        if not (0.0 < target_ratio <= 1.0):
            raise PruneRLError(f"target ratio must be in (0, 1], got {target_ratio}")
        target = int(round(target_ratio * g.original_edge_count))
        out = g.copy()
        if target > out.edge_count:
            raise PruneRLError(
                f"target of {target} edges exceeds the {out.edge_count} still live"
            )
        while out.edge_count > target:
            sub = out.sample_subgraph(eval_subgraph_len, rng)
            qvals = self.policy.q_values(sub, require_live_in=out)
            out.prune_edge(sub.edges[int(np.argmax(qvals))])
        return out

    # ------------------------------------------------------------- persistence

    def save(self, path):
        save_checkpoint(
            path,
            self.policy,
            optimizer=self.optimizer,
            extra={"agent_config": asdict(self.config)},
            agent_state={
                "update_steps": self.update_steps,
                "episodes_done": self.episodes_done,
            },
            extra_arrays={
                f"target_{k}": v for k, v in self.target.state_arrays().items()
            },
        )

    @classmethod
    def load(cls, path, graph):
        model, header, arrays = load_checkpoint(path)
        config = AgentConfig(**header["extra"]["agent_config"])
        agent = cls(graph, config=config)
        agent.policy.load_state_arrays(
            {k: v for k, v in arrays.items() if k.startswith("param_")}
        )
        target_arrays = {
            k[len("target_"):]: v for k, v in arrays.items()
            if k.startswith("target_param_")
        }
        if target_arrays:
            agent.target.load_state_arrays(target_arrays)
        else:
            agent.target.copy_from(agent.policy)
        n = len(agent.policy.parameters())
        if "opt_m_0" in arrays:
            agent.optimizer.load_state_dict(
                {
                    "step_count": header["optimizer"]["step_count"],
                    "m": [arrays[f"opt_m_{i}"] for i in range(n)],
                    "v": [arrays[f"opt_v_{i}"] for i in range(n)],
                }
            )
        agent.update_steps = int(header["agent_state"]["update_steps"])
        agent.episodes_done = int(header["agent_state"]["episodes_done"])
        return agent


def train_loop(agent, reward_spec, episodes, rng, log_path=None,
               checkpoint_path=None, checkpoint_every=0, patience=0,
               patience_window=50):
    """Run episodes until the budget or until the smoothed mean episode
    reward stops improving for `patience` episodes (0 disables patience).

    Writes one CSV log row per episode:
    (episode, step, epsilon, loss, mean_reward, buffer_size).
    """
    rows = []
    best = -np.inf
    since_best = 0
    history = []
    for _ in range(episodes):
        rec = agent.run_episode(reward_spec, rng)
        mean_reward = float(np.mean(rec.rewards)) if rec.rewards else 0.0
        loss = float(np.mean(rec.losses)) if rec.losses else float("nan")
        history.append(mean_reward)
        rows.append(
            {
                "episode": agent.episodes_done,
                "step": agent.update_steps,
                "epsilon": repr(agent.epsilon),
                "loss": repr(loss),
                "mean_reward": repr(mean_reward),
                "buffer_size": len(agent.buffer),
            }
        )
        if checkpoint_path and checkpoint_every and agent.episodes_done % checkpoint_every == 0:
            agent.save(checkpoint_path)
        if patience:
            smoothed = float(np.mean(history[-patience_window:]))
            if smoothed > best + 1e-12:
                best = smoothed
                since_best = 0
            else:
                since_best += 1
                if since_best >= patience:
                    break
    if checkpoint_path:
        agent.save(checkpoint_path)
    if log_path:
        with open(log_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return rows
