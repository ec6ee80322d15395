"""Time-versus-quality trade-off of the candidate subgraph length |H|.

At each pruning step the agent scores a random sample of |H| live edges and
prunes the best-looking one. Bigger samples see more of the graph per step
but cost proportionally more network evaluations; a model trained at one
length can be evaluated at any other. Takes a few seconds.
"""

import time

import numpy as np

from prunerl.agent import Agent, AgentConfig, train_loop
from prunerl.graph import load_edge_list
from prunerl.metrics import pagerank, spearman_rho
from prunerl.rewards import PagerankReward

g = load_edge_list("data/karate.txt")
cfg = AgentConfig(emb_dim=8, hidden_dim=16, train_subgraph_len=32,
                  batch_size=8, t_max=4)
rng = np.random.default_rng(0)
agent = Agent(g, cfg, rng=rng)
print("training 50 episodes at |H|=32 on the PageRank objective...")
train_loop(agent, PagerankReward(g), 50, rng)

pr = pagerank(g)
print(f"\n{'|H|':>4} {'pagerank rho':>13} {'mean wall time':>15}")
for h in (4, 8, 16, 32, 64):
    rhos, times = [], []
    for seed in range(5):
        t0 = time.perf_counter()
        sp = agent.sparsify(g, 0.5, h, np.random.default_rng(seed))
        times.append(time.perf_counter() - t0)
        rhos.append(spearman_rho(pr, pagerank(sp)))
    print(f"{h:>4} {np.mean(rhos):>13.4f} {np.mean(times):>14.3f}s")
