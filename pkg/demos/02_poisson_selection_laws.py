"""Sample through the Poisson selection rule and verify its exact index laws.

The selector scans a marked Poisson stream (marks ~ proposal Q) and returns
K = argmin_i T_i / f(mark_i), f = dP/dQ.  Three things should come out:

  1. the selected mark is distributed exactly P,
  2. K given the selected mark y is Geom(1 / E[max{f(y), f(Y')}]),
  3. that law is dominated by Geom(1 / (f(y) + 1)).

All three sanity-check here with fresh codebooks per trial.
"""

import numpy as np

from pfrlab import (FinitePmf, Seed, arrival_stream, derive_subseed,
                    dominance_parameter, geometric_parameter_exact,
                    kl_divergence, pfr_select)

target = FinitePmf(np.array([0.8, 0.2]))
proposal = FinitePmf.uniform(2)
seed = Seed.from_int(20240813)
n = 30_000

ks = np.empty(n, dtype=np.int64)
ys = np.empty(n, dtype=np.int64)
for t in range(n):
    stream = arrival_stream(derive_subseed(seed, t, "codebook"), "codebook",
                            proposal)
    res = pfr_select(target, proposal, stream)
    ks[t], ys[t] = res.k, res.y

freq = np.bincount(ys, minlength=2) / n
print(f"selected-mark law: {freq}  (target {target.probs})")
print(f"TV = {0.5 * np.abs(freq - target.probs).sum():.5f}\n")

for y in range(2):
    ky = ks[ys == y]
    p_exact = geometric_parameter_exact(target, proposal, y)
    p_dom = dominance_parameter(target, proposal, y)
    print(f"mark y={y}: {ky.size} samples")
    print(f"  exact geometric parameter   {p_exact:.4f}")
    print(f"  dominating parameter        {p_dom:.4f}")
    print("  k    empirical  Geom(exact)  dominated-survival")
    for k in range(1, 6):
        emp = (ky == k).mean()
        exact = p_exact * (1 - p_exact) ** (k - 1)
        surv = (ky > k).mean()
        print(f"  {k}    {emp:.4f}     {exact:.4f}       "
              f"{surv:.4f} <= {(1 - p_dom) ** k:.4f}")
    print()

logk = np.log2(ks)
bound = kl_divergence(target, proposal) + 1.0
print(f"E[log2 K] = {logk.mean():.4f}  <=  KL(P||Q) + 1 = {bound:.4f}")
