"""Evaluate the strip tail bound and let the optimizer pick its knobs.

The strip at level L collects the depth-P subtrees below every
generation-L node.  The tail of |sum Z_v| is bounded by a Markov factor
(the only epsilon-dependent piece), a mixing factor (vanishes for
independent fields), and a variance factor built from the per-block
variance proxy.  Everything is reported in log-space.
"""

import math

from treebound import (
    BernsteinInput,
    GridSpec,
    MixingEnvelope,
    bernstein_bound,
    beta_cap,
    optimize_params,
)

A, L, P = 2, 5, 3
C, sigma2 = 1.0, 1 / 3

print(f"strip: {A**L} subtree roots x {(A**P - 1) // (A - 1)} nodes each "
      f"= {A**L * (A**P - 1) // (A - 1)} nodes")

for label, envelope in (
    ("independent", MixingEnvelope.zero()),
    ("1-dependent", MixingEnvelope.m_dependent(1)),
):
    inp = BernsteinInput(
        A=A, L=L, P=P, P2=4, Q2=4, beta=beta_cap(A, P, 4, C),
        epsilon=120.0, C=C, sigma2=sigma2, envelope=envelope,
    )
    bb = bernstein_bound(inp)
    print(f"\n{label} field, P2 = Q2 = 4, beta at cap, epsilon = 120:")
    print(f"  markov   {bb.log_factor_markov:+.4f}")
    print(f"  mixing   {bb.log_factor_mixing:+.4f}")
    print(f"  variance {bb.log_factor_variance:+.4f}  (proxy {bb.variance_proxy:.3f})")
    print(f"  total    {bb.log_total:+.4f}  -> bound {math.exp(bb.log_total):.4f} "
          f"over {bb.block_count} blocks")

grid = GridSpec(p2_values=(2, 3, 4, 6, 8), q2_values=(2, 3, 4, 6, 8))
best = optimize_params(A, L, P, C, sigma2, MixingEnvelope.zero(), 120.0, grid)
print(f"\noptimizer on a 5x5 block grid picks P2 = {best.P2}, Q2 = {best.Q2}, "
      f"beta = {best.beta:.6f} (its cap)")

print("\nthreshold sweep with the optimized knobs:")
print("  eps   log bound   bound")
for eps in (100, 120, 140, 160, 180, 200):
    bb = bernstein_bound(
        BernsteinInput(A=A, L=L, P=P, P2=best.P2, Q2=best.Q2, beta=best.beta,
                       epsilon=float(eps), C=C, sigma2=sigma2,
                       envelope=MixingEnvelope.zero())
    )
    print(f"  {eps:3d}   {bb.log_total:+.4f}   {math.exp(bb.log_total):.4f}")
