"""Exact dependence measurement on finite spaces, sampled lower bounds on
the tree.

On a finite probability space with two partitions, the mixing coefficient
(the sup of |P(A&B) - P(A)P(B)| over unions of atoms) is computed exactly,
so the covariance inequality becomes a machine-checkable statement.  On
simulated fields only sampled lower bounds are possible, and they are
labeled as such.
"""

import numpy as np

from treebound import (
    AlphaSamplePlan,
    EventPair,
    FieldSpec,
    FiniteSpace,
    NodeId,
    davydov_check,
    empirical_alpha_lower,
    exact_alpha,
    random_finite_space,
)

# the extreme case: one fair event against itself
space = FiniteSpace.build([0.5, 0.5], [[0], [1]], [[0], [1]], [1, -1], [1, -1])
print("G = H = {A, not A}, P(A) = 1/2:  alpha =", exact_alpha(space),
      "(the universal maximum 1/4)")

rng = np.random.default_rng(5)
print("\ncovariance inequality on random spaces (p = q = 4, r = 2):")
print("  |Omega|  atoms   alpha     |Cov|      bound     holds")
for _ in range(5):
    sp = random_finite_space(rng, max_outcomes=40, max_atoms=6)
    res = davydov_check(sp, 4, 4, 2)
    print(f"   {len(sp.probs):4d}    {len(sp.atoms_g)}x{len(sp.atoms_h)}   "
          f"{res.alpha:.4f}   {res.lhs:.6f}  {res.rhs:9.6f}  {res.holds}")

print("\nsampled lower bounds for tree fields (events {sum > 0}, 10000 reps):")
for label, spec, sep, pair in (
    ("independent, distance 2", FieldSpec.independent(C=1, master_seed=1), 2,
     EventPair((NodeId(0, 1),), (NodeId(2, 1),))),
    ("1-dependent, distance 3", FieldSpec.m_dependent(1, C=1, master_seed=2), 3,
     EventPair((NodeId(0, 1),), (NodeId(3, 1),))),
    ("autoregressive a=0.9, distance 1", FieldSpec.branching_ar(0.9, C=1, master_seed=3), 1,
     EventPair((NodeId(0, 1),), (NodeId(1, 1),))),
):
    est = empirical_alpha_lower(spec, 2, sep, AlphaSamplePlan(pairs=(pair,)))
    print(f"  {label:34s} lower bound {est.value:.4f} +- {est.std_error:.4f}")
print("(the first two are consistent with an exactly zero coefficient;")
print(" the third proves adjacent dependence but only bounds alpha from below)")
