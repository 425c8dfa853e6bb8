"""How many ordered node pairs sit at a given distance inside a subtree?

Three independent routes give the same exact integer: brute-force
enumeration, a double sum over the pair's meeting node, and a five-term
closed form.  The count grows like A**(P + L/2), and the ratio against
P * A**(P + L/2) stays below a small constant on every grid we try.
"""

from treebound import (
    count_pairs_closed,
    count_pairs_enum,
    count_pairs_sum,
    growth_ratio,
    total_ordered_pairs,
)

A, P = 2, 5
print(f"rate {A}, depth {P}: {(A**P - 1) // (A - 1)} nodes, "
      f"{total_ordered_pairs(A, P)} ordered pairs\n")

print(" L   enum    sum   closed   ratio vs P*A^(P+L/2)")
for L in range(1, 2 * (P - 1) + 1):
    e = count_pairs_enum(A, P, L)
    s = count_pairs_sum(A, P, L)
    c = count_pairs_closed(A, P, L)
    assert e == s == c
    print(f"{L:2d} {e:6d} {s:6d} {c:8d}   {growth_ratio(A, P, L):8.4f}")

print("\nthe distance histogram sums back to n*(n-1):",
      sum(count_pairs_closed(A, P, L) for L in range(1, 2 * (P - 1) + 1))
      == total_ordered_pairs(A, P))

worst = max(
    (growth_ratio(a, p, L), (a, p, L))
    for a in (2, 3) for p in range(1, 11) for L in range(1, max(2 * (p - 1), 1) + 1)
)
print(f"largest ratio over A in {{2,3}}, P <= 10: {worst[0]:.10f} at {worst[1]}"
      f"  (= 2**-1.5: the adjacency count at rate 2, depth 3)")
