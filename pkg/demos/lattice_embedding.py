"""Why an exponentially growing tree cannot live on a lattice.

Any injective finite layout has a per-edge distortion constant C, and the
triangle inequality makes the whole layout C-Lipschitz.  But C cannot stay
bounded as the depth grows: a generation of 2**k nodes does not fit in a
Chebyshev box of polynomial size, so against any *fixed* constant a deep
enough generation yields a violating pair.  The refutation search makes
that pigeonhole concrete.
"""

from treebound import (
    GraphSpec,
    MixingEnvelope,
    breadth_first_row_layout,
    distortion_constant,
    lipschitz_check,
    mixing_transfer,
    packed_layout,
    refutation_witness,
)

g = GraphSpec(2)

print("row layout in Z^2: per-edge distortion grows with the depth")
for depth in (2, 4, 6, 8):
    m = breadth_first_row_layout(2, depth, 2)
    print(f"  depth {depth}: C = {distortion_constant(g, m):5.0f}")

m8 = breadth_first_row_layout(2, 8, 2)
c8 = distortion_constant(g, m8)
pairs = [((3, 1), (8, 200)), ((5, 7), (8, 1)), ((8, 3), (8, 250))]
from treebound import NodeId
sample = [(NodeId(*a), NodeId(*b)) for a, b in pairs]
print(f"\nwith its own constant C = {c8:.0f} the depth-8 layout is Lipschitz "
      f"(counterexample: {lipschitz_check(g, m8, c8, sample)}) and the witness "
      f"search is empty: {refutation_witness(2, m8, c8, 8)}")

print("\nagainst fixed constants, deep generations refute the layout:")
for C, kmax in ((1.0, 4), (2.0, 8), (4.0, 12)):
    deep = breadth_first_row_layout(2, kmax, 1)
    witness = refutation_witness(2, deep, C, kmax)
    print(f"  C = {C}: witness {witness}")

print("\na packed (box-filling) layout in Z^2, C = 1: the pigeonhole filter")
print("first passes at generation 9, and a witness is found right there:")
packed = packed_layout(2, 10, 2)
print(" ", refutation_witness(2, packed, 1.0, 10))

print("\nmixing transfer through a C-Lipschitz embedding rescales separations:")
env = MixingEnvelope.m_dependent(2)  # 1/4 up to distance 4, then 0
moved = mixing_transfer(env, 3.0)
print("  n:      ", list(range(1, 16)))
print("  alpha': ", [round(moved(n), 3) for n in range(1, 16)])
print("  (vacuous 1 below the constant, floor(n / C) lookups beyond)")
