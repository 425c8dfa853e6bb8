"""Lattice-embedding machinery: distortion constants, the Lipschitz
criterion, pigeonhole refutation witnesses, and mixing-rate transfer.

A finite, generation-closed assignment of tree nodes to integer lattice
points is judged by the Chebyshev distance of its images.  The per-edge
maximum is the distortion constant; composed along tree paths it bounds
every pair, which is the Lipschitz property an embedding must have for
mixing rates to transfer.  Because a generation holds ``A**k`` nodes while
a Chebyshev ball of radius ``R`` in ``Z**N`` holds only ``(2R+1)**N``
points, a sufficiently deep generation cannot stay Lipschitz for any fixed
constant: :func:`refutation_witness` searches exactly those generations
for a violating pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .bounds import MixingEnvelope
from .errors import CapacityError, ValidationError
from .tree import (
    DEFAULT_NODE_CAP,
    GraphSpec,
    NodeId,
    graph_distance,
    tree_distance,
)

Point = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class LatticeMap:
    """A finite injective assignment of tree nodes to points of ``Z**dim``."""

    dim: int
    entries: Mapping[NodeId, Point]
    depth: int = -1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError(f"lattice dimension must be >= 1, got {self.dim}")
        if not self.entries:
            raise ValidationError("lattice map must cover at least one node")
        images = set()
        max_gen = 0
        for node, point in self.entries.items():
            if len(point) != self.dim:
                raise ValidationError(
                    f"point {point} for node ({node.j},{node.k}) is not {self.dim}-dimensional"
                )
            if point in images:
                raise ValidationError(f"map is not injective: point {point} is reused")
            images.add(point)
            max_gen = max(max_gen, node.j)
        if self.depth == -1:
            object.__setattr__(self, "depth", max_gen)

    def is_generation_closed(self, A: int, up_to: int) -> bool:
        """True if every node of generations 0..up_to is mapped."""
        for j in range(up_to + 1):
            for k in range(1, A**j + 1):
                if NodeId(j, k) not in self.entries:
                    return False
        return True


def chebyshev(p: Point, q: Point) -> int:
    return max(abs(a - b) for a, b in zip(p, q))


def distortion_constant(g: GraphSpec, m: LatticeMap) -> float:
    """Max Chebyshev image distance over the edges of ``g`` within depth.

    Covers the tree edges between mapped generations plus every extra edge;
    returns ``inf`` as soon as an edge endpoint is unmapped.
    """
    A = g.A
    worst = 0.0
    for j in range(m.depth):
        for k in range(1, A**j + 1):
            v = NodeId(j, k)
            pv = m.entries.get(v)
            if pv is None:
                return math.inf
            base = A * (k - 1)
            for t in range(1, A + 1):
                w = NodeId(j + 1, base + t)
                pw = m.entries.get(w)
                if pw is None:
                    return math.inf
                worst = max(worst, float(chebyshev(pv, pw)))
    for a, b in g.extra_edges:
        pa, pb = m.entries.get(a), m.entries.get(b)
        if pa is None or pb is None:
            return math.inf
        worst = max(worst, float(chebyshev(pa, pb)))
    return worst


def lipschitz_check(
    g: GraphSpec,
    m: LatticeMap,
    C: float,
    pairs: Sequence[tuple[NodeId, NodeId]],
) -> Optional[tuple[NodeId, NodeId]]:
    """Verify image-Chebyshev <= C * graph distance on every sampled pair.

    Returns None if the inequality holds everywhere, otherwise the first
    violating pair in lexicographic scan order.
    """
    for v, w in sorted(pairs):
        pv, pw = m.entries.get(v), m.entries.get(w)
        if pv is None or pw is None:
            raise ValidationError(
                f"pair ({v.j},{v.k})-({w.j},{w.k}) has an unmapped endpoint"
            )
        if v == w:
            continue
        if chebyshev(pv, pw) > C * graph_distance(g, v, w):
            return (v, w)
    return None


def refutation_witness(
    A: int,
    m: LatticeMap,
    C: float,
    k_max: int,
    cap: int = DEFAULT_NODE_CAP,
) -> Optional[tuple[int, NodeId, NodeId]]:
    """Search for a same-generation pair violating the C-Lipschitz property.

    Only generations ``k <= k_max`` with ``A**k > (2*ceil(C)*k + 1)**dim``
    are scanned: there the pigeonhole argument guarantees two images at
    Chebyshev distance beyond ``2*ceil(C)*k >= C * d_T``, so a witness must
    exist.  Returns the lexicographically first ``(k, v, w)`` with image
    distance strictly above ``C * d_T(v, w)``, or None; a witness proves the
    map is not a mixing embedding with constant ``C``.
    """
    if C <= 0:
        raise ValidationError(f"constant must be positive, got {C}")
    if k_max < 0:
        raise ValidationError(f"k_max must be >= 0, got {k_max}")
    ceil_c = math.ceil(C)
    for k in range(1, k_max + 1):
        size = A**k
        if size > cap:
            raise CapacityError(
                f"generation {k} holds {size} nodes, exceeding the cap of {cap}"
            )
        if size <= (2 * ceil_c * k + 1) ** m.dim:
            continue
        if not m.is_generation_closed(A, k):
            raise ValidationError(f"map is not generation-closed up to {k}")
        for kv in range(1, size + 1):
            v = NodeId(k, kv)
            pv = m.entries[v]
            for kw in range(kv + 1, size + 1):
                w = NodeId(k, kw)
                if chebyshev(pv, m.entries[w]) > C * tree_distance(v, w, A):
                    return (k, v, w)
    return None


def mixing_transfer(envelope: MixingEnvelope, C: float) -> MixingEnvelope:
    """Transfer a mixing envelope through a C-Lipschitz embedding.

    The transferred envelope is ``n -> envelope(floor(n / C))`` for
    ``n >= C`` and the vacuous bound 1 below (the inequality says nothing
    there).  Exact provenance downgrades to assumed: the transfer is an
    upper bound, not an identity.
    """
    if C < 1:
        raise ValidationError(f"transfer constant must be >= 1, got {C}")
    provenance = "assumed" if envelope.provenance == "exact" else envelope.provenance
    return MixingEnvelope(
        kind="transferred",
        provenance=provenance,
        inner=envelope,
        scale=float(C),
    )


def breadth_first_row_layout(A: int, depth: int, dim: int) -> LatticeMap:
    """The row layout of the first ``depth+1`` generations.

    In dimension 2, generation ``j`` sits at height ``j`` with index ``k``
    at column ``k``; in dimension 1 the nodes are placed at their
    breadth-first enumeration index.
    """
    if dim not in (1, 2):
        raise ValidationError(f"row layout is defined for dimensions 1 and 2, got {dim}")
    entries: dict[NodeId, Point] = {}
    offset = 0
    for j in range(depth + 1):
        for k in range(1, A**j + 1):
            node = NodeId(j, k)
            if dim == 2:
                entries[node] = (k, j)
            else:
                entries[node] = (offset + k - 1,)
        offset += A**j
    return LatticeMap(dim=dim, entries=entries)


def packed_layout(A: int, depth: int, dim: int) -> LatticeMap:
    """A compact layout: each generation fills a near-cubical box in
    ``Z**dim``, boxes stacked generation by generation along the last axis.

    Useful as a test subject for refutation: its generations are as tight
    as an injective image can be, so the pigeonhole forces large pair
    distortion as soon as a generation outgrows its box.
    """
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    entries: dict[NodeId, Point] = {}
    z_offset = 0
    for j in range(depth + 1):
        size = A**j
        side = max(1, math.ceil(size ** (1.0 / dim)))
        while side**dim < size:
            side += 1
        max_last = 0
        for k in range(1, size + 1):
            rem = k - 1
            coords = []
            for _ in range(dim - 1):
                coords.append(rem % side)
                rem //= side
            coords.append(rem + z_offset)
            max_last = max(max_last, rem)
            entries[NodeId(j, k)] = tuple(coords)
        z_offset += max_last + 1
    return LatticeMap(dim=dim, entries=entries)


def parse_lattice_map(text: str) -> LatticeMap:
    """Parse a lattice map from text lines ``j k x1 ... xN``.

    Blank lines are skipped and ``#`` starts a comment; the dimension is
    inferred from the first data line.
    """
    entries: dict[NodeId, Point] = {}
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ValidationError(
                f"lattice map line {lineno}: expected 'j k x1 ... xN', got {raw!r}"
            )
        try:
            numbers = [int(p) for p in parts]
        except ValueError as exc:
            raise ValidationError(f"lattice map line {lineno}: {exc}") from exc
        node = NodeId(numbers[0], numbers[1])
        point = tuple(numbers[2:])
        if dim is None:
            dim = len(point)
        elif len(point) != dim:
            raise ValidationError(
                f"lattice map line {lineno}: dimension {len(point)} != {dim}"
            )
        if node in entries:
            raise ValidationError(f"lattice map line {lineno}: node repeated")
        entries[node] = point
    if not entries:
        raise ValidationError("lattice map is empty")
    return LatticeMap(dim=dim, entries=entries)
