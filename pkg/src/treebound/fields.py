"""Bounded, centered random fields on tree regions with known dependence.

Three generative models are provided, chosen so that the hypotheses of the
tail bounds (boundedness, centering, an envelope-certified mixing rate)
hold exactly for the first two:

* ``independent``: values i.i.d. uniform on [-C, C];
* ``m_dependent``: the value at ``v`` is ``C`` times the mean of i.i.d.
  uniform [-1, 1] innovations over the tree-ball of radius ``m`` around
  ``v`` (in the infinite tree), so node sets at tree distance > 2m are
  exactly independent;
* ``branching_ar``: an autoregression down the tree, ``Z_root`` uniform on
  [-C, C] and ``Z_child = a * Z_parent + (1 - |a|) * U`` with ``U`` uniform
  on [-C, C], which keeps ``|Z| <= C`` inductively but carries no certified
  mixing envelope (its certificate is flagged heuristic).

Every innovation comes from a counter-based generator keyed on
``(master_seed, replicate_index, node)``: a fixed avalanche mix of the
three values.  Results therefore never depend on iteration order, chunking
or worker count, which is what makes Monte Carlo runs reproducible and
mergeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .bounds import MixingEnvelope
from .errors import ValidationError
from .tree import NodeId, Region, children, parent, region_nodes

AR_TABLE_HORIZON = 64

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_C_SEED = np.uint64(0x9E3779B97F4A7C15)
_C_REP = np.uint64(0xA0761D6478BD642F)
_C_GEN = np.uint64(0xE7037ED1A0B428DB)
_C_IDX = np.uint64(0x8EBC6AF09C88C6E3)
_INV_2_53 = 1.0 / (1 << 53)


def _mix64(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def _innovations(seed: int, reps: np.ndarray, js: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Uniform [-1, 1) innovations keyed on (seed, replicate, node).

    Shape (len(reps), len(js)); pure function of its inputs.
    """
    with np.errstate(over="ignore"):
        s = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _C_SEED)
        r = _mix64(s ^ _mix64(reps.astype(np.uint64) ^ _C_REP))
        n = _mix64(_mix64(js.astype(np.uint64) ^ _C_GEN) ^ _mix64(ks.astype(np.uint64) ^ _C_IDX))
        h = _mix64(r[:, None] ^ n[None, :])
    u = (h >> np.uint64(11)).astype(np.float64) * _INV_2_53
    return 2.0 * u - 1.0


@dataclass(frozen=True)
class FieldSpec:
    """Generative model of a bounded, centered random field on the tree."""

    kind: str
    C: float
    master_seed: int
    m: Optional[int] = None
    a: Optional[float] = None

    def __post_init__(self) -> None:
        if self.C <= 0 or not math.isfinite(self.C):
            raise ValidationError(f"amplitude bound C must be positive, got {self.C!r}")
        if not isinstance(self.master_seed, int) or isinstance(self.master_seed, bool):
            raise ValidationError(f"master_seed must be an int, got {self.master_seed!r}")
        if self.kind == "independent":
            pass
        elif self.kind == "m_dependent":
            if self.m is None or self.m < 1:
                raise ValidationError(f"m_dependent field needs radius m >= 1, got {self.m!r}")
        elif self.kind == "branching_ar":
            if self.a is None or not abs(self.a) < 1:
                raise ValidationError(f"branching_ar field needs |a| < 1, got {self.a!r}")
        else:
            raise ValidationError(f"unknown field kind {self.kind!r}")

    @classmethod
    def independent(cls, C: float = 1.0, master_seed: int = 0) -> "FieldSpec":
        return cls(kind="independent", C=C, master_seed=master_seed)

    @classmethod
    def m_dependent(cls, m: int, C: float = 1.0, master_seed: int = 0) -> "FieldSpec":
        return cls(kind="m_dependent", C=C, master_seed=master_seed, m=m)

    @classmethod
    def branching_ar(cls, a: float, C: float = 1.0, master_seed: int = 0) -> "FieldSpec":
        return cls(kind="branching_ar", C=C, master_seed=master_seed, a=a)


class FieldCertificate(NamedTuple):
    C: float
    sigma2: float
    envelope: MixingEnvelope


def field_certificate(spec: FieldSpec) -> FieldCertificate:
    """The (C, sigma2, envelope) triple the bounds consume.

    ``sigma2`` is an upper bound for the per-node variance (C**2/3 for all
    kinds: exact for independent, conservative for the averaged and
    autoregressive kinds).  The independent and m-dependent envelopes are
    exact; the branching autoregression gets a geometric table that is only
    a plausible shape, flagged heuristic, to be tightened or refuted with
    sampled lower bounds.
    """
    sigma2 = spec.C**2 / 3.0
    if spec.kind == "independent":
        return FieldCertificate(spec.C, sigma2, MixingEnvelope.zero())
    if spec.kind == "m_dependent":
        return FieldCertificate(spec.C, sigma2, MixingEnvelope.m_dependent(spec.m))
    decay = abs(spec.a)
    values = [min(0.25, decay**n / 4.0) for n in range(1, AR_TABLE_HORIZON + 1)]
    return FieldCertificate(
        spec.C, sigma2, MixingEnvelope.table(values, provenance="heuristic")
    )


def _ball(v: NodeId, A: int, m: int) -> list[NodeId]:
    """Nodes of the infinite tree within tree distance m of v, sorted."""
    seen = {v}
    frontier = [v]
    for _ in range(m):
        nxt = []
        for u in frontier:
            p = parent(u, A)
            neighbors = children(u, A) + ([p] if p is not None else [])
            for nb in neighbors:
                if nb not in seen:
                    seen.add(nb)
                    nxt.append(nb)
        frontier = nxt
    return sorted(seen)


def _node_arrays(nodes: Sequence[NodeId]) -> tuple[np.ndarray, np.ndarray]:
    js = np.array([v.j for v in nodes], dtype=np.uint64)
    ks = np.array([v.k for v in nodes], dtype=np.uint64)
    return js, ks


def _values_independent(spec: FieldSpec, nodes, reps: np.ndarray) -> np.ndarray:
    js, ks = _node_arrays(nodes)
    return spec.C * _innovations(spec.master_seed, reps, js, ks)


def _values_m_dependent(spec: FieldSpec, nodes, A: int, reps: np.ndarray) -> np.ndarray:
    balls = [_ball(v, A, spec.m) for v in nodes]
    support = sorted({u for ball in balls for u in ball})
    col = {u: i for i, u in enumerate(support)}
    member_cols = np.array([col[u] for ball in balls for u in ball], dtype=np.intp)
    sizes_int = [len(ball) for ball in balls]
    offsets = np.cumsum([0] + sizes_int[:-1]).astype(np.intp)
    sizes = np.array(sizes_int, dtype=np.float64)
    js, ks = _node_arrays(support)
    innov = _innovations(spec.master_seed, reps, js, ks)
    sums = np.add.reduceat(innov[:, member_cols], offsets, axis=1)
    return spec.C * (sums / sizes)


def _values_branching_ar(spec: FieldSpec, nodes, A: int, reps: np.ndarray) -> np.ndarray:
    closure = set(nodes)
    stack = list(nodes)
    while stack:
        p = parent(stack.pop(), A)
        if p is not None and p not in closure:
            closure.add(p)
            stack.append(p)
    ordered = sorted(closure)
    col = {u: i for i, u in enumerate(ordered)}
    js, ks = _node_arrays(ordered)
    innov = _innovations(spec.master_seed, reps, js, ks)
    a, C = spec.a, spec.C
    values = np.empty_like(innov)
    by_gen: dict[int, list[NodeId]] = {}
    for u in ordered:
        by_gen.setdefault(u.j, []).append(u)
    for gen in sorted(by_gen):
        cols = np.array([col[u] for u in by_gen[gen]], dtype=np.intp)
        if gen == 0:
            values[:, cols] = C * innov[:, cols]
        else:
            parent_cols = np.array(
                [col[parent(u, A)] for u in by_gen[gen]], dtype=np.intp
            )
            values[:, cols] = a * values[:, parent_cols] + (1.0 - abs(a)) * C * innov[:, cols]
    keep = np.array([col[u] for u in nodes], dtype=np.intp)
    return values[:, keep]


def field_values(
    spec: FieldSpec, nodes: Sequence[NodeId], A: int, replicates: Sequence[int]
) -> np.ndarray:
    """Field values at ``nodes`` for each replicate; shape (len(replicates), len(nodes)).

    Deterministic given (master_seed, replicate, node); independent of the
    order in which replicates are batched.
    """
    if not nodes:
        return np.zeros((len(replicates), 0))
    reps = np.asarray(list(replicates), dtype=np.uint64)
    if spec.kind == "independent":
        out = _values_independent(spec, nodes, reps)
    elif spec.kind == "m_dependent":
        out = _values_m_dependent(spec, nodes, A, reps)
    else:
        out = _values_branching_ar(spec, nodes, A, reps)
    limit = spec.C * (1.0 + 1e-12)
    if out.size and np.abs(out).max() > limit:
        raise RuntimeError("amplitude bound violated by a sampled value")
    return out


def sample_field(
    spec: FieldSpec, region: Region, A: int, replicate_index: int
) -> dict[NodeId, float]:
    """One realization of the field on ``region`` as a node-to-value map."""
    nodes = list(region_nodes(region, A))
    if not nodes:
        return {}
    values = field_values(spec, nodes, A, [replicate_index])[0]
    return {v: float(x) for v, x in zip(nodes, values)}


def region_sums(
    spec: FieldSpec,
    region: Region,
    A: int,
    replicates: Sequence[int],
    chunk: int = 512,
) -> np.ndarray:
    """``sum_v Z_v`` over ``region`` for each replicate, chunked for memory.

    Chunk boundaries do not affect the result: each replicate's sum is a
    row-wise reduction of values that depend only on (seed, replicate, node).
    """
    nodes = list(region_nodes(region, A))
    reps = list(replicates)
    out = np.empty(len(reps), dtype=np.float64)
    for start in range(0, len(reps), chunk):
        batch = reps[start : start + chunk]
        out[start : start + len(batch)] = field_values(spec, nodes, A, batch).sum(axis=1)
    return out


def field_to_csv(values: dict[NodeId, float]) -> str:
    """Debug dump of a sampled field as CSV lines ``j,k,value``."""
    lines = ["j,k,value"]
    for v in sorted(values):
        lines.append(f"{v.j},{v.k},{values[v]!r}")
    return "\n".join(lines) + "\n"
