"""Synthetic instance and adjacency sampling with splittable random streams.

Every sampler takes an explicit stream. Streams are Philox counter-based
generators keyed by ``SeedSequence(master_seed, spawn_key=path)``, so any
worker can rebuild its own stream from the master seed and an integer path
without coordination, and results cannot depend on scheduling order.
"""

from __future__ import annotations

import numpy as np

from .errors import RetryExhaustedError
from .model import MmlsbmInstance, GroundTruth, assemble_ground_truth, planted_connectivity
from .tensors import Tensor3

__all__ = [
    "substream",
    "as_generator",
    "sample_instance",
    "sample_adjacency",
    "sample_dataset",
    "write_edge_list",
    "read_edge_list",
]


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for an integer path under one master seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an int master seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return substream(int(rng))


def _draw_partition(rng, length, classes, max_retries, what):
    # uniform labels, resampled until every class is hit
    for _ in range(max_retries):
        labels = rng.integers(0, classes, size=length)
        if np.bincount(labels, minlength=classes).min() > 0:
            return labels.astype(np.int64)
    raise RetryExhaustedError(
        f"{what}: no draw with all {classes} classes nonempty in {max_retries} tries"
    )


def sample_instance(
    n: int,
    L: int,
    M: int,
    K: int,
    p_max: float,
    alpha: float,
    rng,
    max_retries: int = 100,
) -> MmlsbmInstance:
    """Sample uniform layer groups and memberships with a planted connectivity.

    All M groups use K communities and the same B (p_max on the diagonal,
    alpha*p_max off it). Draws with an empty group or community are rejected,
    up to ``max_retries`` per label vector.
    """
    if M > L:
        raise ValueError(f"M={M} groups cannot exceed L={L} layers")
    if K > n:
        raise ValueError(f"K={K} communities cannot exceed n={n} nodes")
    rng = as_generator(rng)
    z = _draw_partition(rng, L, M, max_retries, "layer labels")
    memberships = tuple(
        _draw_partition(rng, n, K, max_retries, f"memberships[{m}]") for m in range(M)
    )
    b = planted_connectivity(K, p_max, alpha)
    return MmlsbmInstance(
        n=n,
        L=L,
        M=M,
        K=(K,) * M,
        layer_labels=z,
        memberships=memberships,
        B=(b,) * M,
        p_max=p_max,
    )


def sample_adjacency(gt: GroundTruth, rng) -> Tensor3:
    """Bernoulli adjacency tensor from p_star: symmetric 0/1 slices, zero diagonal."""
    rng = as_generator(rng)
    L, n, _ = gt.p_star.dims
    iu = np.triu_indices(n, k=1)
    out = np.zeros((L, n, n))
    for l in range(L):
        probs = gt.p_star.slice(l)[iu]
        edges = (rng.random(probs.shape[0]) < probs).astype(np.float64)
        sl = np.zeros((n, n))
        sl[iu] = edges
        out[l] = sl + sl.T
    return Tensor3(out)


def sample_dataset(n, L, M, K, p_max, alpha, rng, max_retries: int = 100):
    """Convenience: one instance, its ground truth, and one adjacency draw."""
    rng = as_generator(rng)
    inst = sample_instance(n, L, M, K, p_max, alpha, rng, max_retries)
    gt = assemble_ground_truth(inst)
    a = sample_adjacency(gt, rng)
    return inst, gt, a


def write_edge_list(x: Tensor3, path) -> None:
    """Write a 0/1 adjacency tensor as text lines ``l i j``.

    Indices are 0-based; each undirected edge appears once with i < j.
    """
    arr = x.array
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ValueError("edge-list export requires a 0/1 tensor")
    L, n, _ = x.dims
    iu = np.triu_indices(n, k=1)
    with open(path, "w", encoding="utf-8") as fh:
        for l in range(L):
            sl = x.slice(l)
            present = sl[iu] != 0.0
            for i, j in zip(iu[0][present], iu[1][present]):
                fh.write(f"{l} {i} {j}\n")


def read_edge_list(path, layers: int | None = None, nodes: int | None = None) -> Tensor3:
    """Read ``l i j`` lines back into a symmetric 0/1 tensor.

    Dims are inferred from the maxima when not given. Blank lines and lines
    starting with ``#`` are skipped.
    """
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 'l i j', got {line!r}")
            l, i, j = (int(p) for p in parts)
            if min(l, i, j) < 0 or i == j:
                raise ValueError(f"line {lineno}: bad edge ({l}, {i}, {j})")
            edges.append((l, i, j))
    if layers is None:
        layers = max((e[0] for e in edges), default=-1) + 1
    if nodes is None:
        nodes = max((max(e[1], e[2]) for e in edges), default=-1) + 1
    if layers < 1 or nodes < 1:
        raise ValueError("cannot infer dims from an empty edge list; pass layers and nodes")
    out = np.zeros((layers, nodes, nodes))
    for l, i, j in edges:
        if l >= layers or max(i, j) >= nodes:
            raise ValueError(f"edge ({l}, {i}, {j}) outside dims ({layers}, {nodes})")
        out[l, i, j] = 1.0
        out[l, j, i] = 1.0
    return Tensor3(out)
