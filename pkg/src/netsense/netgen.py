"""Graph generation, edge-list I/O and the scaled interaction matrix.

All randomness goes through :func:`make_rng`, a numpy ``Generator`` backed by
PCG64 and seeded from a 64-bit integer. Independent trials draw their seeds
with :func:`derive_seed`, which hashes ``(master, *keys)`` through numpy's
``SeedSequence`` so that trial seeds never depend on scheduling order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import GraphError

log = logging.getLogger(__name__)

KINDS = (
    "er",
    "ba",
    "powerlaw-config",
    "ring-lattice",
    "watts-strogatz",
    "random-geometric",
    "star",
    "path",
    "cycle",
    "complete",
    "file",
)
WEIGHT_DISTS = ("constant", "uniform", "file")


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``(master, *keys)``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _freeze(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected simple graph with interaction strengths in (0, 1].

    ``edges`` is an ``(E, 2)`` integer array with ``i < j`` on each row,
    sorted lexicographically; ``weights`` holds the matching strengths.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise GraphError(f"node count must be >= 1, got {n}")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(weights) != len(edges):
            raise GraphError("edges and weights differ in length")
        if len(edges):
            i, j = edges[:, 0], edges[:, 1]
            if np.any(i >= j):
                raise GraphError("edges must satisfy i < j (no self-loops)")
            if i.min() < 0 or j.max() >= n:
                raise GraphError("edge index out of range")
            key = i * n + j
            if np.unique(key).size != key.size:
                raise GraphError("duplicate edges")
            if not np.all((weights > 0) & (weights <= 1)):
                raise GraphError("edge weights must lie in (0, 1]")
            order = np.lexsort((j, i))
            edges, weights = edges[order], weights[order]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", _freeze(edges.copy()))
        object.__setattr__(self, "weights", _freeze(weights.copy()))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @property
    def kappa(self) -> float:
        """Realized mean degree 2E/n."""
        return 2.0 * self.num_edges / self.n

    def with_weights(self, weights) -> "WeightedGraph":
        return WeightedGraph(self.n, self.edges, weights)

    def relabel(self, perm) -> "WeightedGraph":
        """Graph with node ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm)
        e = perm[self.edges]
        return WeightedGraph(self.n, np.sort(e, axis=1), self.weights)

    def stats(self) -> dict:
        deg = self.degree
        values, counts = np.unique(deg, return_counts=True)
        return {
            "n": self.n,
            "edges": self.num_edges,
            "kappa": self.kappa,
            "degree_min": int(deg.min()),
            "degree_max": int(deg.max()),
            "degree_histogram": [[int(v), int(c)] for v, c in zip(values, counts)],
        }


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Dense symmetric interaction matrix with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError("interaction matrix must be square")
        if not np.array_equal(a, a.T):
            raise GraphError("interaction matrix must be exactly symmetric")
        if np.any(np.diag(a) != 0):
            raise GraphError("interaction matrix must have a zero diagonal")
        object.__setattr__(self, "entries", _freeze(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "InteractionMatrix":
        return cls(np.zeros((n, n)))


def interaction_matrix(g: WeightedGraph) -> InteractionMatrix:
    """Build ``A`` with ``A[i, j] = A[j, i] = rho_ij / kappa``."""
    if g.num_edges == 0:
        raise GraphError("interaction matrix needs at least one edge (kappa = 0)")
    a = np.zeros((g.n, g.n))
    vals = g.weights / g.kappa
    i, j = g.edges[:, 0], g.edges[:, 1]
    a[i, j] = vals
    a[j, i] = vals
    return InteractionMatrix(a)


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for one graph.

    Only the parameters relevant to ``kind`` are read: ``p`` (er), ``m`` (ba),
    ``gamma``/``k_min`` (powerlaw-config), ``k`` lattice half-degree
    (ring-lattice, watts-strogatz), ``rewire`` (watts-strogatz), ``radius``
    (random-geometric) and ``path`` (file).
    """

    kind: str
    n: int = 0
    p: float | None = None
    m: int | None = None
    gamma: float | None = None
    k_min: int = 1
    k: int | None = None
    rewire: float | None = None
    radius: float | None = None
    path: str | None = None
    weights: str = "constant"
    seed: int = 0

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise GraphError(f"unknown graph kind {self.kind!r}; expected one of {KINDS}")
        if self.weights not in WEIGHT_DISTS:
            raise GraphError(f"unknown weight distribution {self.weights!r}")
        if self.weights == "file" and self.kind != "file":
            raise GraphError("weights='file' is only valid for kind='file'")
        if self.kind == "file":
            if not self.path:
                raise GraphError("kind='file' requires a path")
            if self.weights == "uniform":
                raise GraphError("kind='file' takes weights 'constant' or 'file'")
            return
        if self.n < 1:
            raise GraphError(f"n must be >= 1, got {self.n}")
        need = {
            "er": ("p",),
            "ba": ("m",),
            "powerlaw-config": ("gamma",),
            "ring-lattice": ("k",),
            "watts-strogatz": ("k", "rewire"),
            "random-geometric": ("radius",),
        }.get(self.kind, ())
        for name in need:
            if getattr(self, name) is None:
                raise GraphError(f"kind={self.kind!r} requires parameter {name!r}")
        if self.kind == "er" and not 0 < self.p <= 1:
            raise GraphError(f"p must be in (0, 1], got {self.p}")
        if self.kind == "ba":
            if self.m < 1:
                raise GraphError(f"m must be >= 1, got {self.m}")
            if self.n <= self.m:
                raise GraphError(f"ba needs n > m (n={self.n}, m={self.m})")
        if self.kind == "powerlaw-config":
            if not self.gamma > 2:
                raise GraphError(f"gamma must be > 2, got {self.gamma}")
            if not 1 <= self.k_min < self.n:
                raise GraphError(f"k_min must be in [1, n), got {self.k_min}")
        if self.kind in ("ring-lattice", "watts-strogatz"):
            if self.k < 1 or self.n <= 2 * self.k:
                raise GraphError(f"lattice needs 1 <= k and n > 2k (n={self.n}, k={self.k})")
        if self.kind == "watts-strogatz" and not 0 <= self.rewire <= 1:
            raise GraphError(f"rewire must be in [0, 1], got {self.rewire}")
        if self.kind == "random-geometric" and not self.radius > 0:
            raise GraphError(f"radius must be > 0, got {self.radius}")
        if self.kind in ("star", "path", "complete") and self.n < 2:
            raise GraphError(f"{self.kind} needs n >= 2")
        if self.kind == "cycle" and self.n < 3:
            raise GraphError("cycle needs n >= 3")


# -- generators: each returns an (E, 2) array of candidate pairs -------------

def _er_pairs(n, p, rng):
    rows = []
    for i in range(n - 1):
        hit = np.flatnonzero(rng.random(n - 1 - i) < p)
        if hit.size:
            rows.append(np.column_stack((np.full(hit.size, i), hit + i + 1)))
    return np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)


def _ba_pairs(n, m, rng):
    # Start from m isolated nodes; node m attaches to all of them.
    repeated = np.empty(2 * m * n, dtype=np.int64)
    fill = 0
    targets = list(range(m))
    out = np.empty((m * (n - m), 2), dtype=np.int64)
    row = 0
    for src in range(m, n):
        for t in targets:
            out[row] = (t, src)
            row += 1
        repeated[fill:fill + m] = targets
        repeated[fill + m:fill + 2 * m] = src
        fill += 2 * m
        chosen = set()
        while len(chosen) < m:
            chosen.add(int(repeated[rng.integers(fill)]))
        targets = sorted(chosen)
    return out


def powerlaw_degrees(n, gamma, k_min, rng):
    """Sample ``n`` degrees with Pr(k) proportional to k**-gamma on [k_min, n-1].

    An odd degree sum is fixed by incrementing one uniformly chosen degree.
    """
    support = np.arange(k_min, n, dtype=np.int64)
    prob = support.astype(float) ** (-gamma)
    prob /= prob.sum()
    deg = rng.choice(support, size=n, p=prob)
    if deg.sum() % 2:
        deg[rng.integers(n)] += 1
    return deg


def _config_pairs(n, gamma, k_min, rng):
    deg = powerlaw_degrees(n, gamma, k_min, rng)
    stubs = np.repeat(np.arange(n), deg)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    return pairs[pairs[:, 0] != pairs[:, 1]]


def _lattice_pairs(n, k):
    base = np.arange(n)
    return np.concatenate(
        [np.column_stack((base, (base + j) % n)) for j in range(1, k + 1)]
    )


def _ws_pairs(n, k, rewire, rng):
    nbrs = [set() for _ in range(n)]
    for u, v in _lattice_pairs(n, k):
        nbrs[u].add(int(v))
        nbrs[v].add(int(u))
    for j in range(1, k + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in nbrs[u] or rng.random() >= rewire:
                continue
            if len(nbrs[u]) >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == u or w in nbrs[u]:
                w = int(rng.integers(n))
            nbrs[u].discard(v)
            nbrs[v].discard(u)
            nbrs[u].add(w)
            nbrs[w].add(u)
    return np.array([(u, v) for u in range(n) for v in nbrs[u] if u < v], dtype=np.int64).reshape(-1, 2)


def _rgg_pairs(n, radius, rng):
    pos = rng.random((n, 2))
    return cKDTree(pos).query_pairs(radius, output_type="ndarray").astype(np.int64)


def _canonical(pairs, n):
    """Order each pair, drop self-loops and duplicates, sort rows."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    key = np.unique(pairs[:, 0] * n + pairs[:, 1])
    return np.column_stack((key // n, key % n))


def generate(spec: GraphSpec) -> WeightedGraph:
    """Generate the graph described by ``spec``.

    Output is a pure function of ``spec`` (including its seed).
    """
    spec.validate()
    if spec.kind == "file":
        mode = "from-file" if spec.weights == "file" else "constant"
        return load_edge_list(spec.path, mode)[0]

    n = spec.n
    rng = make_rng(spec.seed)
    kind = spec.kind
    if kind == "er":
        pairs = _er_pairs(n, spec.p, rng)
    elif kind == "ba":
        pairs = _ba_pairs(n, spec.m, rng)
    elif kind == "powerlaw-config":
        pairs = _config_pairs(n, spec.gamma, spec.k_min, rng)
    elif kind == "ring-lattice":
        pairs = _lattice_pairs(n, spec.k)
    elif kind == "watts-strogatz":
        pairs = _ws_pairs(n, spec.k, spec.rewire, rng)
    elif kind == "random-geometric":
        pairs = _rgg_pairs(n, spec.radius, rng)
    elif kind == "star":
        pairs = np.column_stack((np.zeros(n - 1, dtype=np.int64), np.arange(1, n)))
    elif kind == "path":
        pairs = np.column_stack((np.arange(n - 1), np.arange(1, n)))
    elif kind == "cycle":
        pairs = np.column_stack((np.arange(n), (np.arange(n) + 1) % n))
    else:  # complete
        pairs = np.column_stack(np.triu_indices(n, 1))
    edges = _canonical(pairs, n)

    if spec.weights == "uniform":
        weights = 1.0 - rng.random(len(edges))  # (0, 1]
    else:
        weights = np.ones(len(edges))
    return WeightedGraph(n, edges, weights)


# -- edge-list files ----------------------------------------------------------

@dataclass
class LoadReport:
    """What :func:`load_edge_list` did besides building the graph."""

    duplicates: int = 0
    self_loops: int = 0
    labels: list = field(default_factory=list)


def load_edge_list(path, weight_mode: str = "constant"):
    """Read a whitespace-separated edge list.

    Each non-blank line holds two node labels and an optional weight. Labels
    are mapped to 0-based indices in order of first appearance. Lines starting
    with ``#`` are skipped.

    Parameters
    ----------
    path : path-like
        Text file to read.
    weight_mode : {"constant", "from-file"}
        ``"constant"`` sets every weight to 1 and ignores a third column;
        ``"from-file"`` uses the third column (1 when absent), which must lie
        in (0, 1].

    Returns
    -------
    graph : WeightedGraph
    report : LoadReport
        Counts of collapsed duplicate edges and dropped self-loops, plus the
        label of each node index.
    """
    if weight_mode not in ("constant", "from-file"):
        raise GraphError(f"unknown weight_mode {weight_mode!r}")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphError(f"cannot read edge list {path}: {exc}") from exc

    index: dict[str, int] = {}
    seen: dict[tuple[int, int], float] = {}
    report = LoadReport()
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) < 2:
            raise GraphError(f"{path}:{lineno}: expected at least 2 columns")
        u, v = (index.setdefault(lab, len(index)) for lab in parts[:2])
        w = 1.0
        if weight_mode == "from-file" and len(parts) >= 3:
            try:
                w = float(parts[2])
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: bad weight {parts[2]!r}") from exc
            if not 0 < w <= 1:
                raise GraphError(f"{path}:{lineno}: weight {w} outside (0, 1]")
        if u == v:
            report.self_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            report.duplicates += 1
            continue
        seen[key] = w
    if report.self_loops:
        log.warning("%s: dropped %d self-loop(s)", path, report.self_loops)
    report.labels = list(index)
    if not index:
        raise GraphError(f"{path}: no edges")
    edges = np.array(list(seen), dtype=np.int64).reshape(-1, 2)
    weights = np.array(list(seen.values()), dtype=float)
    return WeightedGraph(len(index), edges, weights), report


def write_edge_list(g: WeightedGraph, path) -> None:
    """Write ``i j w`` lines, weights with 17 significant digits."""
    with open(path, "w", newline="\n") as fh:
        for (i, j), w in zip(g.edges, g.weights):
            fh.write(f"{i} {j} {w:.17g}\n")
