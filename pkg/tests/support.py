"""Independent oracles and dataset builders shared across the test suite.

The oracles deliberately avoid the library's own code paths: brute-force
loops, Floyd-Warshall, scalar softmax, and closed-form sums, so they can
check the real implementations without sharing their bugs.
"""

from __future__ import annotations

import math

import numpy as np

from vloc import AlignedPair, Scan, View


# ---------------------------------------------------------------------------
# graph oracles

def floyd_warshall_distances(n: int, edges: list[tuple[int, int, float]]) -> list[list[float]]:
    """All-pairs shortest-path oracle.

    Floyd-Warshall finds the best path structure; each distance is then
    recomputed by summing the path's edge weights left to right, the same
    accumulation order Dijkstra uses, so unique shortest paths compare
    bit-exactly against the implementation.
    """
    inf = math.inf
    weight = {}
    best = [[inf] * n for _ in range(n)]
    nxt: list[list[int | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        best[i][i] = 0.0
        nxt[i][i] = i
    for a, b, w in edges:
        for i, j in ((a, b), (b, a)):
            if w < best[i][j]:
                best[i][j] = w
                nxt[i][j] = j
                weight[(i, j)] = w
    for a, b, w in edges:
        weight.setdefault((a, b), w)
        weight.setdefault((b, a), w)

    for k in range(n):
        bk = best[k]
        for i in range(n):
            bik = best[i][k]
            if bik == inf:
                continue
            bi = best[i]
            for j in range(n):
                cand = bik + bk[j]
                if cand < bi[j]:
                    bi[j] = cand
                    nxt[i][j] = nxt[i][k]

    dist = [[inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
        for j in range(n):
            if i == j or nxt[i][j] is None:
                continue
            total = 0.0
            node = i
            while node != j:
                step = nxt[node][j]
                total += weight[(node, step)]
                node = step
            dist[i][j] = total
    return dist


# ---------------------------------------------------------------------------
# scoring oracles

def dot_matrix_loop(texts, images) -> np.ndarray:
    """Entry-by-entry dot products with explicit scalar loops."""
    texts = [list(map(float, t)) for t in texts]
    images = [list(map(float, i)) for i in images]
    out = np.zeros((len(texts), len(images)))
    for n, t in enumerate(texts):
        for m, i in enumerate(images):
            out[n, m] = sum(a * b for a, b in zip(t, i))
    return out


def softmax_scalar(logits) -> list[float]:
    """Scalar softmax over a sequence."""
    m = max(logits)
    exps = [math.exp(x - m) for x in logits]
    total = sum(exps)
    return [e / total for e in exps]


def bce_loss_loop(logits, eps: float = 1e-7) -> float:
    """Scalar-loop contrastive loss oracle: row softmax, clamp, cell BCE."""
    n = len(logits)
    total = 0.0
    for i in range(n):
        probs = softmax_scalar(logits[i])
        for j in range(n):
            p = min(max(probs[j], eps), 1.0 - eps)
            y = 1.0 if i == j else 0.0
            total += -(y * math.log(p) + (1.0 - y) * math.log(1.0 - p))
    return total / (n * n)


def ranking_oracle(candidate_ids, probs) -> list[str]:
    """Sort candidates by (probability desc, id asc)."""
    return [cid for cid, _ in sorted(zip(candidate_ids, probs), key=lambda x: (-x[1], x[0]))]


def harmonic(n: int) -> float:
    return sum(1.0 / r for r in range(1, n + 1))


# ---------------------------------------------------------------------------
# dataset builders

def chain_scan(n: int = 3, spacing: float = 2.2, scan_id: str = "chain",
               region_of=None) -> Scan:
    """Views on a line, consecutive views joined; region_of maps index -> region id."""
    views = [
        View(
            view_id=f"v{i:03d}",
            position=(i * spacing, 0.0, 0.0),
            region_id=region_of(i) if region_of else f"room_{i}",
            region_label="room",
        )
        for i in range(n)
    ]
    edges = [(f"v{i:03d}", f"v{i + 1:03d}") for i in range(n - 1)]
    return Scan(scan_id, views, edges)


def random_scan(rng: np.random.Generator, n_views: int, extra_edges: int = 0,
                connected: bool = True, scan_id: str = "rand") -> Scan:
    """Random positions; a random spanning tree plus optional extra edges."""
    views = [
        View(
            view_id=f"v{i:03d}",
            position=tuple(rng.uniform(0.0, 10.0, size=3)),
            region_id=f"region_{rng.integers(0, max(2, n_views // 3))}",
            region_label="room",
        )
        for i in range(n_views)
    ]
    edges = set()
    if connected:
        for i in range(1, n_views):
            j = int(rng.integers(0, i))
            edges.add((f"v{j:03d}", f"v{i:03d}"))
    for _ in range(extra_edges):
        i, j = rng.choice(n_views, size=2, replace=False)
        a, b = sorted((int(i), int(j)))
        edges.add((f"v{a:03d}", f"v{b:03d}"))
    return Scan(scan_id, views, sorted(edges))


def scan_to_document(scan: Scan) -> dict:
    """Round a Scan back into its JSON document shape."""
    return {
        "scan_id": scan.scan_id,
        "views": [
            {
                "id": v.view_id,
                "position": list(v.position),
                "region_id": v.region_id,
                "region_label": v.region_label,
            }
            for v in scan.views.values()
        ],
        "edges": [sorted(e) for e in sorted(scan.edges, key=sorted)],
    }


def separable_stores(scan: Scan, pairs: list[AlignedPair]):
    """One-hot image embeddings plus texts equal to their target's embedding.

    Returns (text_store, image_store) where a perfect scorer must rank every
    sample's target first.
    """
    from vloc import EmbeddingStore, sample_key

    ids = scan.view_ids
    dim = len(ids)
    eye = np.eye(dim, dtype=np.float32)
    image = EmbeddingStore("image", dim, {vid: eye[i] for i, vid in enumerate(ids)})
    index = {vid: i for i, vid in enumerate(ids)}
    text = EmbeddingStore(
        "text", dim, {sample_key(p): eye[index[p.view_id]] for p in pairs}
    )
    return text, image
