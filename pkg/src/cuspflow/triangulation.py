"""Combinatorics of ideal triangulations of cusped 3-manifolds.

A triangulated cusped 3-manifold is described here purely by gluing
combinatorics: a list of tetrahedra, each carrying six global edge
indices (one per edge slot) and four global cusp indices (one per ideal
vertex).  Edge slots are always listed in the fixed order

    12, 13, 14, 34, 24, 23

so that slot ``i`` and slot ``i + 3`` refer to opposite edges of the
tetrahedron.  Every matrix built by this module inherits that order.

Two integer matrices summarize the gluing:

* the incidence matrix (``num_edges`` x ``6 * num_tets``) maps
  tetrahedron edge slots to global edge classes, one 1 per column;
* the cusp matrix (``num_cusps`` x ``num_edges``) counts how many ends
  of each edge class lie on each cusp; every column sums to 2.

Adding ``C.T @ x`` to an edge-length vector rescales the horospheres at
the cusps (a change of decoration) and never changes dihedral angles;
``gauge_project`` removes exactly that slack by projecting a length
vector orthogonally onto the kernel of ``C``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SLOT_LABELS = ("12", "13", "14", "34", "24", "23")

# vertex indices (0-based, so vertex "1" of the labels is 0) at the two
# ends of each edge slot
SLOT_ENDPOINTS = ((0, 1), (0, 2), (0, 3), (2, 3), (1, 3), (1, 2))


class TriangulationError(ValueError):
    """Malformed or combinatorially inconsistent triangulation data."""


@dataclass(frozen=True)
class Tet:
    """One ideal tetrahedron: global edge ids per slot, cusp ids per vertex."""

    edges: tuple[int, int, int, int, int, int]
    cusps: tuple[int, int, int, int]


@dataclass(frozen=True)
class CuspedTriangulation:
    num_edges: int
    num_cusps: int
    tets: tuple[Tet, ...]

    @property
    def num_tets(self) -> int:
        return len(self.tets)


def _require(cond, msg):
    if not cond:
        raise TriangulationError(msg)


def parse_triangulation(text: str) -> CuspedTriangulation:
    """Parse a triangulation document (JSON).

    The document must contain ``num_edges``, ``num_cusps`` and a
    nonempty list ``tets`` whose entries have ``edges`` (6 global edge
    indices in slot order 12, 13, 14, 34, 24, 23) and ``cusps`` (4
    global cusp indices for vertices 1-4).  Indices are 0-based.  An
    optional per-tet ``id`` is used only in error messages and must be
    unique.  Structural problems raise :class:`TriangulationError`;
    manifold-level consistency is checked separately by :func:`validate`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TriangulationError(f"malformed triangulation document: {exc}") from exc
    _require(isinstance(doc, dict), "triangulation document must be a JSON object")
    for field in ("num_edges", "num_cusps", "tets"):
        _require(field in doc, f"missing field {field!r}")
    num_edges = doc["num_edges"]
    num_cusps = doc["num_cusps"]
    _require(isinstance(num_edges, int) and num_edges > 0, "num_edges must be a positive integer")
    _require(isinstance(num_cusps, int) and num_cusps > 0, "num_cusps must be a positive integer")
    raw_tets = doc["tets"]
    _require(isinstance(raw_tets, list) and raw_tets, "tets must be a nonempty list")

    tets = []
    seen_ids = set()
    for pos, entry in enumerate(raw_tets):
        _require(isinstance(entry, dict), f"tet #{pos}: entry must be an object")
        tet_id = entry.get("id", pos)
        _require(tet_id not in seen_ids, f"duplicate tet id {tet_id!r}")
        seen_ids.add(tet_id)
        edges = entry.get("edges")
        cusps = entry.get("cusps")
        _require(isinstance(edges, list) and len(edges) == 6,
                 f"tet {tet_id}: edges must list 6 edge indices")
        _require(isinstance(cusps, list) and len(cusps) == 4,
                 f"tet {tet_id}: cusps must list 4 cusp indices")
        for e in edges:
            _require(isinstance(e, int) and 0 <= e < num_edges,
                     f"tet {tet_id}: edge index {e!r} out of range [0, {num_edges})")
        for c in cusps:
            _require(isinstance(c, int) and 0 <= c < num_cusps,
                     f"tet {tet_id}: cusp index {c!r} out of range [0, {num_cusps})")
        tets.append(Tet(edges=tuple(edges), cusps=tuple(cusps)))
    return CuspedTriangulation(num_edges=num_edges, num_cusps=num_cusps, tets=tuple(tets))


def load_triangulation(path) -> CuspedTriangulation:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_triangulation(fh.read())


def edge_degrees(T: CuspedTriangulation) -> np.ndarray:
    """Number of tetrahedron edge slots identified with each edge class."""
    deg = np.zeros(T.num_edges, dtype=int)
    for tet in T.tets:
        for e in tet.edges:
            deg[e] += 1
    return deg


def edge_end_cusps(T: CuspedTriangulation) -> list[tuple[int, int]]:
    """The unordered cusp pair at the two ends of each edge class.

    Every slot occurrence of an edge class must report the same
    unordered end pair; a mismatch means the gluing is inconsistent and
    raises :class:`TriangulationError`.
    """
    ends: list[tuple[int, int] | None] = [None] * T.num_edges
    for ti, tet in enumerate(T.tets):
        for slot, e in enumerate(tet.edges):
            v0, v1 = SLOT_ENDPOINTS[slot]
            pair = tuple(sorted((tet.cusps[v0], tet.cusps[v1])))
            if ends[e] is None:
                ends[e] = pair
            elif ends[e] != pair:
                raise TriangulationError(
                    f"edge {e}: slot {SLOT_LABELS[slot]} of tet {ti} has end cusps "
                    f"{pair}, but an earlier occurrence has {ends[e]}")
    missing = [e for e, p in enumerate(ends) if p is None]
    if missing:
        raise TriangulationError(f"edges never referenced by any tet: {missing}")
    return ends  # type: ignore[return-value]


def validate(T: CuspedTriangulation) -> None:
    """Check manifold-level consistency; raise TriangulationError if broken.

    Requires every edge and cusp index to be used, the edge count to
    equal the tetrahedron count, and consistent end cusps for every
    edge class.
    """
    deg = edge_degrees(T)
    unused = np.nonzero(deg == 0)[0]
    _require(unused.size == 0, f"edges never referenced by any tet: {unused.tolist()}")
    seen_cusps = {c for tet in T.tets for c in tet.cusps}
    missing = sorted(set(range(T.num_cusps)) - seen_cusps)
    _require(not missing, f"cusps never referenced by any vertex slot: {missing}")
    _require(T.num_edges == T.num_tets,
             f"edge count {T.num_edges} != tetrahedron count {T.num_tets}")
    edge_end_cusps(T)


def build_incidence(T: CuspedTriangulation) -> np.ndarray:
    """Incidence matrix: entry (i, 6*j + n) is 1 iff slot n of tet j is edge i."""
    G = np.zeros((T.num_edges, 6 * T.num_tets), dtype=int)
    for j, tet in enumerate(T.tets):
        for n, e in enumerate(tet.edges):
            G[e, 6 * j + n] = 1
    return G


def build_cusp_matrix(T: CuspedTriangulation) -> np.ndarray:
    """Cusp matrix: entry (p, e) counts ends of edge class e on cusp p.

    Ends are counted once per edge class (a loop edge contributes 2 to
    its cusp), using the consistent end pair from :func:`edge_end_cusps`.
    """
    ends = edge_end_cusps(T)
    C = np.zeros((T.num_cusps, T.num_edges), dtype=int)
    for e, (p, q) in enumerate(ends):
        C[p, e] += 1
        C[q, e] += 1
    return C


def gauge_project(l, C) -> np.ndarray:
    """Project edge lengths onto the kernel of the cusp matrix.

    Returns ``l - C.T @ x`` with ``(C @ C.T) x = C @ l``, i.e. the
    orthogonal projection of ``l`` onto ``Ker(C)``.  The removed part
    lies in ``Im(C.T)`` and is therefore a pure change of decoration.
    """
    l = np.asarray(l, dtype=float)
    C = np.asarray(C, dtype=float)
    gram = C @ C.T
    try:
        x = np.linalg.solve(gram, C @ l)
    except np.linalg.LinAlgError as exc:
        raise TriangulationError("cusp matrix is rank deficient") from exc
    return l - C.T @ x


def kernel_basis(C) -> np.ndarray:
    """Orthonormal basis of Ker(C) as columns of an N x (N - s) matrix."""
    C = np.asarray(C, dtype=float)
    s, n = C.shape
    _, sv, vh = np.linalg.svd(C)
    if sv.size < s or sv[s - 1] <= max(n, s) * np.finfo(float).eps * sv[0]:
        raise TriangulationError("cusp matrix is rank deficient")
    return vh[s:].T
