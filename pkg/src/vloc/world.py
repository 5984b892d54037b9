"""Navigable view graphs for scanned indoor environments.

A scan is one building's map: a set of discrete views (panorama capture
points) with 3D positions, connected by traversability edges and annotated
with room regions. Distance between views is the shortest-path length over
the edge graph, each edge weighted by the Euclidean distance between its
endpoints' positions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Callable, Iterable, Mapping

import networkx as nx

from .errors import ScanFormatError

__all__ = [
    "UNREACHABLE",
    "View",
    "Scan",
    "euclidean_edge_weight",
    "load_scan",
]

#: Distance reported when no path connects two views. Test with
#: ``math.isinf``; comparisons like ``dist < threshold`` are safely false.
UNREACHABLE: float = math.inf

EdgeWeight = Callable[["View", "View"], float]


@dataclass(frozen=True)
class View:
    """A discrete location in a scan.

    ``region_id`` identifies the specific room instance (two bathrooms get
    two different region ids); ``region_label`` is the room type.
    """

    view_id: str
    position: tuple[float, float, float]
    region_id: str
    region_label: str = ""


def euclidean_edge_weight(a: View, b: View) -> float:
    """Straight-line distance in meters between two views' positions."""
    return math.dist(a.position, b.position)


def _sentinel_region(view_id: str) -> str:
    # Unique per view: an unannotated view shares a region with nothing but itself.
    return f"__unannotated__{view_id}"


class Scan:
    """One building's view graph. Immutable after construction.

    Views keep their given order (document order for loaded scans); that is
    the canonical candidate order for full-scan localization. The graph may
    be disconnected; distance queries across components return
    :data:`UNREACHABLE` rather than raising.
    """

    def __init__(
        self,
        scan_id: str,
        views: Iterable[View],
        edges: Iterable[tuple[str, str]],
        edge_weight: EdgeWeight | None = None,
    ):
        if not scan_id or not isinstance(scan_id, str):
            raise ScanFormatError(f"scan_id must be a nonempty string, got {scan_id!r}")
        weight = edge_weight or euclidean_edge_weight

        by_id: dict[str, View] = {}
        for view in views:
            if not view.view_id or not isinstance(view.view_id, str):
                raise ScanFormatError(
                    f"scan '{scan_id}': view id must be a nonempty string, got {view.view_id!r}"
                )
            if view.view_id in by_id:
                raise ScanFormatError(f"scan '{scan_id}': duplicate view id '{view.view_id}'")
            pos = tuple(float(c) for c in view.position)
            if len(pos) != 3 or not all(math.isfinite(c) for c in pos):
                raise ScanFormatError(
                    f"scan '{scan_id}': view '{view.view_id}' position must be "
                    f"three finite numbers, got {view.position!r}"
                )
            if not view.region_id:
                view = View(view.view_id, pos, _sentinel_region(view.view_id), view.region_label)
            elif pos != view.position:
                view = View(view.view_id, pos, view.region_id, view.region_label)
            by_id[view.view_id] = view

        graph = nx.Graph()
        graph.add_nodes_from(by_id)
        edge_set: set[frozenset[str]] = set()
        for pair in edges:
            try:
                a, b = pair
            except (TypeError, ValueError):
                raise ScanFormatError(
                    f"scan '{scan_id}': edge must be a pair of view ids, got {pair!r}"
                ) from None
            if a == b:
                raise ScanFormatError(f"scan '{scan_id}': self-loop edge on view '{a}'")
            for endpoint in (a, b):
                if endpoint not in by_id:
                    raise ScanFormatError(
                        f"scan '{scan_id}': edge {[a, b]!r} references unknown view '{endpoint}'"
                    )
            key = frozenset((a, b))
            if key in edge_set:
                continue
            edge_set.add(key)
            w = float(weight(by_id[a], by_id[b]))
            if not math.isfinite(w) or w < 0:
                raise ScanFormatError(
                    f"scan '{scan_id}': edge {[a, b]!r} has invalid weight {w!r}"
                )
            graph.add_edge(a, b, weight=w)

        self.scan_id = scan_id
        self.views: Mapping[str, View] = MappingProxyType(by_id)
        self.edges = frozenset(edge_set)
        self._graph = graph
        self._dist_cache: dict[str, dict[str, float]] = {}

    @property
    def view_ids(self) -> tuple[str, ...]:
        """View ids in document order."""
        return tuple(self.views)

    def __len__(self) -> int:
        return len(self.views)

    def __contains__(self, view_id: object) -> bool:
        return view_id in self.views

    def __repr__(self) -> str:
        return (
            f"Scan({self.scan_id!r}, {len(self.views)} views, {len(self.edges)} edges)"
        )

    def _require(self, view_id: str) -> None:
        if view_id not in self.views:
            raise KeyError(f"unknown view id '{view_id}' in scan '{self.scan_id}'")

    def graph_distance(self, a: str, b: str) -> float:
        """Shortest-path length in meters from view ``a`` to view ``b``.

        Returns :data:`UNREACHABLE` when the views lie in different connected
        components. 0 when ``a == b``. Exactly symmetric: the query is
        canonicalized on view-id order before summing, so both directions
        return the identical float.
        """
        self._require(a)
        self._require(b)
        if a == b:
            return 0.0
        src, dst = (a, b) if a <= b else (b, a)
        dist = self._dist_cache.get(src)
        if dist is None:
            dist = nx.single_source_dijkstra_path_length(self._graph, src)
            self._dist_cache[src] = dist
        return dist.get(dst, UNREACHABLE)

    def same_region(self, a: str, b: str) -> bool:
        """True iff both views carry the same annotated region id."""
        self._require(a)
        self._require(b)
        return self.views[a].region_id == self.views[b].region_id


def _read_text(source: str | Path | IO[str]) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text(encoding="utf-8")


def _field(obj: dict, name: str, context: str):
    if name not in obj:
        raise ScanFormatError(f"{context}: missing field '{name}'")
    return obj[name]


def load_scan(source: str | Path | IO[str], edge_weight: EdgeWeight | None = None) -> Scan:
    """Parse and validate a JSON scan document.

    Expected shape::

        {"scan_id": "...",
         "views": [{"id": "...", "position": [x, y, z],
                    "region_id": "...", "region_label": "..."}, ...],
         "edges": [["id", "id"], ...]}

    Positions are in meters. Views missing a ``region_id`` (or carrying an
    empty one) get a sentinel region unique to the view, so they never match
    another view in a same-region query. ``edge_weight`` overrides the
    Euclidean edge weighting when supplied.

    Raises :class:`ScanFormatError` naming the offending view or edge on any
    structural problem.
    """
    try:
        doc = json.loads(_read_text(source))
    except json.JSONDecodeError as err:
        raise ScanFormatError(f"scan document is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ScanFormatError("scan document must be a JSON object")

    scan_id = _field(doc, "scan_id", "scan document")
    if not isinstance(scan_id, str) or not scan_id:
        raise ScanFormatError(f"scan_id must be a nonempty string, got {scan_id!r}")

    raw_views = _field(doc, "views", f"scan '{scan_id}'")
    raw_edges = _field(doc, "edges", f"scan '{scan_id}'")
    if not isinstance(raw_views, list) or not isinstance(raw_edges, list):
        raise ScanFormatError(f"scan '{scan_id}': 'views' and 'edges' must be arrays")

    views = []
    for i, entry in enumerate(raw_views):
        context = f"scan '{scan_id}', view #{i}"
        if not isinstance(entry, dict):
            raise ScanFormatError(f"{context}: must be an object, got {entry!r}")
        view_id = _field(entry, "id", context)
        if not isinstance(view_id, str) or not view_id:
            raise ScanFormatError(f"{context}: 'id' must be a nonempty string")
        position = _field(entry, "position", f"{context} (id '{view_id}')")
        if (
            not isinstance(position, list)
            or len(position) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in position)
        ):
            raise ScanFormatError(
                f"{context} (id '{view_id}'): 'position' must be [x, y, z] numbers"
            )
        region_id = entry.get("region_id", "")
        region_label = entry.get("region_label", "")
        if not isinstance(region_id, str) or not isinstance(region_label, str):
            raise ScanFormatError(
                f"{context} (id '{view_id}'): region fields must be strings"
            )
        views.append(View(view_id, tuple(float(c) for c in position), region_id, region_label))

    edges = []
    for i, pair in enumerate(raw_edges):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, str) for v in pair)
        ):
            raise ScanFormatError(
                f"scan '{scan_id}', edge #{i}: must be a pair of view ids, got {pair!r}"
            )
        edges.append((pair[0], pair[1]))

    return Scan(scan_id, views, edges, edge_weight=edge_weight)
