"""Convexity typing from depth distributions and depth-contour hierarchies."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import ndimage


class ConvexityType(str, Enum):
    CONCAVE = "concave"
    SURFACE = "surface"
    CONVEX = "convex"


@dataclass
class ContourNode:
    """Node of the contour-inclusion tree.

    The root represents the image frame; its children are foreground
    components, whose children are the holes they enclose, and so on for
    components nested inside holes.
    """

    id: int
    area: int
    is_hole: bool
    parent: Optional[int]
    children: list[int] = field(default_factory=list)
    pixels: Optional[np.ndarray] = None  # boolean grid, None for the root


@dataclass
class ContourTree:
    nodes: dict[int, ContourNode]

    @property
    def root(self) -> ContourNode:
        return self.nodes[0]

    def children_of(self, node_id: int) -> list[ContourNode]:
        return [self.nodes[c] for c in self.nodes[node_id].children]

    def hole_count(self) -> int:
        return sum(1 for n in self.nodes.values() if n.is_hole)


@dataclass(frozen=True)
class ConcavityBounds:
    dc_min: float
    dc_max: float


_STRUCT8 = np.ones((3, 3), dtype=int)
_STRUCT4 = ndimage.generate_binary_structure(2, 1)


def contour_hierarchy(grid: np.ndarray, noise_ratio: float = 0.0,
                      reference_area: Optional[int] = None) -> ContourTree:
    """Build the contour-inclusion tree of a binary grid.

    Foreground components are 8-connected, holes (enclosed background) are
    4-connected. Contours with area < noise_ratio * reference_area are pruned
    (reference defaults to the grid's foreground pixel count).
    """
    grid = np.asarray(grid, dtype=bool)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    if reference_area is None:
        reference_area = int(grid.sum())
    min_area = noise_ratio * reference_area
    root = ContourNode(id=0, area=int(grid.size), is_hole=False, parent=None)
    nodes = {0: root}
    next_id = 1

    fg_labels, n_fg = ndimage.label(grid, structure=_STRUCT8)
    bg_labels, n_bg = ndimage.label(~grid, structure=_STRUCT4)
    # background components touching the border are outside every contour
    border = np.zeros_like(grid, dtype=bool)
    border[0, :] = border[-1, :] = border[:, 0] = border[:, -1] = True
    outside_bg = set(np.unique(bg_labels[border & ~grid]))

    fg_ids = range(1, n_fg + 1)
    dilated = {fid: fg_labels == fid for fid in fg_ids}

    # holes of a fg component: bg components (not outside) whose adjacent fg
    # pixels all belong to that component's boundary, i.e. surrounded by it
    hole_owner: dict[int, int] = {}
    for bid in range(1, n_bg + 1):
        if bid in outside_bg:
            continue
        hole = bg_labels == bid
        ring = ndimage.binary_dilation(hole, structure=_STRUCT4) & ~hole
        owners = set(fg_labels[ring & grid])
        owners.discard(0)
        if len(owners) == 1:
            hole_owner[bid] = owners.pop()
        elif owners:
            # touched by several components: owned by the one enclosing it
            # (pick the component whose bounding box contains the hole)
            for fid in sorted(owners):
                comp = dilated[fid]
                rows = np.flatnonzero(comp.any(axis=1))
                cols = np.flatnonzero(comp.any(axis=0))
                hrows = np.flatnonzero(hole.any(axis=1))
                hcols = np.flatnonzero(hole.any(axis=0))
                if (rows[0] <= hrows[0] and hrows[-1] <= rows[-1]
                        and cols[0] <= hcols[0] and hcols[-1] <= cols[-1]):
                    hole_owner[bid] = fid
                    break
            else:
                hole_owner[bid] = sorted(owners)[0]

    # which hole (if any) encloses each fg component
    comp_parent_hole: dict[int, int] = {}
    for fid in fg_ids:
        comp = dilated[fid]
        ring = ndimage.binary_dilation(comp, structure=_STRUCT4) & ~comp
        adj_bg = set(bg_labels[ring & ~grid])
        adj_bg.discard(0)
        inside = [b for b in adj_bg if b not in outside_bg and hole_owner.get(b) != fid]
        if inside:
            comp_parent_hole[fid] = sorted(inside)[0]

    # assemble tree with pruning (pruned nodes drop their whole subtree)
    fg_node: dict[int, int] = {}
    bg_node: dict[int, int] = {}

    def add_component(fid: int, parent_node: int) -> None:
        nonlocal next_id
        comp = dilated[fid]
        area = int(comp.sum())
        if area < min_area:
            return
        node = ContourNode(id=next_id, area=area, is_hole=False,
                           parent=parent_node, pixels=comp)
        nodes[next_id] = node
        nodes[parent_node].children.append(next_id)
        fg_node[fid] = next_id
        next_id += 1
        for bid in sorted(b for b, owner in hole_owner.items() if owner == fid):
            add_hole(bid, node.id)

    def add_hole(bid: int, parent_node: int) -> None:
        nonlocal next_id
        hole = bg_labels == bid
        area = int(hole.sum())
        if area < min_area:
            return
        node = ContourNode(id=next_id, area=area, is_hole=True,
                           parent=parent_node, pixels=hole)
        nodes[next_id] = node
        nodes[parent_node].children.append(next_id)
        bg_node[bid] = next_id
        next_id += 1
        for fid in sorted(f for f, h in comp_parent_hole.items() if h == bid):
            add_component(fid, node.id)

    for fid in sorted(f for f in fg_ids if f not in comp_parent_hole):
        add_component(fid, 0)
    return ContourTree(nodes=nodes)


def deep_region(depth_grid: np.ndarray, owned: np.ndarray, thresh_convex: float) -> np.ndarray:
    """Pixels whose depth exceeds the object's dmin by more than thresh_convex.

    ``owned`` marks pixels belonging to the object; others are background.
    The dmin offset keeps the region invariant under constant depth shifts.
    """
    owned = np.asarray(owned, dtype=bool)
    if not owned.any():
        return np.zeros_like(owned)
    dmin = float(depth_grid[owned].min())
    return owned & (depth_grid > dmin + thresh_convex)


def object_convexity(
    depth_values: np.ndarray,
    deep: np.ndarray,
    thresh_convex: float,
    noise_ratio: float = 0.01,
    object_pixel_count: Optional[int] = None,
    alg1_literal: bool = False,
) -> ConvexityType:
    """Classify one object at one frame as concave / surface / convex.

    Default semantics: depth range > thresh_convex with a surviving hole in
    the deep-region contour hierarchy means concave, without one surface;
    otherwise convex. ``alg1_literal`` flips the range inequality so a
    small-range object with a hole is classified concave instead.
    """
    depth_values = np.asarray(depth_values, dtype=float)
    if depth_values.size == 0:
        raise ValueError("depth_values must be non-empty")
    drange = float(depth_values.max() - depth_values.min())
    if object_pixel_count is None:
        object_pixel_count = int(depth_values.size)
    if np.asarray(deep).size == 0 or not np.asarray(deep).any():
        has_hole = False
    else:
        tree = contour_hierarchy(deep, noise_ratio=noise_ratio,
                                 reference_area=object_pixel_count)
        has_hole = tree.hole_count() > 0
    if alg1_literal:
        if drange < thresh_convex and has_hole:
            return ConvexityType.CONCAVE
        if drange < thresh_convex:
            return ConvexityType.SURFACE
        return ConvexityType.CONVEX
    if drange > thresh_convex and has_hole:
        return ConvexityType.CONCAVE
    if drange > thresh_convex:
        return ConvexityType.SURFACE
    return ConvexityType.CONVEX


def convexity_depth(
    depth_values: np.ndarray, convexity: ConvexityType, h: int, n: int
) -> ConcavityBounds:
    """Depth band of a concave object's indentation.

    Concave objects take the n deepest of h equal sections of their depth
    range; other types span the full range.
    """
    depth_values = np.asarray(depth_values, dtype=float)
    if depth_values.size == 0:
        raise ValueError("depth_values must be non-empty")
    if not (1 <= n < h):
        raise ValueError(f"require 1 <= n < h, got n={n}, h={h}")
    dmin = float(depth_values.min())
    dmax = float(depth_values.max())
    if convexity is ConvexityType.CONCAVE:
        sections = (dmax - dmin) / h
        return ConcavityBounds(dc_min=dmax - n * sections, dc_max=dmax)
    return ConcavityBounds(dc_min=dmin, dc_max=dmax)


def track_convexity(per_frame_types: list[ConvexityType]) -> ConvexityType:
    """Majority vote over per-frame types; ties favor concave > surface > convex."""
    if not per_frame_types:
        raise ValueError("per_frame_types must be non-empty")
    counts = Counter(per_frame_types)
    priority = {ConvexityType.CONCAVE: 0, ConvexityType.SURFACE: 1, ConvexityType.CONVEX: 2}
    return max(counts, key=lambda t: (counts[t], -priority[t]))
