"""Per-frame qualitative spatial calculi: RCC2, DiSR, and the RCC5(+On) baseline."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .convexity import ConcavityBounds, ConvexityType
from .scene import BoundingBox, MaskRLE


class Rcc2Relation(str, Enum):
    C = "C"
    DC = "DC"


class DisrRelation(str, Enum):
    SUP = "Sup"
    SUPI = "Supi"
    CONT = "Cont"
    CONTI = "Conti"
    ADJ = "Adj"
    NI = "NI"


class Rcc5OnRelation(str, Enum):
    DR = "DR"
    PO = "PO"
    PP = "PP"
    PPI = "PPi"
    EQ = "EQ"
    ON = "On"
    ONI = "Oni"


@dataclass(frozen=True)
class EntityFrameState:
    """One entity's per-frame facts needed by the spatial predicates."""

    bbox: BoundingBox
    depth_range: Optional[tuple[float, float]] = None  # (dmin, dmax)
    concavity_bounds: Optional[ConcavityBounds] = None
    convexity: Optional[ConvexityType] = None


@dataclass(frozen=True)
class PairFrameContext:
    a: EntityFrameState
    b: EntityFrameState

    @property
    def approximate(self) -> bool:
        """True when depth is missing on either side and predicates degrade."""
        return self.a.depth_range is None or self.b.depth_range is None


def rcc2(mask_a: Optional[MaskRLE], mask_b: Optional[MaskRLE],
         bbox_a: Optional[BoundingBox] = None,
         bbox_b: Optional[BoundingBox] = None) -> Rcc2Relation:
    """C iff the masks share a foreground pixel, else DC.

    With a mask missing, falls back to an approximate bbox intersection test.
    """
    if mask_a is None or mask_b is None:
        if bbox_a is None or bbox_b is None:
            raise ValueError("mask missing and no bbox fallback provided")
        return Rcc2Relation.C if bbox_a.intersection_area(bbox_b) > 0 else Rcc2Relation.DC
    if mask_a.width != mask_b.width or mask_a.height != mask_b.height:
        raise ValueError("masks must share the same grid")
    if np.any(mask_a.to_array() & mask_b.to_array()):
        return Rcc2Relation.C
    return Rcc2Relation.DC


def overlap_2d(a: BoundingBox, b: BoundingBox) -> bool:
    """True iff the boxes share interior area (boundary contact excluded)."""
    return a.intersection_area(b) > 0


def part_2d(a: BoundingBox, b: BoundingBox) -> bool:
    """True iff a's box lies inside b's box; boundary contact allowed."""
    return (a.xmin >= b.xmin and a.xmax <= b.xmax
            and a.ymin >= b.ymin and a.ymax <= b.ymax)


def dpo(depth_a: Optional[tuple[float, float]],
        depth_b: Optional[tuple[float, float]]) -> bool:
    """Depth-range partial overlap; false (approximate) when depth is missing."""
    if depth_a is None or depth_b is None:
        return False
    amin, amax = depth_a
    bmin, bmax = depth_b
    return ((amax >= bmin and amax < bmax and amin < bmin)
            or (bmax >= amin and bmax < amax and bmin < amin))


def dpp(depth_a: Optional[tuple[float, float]],
        bounds_b: Optional[ConcavityBounds]) -> bool:
    """Depth range of a proper-part-of b's concavity band; false when missing."""
    if depth_a is None or bounds_b is None:
        return False
    amin, amax = depth_a
    return (amax > bounds_b.dc_min and amax <= bounds_b.dc_max
            and amin >= bounds_b.dc_min and amin < bounds_b.dc_max)


def on(a: BoundingBox, b: BoundingBox) -> bool:
    """a rests on top of b in the image plane (y-down convention)."""
    return (overlap_2d(a, b)
            and a.ymin <= b.ymin and a.ymax <= b.ymax
            and a.xmax <= b.xmax and a.xmin >= b.xmin)


def _sup(alpha: EntityFrameState, beta: EntityFrameState) -> bool:
    return ((dpo(alpha.depth_range, beta.depth_range)
             and alpha.convexity is ConvexityType.SURFACE)
            or on(beta.bbox, alpha.bbox))


def _cont(alpha: EntityFrameState, beta: EntityFrameState) -> bool:
    return (part_2d(beta.bbox, alpha.bbox)
            and alpha.convexity is ConvexityType.CONCAVE
            and dpp(beta.depth_range, alpha.concavity_bounds))


def disr(ctx: PairFrameContext) -> tuple[DisrRelation, DisrRelation]:
    """Resolve the DiSR relation for (a,b) and its converse for (b,a).

    Raw predicates can co-occur; priority Cont > Conti > Sup > Supi > Adj > NI
    picks a single relation per ordered pair, keeping converses coherent.
    """
    a, b = ctx.a, ctx.b
    cont_ab = _cont(a, b)
    cont_ba = _cont(b, a)
    sup_ab = _sup(a, b)
    sup_ba = _sup(b, a)
    # mutual containment or mutual support is contradictory; cancel both and
    # fall through to the symmetric relations so converses stay coherent
    if cont_ab and cont_ba:
        cont_ab = cont_ba = False
    if sup_ab and sup_ba:
        sup_ab = sup_ba = False
    adj = (overlap_2d(a.bbox, b.bbox)
           and dpo(a.depth_range, b.depth_range)
           and not cont_ab and not cont_ba and not sup_ab and not sup_ba)
    if cont_ab:
        return DisrRelation.CONT, DisrRelation.CONTI
    if cont_ba:
        return DisrRelation.CONTI, DisrRelation.CONT
    if sup_ab:
        return DisrRelation.SUP, DisrRelation.SUPI
    if sup_ba:
        return DisrRelation.SUPI, DisrRelation.SUP
    if adj:
        return DisrRelation.ADJ, DisrRelation.ADJ
    return DisrRelation.NI, DisrRelation.NI


def rcc5_on(a: BoundingBox, b: BoundingBox, on_priority: bool = True) -> Rcc5OnRelation:
    """RCC5 over boxes with the On predicate taking priority when it holds.

    ``on_priority=False`` keeps the base RCC5 value, ignoring On entirely.
    """
    if on_priority:
        if on(a, b):
            return Rcc5OnRelation.ON
        if on(b, a):
            return Rcc5OnRelation.ONI
    equal = (a.xmin == b.xmin and a.ymin == b.ymin
             and a.xmax == b.xmax and a.ymax == b.ymax)
    if equal:
        return Rcc5OnRelation.EQ
    if part_2d(a, b):
        return Rcc5OnRelation.PP
    if part_2d(b, a):
        return Rcc5OnRelation.PPI
    if overlap_2d(a, b):
        return Rcc5OnRelation.PO
    return Rcc5OnRelation.DR
