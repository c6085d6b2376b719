"""Episode segmentation and Allen interval relations over discrete frames."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class Interval:
    """Inclusive frame interval."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} > end {self.end}")


class Calculus(str, Enum):
    DISR = "DiSR"
    RCC2 = "RCC2"
    RCC5ON = "RCC5On"


@dataclass(frozen=True)
class Episode:
    pair: tuple[str, str]
    calculus: Calculus
    relation: str
    interval: Interval


class AllenRelation(str, Enum):
    BEFORE = "<"
    AFTER = ">"
    MEETS = "m"
    MET_BY = "mi"
    OVERLAPS = "o"
    OVERLAPPED_BY = "oi"
    STARTS = "s"
    STARTED_BY = "si"
    DURING = "d"
    CONTAINS = "di"
    FINISHES = "f"
    FINISHED_BY = "fi"
    EQUALS = "="


_CONVERSE = {
    AllenRelation.BEFORE: AllenRelation.AFTER,
    AllenRelation.AFTER: AllenRelation.BEFORE,
    AllenRelation.MEETS: AllenRelation.MET_BY,
    AllenRelation.MET_BY: AllenRelation.MEETS,
    AllenRelation.OVERLAPS: AllenRelation.OVERLAPPED_BY,
    AllenRelation.OVERLAPPED_BY: AllenRelation.OVERLAPS,
    AllenRelation.STARTS: AllenRelation.STARTED_BY,
    AllenRelation.STARTED_BY: AllenRelation.STARTS,
    AllenRelation.DURING: AllenRelation.CONTAINS,
    AllenRelation.CONTAINS: AllenRelation.DURING,
    AllenRelation.FINISHES: AllenRelation.FINISHED_BY,
    AllenRelation.FINISHED_BY: AllenRelation.FINISHES,
    AllenRelation.EQUALS: AllenRelation.EQUALS,
}


def allen_converse(rel: AllenRelation) -> AllenRelation:
    return _CONVERSE[rel]


def allen(a: Interval, b: Interval) -> AllenRelation:
    """Unique Allen relation under discrete inclusive-interval semantics.

    Frames are atomic samples: meets means b starts on the frame right after
    a ends, with no shared frame. This keeps the 13 relations JEPD.
    """
    if a.start == b.start and a.end == b.end:
        return AllenRelation.EQUALS
    if a.end + 1 < b.start:
        return AllenRelation.BEFORE
    if b.end + 1 < a.start:
        return AllenRelation.AFTER
    if a.end + 1 == b.start:
        return AllenRelation.MEETS
    if b.end + 1 == a.start:
        return AllenRelation.MET_BY
    if a.start == b.start:
        return AllenRelation.STARTS if a.end < b.end else AllenRelation.STARTED_BY
    if a.end == b.end:
        return AllenRelation.FINISHES if a.start > b.start else AllenRelation.FINISHED_BY
    if b.start < a.start and a.end < b.end:
        return AllenRelation.DURING
    if a.start < b.start and b.end < a.end:
        return AllenRelation.CONTAINS
    if a.start < b.start:
        return AllenRelation.OVERLAPS
    return AllenRelation.OVERLAPPED_BY


def _absorb_flicker(tokens: list[str], smoothing: int) -> list[str]:
    """Absorb runs of at most ``smoothing`` frames sandwiched between two runs
    of the same token, repeating until stable."""
    if smoothing <= 0:
        return tokens
    changed = True
    while changed:
        changed = False
        runs: list[tuple[str, int]] = []
        for tok in tokens:
            if runs and runs[-1][0] == tok:
                runs[-1] = (tok, runs[-1][1] + 1)
            else:
                runs.append((tok, 1))
        for i in range(1, len(runs) - 1):
            tok, length = runs[i]
            if length <= smoothing and runs[i - 1][0] == runs[i + 1][0]:
                runs[i] = (runs[i - 1][0], length)
                changed = True
                break
        tokens = [tok for tok, length in runs for _ in range(length)]
    return tokens


def extract_episodes(
    relations: list[tuple[int, str]],
    pair: tuple[str, str],
    calculus: Calculus,
    smoothing: int = 0,
    gap_bridge: int = 0,
) -> list[Episode]:
    """Segment per-frame relation tokens into maximal episodes.

    Gaps of at most ``gap_bridge`` missing frames inherit the preceding token;
    longer gaps terminate episodes. Short flickers (length <= smoothing)
    between identical runs are absorbed before segmentation.
    """
    if not relations:
        return []
    frames = [f for f, _ in relations]
    if any(b <= a for a, b in zip(frames, frames[1:])):
        raise ValueError("relation frames must be strictly ascending")

    # split into contiguous segments, bridging short gaps
    segments: list[list[tuple[int, str]]] = [[relations[0]]]
    for (prev_f, prev_tok), (f, tok) in zip(relations, relations[1:]):
        gap = f - prev_f - 1
        if gap > gap_bridge:
            segments.append([(f, tok)])
        else:
            seg = segments[-1]
            for missing in range(prev_f + 1, f):
                seg.append((missing, prev_tok))
            seg.append((f, tok))

    episodes: list[Episode] = []
    for seg in segments:
        toks = _absorb_flicker([tok for _, tok in seg], smoothing)
        start_idx = 0
        for i in range(1, len(toks) + 1):
            if i == len(toks) or toks[i] != toks[start_idx]:
                episodes.append(Episode(
                    pair=pair, calculus=calculus, relation=toks[start_idx],
                    interval=Interval(seg[start_idx][0], seg[i - 1][0]),
                ))
                start_idx = i
    return episodes
