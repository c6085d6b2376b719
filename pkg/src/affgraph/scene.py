"""Scene/track data model: RLE masks, track association, semantic depth maps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np


class SceneError(Exception):
    """Raised on schema or invariant violations in scene data."""


class EntityKind(str, Enum):
    OBJECT = "object"
    HUMAN_PART = "human_part"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in image-native coordinates (origin top-left, y down)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self) -> None:
        if not (self.xmin < self.xmax):
            raise SceneError(f"bbox requires xmin < xmax, got {self.xmin} >= {self.xmax}")
        if not (self.ymin < self.ymax):
            raise SceneError(f"bbox requires ymin < ymax, got {self.ymin} >= {self.ymax}")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def intersection_area(self, other: "BoundingBox") -> float:
        w = min(self.xmax, other.xmax) - max(self.xmin, other.xmin)
        h = min(self.ymax, other.ymax) - max(self.ymin, other.ymin)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


@dataclass(frozen=True)
class MaskRLE:
    """Row-major run-length encoded binary mask.

    ``runs`` alternates background/foreground run lengths and always starts
    with a background run (possibly 0).
    """

    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(r < 0 for r in self.runs):
            raise SceneError("mask runs must be non-negative")
        if sum(self.runs) != self.width * self.height:
            raise SceneError(
                f"mask runs sum to {sum(self.runs)}, expected {self.width * self.height}"
            )

    @property
    def foreground_count(self) -> int:
        return sum(self.runs[1::2])

    def to_array(self) -> np.ndarray:
        """Decode to a boolean (height, width) array."""
        flat = np.zeros(self.width * self.height, dtype=bool)
        pos = 0
        fg = False
        for run in self.runs:
            if fg:
                flat[pos : pos + run] = True
            pos += run
            fg = not fg
        return flat.reshape(self.height, self.width)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "MaskRLE":
        """Encode a boolean (height, width) array."""
        flat = np.asarray(arr, dtype=bool).ravel()
        runs: list[int] = []
        fg = False
        pos = 0
        n = flat.size
        while pos < n:
            end = pos
            while end < n and flat[end] == fg:
                end += 1
            runs.append(end - pos)
            pos = end
            fg = not fg
        if not n:
            runs = [0]
        return cls(width=arr.shape[1], height=arr.shape[0], runs=tuple(runs))

    def foreground_indices(self) -> np.ndarray:
        """Flat pixel indices of foreground pixels, in run (row-major) order."""
        idx: list[np.ndarray] = []
        pos = 0
        fg = False
        for run in self.runs:
            if fg and run:
                idx.append(np.arange(pos, pos + run))
            pos += run
            fg = not fg
        if not idx:
            return np.empty(0, dtype=int)
        return np.concatenate(idx)


@dataclass(frozen=True)
class DepthSample:
    """Depth readings in millimeters, one per foreground mask pixel in run order."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(v <= 0 for v in self.values):
            raise SceneError("depth values must be positive millimeters")


@dataclass(frozen=True)
class EntityObservation:
    frame: int
    bbox: BoundingBox
    score: float
    mask: Optional[MaskRLE] = None
    depth: Optional[DepthSample] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise SceneError(f"score must be in [0,1], got {self.score}")
        if self.mask is not None and self.depth is not None:
            if len(self.depth.values) != self.mask.foreground_count:
                raise SceneError(
                    f"frame {self.frame}: depth sample length "
                    f"{len(self.depth.values)} != mask foreground "
                    f"{self.mask.foreground_count}"
                )


@dataclass
class Entity:
    id: str
    kind: EntityKind
    observations: list[EntityObservation] = field(default_factory=list)

    def validate(self) -> None:
        frames = [o.frame for o in self.observations]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise SceneError(f"entity {self.id}: observation frames not strictly increasing")

    def observation_at(self, frame: int) -> Optional[EntityObservation]:
        for obs in self.observations:
            if obs.frame == frame:
                return obs
        return None


@dataclass
class SceneSequence:
    width: int
    height: int
    frame_count: int
    fps: Optional[float] = None
    entities: list[Entity] = field(default_factory=list)

    def validate(self) -> None:
        seen: set[str] = set()
        for ent in self.entities:
            if ent.id in seen:
                raise SceneError(f"duplicate entity id {ent.id!r}")
            seen.add(ent.id)
            ent.validate()
            for obs in ent.observations:
                if not (0 <= obs.frame < self.frame_count):
                    raise SceneError(
                        f"entity {ent.id}: frame {obs.frame} outside [0, {self.frame_count})"
                    )
                bb = obs.bbox
                if bb.xmin < 0 or bb.ymin < 0 or bb.xmax > self.width or bb.ymax > self.height:
                    raise SceneError(
                        f"entity {ent.id} frame {obs.frame}: bbox outside frame dimensions"
                    )

    def entity(self, entity_id: str) -> Entity:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise KeyError(entity_id)

    def objects(self) -> list[Entity]:
        return [e for e in self.entities if e.kind is EntityKind.OBJECT]

    def human_parts(self) -> list[Entity]:
        return [e for e in self.entities if e.kind is EntityKind.HUMAN_PART]


# ---------------------------------------------------------------------------
# Scene file I/O (UTF-8 JSON; see README for the schema)


def _obs_from_dict(entity_id: str, raw: dict) -> EntityObservation:
    try:
        frame = int(raw["frame"])
        bb = raw["bbox"]
        bbox = BoundingBox(float(bb[0]), float(bb[1]), float(bb[2]), float(bb[3]))
        score = float(raw["score"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SceneError(f"entity {entity_id}: malformed observation: {exc}") from exc
    mask = None
    depth = None
    if raw.get("mask_rle") is not None:
        mask = MaskRLE(
            width=int(raw["_width"]), height=int(raw["_height"]),
            runs=tuple(int(r) for r in raw["mask_rle"]),
        )
    if raw.get("depth_mm") is not None:
        depth = DepthSample(values=tuple(float(v) for v in raw["depth_mm"]))
    return EntityObservation(frame=frame, bbox=bbox, score=score, mask=mask, depth=depth)


def scene_from_dict(data: dict) -> SceneSequence:
    try:
        width = int(data["width"])
        height = int(data["height"])
        frame_count = int(data["frame_count"])
        fps = data.get("fps")
        entities_raw = data["entities"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"malformed scene header: {exc}") from exc
    entities = []
    for ent_raw in entities_raw:
        try:
            ent_id = str(ent_raw["id"])
            kind = EntityKind(ent_raw["kind"])
        except (KeyError, ValueError) as exc:
            raise SceneError(f"malformed entity record: {exc}") from exc
        obs = []
        for raw in ent_raw.get("observations", []):
            raw = dict(raw)
            raw["_width"] = width
            raw["_height"] = height
            obs.append(_obs_from_dict(ent_id, raw))
        obs.sort(key=lambda o: o.frame)
        entities.append(Entity(id=ent_id, kind=kind, observations=obs))
    scene = SceneSequence(
        width=width, height=height, frame_count=frame_count,
        fps=float(fps) if fps is not None else None, entities=entities,
    )
    scene.validate()
    return scene


def scene_to_dict(scene: SceneSequence) -> dict:
    return {
        "width": scene.width,
        "height": scene.height,
        "frame_count": scene.frame_count,
        "fps": scene.fps,
        "entities": [
            {
                "id": ent.id,
                "kind": ent.kind.value,
                "observations": [
                    {
                        "frame": obs.frame,
                        "bbox": [obs.bbox.xmin, obs.bbox.ymin, obs.bbox.xmax, obs.bbox.ymax],
                        "score": obs.score,
                        "mask_rle": list(obs.mask.runs) if obs.mask else None,
                        "depth_mm": list(obs.depth.values) if obs.depth else None,
                    }
                    for obs in ent.observations
                ],
            }
            for ent in scene.entities
        ],
    }


def load_scene(path: str) -> SceneSequence:
    """Load and validate a scene file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return scene_from_dict(data)


def save_scene(scene: SceneSequence, path: str) -> None:
    """Serialize a scene canonically (sorted keys, fixed separators)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_dict(scene), fh, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Track association


def associate_tracks(
    detections: dict[int, list[EntityObservation]],
    iou_threshold: float,
    width: int = 0,
    height: int = 0,
    frame_count: Optional[int] = None,
    kind: EntityKind = EntityKind.OBJECT,
) -> SceneSequence:
    """Greedy highest-IoU-first association of per-frame detections into tracks.

    A detection joins the existing track whose last observation has the highest
    bbox IoU >= ``iou_threshold``; otherwise it starts a new track. A track
    receives at most one detection per frame.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold must be in (0,1], got {iou_threshold}")
    tracks: list[list[EntityObservation]] = []
    for frame in sorted(detections):
        dets = detections[frame]
        candidates = []
        for di, det in enumerate(dets):
            for ti, track in enumerate(tracks):
                score = iou(det.bbox, track[-1].bbox)
                if score >= iou_threshold:
                    candidates.append((-score, di, ti))
        candidates.sort()
        used_dets: set[int] = set()
        used_tracks: set[int] = set()
        for neg, di, ti in candidates:
            if di in used_dets or ti in used_tracks:
                continue
            tracks[ti].append(dets[di])
            used_dets.add(di)
            used_tracks.add(ti)
        for di, det in enumerate(dets):
            if di not in used_dets:
                tracks.append([det])
    entities = [
        Entity(id=f"track_{i}", kind=kind, observations=obs) for i, obs in enumerate(tracks)
    ]
    max_frame = max((o.frame for t in tracks for o in t), default=-1)
    return SceneSequence(
        width=width, height=height,
        frame_count=frame_count if frame_count is not None else max_frame + 1,
        entities=entities,
    )


# ---------------------------------------------------------------------------
# Semantic depth map


@dataclass
class SemanticDepthMap:
    """Per-frame pixel ownership and depth.

    ``owner`` holds the owning entity index into ``entity_ids`` or -1;
    ``depth`` holds the owner's depth reading at that pixel (0 where unowned).
    """

    entity_ids: list[str]
    owner: np.ndarray
    depth: np.ndarray

    def owned_depths(self, entity_id: str) -> np.ndarray:
        """Depth values of pixels owned by the entity, ascending."""
        try:
            idx = self.entity_ids.index(entity_id)
        except ValueError:
            return np.empty(0)
        vals = self.depth[self.owner == idx]
        return np.sort(vals)

    def owned_mask(self, entity_id: str) -> np.ndarray:
        try:
            idx = self.entity_ids.index(entity_id)
        except ValueError:
            return np.zeros_like(self.owner, dtype=bool)
        return self.owner == idx


def build_semantic_depth_map(scene: SceneSequence, frame: int) -> SemanticDepthMap:
    """Resolve overlapping masks at one frame into exclusive pixel ownership.

    Overlap pixels go to the highest-score object (ties to the lower entity
    id); pixels under any human_part mask are excluded from object ownership.
    """
    if not (0 <= frame < scene.frame_count):
        raise ValueError(f"frame {frame} outside [0, {scene.frame_count})")
    owner = np.full((scene.height, scene.width), -1, dtype=int)
    depth = np.zeros((scene.height, scene.width), dtype=float)
    entity_ids: list[str] = []
    claims = []
    for ent in scene.objects():
        obs = ent.observation_at(frame)
        if obs is None or obs.mask is None:
            continue
        claims.append((-obs.score, ent.id, ent, obs))
    claims.sort()
    # paint lowest priority first so stronger claims overwrite
    for neg_score, ent_id, ent, obs in reversed(claims):
        if ent_id not in entity_ids:
            entity_ids.append(ent_id)
        idx = entity_ids.index(ent_id)
        rows_cols = np.unravel_index(
            obs.mask.foreground_indices(), (scene.height, scene.width)
        )
        owner[rows_cols] = idx
        if obs.depth is not None:
            depth[rows_cols] = np.asarray(obs.depth.values, dtype=float)
        else:
            depth[rows_cols] = 0.0
    for ent in scene.human_parts():
        obs = ent.observation_at(frame)
        if obs is None or obs.mask is None:
            continue
        rows_cols = np.unravel_index(
            obs.mask.foreground_indices(), (scene.height, scene.width)
        )
        owner[rows_cols] = -1
        depth[rows_cols] = 0.0
    return SemanticDepthMap(entity_ids=entity_ids, owner=owner, depth=depth)


def object_depth_summary(
    depth_map: SemanticDepthMap, entity_id: str
) -> tuple[float, float, np.ndarray]:
    """(dmin, dmax, ascending depth values) over pixels owned by the entity."""
    vals = depth_map.owned_depths(entity_id)
    if vals.size == 0:
        raise SceneError(f"entity {entity_id} owns no pixels in this frame (fully occluded)")
    return float(vals[0]), float(vals[-1]), vals
