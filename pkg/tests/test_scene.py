"""Scene data model: boxes, masks, tracks, semantic depth maps, file I/O."""

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affgraph.scene import (
    BoundingBox,
    DepthSample,
    Entity,
    EntityKind,
    EntityObservation,
    MaskRLE,
    SceneError,
    SceneSequence,
    associate_tracks,
    build_semantic_depth_map,
    iou,
    load_scene,
    object_depth_summary,
    save_scene,
    scene_from_dict,
    scene_to_dict,
)


def _box(x0, y0, x1, y1):
    return BoundingBox(float(x0), float(y0), float(x1), float(y1))


def _mask(h, w, arr_slices):
    arr = np.zeros((h, w), dtype=bool)
    for sl in arr_slices:
        arr[sl] = True
    return MaskRLE.from_array(arr)


def test_bbox_rejects_degenerate():
    with pytest.raises(SceneError):
        BoundingBox(0, 0, 0, 5)
    with pytest.raises(SceneError):
        BoundingBox(0, 5, 5, 5)


def test_iou_identity_and_disjoint():
    b = _box(0, 0, 10, 10)
    assert iou(b, b) == 1.0
    assert iou(b, _box(20, 20, 30, 30)) == 0.0


def test_iou_hand_computed_third():
    # [0,0,10,10] vs [5,0,15,10]: intersection 50, union 150
    a = _box(0, 0, 10, 10)
    b = _box(5, 0, 15, 10)
    assert iou(a, b) == pytest.approx(50 / 150)
    assert iou(b, a) == pytest.approx(50 / 150)


@given(st.tuples(st.integers(0, 20), st.integers(0, 20),
                 st.integers(1, 20), st.integers(1, 20)),
       st.tuples(st.integers(0, 20), st.integers(0, 20),
                 st.integers(1, 20), st.integers(1, 20)))
def test_iou_symmetric_bounded(p, q):
    a = _box(p[0], p[1], p[0] + p[2], p[1] + p[3])
    b = _box(q[0], q[1], q[0] + q[2], q[1] + q[3])
    assert iou(a, b) == iou(b, a)
    assert 0.0 <= iou(a, b) <= 1.0


@given(st.lists(st.booleans(), min_size=0, max_size=60),
       st.integers(1, 12))
def test_mask_rle_round_trip(bits, width):
    height = max(1, (len(bits) + width - 1) // width)
    arr = np.zeros((height, width), dtype=bool)
    for i, b in enumerate(bits):
        arr[i // width, i % width] = b
    mask = MaskRLE.from_array(arr)
    assert mask.runs[0] == 0 or not arr.ravel()[0] or arr.size == 0
    np.testing.assert_array_equal(mask.to_array(), arr)
    assert mask.foreground_count == int(arr.sum())
    np.testing.assert_array_equal(
        mask.foreground_indices(), np.flatnonzero(arr.ravel()))


def test_mask_rle_validates_total():
    with pytest.raises(SceneError):
        MaskRLE(width=4, height=2, runs=(3, 2))


def test_depth_sample_positive():
    with pytest.raises(SceneError):
        DepthSample(values=(10.0, 0.0))


def test_observation_depth_mask_length_agreement():
    mask = _mask(2, 4, [(slice(0, 1), slice(0, 3))])  # 3 fg pixels
    with pytest.raises(SceneError):
        EntityObservation(frame=0, bbox=_box(0, 0, 3, 1), score=0.9,
                          mask=mask, depth=DepthSample(values=(5.0, 6.0)))


def test_track_association_identity_and_disjoint():
    def det(box):
        return EntityObservation(frame=0, bbox=box, score=0.9)

    same = {0: [det(_box(0, 0, 10, 10))], 1: [det(_box(0, 0, 10, 10))]}
    scene = associate_tracks(
        {f: [EntityObservation(frame=f, bbox=o.bbox, score=0.9) for o in v]
         for f, v in same.items()}, 0.5)
    assert len(scene.entities) == 1
    assert len(scene.entities[0].observations) == 2

    disjoint = {
        0: [EntityObservation(frame=0, bbox=_box(0, 0, 10, 10), score=0.9)],
        1: [EntityObservation(frame=1, bbox=_box(30, 30, 40, 40), score=0.9)],
    }
    scene = associate_tracks(disjoint, 0.5)
    assert len(scene.entities) == 2


def test_track_association_iou_third_splits():
    # IoU 1/3 < 0.5 starts a new track
    dets = {
        0: [EntityObservation(frame=0, bbox=_box(0, 0, 10, 10), score=0.9)],
        1: [EntityObservation(frame=1, bbox=_box(5, 0, 15, 10), score=0.9)],
    }
    assert len(associate_tracks(dets, 0.5).entities) == 2
    # the same pair associates at a permissive threshold
    assert len(associate_tracks(dets, 1 / 3).entities) == 1


def test_track_association_deterministic():
    rng = np.random.default_rng(3)
    dets = {}
    for f in range(6):
        obs = []
        for _ in range(4):
            x = float(rng.integers(0, 30))
            y = float(rng.integers(0, 30))
            obs.append(EntityObservation(
                frame=f, bbox=_box(x, y, x + 10, y + 10),
                score=float(rng.uniform(0.5, 1.0))))
        dets[f] = obs
    a = associate_tracks(dets, 0.5)
    b = associate_tracks(dets, 0.5)
    assert [e.id for e in a.entities] == [e.id for e in b.entities]
    assert [[o.bbox for o in e.observations] for e in a.entities] == \
           [[o.bbox for o in e.observations] for e in b.entities]


def _scene_with_overlap(score_a=0.9, score_b=0.7, human=False):
    h, w = 6, 8
    mask_a = _mask(h, w, [(slice(0, 4), slice(0, 4))])
    mask_b = _mask(h, w, [(slice(2, 6), slice(2, 6))])
    depth_a = DepthSample(values=tuple([10.0] * mask_a.foreground_count))
    depth_b = DepthSample(values=tuple([20.0] * mask_b.foreground_count))
    ents = [
        Entity("a", EntityKind.OBJECT, [EntityObservation(
            frame=0, bbox=_box(0, 0, 4, 4), score=score_a, mask=mask_a, depth=depth_a)]),
        Entity("b", EntityKind.OBJECT, [EntityObservation(
            frame=0, bbox=_box(2, 2, 6, 6), score=score_b, mask=mask_b, depth=depth_b)]),
    ]
    if human:
        mask_h = _mask(h, w, [(slice(0, 2), slice(0, 5))])
        ents.append(Entity("hand", EntityKind.HUMAN_PART, [EntityObservation(
            frame=0, bbox=_box(0, 0, 5, 2), score=0.99, mask=mask_h)]))
    scene = SceneSequence(width=w, height=h, frame_count=1, entities=ents)
    scene.validate()
    return scene


def test_semantic_depth_map_overlap_to_highest_score():
    smap = build_semantic_depth_map(_scene_with_overlap(), 0)
    # 4-pixel overlap [2:4, 2:4] goes to the 0.9-score object
    owned_a = smap.owned_mask("a")
    owned_b = smap.owned_mask("b")
    assert owned_a[2:4, 2:4].all()
    assert not owned_b[2:4, 2:4].any()
    assert not (owned_a & owned_b).any()


def test_semantic_depth_map_human_exclusion():
    smap = build_semantic_depth_map(_scene_with_overlap(human=True), 0)
    # pixels under the human mask are unassigned to objects
    assert (smap.owner[0:2, 0:5] == -1).all()


def test_semantic_depth_map_partitions_pixels():
    scene = _scene_with_overlap()
    smap = build_semantic_depth_map(scene, 0)
    total_fg = np.zeros((scene.height, scene.width), dtype=bool)
    for ent in scene.objects():
        total_fg |= ent.observations[0].mask.to_array()
    assert int((smap.owner >= 0).sum()) == int(total_fg.sum())


def test_object_depth_summary_brute_force_oracle():
    scene = _scene_with_overlap()
    smap = build_semantic_depth_map(scene, 0)
    # brute-force per-pixel ownership: higher score wins on overlap
    mask_a = scene.entity("a").observations[0].mask.to_array()
    mask_b = scene.entity("b").observations[0].mask.to_array()
    b_only = mask_b & ~mask_a
    dmin, dmax, vals = object_depth_summary(smap, "b")
    assert (dmin, dmax) == (20.0, 20.0)
    assert len(vals) == int(b_only.sum())
    with pytest.raises(SceneError):
        object_depth_summary(smap, "ghost")


def test_scene_round_trip(tmp_path):
    scene = _scene_with_overlap(human=True)
    path = tmp_path / "scene.json"
    save_scene(scene, str(path))
    loaded = load_scene(str(path))
    # lossless canonical re-serialization is byte-identical
    path2 = tmp_path / "scene2.json"
    save_scene(loaded, str(path2))
    assert path.read_bytes() == path2.read_bytes()
    assert scene_to_dict(loaded) == scene_to_dict(scene)


def test_scene_schema_errors(tmp_path):
    bad = {"width": 8, "height": 6, "frame_count": 1, "entities": [
        {"id": "x", "kind": "object", "observations": [
            {"frame": 0, "bbox": [5, 0, 5, 4], "score": 0.5}]}]}
    with pytest.raises(SceneError):
        scene_from_dict(bad)
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SceneError):
        load_scene(str(path))


def test_scene_validate_frame_bounds_and_duplicates():
    obs = EntityObservation(frame=5, bbox=_box(0, 0, 2, 2), score=0.5)
    scene = SceneSequence(width=8, height=8, frame_count=3,
                          entities=[Entity("x", EntityKind.OBJECT, [obs])])
    with pytest.raises(SceneError):
        scene.validate()
    scene = SceneSequence(width=8, height=8, frame_count=3, entities=[
        Entity("x", EntityKind.OBJECT), Entity("x", EntityKind.OBJECT)])
    with pytest.raises(SceneError):
        scene.validate()
