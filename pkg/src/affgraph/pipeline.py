"""End-to-end orchestration: scenes -> relations -> episodes -> graphlets ->
embeddings -> dendrogram -> clusters -> metrics."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from . import clustering as clust
from . import embedding as emb
from .convexity import (
    ConvexityType,
    convexity_depth,
    deep_region,
    object_convexity,
    track_convexity,
)
from .evaluation import LabeledCorpus, metrics_report, v_measure
from .graphlet import AGraphlet, build_agraphlets, canonical_form, parse_canonical
from .qsr import (
    EntityFrameState,
    PairFrameContext,
    disr,
    rcc2,
    rcc5_on,
)
from .scene import SceneSequence, build_semantic_depth_map
from .temporal import Calculus, Episode, extract_episodes


@dataclass
class DatasetProfile:
    thresh_convex: float = 4.0
    h: int = 5
    n: int = 3
    noise_ratio: float = 0.01
    alg1_literal: bool = False
    per_frame_convexity: bool = False


PROFILES = {
    "cad-like": DatasetProfile(thresh_convex=4.0),
    "wnp-like": DatasetProfile(thresh_convex=0.3),
    "load-like": DatasetProfile(thresh_convex=10.0),
}


@dataclass
class PipelineConfig:
    profile: DatasetProfile = field(default_factory=DatasetProfile)
    calculus: str = "disr"  # disr | rcc5_on
    mode: str = "embedding"  # embedding | sed
    smoothing: int = 0
    gap_bridge: int = 0
    temporal_cap: int = 256
    train: emb.TrainConfig = field(default_factory=emb.TrainConfig)
    linkage: clust.Linkage = clust.Linkage.AVERAGE
    cut_threshold: Optional[float] = 0.02  # None selects via criterion below
    criterion: clust.Criterion = clust.Criterion.BIC
    sed_threshold: float = 1.0
    c_spat: float = 0.5
    k_spat: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.calculus not in ("disr", "rcc5_on"):
            raise ValueError(f"unknown calculus {self.calculus!r}")
        if self.mode not in ("embedding", "sed"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.train.validate()


def config_from_dict(data: dict) -> PipelineConfig:
    cfg = PipelineConfig()
    prof = data.get("profile")
    if isinstance(prof, str):
        cfg.profile = PROFILES[prof]
    elif isinstance(prof, dict):
        cfg.profile = DatasetProfile(**prof)
    for key in ("calculus", "mode", "smoothing", "gap_bridge", "temporal_cap",
                "sed_threshold", "c_spat", "k_spat", "seed"):
        if key in data:
            setattr(cfg, key, data[key])
    if "linkage" in data:
        cfg.linkage = clust.Linkage(data["linkage"])
    if "criterion" in data:
        cfg.criterion = clust.Criterion(data["criterion"])
    if "cut_threshold" in data:
        raw = data["cut_threshold"]
        cfg.cut_threshold = None if raw in (None, "auto") else float(raw)
    if "train" in data:
        cfg.train = emb.TrainConfig(**data["train"])
    cfg.train.seed = cfg.seed
    cfg.validate()
    return cfg


def load_config(path: str) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Relation extraction


def compute_frame_relations(
    scene: SceneSequence, cfg: PipelineConfig
) -> dict[tuple[str, str], list[tuple[int, str]]]:
    """Per-frame relation tokens for every ordered object pair (DiSR or the
    RCC5(+On) baseline) and every (object, human_part) pair (RCC2)."""
    prof = cfg.profile
    states: dict[int, dict[str, EntityFrameState]] = {}
    per_frame_conv: dict[str, list[ConvexityType]] = {}
    per_frame_vals: dict[tuple[str, int], np.ndarray] = {}

    objects = scene.objects()
    humans = scene.human_parts()

    for f in range(scene.frame_count):
        smap = build_semantic_depth_map(scene, f)
        frame_states: dict[str, EntityFrameState] = {}
        for ent in objects:
            obs = ent.observation_at(f)
            if obs is None:
                continue
            depth_range = None
            convexity = None
            if obs.mask is not None and obs.depth is not None:
                owned = smap.owned_mask(ent.id)
                if owned.any():
                    vals = smap.owned_depths(ent.id)
                    depth_range = (float(vals[0]), float(vals[-1]))
                    per_frame_vals[(ent.id, f)] = vals
                    x0 = max(0, int(math.floor(obs.bbox.xmin)))
                    x1 = min(scene.width, int(math.ceil(obs.bbox.xmax)))
                    y0 = max(0, int(math.floor(obs.bbox.ymin)))
                    y1 = min(scene.height, int(math.ceil(obs.bbox.ymax)))
                    local_owned = owned[y0:y1, x0:x1]
                    local_depth = smap.depth[y0:y1, x0:x1]
                    deep = deep_region(local_depth, local_owned, prof.thresh_convex)
                    convexity = object_convexity(
                        vals, deep, prof.thresh_convex,
                        noise_ratio=prof.noise_ratio,
                        object_pixel_count=int(local_owned.sum()),
                        alg1_literal=prof.alg1_literal,
                    )
                    per_frame_conv.setdefault(ent.id, []).append(convexity)
            frame_states[ent.id] = EntityFrameState(
                bbox=obs.bbox, depth_range=depth_range, convexity=convexity)
        states[f] = frame_states

    # consolidate convexity per track unless per-frame typing is requested
    track_types = {
        eid: track_convexity(types) for eid, types in per_frame_conv.items()
    }

    relations: dict[tuple[str, str], list[tuple[int, str]]] = {}
    for f in range(scene.frame_count):
        frame_states = states[f]
        # attach concavity bounds with the consolidated type
        resolved: dict[str, EntityFrameState] = {}
        for eid, st in frame_states.items():
            conv = st.convexity if cfg.profile.per_frame_convexity else track_types.get(eid)
            bounds = None
            vals = per_frame_vals.get((eid, f))
            if vals is not None and conv is not None:
                bounds = convexity_depth(vals, conv, prof.h, prof.n)
            resolved[eid] = EntityFrameState(
                bbox=st.bbox, depth_range=st.depth_range,
                concavity_bounds=bounds, convexity=conv)

        ids = sorted(resolved)
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                if cfg.calculus == "disr":
                    rel_ab, rel_ba = disr(PairFrameContext(resolved[a], resolved[b]))
                    tok_ab, tok_ba = rel_ab.value, rel_ba.value
                else:
                    tok_ab = rcc5_on(resolved[a].bbox, resolved[b].bbox).value
                    tok_ba = rcc5_on(resolved[b].bbox, resolved[a].bbox).value
                relations.setdefault((a, b), []).append((f, tok_ab))
                relations.setdefault((b, a), []).append((f, tok_ba))

        for ent in objects:
            obs_o = ent.observation_at(f)
            if obs_o is None:
                continue
            for part in humans:
                obs_h = part.observation_at(f)
                if obs_h is None:
                    continue
                rel = rcc2(obs_o.mask, obs_h.mask, obs_o.bbox, obs_h.bbox)
                relations.setdefault((ent.id, part.id), []).append((f, rel.value))
    return relations


def compute_episodes(
    relations: dict[tuple[str, str], list[tuple[int, str]]],
    scene: SceneSequence,
    cfg: PipelineConfig,
) -> list[Episode]:
    human_ids = {e.id for e in scene.human_parts()}
    obj_calc = Calculus.DISR if cfg.calculus == "disr" else Calculus.RCC5ON
    episodes: list[Episode] = []
    for pair in sorted(relations):
        calc = Calculus.RCC2 if pair[1] in human_ids else obj_calc
        episodes.extend(extract_episodes(
            relations[pair], pair, calc,
            smoothing=cfg.smoothing, gap_bridge=cfg.gap_bridge,
        ))
    return episodes


def scene_graphlets(
    scene_id: str, scene: SceneSequence, cfg: PipelineConfig
) -> list[AGraphlet]:
    relations = compute_frame_relations(scene, cfg)
    episodes = compute_episodes(relations, scene, cfg)
    non_interaction = "NI" if cfg.calculus == "disr" else "DR"
    return build_agraphlets(
        scene_id, episodes, temporal_cap=cfg.temporal_cap,
        non_interaction=non_interaction,
    )


# ---------------------------------------------------------------------------
# Corpus files


def save_graphlet_corpus(graphlets: list[AGraphlet], path: str) -> None:
    """Line-delimited records: canonical form plus provenance."""
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphlets:
            record = {
                "id": g.id,
                "scene": g.scene_id,
                "anchor": g.anchor,
                "partner": g.partner_object,
                "human_part": g.human_part,
                "form": canonical_form(g),
                "episodes": g.episode_ids,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_graphlet_corpus(path: str) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass
class RunReport:
    n_graphlets: int
    n_clusters: int
    cut_threshold: float
    homogeneity: Optional[float]
    completeness: Optional[float]
    v_measure: Optional[float]
    artifacts: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, detail: str):
        super().__init__(f"[{stage}] {detail}")
        self.stage = stage


def run_pipeline(
    scenes: dict[str, SceneSequence],
    cfg: PipelineConfig,
    out_dir: str,
    groundtruth: Optional[dict[str, list[str]]] = None,
) -> RunReport:
    """Run every stage, writing each intermediate artifact under ``out_dir``."""
    cfg.validate()
    if not scenes:
        raise PipelineError("input", "no scenes provided")
    os.makedirs(out_dir, exist_ok=True)
    artifacts: dict[str, str] = {}

    graphlets: list[AGraphlet] = []
    episodes_path = os.path.join(out_dir, "episodes.json")
    all_episodes: dict[str, list] = {}
    for scene_id in sorted(scenes):
        scene = scenes[scene_id]
        try:
            relations = compute_frame_relations(scene, cfg)
            episodes = compute_episodes(relations, scene, cfg)
        except Exception as exc:
            raise PipelineError("relations", f"scene {scene_id}: {exc}") from exc
        all_episodes[scene_id] = [
            {"pair": list(ep.pair), "calculus": ep.calculus.value,
             "relation": ep.relation,
             "interval": [ep.interval.start, ep.interval.end]}
            for ep in episodes
        ]
        non_interaction = "NI" if cfg.calculus == "disr" else "DR"
        graphlets.extend(build_agraphlets(
            scene_id, episodes, temporal_cap=cfg.temporal_cap,
            non_interaction=non_interaction,
        ))
    with open(episodes_path, "w", encoding="utf-8") as fh:
        json.dump(all_episodes, fh, sort_keys=True)
    artifacts["episodes"] = episodes_path

    if not graphlets:
        raise PipelineError("graphlets", "no interactions found in any scene")
    corpus_path = os.path.join(out_dir, "graphlets.jsonl")
    save_graphlet_corpus(graphlets, corpus_path)
    artifacts["graphlets"] = corpus_path

    ids = [g.id for g in graphlets]
    if cfg.mode == "embedding":
        records = load_graphlet_corpus(corpus_path)
        tokens = []
        for rec in records:
            labels, edges = parse_canonical(rec["form"])
            tokens.append(emb.wl_tokens(labels, edges, cfg.train.wl_depth))
        vocab = emb.build_vocabulary(tokens)
        vocab_path = os.path.join(out_dir, "vocabulary.tsv")
        emb.save_vocabulary(vocab, vocab_path)
        artifacts["vocabulary"] = vocab_path
        try:
            table = emb.train([rec["id"] for rec in records], tokens, vocab, cfg.train)
        except emb.DivergenceError as exc:
            raise PipelineError("embed", str(exc)) from exc
        emb_path = os.path.join(out_dir, "embeddings.tsv")
        emb.save_embeddings(table, emb_path)
        artifacts["embeddings"] = emb_path
        dist = clust.pairwise_cosine_costs(table.vectors)
        vectors = table.vectors
        corpus_ids = table.graph_ids
    else:
        n = len(graphlets)
        dist = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                dist[i, j] = dist[j, i] = clust.sed_distance(
                    graphlets[i], graphlets[j], cfg.c_spat, cfg.k_spat)
        vectors = None
        corpus_ids = ids

    dend = clust.hierarchical_cluster(dist, cfg.linkage, leaf_ids=corpus_ids)
    dend_path = os.path.join(out_dir, "dendrogram.json")
    clust.export_dendrogram_json(dend, dend_path)
    artifacts["dendrogram"] = dend_path

    if cfg.mode == "sed":
        threshold = cfg.sed_threshold
    elif cfg.cut_threshold is None:
        threshold = clust.select_threshold(dend, vectors, cfg.criterion)
    else:
        threshold = cfg.cut_threshold
    flat = clust.cut(dend, threshold)
    flat_path = os.path.join(out_dir, "clusters.tsv")
    with open(flat_path, "w", encoding="utf-8") as fh:
        for gid in corpus_ids:
            fh.write(f"{gid}\t{flat.assignment[gid]}\n")
    artifacts["clusters"] = flat_path

    hom = comp = v = None
    if groundtruth:
        corpus = LabeledCorpus(
            truth={gid: labels for gid, labels in groundtruth.items()},
            predicted=flat.assignment,
        )
        try:
            hom, comp, v = v_measure(corpus)
        except ValueError as exc:
            raise PipelineError("evaluate", str(exc)) from exc
        metrics_path = os.path.join(out_dir, "metrics.txt")
        with open(metrics_path, "w", encoding="utf-8") as fh:
            fh.write(metrics_report(hom, comp, v))
        artifacts["metrics"] = metrics_path

    report = RunReport(
        n_graphlets=len(graphlets),
        n_clusters=flat.n_clusters(),
        cut_threshold=float(threshold),
        homogeneity=hom, completeness=comp, v_measure=v,
        artifacts=artifacts,
    )
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
    return report


def export_dendrogram_dot(
    dend: clust.Dendrogram, flat: Optional[clust.FlatClustering], path: str
) -> None:
    """DOT rendering with leaves annotated by id and colored by cluster."""
    palette = [
        "lightblue", "lightgreen", "salmon", "gold", "plum", "khaki",
        "lightcyan", "orange", "palegreen", "pink",
    ]
    lines = ["graph dendrogram {", "  node [shape=box];"]
    for leaf in range(dend.n_leaves):
        gid = dend.leaf_ids[leaf]
        color = ""
        if flat is not None:
            cluster = flat.assignment[gid]
            color = (f', style=filled, fillcolor="{palette[cluster % len(palette)]}"'
                     f', label="{gid}\\ncluster {cluster}"')
        lines.append(f'  n{leaf} [label="{gid}"{color}];')
    for mi, m in enumerate(dend.merges):
        node = dend.n_leaves + mi
        lines.append(f'  n{node} [shape=point, label="", xlabel="{m.height:.4f}"];')
        lines.append(f"  n{node} -- n{m.left};")
        lines.append(f"  n{node} -- n{m.right};")
    lines.append("}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
