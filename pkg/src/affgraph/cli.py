"""Command-line interface for the interaction-graph pipeline.

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numeric failure.
The AFFGRAPH_CONFIG environment variable names a default config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import clustering as clust
from . import embedding as emb
from .evaluation import LabeledCorpus, metrics_report, pca_project, v_measure
from .graphlet import parse_canonical
from .pipeline import (
    PipelineConfig,
    PipelineError,
    compute_episodes,
    compute_frame_relations,
    export_dendrogram_dot,
    load_config,
    run_pipeline,
    save_graphlet_corpus,
    scene_graphlets,
)
from .scene import SceneError, load_scene
from .synth import ScriptError, SyntheticScript, generate_synthetic
from .scene import save_scene

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

CONFIG_ENV = "AFFGRAPH_CONFIG"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _config(args) -> PipelineConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if path:
        try:
            cfg = load_config(path)
        except FileNotFoundError as exc:
            raise CliError(EXIT_USAGE, f"config file not found: {path}") from exc
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CliError(EXIT_DATA, f"invalid config {path}: {exc}") from exc
    else:
        cfg = PipelineConfig()
    # individual flags override the config file
    for attr in ("calculus", "mode", "smoothing", "gap_bridge", "seed"):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, attr, val)
    if getattr(args, "profile", None):
        from .pipeline import PROFILES

        cfg.profile = PROFILES[args.profile]
    if getattr(args, "cut_threshold", None) is not None:
        raw = args.cut_threshold
        cfg.cut_threshold = None if raw == "auto" else float(raw)
    cfg.train.seed = cfg.seed
    try:
        cfg.validate()
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc
    return cfg


def _load_scenes(paths: list[str]) -> dict:
    scenes = {}
    for path in paths:
        name = os.path.splitext(os.path.basename(path))[0]
        scenes[name] = load_scene(path)
    return scenes


def cmd_validate(args) -> int:
    for path in args.scenes:
        load_scene(path)
        print(f"ok {path}")
    return EXIT_OK


def cmd_relations(args) -> int:
    cfg = _config(args)
    scene = load_scene(args.scene)
    relations = compute_frame_relations(scene, cfg)
    out = {f"{a}|{b}": tokens for (a, b), tokens in sorted(relations.items())}
    json.dump(out, sys.stdout, sort_keys=True)
    print()
    return EXIT_OK


def cmd_episodes(args) -> int:
    cfg = _config(args)
    scene = load_scene(args.scene)
    relations = compute_frame_relations(scene, cfg)
    episodes = compute_episodes(relations, scene, cfg)
    out = [
        {"pair": list(ep.pair), "calculus": ep.calculus.value,
         "relation": ep.relation,
         "interval": [ep.interval.start, ep.interval.end]}
        for ep in episodes
    ]
    json.dump(out, sys.stdout, sort_keys=True)
    print()
    return EXIT_OK


def cmd_graphlets(args) -> int:
    cfg = _config(args)
    graphlets = []
    for path in args.scenes:
        name = os.path.splitext(os.path.basename(path))[0]
        graphlets.extend(scene_graphlets(name, load_scene(path), cfg))
    save_graphlet_corpus(graphlets, args.output)
    print(f"{len(graphlets)} graphlets -> {args.output}")
    return EXIT_OK


def cmd_embed(args) -> int:
    cfg = _config(args)
    from .pipeline import load_graphlet_corpus

    records = load_graphlet_corpus(args.corpus)
    if not records:
        raise CliError(EXIT_DATA, f"empty graphlet corpus: {args.corpus}")
    tokens = []
    for rec in records:
        labels, edges = parse_canonical(rec["form"])
        tokens.append(emb.wl_tokens(labels, edges, cfg.train.wl_depth))
    vocab = emb.build_vocabulary(tokens)
    table = emb.train([rec["id"] for rec in records], tokens, vocab, cfg.train)
    emb.save_embeddings(table, args.output)
    print(f"{len(records)} embeddings -> {args.output}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    cfg = _config(args)
    table = emb.load_embeddings(args.embeddings)
    dist = clust.pairwise_cosine_costs(table.vectors)
    dend = clust.hierarchical_cluster(dist, cfg.linkage, leaf_ids=table.graph_ids)
    if cfg.cut_threshold is None:
        threshold = clust.select_threshold(dend, table.vectors, cfg.criterion)
    else:
        threshold = cfg.cut_threshold
    flat = clust.cut(dend, threshold)
    clust.export_dendrogram_json(dend, args.dendrogram)
    with open(args.output, "w", encoding="utf-8") as fh:
        for gid in table.graph_ids:
            fh.write(f"{gid}\t{flat.assignment[gid]}\n")
    print(f"{flat.n_clusters()} clusters at threshold {threshold:g} -> {args.output}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    with open(args.truth, "r", encoding="utf-8") as fh:
        truth = json.load(fh)
    predicted = {}
    with open(args.clusters, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                gid, cid = line.rstrip("\n").split("\t")
                predicted[gid] = int(cid)
    h, c, v = v_measure(LabeledCorpus(truth=truth, predicted=predicted))
    sys.stdout.write(metrics_report(h, c, v))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    scenes = _load_scenes(args.scenes)
    truth = None
    if args.truth:
        with open(args.truth, "r", encoding="utf-8") as fh:
            truth = json.load(fh)
    report = run_pipeline(scenes, cfg, args.output, groundtruth=truth)
    json.dump(report.to_dict(), sys.stdout, sort_keys=True, indent=2)
    print()
    return EXIT_OK


def cmd_synth(args) -> int:
    script = SyntheticScript(
        kind=args.kind, frame_count=args.frames, switch_frame=args.switch,
        jitter=args.jitter,
    )
    gen = generate_synthetic(script, args.seed)
    save_scene(gen.scene, args.output)
    if args.labels:
        payload = {f"{a}|{b}": labels for (a, b), labels in sorted(gen.labels.items())}
        with open(args.labels, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
    print(f"{args.kind} scene -> {args.output}")
    return EXIT_OK


def cmd_export(args) -> int:
    dend = clust.load_dendrogram_json(args.dendrogram)
    flat = None
    if args.clusters:
        assignment = {}
        with open(args.clusters, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    gid, cid = line.rstrip("\n").split("\t")
                    assignment[gid] = int(cid)
        flat = clust.FlatClustering(assignment=assignment)
    if args.format == "dot":
        export_dendrogram_dot(dend, flat, args.output)
    else:
        clust.export_dendrogram_json(dend, args.output)
    if args.pca and args.embeddings:
        table = emb.load_embeddings(args.embeddings)
        proj = pca_project(table.vectors, 2)
        with open(args.pca, "w", encoding="utf-8") as fh:
            for gid, (x, y) in zip(table.graph_ids, proj):
                fh.write(f"{gid}\t{x!r}\t{y!r}\n")
    print(f"dendrogram -> {args.output}")
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="pipeline config file (JSON)")
    p.add_argument("--profile", choices=["cad-like", "wnp-like", "load-like"])
    p.add_argument("--calculus", choices=["disr", "rcc5_on"])
    p.add_argument("--mode", choices=["embedding", "sed"])
    p.add_argument("--smoothing", type=int)
    p.add_argument("--gap-bridge", dest="gap_bridge", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cut-threshold", dest="cut_threshold",
                   help="cut height, or 'auto' for criterion-based selection")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affgraph",
        description="Interaction-graph affordance clustering pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate scene files")
    p.add_argument("scenes", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("relations", help="per-frame relation tokens for one scene")
    p.add_argument("scene")
    _add_config_flags(p)
    p.set_defaults(func=cmd_relations)

    p = sub.add_parser("episodes", help="episode segmentation for one scene")
    p.add_argument("scene")
    _add_config_flags(p)
    p.set_defaults(func=cmd_episodes)

    p = sub.add_parser("graphlets", help="build a graphlet corpus from scenes")
    p.add_argument("scenes", nargs="+")
    p.add_argument("-o", "--output", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_graphlets)

    p = sub.add_parser("embed", help="train embeddings for a graphlet corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", help="cluster an embedding table")
    p.add_argument("embeddings")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dendrogram", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", help="score a flat clustering against labels")
    p.add_argument("clusters")
    p.add_argument("truth")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline over scene files")
    p.add_argument("scenes", nargs="+")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--truth", help="groundtruth labels JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("kind", choices=[
        "place-on", "put-into", "take-out", "push-adjacent", "occlude-pass-behind",
    ])
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--labels", help="write affordance labels JSON here")
    p.add_argument("--frames", type=int, default=36)
    p.add_argument("--switch", type=int, default=12)
    p.add_argument("--jitter", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="export a dendrogram (dot or json)")
    p.add_argument("dendrogram")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--clusters", help="flat clustering TSV for leaf coloring")
    p.add_argument("--embeddings", help="embedding table for PCA export")
    p.add_argument("--pca", help="write 2-D PCA coordinates here")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SceneError, ScriptError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if exc.stage in ("embed", "evaluate") else EXIT_DATA
    except (emb.DivergenceError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
