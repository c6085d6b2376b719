"""Shared builders for randomized graphlets and synthetic corpora."""

from __future__ import annotations

import numpy as np
import pytest

from affgraph.graphlet import ENTITY, SPATIAL, TEMPORAL, AGraphlet
from affgraph.temporal import Calculus

DISR_LABELS = ["DiSR:Sup", "DiSR:Supi", "DiSR:Cont", "DiSR:Conti", "DiSR:Adj", "DiSR:NI"]
RCC2_LABELS = ["RCC2:C", "RCC2:DC"]
ALLEN_LABELS = ["<", ">", "m", "mi", "o", "oi", "s", "si", "d", "di", "f", "fi", "="]


def random_graphlet(rng: np.random.Generator, max_spatial: int = 4,
                    max_temporal: int = 4) -> AGraphlet:
    """Random valid 3-layer graphlet: entity roles, spatial episodes, Allen links."""
    g = AGraphlet(anchor="a", partner_object="b", human_part="h",
                  scene_id=f"rand_{rng.integers(1 << 30)}")
    v_anchor = g.add_vertex(ENTITY, "anchor")
    v_partner = g.add_vertex(ENTITY, "partner")
    v_human = g.add_vertex(ENTITY, "human")
    spatial: list[int] = []
    for _ in range(int(rng.integers(1, max_spatial + 1))):
        if rng.random() < 0.5:
            v = g.add_vertex(SPATIAL, DISR_LABELS[rng.integers(len(DISR_LABELS))])
            g.spatial_calculus[v] = Calculus.DISR
            g.add_edge(v_anchor, v)
            g.add_edge(v_partner, v)
        else:
            v = g.add_vertex(SPATIAL, RCC2_LABELS[rng.integers(len(RCC2_LABELS))])
            g.spatial_calculus[v] = Calculus.RCC2
            g.add_edge(v_anchor, v)
            g.add_edge(v_human, v)
        spatial.append(v)
    if len(spatial) >= 2:
        for _ in range(int(rng.integers(0, max_temporal + 1))):
            i, j = rng.choice(len(spatial), size=2, replace=False)
            v = g.add_vertex(TEMPORAL, ALLEN_LABELS[rng.integers(len(ALLEN_LABELS))])
            g.add_edge(spatial[i], v)
            g.add_edge(spatial[j], v)
    return g


def permute_vertices(labels: list[str], edges: list[tuple[int, int]],
                     perm: list[int]) -> tuple[list[str], list[tuple[int, int]]]:
    """Relabel vertex ids: vertex v becomes perm[v]."""
    n = len(labels)
    new_labels = [""] * n
    for v, lbl in enumerate(labels):
        new_labels[perm[v]] = lbl
    new_edges = [(perm[u], perm[v]) for u, v in edges]
    return new_labels, new_edges


def permute_graphlet(g: AGraphlet, perm: list[int]) -> AGraphlet:
    labels, edges = permute_vertices(g.vertex_labels, g.edges, perm)
    layers, _ = permute_vertices(g.vertex_layers, [], perm)
    out = AGraphlet(anchor=g.anchor, partner_object=g.partner_object,
                    human_part=g.human_part, scene_id=g.scene_id,
                    vertex_layers=layers, vertex_labels=labels, edges=edges,
                    spatial_calculus={perm[v]: c for v, c in g.spatial_calculus.items()})
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
