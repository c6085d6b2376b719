"""Three-layer interaction graphlets and their canonical serialization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .temporal import Calculus, Episode, allen

ENTITY = "entity"
SPATIAL = "spatial"
TEMPORAL = "temporal"

ROLE_ANCHOR = "anchor"
ROLE_PARTNER = "partner"
ROLE_HUMAN = "human"


@dataclass
class AGraphlet:
    """Labeled graph over entity / spatial / temporal vertex layers.

    Entity vertices carry role labels only; spatial vertices one episode
    relation each; temporal vertices an Allen relation between two episodes.
    Edges join adjacent layers only.
    """

    anchor: str
    partner_object: str
    human_part: Optional[str]
    scene_id: str
    vertex_layers: list[str] = field(default_factory=list)
    vertex_labels: list[str] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)
    # spatial vertex id -> source calculus, for the set-edit-distance baseline
    spatial_calculus: dict[int, Calculus] = field(default_factory=dict)
    episode_ids: list[str] = field(default_factory=list)

    @property
    def id(self) -> str:
        return f"{self.scene_id}/{self.anchor}/{self.partner_object}"

    def vertex_count(self) -> int:
        return len(self.vertex_labels)

    def add_vertex(self, layer: str, label: str) -> int:
        self.vertex_layers.append(layer)
        self.vertex_labels.append(label)
        return len(self.vertex_labels) - 1

    def add_edge(self, u: int, v: int) -> None:
        self.edges.append((u, v))

    def neighbors(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in self.vertex_labels]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def validate(self) -> None:
        order = {ENTITY: 0, SPATIAL: 1, TEMPORAL: 2}
        for u, v in self.edges:
            du = order[self.vertex_layers[u]]
            dv = order[self.vertex_layers[v]]
            if abs(du - dv) != 1:
                raise ValueError(f"edge ({u},{v}) joins non-adjacent layers")

    def label_multiset(self, layer: str) -> list[str]:
        return sorted(
            lbl for lay, lbl in zip(self.vertex_layers, self.vertex_labels) if lay == layer
        )


def _episode_sort_key(ep: Episode) -> tuple:
    return (ep.interval.start, ep.calculus.value, ep.relation, ep.interval.end)


def _pair_gap(a: Episode, b: Episode) -> int:
    """Temporal distance between episode intervals (negative when overlapping)."""
    return max(a.interval.start, b.interval.start) - min(a.interval.end, b.interval.end)


def build_agraphlets(
    scene_id: str,
    episodes: list[Episode],
    temporal_cap: int = 256,
    non_interaction: str = "NI",
) -> list[AGraphlet]:
    """One graphlet per ordered object pair sharing a non-NI DiSR episode.

    Each graphlet combines the pair's DiSR episodes with the anchor's RCC2
    episodes against its designated human part (the part with the most
    connected frames), plus Allen temporal vertices for episode pairs up to
    ``temporal_cap``, closest in time first.
    """
    disr_by_pair: dict[tuple[str, str], list[Episode]] = {}
    rcc2_by_pair: dict[tuple[str, str], list[Episode]] = {}
    for ep in episodes:
        if ep.calculus is Calculus.RCC2:
            rcc2_by_pair.setdefault(ep.pair, []).append(ep)
        else:  # DiSR or the RCC5(+On) baseline calculus
            disr_by_pair.setdefault(ep.pair, []).append(ep)

    graphlets: list[AGraphlet] = []
    for (anchor, partner), disr_eps in sorted(disr_by_pair.items()):
        if not any(ep.relation != non_interaction for ep in disr_eps):
            continue
        # pick the human part with the most C frames against the anchor
        best_part: Optional[str] = None
        best_c_frames = -1
        for (a, part), rcc2_eps in sorted(rcc2_by_pair.items()):
            if a != anchor:
                continue
            c_frames = sum(
                ep.interval.end - ep.interval.start + 1
                for ep in rcc2_eps if ep.relation == "C"
            )
            if c_frames > best_c_frames:
                best_c_frames = c_frames
                best_part = part
        human_eps = rcc2_by_pair.get((anchor, best_part), []) if best_part else []

        g = AGraphlet(anchor=anchor, partner_object=partner,
                      human_part=best_part if human_eps else None, scene_id=scene_id)
        v_anchor = g.add_vertex(ENTITY, ROLE_ANCHOR)
        v_partner = g.add_vertex(ENTITY, ROLE_PARTNER)
        v_human = g.add_vertex(ENTITY, ROLE_HUMAN) if human_eps else None

        included: list[tuple[Episode, int]] = []
        for ep in sorted(disr_eps, key=_episode_sort_key):
            v = g.add_vertex(SPATIAL, f"{ep.calculus.value}:{ep.relation}")
            g.add_edge(v_anchor, v)
            g.add_edge(v_partner, v)
            g.spatial_calculus[v] = ep.calculus
            g.episode_ids.append(_episode_id(ep))
            included.append((ep, v))
        for ep in sorted(human_eps, key=_episode_sort_key):
            v = g.add_vertex(SPATIAL, f"{ep.calculus.value}:{ep.relation}")
            g.add_edge(v_anchor, v)
            if v_human is not None:
                g.add_edge(v_human, v)
            g.spatial_calculus[v] = Calculus.RCC2
            g.episode_ids.append(_episode_id(ep))
            included.append((ep, v))

        candidates = []
        for i in range(len(included)):
            for j in range(i + 1, len(included)):
                ep_i, v_i = included[i]
                ep_j, v_j = included[j]
                gap = _pair_gap(ep_i, ep_j)
                candidates.append((gap, i, j))
        candidates.sort()
        for gap, i, j in candidates[:temporal_cap]:
            ep_i, v_i = included[i]
            ep_j, v_j = included[j]
            # canonical direction: earlier-starting episode first
            if _episode_sort_key(ep_j) < _episode_sort_key(ep_i):
                ep_i, v_i, ep_j, v_j = ep_j, v_j, ep_i, v_i
            rel = allen(ep_i.interval, ep_j.interval)
            v = g.add_vertex(TEMPORAL, rel.value)
            g.add_edge(v_i, v)
            g.add_edge(v_j, v)
        graphlets.append(g)
    return graphlets


def _episode_id(ep: Episode) -> str:
    return (f"{ep.calculus.value}:{ep.pair[0]}:{ep.pair[1]}:"
            f"{ep.relation}:{ep.interval.start}-{ep.interval.end}")


# ---------------------------------------------------------------------------
# Canonical serialization


def _refine(labels: list[str], adj: list[set[int]],
            colors: list[int]) -> list[int]:
    """Iterate color refinement until the partition stabilizes."""
    n = len(labels)
    while True:
        signatures = [
            (colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)
        ]
        palette = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
        new_colors = [palette[sig] for sig in signatures]
        if len(set(new_colors)) == len(set(colors)):
            return new_colors
        colors = new_colors


def _serialize(order: list[int], layers: list[str], labels: list[str],
               edges: list[tuple[int, int]]) -> str:
    pos = {v: i for i, v in enumerate(order)}
    vparts = [f"{layers[v]}|{labels[v]}" for v in order]
    eparts = sorted(
        f"{min(pos[u], pos[v])}-{max(pos[u], pos[v])}" for u, v in edges
    )
    return "V[" + ";".join(vparts) + "]E[" + ";".join(eparts) + "]"


_MAX_LEAVES = 10_000


def canonical_form(g: AGraphlet) -> str:
    """Deterministic serialization invariant under vertex-id permutation.

    Color refinement orders most vertices; remaining ties are resolved by
    branching on each candidate and keeping the lexicographically smallest
    serialization (bounded search; ties beyond the bound fall back to the
    best form found, which covers all non-adversarial graphlets).
    """
    n = g.vertex_count()
    if n == 0:
        return "V[]E[]"
    adj = g.neighbors()
    labels = [f"{lay}|{lbl}" for lay, lbl in zip(g.vertex_layers, g.vertex_labels)]
    base = {lbl: i for i, lbl in enumerate(sorted(set(labels)))}
    init = [base[lbl] for lbl in labels]

    best: list[str] = []
    leaves = [0]

    def search(colors: list[int]) -> None:
        if leaves[0] >= _MAX_LEAVES:
            return
        colors = _refine(labels, adj, colors)
        groups: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            groups.setdefault(c, []).append(v)
        tied = sorted((c for c, vs in groups.items() if len(vs) > 1))
        if not tied:
            order = sorted(range(n), key=lambda v: colors[v])
            s = _serialize(order, g.vertex_layers, g.vertex_labels, g.edges)
            leaves[0] += 1
            if not best or s < best[0]:
                best[:] = [s]
            return
        target = groups[tied[0]]
        for v in target:
            branched = list(colors)
            branched[v] = n + 1  # individualize
            search(branched)

    search(init)
    if best:
        return best[0]
    # refinement left ties but the search budget ran out before any leaf
    colors = _refine(labels, adj, init)
    order = sorted(range(n), key=lambda v: (colors[v], v))
    return _serialize(order, g.vertex_layers, g.vertex_labels, g.edges)


def parse_canonical(form: str) -> tuple[list[str], list[tuple[int, int]]]:
    """Decode a canonical form back into vertex labels and an edge list.

    Labels come back as "layer|label" strings in canonical vertex order.
    """
    if not (form.startswith("V[") and "]E[" in form and form.endswith("]")):
        raise ValueError(f"malformed canonical form: {form[:40]!r}")
    vpart, epart = form[2:-1].split("]E[", 1)
    labels = vpart.split(";") if vpart else []
    edges = []
    if epart:
        for token in epart.split(";"):
            u, v = token.split("-")
            edges.append((int(u), int(v)))
    return labels, edges
