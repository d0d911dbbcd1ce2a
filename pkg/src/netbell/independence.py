"""Independent-party certification via bipartite matching and subset search.

A party is decomposed into one vertex per received particle; each decomposed
vertex connects to its delivering source.  A maximal matching in which every
decomposed vertex of a party is matched witnesses that the matched parties
draw from pairwise disjoint source sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .network import NetworkTopology


class SizeLimitError(RuntimeError):
    """Exact search requested on a network above the size limit."""


@dataclass(frozen=True)
class BipartiteDecomposition:
    """Sources on the left, decomposed single-particle parties on the right.

    Right vertices are named R1..RN in party order, then source declaration
    order within a party; each right vertex has exactly one incident edge.
    """

    left_vertices: tuple[str, ...]
    right_vertices: tuple[str, ...]
    back_map: dict[str, tuple[str, int]]
    edges: tuple[tuple[str, str], ...]
    party_degree: dict[str, int]

    @property
    def n_right(self) -> int:
        return len(self.right_vertices)


@dataclass(frozen=True)
class IndependenceCertificate:
    k: int
    independent_parties: tuple[str, ...]
    matching: tuple[tuple[str, str], ...]
    method: str

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "parties": list(self.independent_parties),
            "matching": [list(edge) for edge in self.matching],
            "method": self.method,
        }


def decompose(net: NetworkTopology) -> BipartiteDecomposition:
    """Build the equivalent bipartite graph with deterministic numbering."""
    right_vertices: list[str] = []
    back_map: dict[str, tuple[str, int]] = {}
    edges: list[tuple[str, str]] = []
    party_degree: dict[str, int] = {}
    counter = 0
    for party in net.parties:
        local = 0
        for source in net.sources:
            for recipient in source.recipients:
                if recipient != party:
                    continue
                counter += 1
                name = f"R{counter}"
                right_vertices.append(name)
                back_map[name] = (party, local)
                edges.append((source.id, name))
                local += 1
        party_degree[party] = local
    return BipartiteDecomposition(
        left_vertices=tuple(s.id for s in net.sources),
        right_vertices=tuple(right_vertices),
        back_map=back_map,
        edges=tuple(edges),
        party_degree=party_degree,
    )


def hopcroft_karp(
    g: BipartiteDecomposition, left_order: tuple[str, ...] | None = None
) -> set[tuple[str, str]]:
    """Maximum matching by Hopcroft-Karp with deterministic tie-breaking.

    Adjacency lists are scanned in ascending right-vertex order and left
    vertices in the given order (default: declaration order), so repeated
    runs return the same matching.  ``left_order`` permutations are used by
    the certificate retry loop to reach alternative maximal matchings.
    """
    if not g.edges:
        raise ValueError("empty bipartite graph")
    lefts = list(left_order) if left_order is not None else list(g.left_vertices)
    right_index = {r: i for i, r in enumerate(g.right_vertices)}
    adjacency: dict[str, list[str]] = {s: [] for s in g.left_vertices}
    for s, r in g.edges:
        adjacency[s].append(r)
    for s in adjacency:
        adjacency[s].sort(key=right_index.__getitem__)

    INF = float("inf")
    match_left: dict[str, str | None] = {s: None for s in lefts}
    match_right: dict[str, str | None] = {r: None for r in g.right_vertices}
    dist: dict[str, float] = {}

    def bfs() -> bool:
        queue = []
        for s in lefts:
            if match_left[s] is None:
                dist[s] = 0
                queue.append(s)
            else:
                dist[s] = INF
        found = False
        head = 0
        while head < len(queue):
            s = queue[head]
            head += 1
            for r in adjacency[s]:
                partner = match_right[r]
                if partner is None:
                    found = True
                elif dist[partner] == INF:
                    dist[partner] = dist[s] + 1
                    queue.append(partner)
        return found

    def dfs(s: str) -> bool:
        for r in adjacency[s]:
            partner = match_right[r]
            if partner is None or (dist[partner] == dist[s] + 1 and dfs(partner)):
                match_left[s] = r
                match_right[r] = s
                return True
        dist[s] = INF
        return False

    while bfs():
        for s in lefts:
            if match_left[s] is None:
                dfs(s)
    return {(s, r) for s, r in match_left.items() if r is not None}


def certify_independence(
    net: NetworkTopology, matching: set[tuple[str, str]]
) -> IndependenceCertificate:
    """Extract the parties whose decomposed vertices are all matched."""
    g = decompose(net)
    edge_set = set(g.edges)
    matched_rights = set()
    for s, r in matching:
        if (s, r) not in edge_set:
            raise ValueError(f"edge ({s}, {r}) is not in the decomposition")
        matched_rights.add(r)
    independent = []
    for party in net.parties:
        vertices = [r for r in g.right_vertices if g.back_map[r][0] == party]
        if vertices and all(r in matched_rights for r in vertices):
            independent.append(party)
    witness = tuple(sorted(matching, key=lambda e: (e[0], int(e[1][1:]))))
    return IndependenceCertificate(
        k=len(independent),
        independent_parties=tuple(independent),
        matching=witness,
        method="matching",
    )


def _witness_matching(
    net: NetworkTopology, parties: tuple[str, ...]
) -> tuple[tuple[str, str], ...] | None:
    """Matching covering every decomposed vertex of the given parties.

    Returns None when some party receives two particles of one source, in
    which case no covering matching exists.
    """
    g = decompose(net)
    used: set[str] = set()
    edges = []
    wanted = set(parties)
    for s, r in g.edges:
        if g.back_map[r][0] not in wanted:
            continue
        if s in used:
            return None
        used.add(s)
        edges.append((s, r))
    return tuple(edges)


def subset_search(net: NetworkTopology, k: int) -> IndependenceCertificate | None:
    """First k-subset of parties (lexicographic) with pairwise disjoint sources."""
    if not 2 <= k <= net.n:
        raise ValueError(f"k must be in [2, {net.n}], got {k}")
    source_sets = {p: set(net.party_sources(p)) for p in net.parties}
    for subset in combinations(net.parties, k):
        if any(source_sets[p] & source_sets[q] for p, q in combinations(subset, 2)):
            continue
        matching = _witness_matching(net, subset)
        if matching is None:
            continue
        return IndependenceCertificate(
            k=k, independent_parties=subset, matching=matching, method="subset-search"
        )
    return None


def kmax_exact(net: NetworkTopology, limit: int = 20) -> IndependenceCertificate:
    """Exact maximum k by exhaustive subset enumeration with conflict pruning."""
    if net.n > limit:
        raise SizeLimitError(
            f"network has {net.n} parties, exceeding the exact-search limit {limit}"
        )
    source_sets = {p: set(net.party_sources(p)) for p in net.parties}
    parties = list(net.parties)
    conflict = {
        p: {q for q in parties if q != p and source_sets[p] & source_sets[q]} for p in parties
    }

    best: tuple[str, ...] = ()

    def extend(chosen: list[str], candidates: list[str]):
        nonlocal best
        if len(chosen) + len(candidates) <= len(best):
            return
        if len(chosen) > len(best):
            best = tuple(chosen)
        for i, p in enumerate(candidates):
            rest = [q for q in candidates[i + 1 :] if q not in conflict[p]]
            extend(chosen + [p], rest)

    extend([], parties)
    # Lexicographically first subset of the maximum size wins.
    k = len(best)
    winner = best
    if k >= 1:
        for subset in combinations(parties, k):
            if all(q not in conflict[p] for p, q in combinations(subset, 2)):
                winner = subset
                break
    matching = _witness_matching(net, winner) if k else ()
    if matching is None:
        matching = ()
    return IndependenceCertificate(
        k=k, independent_parties=winner, matching=matching, method="exhaustive"
    )


def find_certificate(net: NetworkTopology, retries: int = 32) -> IndependenceCertificate:
    """Matching pipeline: decompose, match, certify, retry, then subset search.

    Up to ``retries`` alternative maximal matchings are tried by rotating the
    source exploration order; if none certifies k >= 2 the direct two-party
    subset search is the last resort.  The first matching's certificate is
    returned when no k >= 2 certificate exists.
    """
    g = decompose(net)
    lefts = list(g.left_vertices)
    first = None
    for attempt in range(min(retries, len(lefts)) or 1):
        order = tuple(lefts[attempt:] + lefts[:attempt])
        cert = certify_independence(net, hopcroft_karp(g, order))
        if first is None:
            first = cert
        if cert.k >= 2:
            return cert
    if net.n >= 2:
        cert = subset_search(net, 2)
        if cert is not None:
            return cert
    assert first is not None
    return first
