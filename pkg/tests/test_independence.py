"""Bipartite decomposition, matching, certificates, and exact maximum k."""

import itertools

import pytest

from netbell.independence import (
    BipartiteDecomposition,
    SizeLimitError,
    certify_independence,
    decompose,
    find_certificate,
    hopcroft_karp,
    kmax_exact,
    subset_search,
)
from netbell.network import gallery


def test_decompose_chain3():
    g = decompose(gallery("chain(3)"))
    assert g.left_vertices == ("S1", "S2")
    assert g.right_vertices == ("R1", "R2", "R3", "R4")
    assert g.back_map["R1"] == ("A1", 0)
    assert g.back_map["R2"] == ("A2", 0)
    assert g.back_map["R3"] == ("A2", 1)
    assert g.back_map["R4"] == ("A3", 0)
    assert g.party_degree == {"A1": 1, "A2": 2, "A3": 1}


def test_decompose_fig_s2_sizes():
    g = decompose(gallery("fig-s2"))
    assert len(g.left_vertices) == 7
    assert g.n_right == 14
    # every right vertex has exactly one incident edge
    assert len(g.edges) == 14


def _brute_force_max_matching(edges):
    """Maximum matching size by subset enumeration; only for tiny graphs."""
    best = 0
    for size in range(len(edges), 0, -1):
        if size <= best:
            break
        for combo in itertools.combinations(edges, size):
            lefts = [e[0] for e in combo]
            rights = [e[1] for e in combo]
            if len(set(lefts)) == size and len(set(rights)) == size:
                best = size
                break
    return best


def _graph(lefts, rights, edges):
    return BipartiteDecomposition(
        left_vertices=tuple(lefts),
        right_vertices=tuple(rights),
        back_map={r: ("P", i) for i, r in enumerate(rights)},
        edges=tuple(edges),
        party_degree={"P": len(rights)},
    )


def test_hopcroft_karp_matches_brute_force_on_small_graphs():
    cases = [
        [("a", "R1"), ("a", "R2"), ("b", "R2"), ("c", "R3")],
        [("a", "R1"), ("b", "R1"), ("c", "R1")],
        [("a", "R1"), ("a", "R2"), ("b", "R1"), ("b", "R3"), ("c", "R2"), ("c", "R3")],
        [("a", "R2"), ("b", "R2"), ("b", "R1"), ("c", "R3"), ("d", "R3"), ("d", "R4")],
        [
            ("a", "R1"), ("a", "R4"), ("b", "R1"), ("b", "R2"),
            ("c", "R2"), ("c", "R3"), ("d", "R3"), ("d", "R4"), ("e", "R4"),
        ],
    ]
    for edges in cases:
        lefts = sorted({e[0] for e in edges})
        rights = sorted({e[1] for e in edges}, key=lambda r: int(r[1:]))
        g = _graph(lefts, rights, edges)
        matching = hopcroft_karp(g)
        assert len(matching) == _brute_force_max_matching(edges)
        assert matching <= set(edges)
        # rerun is byte-for-byte deterministic
        assert hopcroft_karp(g) == matching


def test_hopcroft_karp_rejects_empty_graph():
    g = _graph(["a"], [], [])
    with pytest.raises(ValueError):
        hopcroft_karp(g)


def test_certify_rejects_foreign_edges():
    net = gallery("chain(3)")
    with pytest.raises(ValueError):
        certify_independence(net, {("S1", "R4")})


def test_certify_chain5_with_explicit_maximum_matching():
    # A hand-picked maximum matching covering A1, A3, and A5 completely.
    net = gallery("chain(5)")
    g = decompose(net)
    assert g.back_map["R1"] == ("A1", 0)
    assert g.back_map["R4"] == ("A3", 0)
    assert g.back_map["R5"] == ("A3", 1)
    assert g.back_map["R8"] == ("A5", 0)
    matching = {("S1", "R1"), ("S2", "R4"), ("S3", "R5"), ("S4", "R8")}
    cert = certify_independence(net, matching)
    assert cert.k == 3
    assert cert.independent_parties == ("A1", "A3", "A5")


def test_fig_s2_deterministic_matching_and_certificate():
    net = gallery("fig-s2")
    matching = hopcroft_karp(decompose(net))
    assert len(matching) == 7
    required = {("S1", "R1"), ("S5", "R2"), ("S2", "R3"), ("S3", "R4"), ("S6", "R5")}
    assert required <= matching
    cert = certify_independence(net, matching)
    assert cert.k == 2
    assert cert.independent_parties == ("A1", "A2")


def test_subset_search_bounds_and_result():
    net = gallery("chain(5)")
    cert = subset_search(net, 3)
    assert cert is not None and cert.independent_parties == ("A1", "A3", "A5")
    assert subset_search(net, 4) is None
    with pytest.raises(ValueError):
        subset_search(net, 1)
    with pytest.raises(ValueError):
        subset_search(net, 6)


def test_kmax_chain_and_cycle_formulas():
    for n in range(3, 9):
        assert kmax_exact(gallery(f"chain({n})")).k == -(-n // 2)
    for n in range(4, 9):
        assert kmax_exact(gallery(f"cycle({n})")).k == n // 2


def test_kmax_is_lexicographically_first():
    cert = kmax_exact(gallery("chain(5)"))
    assert cert.independent_parties == ("A1", "A3", "A5")
    assert cert.method == "exhaustive"


def test_kmax_size_limit():
    with pytest.raises(SizeLimitError):
        kmax_exact(gallery("chain(21)"))
    assert kmax_exact(gallery("chain(21)"), limit=25).k == 11


def test_find_certificate_k2_networks():
    for name in ("chain(3)", "chain(4)", "fig-s2", "two-loop"):
        cert = find_certificate(gallery(name))
        assert cert.k >= 2, name
        # witnessed matching must actually certify the same parties
        check = certify_independence(gallery(name), set(cert.matching))
        assert set(cert.independent_parties) <= set(check.independent_parties)


def test_find_certificate_degenerate_networks():
    for name in ("tri-ghz", "symmetric-cycle", "door"):
        cert = find_certificate(gallery(name))
        assert cert.k <= 1, name
