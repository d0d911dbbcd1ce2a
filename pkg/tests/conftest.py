"""Shared network builders for the test suite."""

import math

from netbell.network import (
    GeneralizedEPR,
    GeneralizedGHZ,
    NetworkTopology,
    PauliCoefficientState,
    SchmidtBlockBipartite,
    Source,
    Werner,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def epr(a=SQRT_HALF):
    b = math.sqrt(max(0.0, 1.0 - a * a))
    return GeneralizedEPR(a, b)


def werner_chain(n, v, a=SQRT_HALF):
    """EPR chain with every source carrying Werner noise of visibility v."""
    parties = tuple(f"A{i}" for i in range(1, n + 1))
    sources = tuple(
        Source(f"S{i}", Werner(epr(a), v), (f"A{i}", f"A{i + 1}")) for i in range(1, n)
    )
    return NetworkTopology(parties, sources)


def partial_chain(n, a):
    """EPR chain of partially entangled pairs a|00> + b|11>."""
    parties = tuple(f"A{i}" for i in range(1, n + 1))
    sources = tuple(
        Source(f"S{i}", epr(a), (f"A{i}", f"A{i + 1}")) for i in range(1, n)
    )
    return NetworkTopology(parties, sources)


def schmidt_chain3(a=0.7, b=0.5):
    """Three parties joined by two Schmidt-block states with tails."""
    tail = (math.sqrt(max(0.0, 1.0 - a * a - b * b)),)
    s = SchmidtBlockBipartite(a, b, tail)
    return NetworkTopology(
        ("A", "B", "C"),
        (Source("S1", s, ("A", "B")), Source("S2", s, ("B", "C"))),
    )


def mixed_epr_ghz_net(with_werner=False):
    """EPR pair plus a three-partite GHZ state; {P1, P3} are independent."""
    pair = Werner(epr(), 0.9) if with_werner else epr()
    ghz = GeneralizedGHZ(SQRT_HALF, SQRT_HALF, 3)
    return NetworkTopology(
        ("P1", "P2", "P3", "P4"),
        (
            Source("S1", pair, ("P1", "P2")),
            Source("G", ghz, ("P2", "P3", "P4")),
        ),
    )


def pauli_bilocal(c):
    """Two Werner-form coefficient states in a three-party chain."""
    state = PauliCoefficientState(2, {"zz": c, "xx": c, "yy": -c})
    return NetworkTopology(
        ("A", "B", "C"),
        (Source("S1", state, ("A", "B")), Source("S2", state, ("B", "C"))),
    )
