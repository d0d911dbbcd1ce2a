"""State construction, observables, and the two correlation paths."""

import math

import numpy as np
import pytest
from conftest import mixed_epr_ghz_net, pauli_bilocal, schmidt_chain3, werner_chain

from netbell.independence import find_certificate
from netbell.network import gallery
from netbell.quantum import (
    DimensionCapError,
    build_observables,
    build_partition,
    build_state,
    expectation,
    factor_constants,
    factorized_IJ,
    full_tensor_IJ,
    ij_from_constants,
    slot_matrix,
)

QUARTER_PI = math.pi / 4


def test_slot_matrix_involutions():
    for dim in (2, 3):
        z = slot_matrix(dim, "z")
        x = slot_matrix(dim, "x")
        p = slot_matrix(dim, "p")
        # z^2 = x^2 = p^2 = p: exact involutions on the distinguished block
        assert np.array_equal(z @ z, p)
        assert np.array_equal(x @ x, p)
        assert np.array_equal(p @ p, p)
        assert np.array_equal(z @ x, -(x @ z))


def test_build_state_chain2_amplitudes():
    net = gallery("chain(2)")
    state = build_state(net)
    assert state.is_pure
    vec = state.vector
    assert vec.shape == (2, 2)
    assert abs(vec[0, 0] - 1 / math.sqrt(2)) < 1e-12
    assert abs(vec[1, 1] - 1 / math.sqrt(2)) < 1e-12


def test_build_state_mixed_density_trace():
    net = werner_chain(3, 0.8)
    state = build_state(net)
    assert not state.is_pure
    assert abs(np.trace(state.density) - 1.0) < 1e-12


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        build_state(gallery("chain(3)"), dim_cap=8)
    net = gallery("chain(3)")
    cert = find_certificate(net)
    with pytest.raises(DimensionCapError):
        full_tensor_IJ(net, cert, (QUARTER_PI, QUARTER_PI), dim_cap=8)


def test_expectation_rejects_overlapping_operators():
    net = gallery("chain(3)")
    cert = find_certificate(net)
    obs = build_observables(net, cert, (QUARTER_PI, QUARTER_PI))
    state = build_state(net)
    op = obs.A[(cert.independent_parties[0], 0)]
    with pytest.raises(ValueError):
        expectation(state, [op, op])


def test_chain2_single_party_correlators():
    # One shared pair: I = cos(theta) <ZZ>, J = sin(theta) <XX>.
    net = gallery("chain(2)")
    cert = find_certificate(net)
    assert cert.k == 1
    i_value, j_value = factorized_IJ(net, cert, (QUARTER_PI,))
    assert abs(i_value - math.cos(QUARTER_PI)) < 1e-12
    assert abs(j_value - math.sin(QUARTER_PI)) < 1e-12


def test_chain3_maximally_entangled_values():
    net = gallery("chain(3)")
    cert = find_certificate(net)
    assert cert.k == 2
    for path in (factorized_IJ, full_tensor_IJ):
        i_value, j_value = path(net, cert, (QUARTER_PI, QUARTER_PI))
        assert abs(i_value - 0.5) < 1e-12
        assert abs(j_value - 0.5) < 1e-12


def test_werner_chain3_values():
    net = werner_chain(3, 0.8)
    cert = find_certificate(net)
    i_value, j_value = factorized_IJ(net, cert, (QUARTER_PI, QUARTER_PI))
    assert abs(i_value - 0.32) < 1e-12
    assert abs(j_value - 0.32) < 1e-12
    ti, tj = full_tensor_IJ(net, cert, (QUARTER_PI, QUARTER_PI))
    assert abs(ti - i_value) < 1e-12 and abs(tj - j_value) < 1e-12


def test_paths_agree_on_varied_networks():
    rng = np.random.default_rng(11)
    nets = [
        gallery("chain(4)"),
        gallery("cycle(4)"),
        gallery("two-loop"),
        schmidt_chain3(),
        mixed_epr_ghz_net(),
        mixed_epr_ghz_net(with_werner=True),
        pauli_bilocal(0.72),
    ]
    for net in nets:
        cert = find_certificate(net)
        for _ in range(5):
            angles = tuple(rng.uniform(0.0, math.pi / 2, size=cert.k))
            fi, fj = factorized_IJ(net, cert, angles)
            ti, tj = full_tensor_IJ(net, cert, angles)
            assert abs(fi - ti) < 1e-9
            assert abs(fj - tj) < 1e-9


def test_factor_constants_reproduce_factorized_path():
    rng = np.random.default_rng(5)
    for net in (gallery("chain(4)"), werner_chain(4, 0.9), schmidt_chain3()):
        cert = find_certificate(net)
        constants = factor_constants(net, cert)
        for _ in range(10):
            angles = tuple(rng.uniform(0.0, math.pi / 2, size=cert.k))
            fast = ij_from_constants(constants, angles)
            slow = factorized_IJ(net, cert, angles)
            assert abs(fast[0] - slow[0]) < 1e-12
            assert abs(fast[1] - slow[1]) < 1e-12


def test_locally_prepared_sources_are_excluded():
    # A source delivering both particles to one party must not enter the
    # observables; the partition lists it as excluded.
    from netbell.network import NetworkTopology, Source, GeneralizedEPR

    h = 1.0 / math.sqrt(2.0)
    net = NetworkTopology(
        ("A", "B", "C"),
        (
            Source("S1", GeneralizedEPR(h, h), ("A", "B")),
            Source("S2", GeneralizedEPR(h, h), ("B", "C")),
            Source("L", GeneralizedEPR(h, h), ("A", "A")),
        ),
    )
    from netbell.independence import kmax_exact

    cert = kmax_exact(net)
    assert cert.k == 2 and cert.independent_parties == ("A", "C")
    partition = build_partition(net, cert)
    assert partition.excluded_sources == [2]
    i_value, j_value = factorized_IJ(net, cert, (QUARTER_PI, QUARTER_PI))
    assert abs(i_value - 0.5) < 1e-12 and abs(j_value - 0.5) < 1e-12


def test_all_operators_are_involutions_dense():
    for net in (gallery("chain(3)"), schmidt_chain3(), pauli_bilocal(0.6)):
        cert = find_certificate(net)
        obs = build_observables(net, cert, (0.3,) * cert.k)
        dims = obs.partition.layout.dims
        ops = list(obs.A.values()) + list(obs.B_shared.values()) + list(obs.B_rest.values())
        eye = np.eye(int(np.prod(dims)))
        for op in ops:
            mat = op.dense(dims)
            assert np.abs(mat - mat.conj().T).max() < 1e-12
            assert np.abs(mat @ mat - eye).max() < 1e-9
