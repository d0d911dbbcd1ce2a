"""Brute-force hidden-state oracle."""

import pytest

from netbell.independence import find_certificate
from netbell.lhv import HiddenStateModel, LocalStrategy, classical_IJ, max_classical_F
from netbell.network import gallery


def test_model_validation():
    with pytest.raises(ValueError):
        HiddenStateModel(0).validate(2)
    with pytest.raises(ValueError):
        HiddenStateModel(2, ((0.5, 0.5),)).validate(2)
    with pytest.raises(ValueError):
        HiddenStateModel(2, ((0.6, 0.6), (0.5, 0.5))).validate(2)
    HiddenStateModel(2, ((0.5, 0.5), (0.25, 0.75))).validate(2)


def test_classical_ij_deterministic_strategy():
    # Bilocal chain, d=2: every party answers 0 regardless of input, so
    # I = 1 (all signs +1) and J = 0 (the independent parties' difference
    # terms vanish).
    net = gallery("chain(3)")
    cert = find_certificate(net)
    zeros2 = (0, 0)
    zeros4 = (0, 0, 0, 0)
    strategy = LocalStrategy(
        tables={"A1": (zeros2, zeros2), "A2": (zeros4, zeros4), "A3": (zeros2, zeros2)},
        settings_I={"A2": 0},
        settings_J={"A2": 1},
    )
    model = HiddenStateModel(2)
    i_value, j_value = classical_IJ(net, cert, model, strategy)
    assert abs(i_value - 1.0) < 1e-15
    assert abs(j_value) < 1e-15


def test_classical_ij_parity_strategy():
    # The middle party answers the parity of its two states; with a uniform
    # measure the correlator I = <s1 parity s2-side signs> still factorizes
    # to 1 when the ends echo their own state.
    net = gallery("chain(3)")
    cert = find_certificate(net)
    echo = (0, 1)
    parity = (0, 1, 1, 0)
    strategy = LocalStrategy(
        tables={"A1": (echo, echo), "A2": (parity, parity), "A3": (echo, echo)},
        settings_I={"A2": 0},
        settings_J={"A2": 1},
    )
    model = HiddenStateModel(2)
    i_value, j_value = classical_IJ(net, cert, model, strategy)
    assert abs(i_value - 1.0) < 1e-15
    assert abs(j_value) < 1e-15


def test_classical_ij_table_length_check():
    net = gallery("chain(3)")
    cert = find_certificate(net)
    strategy = LocalStrategy(
        tables={"A1": ((0, 0), (0, 0)), "A2": ((0, 0), (0, 0)), "A3": ((0, 0), (0, 0))},
        settings_I={"A2": 0},
        settings_J={"A2": 1},
    )
    with pytest.raises(ValueError):
        classical_IJ(net, cert, HiddenStateModel(2), strategy)


def test_bilocal_exhaustive_maximum_is_one():
    net = gallery("chain(3)")
    cert = find_certificate(net)
    report = max_classical_F(net, cert)
    assert report.exhaustive
    assert abs(report.evaluation.F - 1.0) <= 1e-9


def test_sampled_mode_respects_the_bound():
    net = gallery("chain(4)")
    cert = find_certificate(net)
    report = max_classical_F(net, cert, budget=200_000)
    assert not report.exhaustive
    assert report.samples >= 200_000
    assert report.evaluation.F <= 1.0 + 1e-9


def test_requires_certificate():
    net = gallery("chain(3)")
    cert = find_certificate(net)
    bad = type(cert)(k=0, independent_parties=(), matching=(), method="matching")
    with pytest.raises(ValueError):
        max_classical_F(net, bad)
