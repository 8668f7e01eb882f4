import math

import pytest

from fock.errors import CutoffOverflowError
from fock.sources import (
    POLARIZATION_MODES,
    SpdcParams,
    chi_state,
    double_pass_source,
    pair_emission,
    polarization_double_pass,
    polarization_x_terms,
    polarization_y_terms,
    spdc_pair,
    theta_product,
    vacuum_one_photon_postbs,
)
from fock.state import is_normalized, norm, trace_out


def test_spdc_params_validation():
    with pytest.raises(ValueError):
        SpdcParams(1.0)
    with pytest.raises(ValueError):
        SpdcParams(0.1, order=0)
    with pytest.raises(ValueError):
        SpdcParams.from_tau2(-1e-3)
    assert SpdcParams.from_tau2(0.04).tau == pytest.approx(0.2)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_spdc_pair_amplitudes(order):
    tau = 0.3
    ket = spdc_pair(SpdcParams(tau, order))
    z = math.sqrt(sum(tau ** (2 * n) for n in range(order + 1)))
    assert ket.register.cutoff == order
    for n in range(order + 1):
        assert ket.amplitude((n, n)) == pytest.approx(tau ** n / z)
    assert is_normalized(ket)


def test_spdc_pair_cutoff_overflow():
    with pytest.raises(CutoffOverflowError):
        spdc_pair(SpdcParams(0.1, 2), cutoff=1)


def test_double_pass_source_register_and_weights():
    tau = 0.1
    ket = double_pass_source(SpdcParams(tau))
    assert ket.register.labels == ("1", "4", "2", "3")
    assert ket.amplitude((0, 0, 0, 0)) == pytest.approx(1.0 / (1.0 + tau ** 2))
    assert ket.amplitude((1, 1, 1, 1)) == pytest.approx(tau ** 2 / (1.0 + tau ** 2))


def test_double_pass_source_factorizes():
    ket = double_pass_source(SpdcParams(0.2))
    reduced = trace_out(ket, ("2", "3"))
    # ogni ramo della traccia parziale è la stessa coppia (1,4)
    pair = spdc_pair(SpdcParams(0.2), ("1", "4"))
    assert len(reduced) == 2
    for _, member in reduced:
        assert dict(member.terms) == pytest.approx(dict(pair.terms))


def test_pair_emission_without_tau():
    ket = pair_emission(modes=("u", "l"))
    assert dict(ket.terms) == {(1, 1): 1.0}
    with pytest.raises(ValueError):
        pair_emission(order=2)
    assert len(pair_emission(0.1, 2)) == 3


def test_polarization_double_pass():
    x_only = polarization_double_pass(y_weight=0.0)
    assert x_only.register.labels == POLARIZATION_MODES
    assert len(x_only) == 4
    assert all(abs(a) == pytest.approx(0.5) for a in x_only.terms.values())
    full = polarization_double_pass()
    assert len(full) == 10
    assert is_normalized(full)
    with pytest.raises(CutoffOverflowError):
        polarization_double_pass(cutoff=1)


def occupation(counts: dict) -> tuple:
    return tuple(counts.get(label, 0) for label in POLARIZATION_MODES)


def test_polarization_x_signs():
    x = polarization_x_terms()
    assert dict(x.terms) == {
        occupation({"1H": 1, "3V": 1, "2H": 1, "4V": 1}): 1.0,
        occupation({"1H": 1, "3V": 1, "2V": 1, "4H": 1}): -1.0,
        occupation({"1V": 1, "3H": 1, "2H": 1, "4V": 1}): -1.0,
        occupation({"1V": 1, "3H": 1, "2V": 1, "4H": 1}): 1.0,
    }


def test_polarization_y_signs():
    y = polarization_y_terms("1", "3")
    assert dict(y.terms) == {
        occupation({"1H": 2, "3V": 2}): 1.0,
        occupation({"1V": 2, "3H": 2}): 1.0,
        occupation({"1H": 1, "1V": 1, "3H": 1, "3V": 1}): -1.0,
    }


def test_vacuum_one_photon_branches():
    ket = vacuum_one_photon_postbs()
    assert is_normalized(ket)
    assert ket.amplitude((0, 0, 1, 1)) == pytest.approx(1.0 / math.sqrt(2.5))
    assert ket.amplitude((2, 0, 0, 0)) == pytest.approx(-ket.amplitude((0, 2, 0, 0)))


def test_theta_product():
    theta = 0.3
    ket = theta_product(theta)
    c, s = math.cos(theta), math.sin(theta)
    assert ket.amplitude((0, 0, 0, 0)) == pytest.approx(c * c)
    assert ket.amplitude((1, 1, 0, 0)) == pytest.approx(s * c)
    assert ket.amplitude((1, 1, 1, 1)) == pytest.approx(s * s)
    assert norm(ket) == pytest.approx(1.0)


def test_chi_state():
    ket = chi_state(0.1)
    assert ket.amplitude((1, 1)) == pytest.approx(0.1 / math.sqrt(1.01))
