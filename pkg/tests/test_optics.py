import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fock.errors import CutoffOverflowError, LabelCollisionError
from fock.optics import (
    ModeUnitary,
    OpticalStep,
    Relabel,
    apply_mode_unitary,
    balanced_bs,
    pbs,
    polarization_rotation,
    unbalanced_bs,
)
from fock.state import FockKet, ModeRegister, bell_state, fidelity, norm

R = 1.0 / math.sqrt(2.0)


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        ModeUnitary(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_single_photon_through_balanced_bs():
    ket = FockKet.basis(ModeRegister(("1", "2"), 1), (1, 0))
    out = apply_mode_unitary(ket, balanced_bs(), ("1", "2"))
    assert out.amplitude((1, 0)) == pytest.approx(R)
    assert out.amplitude((0, 1)) == pytest.approx(R)


def test_hong_ou_mandel_grows_cutoff():
    ket = FockKet.basis(ModeRegister(("1", "2"), 1), (1, 1))
    out = apply_mode_unitary(ket, balanced_bs(), ("1", "2"))
    assert out.register.cutoff == 2
    assert out.amplitude((1, 1)) == pytest.approx(0.0, abs=1e-15)
    assert out.amplitude((2, 0)) == pytest.approx(R)
    assert out.amplitude((0, 2)) == pytest.approx(-R)


def test_strict_policy_raises():
    ket = FockKet.basis(ModeRegister(("1", "2"), 1), (1, 1))
    with pytest.raises(CutoffOverflowError):
        apply_mode_unitary(ket, balanced_bs(), ("1", "2"), policy="strict")


def test_bell_states_route_to_outputs():
    out = apply_mode_unitary(bell_state("psi+", ("3", "4")), balanced_bs(), ("3", "4"))
    assert abs(out.amplitude((1, 0))) == pytest.approx(1.0)
    out = apply_mode_unitary(bell_state("psi-", ("3", "4")), balanced_bs(), ("3", "4"))
    assert abs(out.amplitude((0, 1))) == pytest.approx(1.0)


def test_unbalanced_bs_range():
    assert np.allclose(unbalanced_bs(1.0).matrix, balanced_bs().matrix, atol=1e-15)
    with pytest.raises(ValueError):
        unbalanced_bs(0.0)
    with pytest.raises(ValueError):
        polarization_rotation(-0.1)


def test_polarization_rotation_zero_is_identity():
    assert np.allclose(polarization_rotation(0.0).matrix, np.eye(2), atol=1e-15)


@pytest.mark.parametrize("epsilon", [0.1, 0.5, 1.0])
def test_polarization_rotation_on_horizontal_photon(epsilon):
    ket = FockKet.basis(ModeRegister(("1H", "1V"), 1), (1, 0))
    out = apply_mode_unitary(ket, polarization_rotation(epsilon), ("1H", "1V"))
    z = math.sqrt(1.0 + epsilon ** 2)
    assert out.amplitude((1, 0)) == pytest.approx(1.0 / z, abs=1e-12)
    assert out.amplitude((0, 1)) == pytest.approx(epsilon / z, abs=1e-12)


def test_pbs_routing_requires_distinct_labels():
    assert pbs(("uH", "uV"), ("1", "2")) == {"uH": "1", "uV": "2"}
    with pytest.raises(LabelCollisionError):
        pbs(("uH", "uV"), ("uH", "2"))


def test_relabel_step_fixes_order():
    ket = FockKet.basis(ModeRegister(("uH", "uV"), 1), (1, 0))
    out = Relabel({"uH": "1", "uV": "2"}, ("2", "1")).apply(ket)
    assert out.register.labels == ("2", "1")
    assert out.amplitude((0, 1)) == 1.0


def test_repeated_modes_rejected():
    ket = FockKet.basis(ModeRegister(("1", "2"), 1), (1, 0))
    with pytest.raises(LabelCollisionError):
        apply_mode_unitary(ket, balanced_bs(), ("1", "1"))


def test_step_and_inverse_restore_state():
    ket = bell_state("psi+", ("1", "2"))
    u = unbalanced_bs(0.3)
    back = OpticalStep(u.dagger(), ("1", "2")).apply(OpticalStep(u, ("1", "2")).apply(ket))
    assert fidelity(back.reorder(("1", "2")), ket) == pytest.approx(1.0, abs=1e-12)


occupations = st.lists(st.integers(min_value=0, max_value=3), min_size=3, max_size=3)


@settings(max_examples=40, deadline=None)
@given(occupations, st.floats(min_value=0.0, max_value=2 * math.pi))
def test_norm_and_photon_number_preserved(occ, angle):
    c, s = math.cos(angle), math.sin(angle)
    u = ModeUnitary(np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]) @ (np.array([[1, 1, 0], [1, -1, 0], [0, 0, math.sqrt(2)]]) / math.sqrt(2)))
    ket = FockKet.basis(ModeRegister(("a", "b", "c"), 3), occ)
    out = apply_mode_unitary(ket, u, ("a", "b", "c"))
    assert norm(out) == pytest.approx(1.0, abs=1e-12)
    assert out.photon_numbers() <= {sum(occ)}
