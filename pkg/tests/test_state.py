import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

import config
from fock.errors import CutoffOverflowError, LabelCollisionError, RegisterMismatchError, UnknownModeError, ZeroKetError
from fock.state import (
    FockKet,
    ModeRegister,
    WeightedEnsemble,
    bell_state,
    contract,
    fidelity,
    inner_product,
    is_normalized,
    norm,
    normalize,
    tensor_product,
    trace_out,
)

R = 1.0 / math.sqrt(2.0)


def test_register_rejects_duplicates_and_bad_cutoff():
    with pytest.raises(LabelCollisionError):
        ModeRegister(("1", "1"))
    with pytest.raises(ValueError):
        ModeRegister(("1",), cutoff=0)
    with pytest.raises(UnknownModeError):
        ModeRegister(("1", "2")).index("3")


def test_from_terms_prunes_and_checks_cutoff():
    reg = ModeRegister(("a", "b"), 1)
    ket = FockKet.from_terms(reg, {(0, 1): 1.0, (1, 0): 1e-16})
    assert list(ket.terms) == [(0, 1)]
    with pytest.raises(CutoffOverflowError):
        FockKet.from_terms(reg, {(2, 0): 1.0})


def test_from_terms_prunes_after_summing_repeats():
    reg = ModeRegister(("a", "b"), 1)
    terms = [((0, 1), 1.0), ((1, 0), 0.5), ((1, 0), -0.5 + 1e-15)]
    ket = FockKet.from_terms(reg, terms)
    assert list(ket.terms) == [(0, 1)]
    assert all(abs(a) >= config.PRUNE_TOL for a in ket.terms.values())


def test_pruning_can_be_disabled(monkeypatch):
    monkeypatch.setattr(config, "PRUNE_TOL", 0.0)
    reg = ModeRegister(("a", "b"), 1)
    ket = FockKet.from_terms(reg, {(0, 1): 1.0, (1, 0): 1e-16})
    assert len(ket) == 2


def test_tensor_product_concatenates_registers():
    a = bell_state("psi+", ("1", "2"))
    b = bell_state("psi-", ("3", "4"))
    ab = tensor_product(a, b)
    assert ab.register.labels == ("1", "2", "3", "4")
    assert ab.amplitude((0, 1, 0, 1)) == pytest.approx(0.5)
    assert ab.amplitude((1, 0, 1, 0)) == pytest.approx(-0.5)
    assert is_normalized(ab)


def test_tensor_product_label_collision():
    with pytest.raises(LabelCollisionError):
        tensor_product(bell_state("psi+", ("1", "2")), bell_state("psi+", ("2", "3")))


def test_inner_product_requires_same_modes():
    with pytest.raises(RegisterMismatchError):
        inner_product(bell_state("psi+", ("1", "2")), bell_state("psi+", ("1", "3")))


def test_bell_states_are_orthonormal():
    kets = [bell_state(k, ("1", "2")) for k in ("phi+", "phi-", "psi+", "psi-")]
    for i, a in enumerate(kets):
        for j, b in enumerate(kets):
            expected = 1.0 if i == j else 0.0
            assert abs(inner_product(a, b)) == pytest.approx(expected, abs=1e-15)


def test_bell_state_unicode_alias():
    assert dict(bell_state("Ψ⁻", ("1", "2")).terms) == dict(bell_state("psi-", ("1", "2")).terms)


def test_normalize_zero_ket():
    with pytest.raises(ZeroKetError):
        normalize(FockKet.from_terms(ModeRegister(("a",), 1), {}))


def test_reorder_and_relabel():
    ket = FockKet.basis(ModeRegister(("1", "4", "2", "3"), 1), (1, 0, 0, 1))
    moved = ket.reorder(("1", "2", "3", "4"))
    assert moved.register.labels == ("1", "2", "3", "4")
    assert moved.amplitude((1, 0, 1, 0)) == 1.0
    renamed = ket.relabel({"1": "x"})
    assert renamed.register.labels == ("x", "4", "2", "3")
    with pytest.raises(RegisterMismatchError):
        ket.reorder(("1", "2", "3"))


def test_contract_gives_bell_projection():
    state = tensor_product(bell_state("psi-", ("1", "2")), bell_state("psi-", ("3", "4")))
    rest = contract(state, bell_state("psi-", ("2", "3")))
    assert rest.register.labels == ("1", "4")
    assert norm(rest) ** 2 == pytest.approx(0.25, abs=1e-12)
    assert fidelity(normalize(rest), bell_state("psi-", ("1", "4"))) == pytest.approx(1.0, abs=1e-12)


def test_ensemble_validation():
    reg = ModeRegister(("a",), 1)
    one = FockKet.basis(reg, (1,))
    with pytest.raises(ValueError):
        WeightedEnsemble(reg, ((0.5, one),))
    with pytest.raises(ValueError):
        WeightedEnsemble(reg, ((1.0, one.scaled(2.0)),))


def test_fidelity_of_mixture():
    plus = bell_state("psi+", ("1", "2"))
    minus = bell_state("psi-", ("1", "2"))
    mix = WeightedEnsemble(plus.register, ((0.75, plus), (0.25, minus)))
    assert fidelity(mix, plus) == pytest.approx(0.75)
    assert fidelity(mix, minus) == pytest.approx(0.25)


def test_trace_out_bell_state_gives_mixture():
    mixed = trace_out(bell_state("psi+", ("1", "2")), ("2",))
    assert mixed.register.labels == ("1",)
    assert sorted(w for w, _ in mixed) == pytest.approx([0.5, 0.5])


def test_json_round_trip_keeps_amplitudes():
    ket = bell_state("psi-", ("1", "4"))
    back = FockKet.from_json(ket.to_json())
    assert back.register.labels == ket.register.labels
    assert dict(back.terms) == dict(ket.terms)


def test_str_lists_modes_left_to_right():
    ket = FockKet.from_terms(ModeRegister(("a", "b"), 1), {(0, 1): R, (1, 0): -R})
    assert str(ket) == "+0.707107|01> -0.707107|10>"


amplitudes = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(amplitudes, min_size=4, max_size=4).filter(lambda a: sum(abs(x) ** 2 for x in a) > 1e-6))
def test_normalize_gives_unit_norm(values):
    reg = ModeRegister(("a", "b"), 1)
    occs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    ket = FockKet.from_terms(reg, dict(zip(occs, values)))
    assert norm(normalize(ket)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=0.0, max_value=2 * math.pi))
def test_fidelity_bounded(weight, phase):
    reg = ModeRegister(("1", "2"), 1)
    ket = normalize(FockKet.from_terms(reg, {(0, 1): 1.0, (1, 0): weight * cmath.exp(1j * phase)}))
    f_plus = fidelity(ket, bell_state("psi+", ("1", "2")))
    f_minus = fidelity(ket, bell_state("psi-", ("1", "2")))
    assert 0.0 <= f_plus <= 1.0
    assert f_plus + f_minus == pytest.approx(1.0, abs=1e-12)
