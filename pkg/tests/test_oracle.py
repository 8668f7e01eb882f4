import math

import numpy as np
import pytest

import config
from fock.detection import CLICK, SILENT, ClickPattern, measure_pattern
from fock.optics import ModeUnitary, apply_mode_unitary, balanced_bs
from fock.state import FockKet, ModeRegister, fidelity, normalize
from oracle.dense import (
    DenseState,
    OracleSizeError,
    dense_apply,
    dense_fidelity,
    dense_measure,
    number_resolving_measure,
    permanent,
    transition_amplitude,
)
from oracle.verify import max_amplitude_difference, verify_setup
from protocols import schemes

LABELS = ("a", "b", "c", "d")


def random_unitary(rng: np.random.Generator, size: int) -> ModeUnitary:
    z = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return ModeUnitary(q * (d / np.abs(d)), f"U{size}")


def random_ket(rng: np.random.Generator, modes: int, cutoff: int, max_photons: int = 3) -> FockKet:
    register = ModeRegister(LABELS[:modes], cutoff)
    terms = {}
    for _ in range(int(rng.integers(1, 6))):
        occ = tuple(int(x) for x in rng.integers(0, cutoff + 1, size=modes))
        if sum(occ) > max_photons:
            continue
        terms[occ] = complex(rng.normal(), rng.normal())
    if not terms:
        terms[(0,) * modes] = 1.0
    return normalize(FockKet.from_terms(register, terms))


def random_case(seed: int):
    rng = np.random.default_rng(seed)
    modes = int(rng.integers(2, 5))
    cutoff = int(rng.integers(1, 4))
    ket = random_ket(rng, modes, cutoff)
    size = int(rng.integers(2, modes + 1))
    acted = tuple(str(x) for x in rng.permutation(LABELS[:modes])[:size])
    u = random_unitary(rng, size)
    measured = tuple(str(x) for x in rng.permutation(LABELS[:modes])[:int(rng.integers(1, modes))])
    eta = float(rng.uniform(0.2, 1.0))
    outcomes = [CLICK if rng.random() < 0.5 else SILENT for _ in measured]
    pattern = ClickPattern.of(*[(m, o) for m, o in zip(measured, outcomes)], eta=eta)
    rest = tuple(l for l in LABELS[:modes] if l not in measured)
    target = random_ket(rng, len(rest), 1).relabel(dict(zip(LABELS[:len(rest)], rest)))
    return ket, u, acted, pattern, target


@pytest.mark.parametrize("seed", range(120))
def test_sparse_matches_dense(seed):
    ket, u, acted, pattern, target = random_case(seed)
    sparse = apply_mode_unitary(ket, u, acted)
    dense = dense_apply(DenseState.initial(ket), u, acted)
    assert max_amplitude_difference(sparse, dense) < 1e-12

    s = measure_pattern(sparse, pattern)
    d = dense_measure(dense, pattern)
    assert s.probability == pytest.approx(d.probability, abs=1e-12)
    assert s.impossible == d.impossible
    if not s.impossible:
        assert fidelity(s.ensemble, target) == pytest.approx(dense_fidelity(d, target), abs=1e-12)


@pytest.mark.parametrize("seed", range(0, 120, 7))
def test_sparse_matches_dense_without_pruning(seed, monkeypatch):
    monkeypatch.setattr(config, "PRUNE_TOL", 0.0)
    ket, u, acted, pattern, target = random_case(seed)
    sparse = apply_mode_unitary(ket, u, acted)
    dense = dense_apply(DenseState.initial(ket), u, acted)
    assert max_amplitude_difference(sparse, dense) < 1e-12
    assert measure_pattern(sparse, pattern).probability == pytest.approx(
        dense_measure(dense, pattern).probability, abs=1e-12
    )


def test_permanent_small_cases():
    assert permanent(np.array([[2.0]])) == pytest.approx(2.0)
    assert permanent(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(10.0)
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)


def test_hong_ou_mandel_transition_vanishes():
    m = balanced_bs().matrix
    assert abs(transition_amplitude(m, (1, 1), (1, 1))) < 1e-15
    assert transition_amplitude(m, (1, 1), (2, 0)) == pytest.approx(1.0 / math.sqrt(2.0))


def test_oracle_size_limit():
    ket = FockKet.vacuum(ModeRegister(tuple(str(i) for i in range(9)), 1))
    with pytest.raises(OracleSizeError):
        DenseState.from_ket(ket)


def test_oracle_input_cutoff_limit():
    ket = FockKet.basis(ModeRegister(("a", "b"), 7), (7, 0))
    with pytest.raises(OracleSizeError):
        DenseState.initial(ket)
    # il limite vale solo in ingresso: l'interferenza può far crescere il cutoff
    grown = dense_apply(DenseState.initial(FockKet.basis(ModeRegister(("a", "b"), 2), (2, 2))), balanced_bs(), ("a", "b"))
    assert grown.register.cutoff == 4
    assert grown.norm() == pytest.approx(1.0, abs=1e-12)


def test_order_two_scheme_a_verifies_after_cutoff_growth():
    setup = schemes.scheme_a_setup(0.2, order=2)
    assert setup.initial.register.cutoff == 2
    assert verify_setup(setup, tol=1e-12) == []


@pytest.mark.parametrize("setup", [
    schemes.scheme_a_setup(math.sqrt(1e-3)),
    schemes.scheme_a_setup(0.2, eta=0.7, order=2),
    schemes.phase_verification_setup(0.2, eta=0.8),
    schemes.scheme_b_setup(0.1),
    schemes.scheme_b_setup(0.3, eta=0.9, variant="pbs"),
    schemes.scheme_b_setup(0.2, order=2, tau=0.3),
    schemes.bell_check_setup(),
    schemes.theta_setup(0.3),
    schemes.polarization_setup(eta=0.9),
    schemes.vacuum_one_photon_setup(eta=0.6),
], ids=lambda s: s.name)
def test_protocol_setups_match_oracle(setup):
    assert verify_setup(setup, tol=1e-12) == []


def resolved_sum(state: DenseState, mode: str, counts: range, target: FockKet):
    """Probabilità e fedeltà della somma dei proiettori sulle occupazioni `counts`."""
    outcomes = [number_resolving_measure(state, mode, n) for n in counts]
    probability = sum(o.probability for o in outcomes)
    if probability <= config.IMPOSSIBLE_TOL:
        return 0.0, None
    value = sum(o.probability * dense_fidelity(o, target) for o in outcomes if not o.impossible)
    return probability, value / probability


@pytest.mark.parametrize("seed", range(40))
def test_ideal_threshold_equals_projector_on_single_photon_modes(seed):
    # cutoff 1: nessun modo contiene più di un fotone
    rng = np.random.default_rng(1000 + seed)
    modes = int(rng.integers(2, 5))
    ket = random_ket(rng, modes, 1, max_photons=modes)
    mode = str(rng.choice(LABELS[:modes]))
    rest = tuple(l for l in LABELS[:modes] if l != mode)
    target = random_ket(rng, len(rest), 1).relabel(dict(zip(LABELS[:len(rest)], rest)))
    dense = DenseState.initial(ket)

    for outcome, counts in ((CLICK, range(1, 2)), (SILENT, range(0, 1))):
        threshold = measure_pattern(ket, ClickPattern.of((mode, outcome), eta=1.0))
        probability, value = resolved_sum(dense, mode, counts, target)
        assert threshold.probability == pytest.approx(probability, abs=1e-12)
        if threshold.impossible:
            assert value is None
        else:
            assert fidelity(threshold.ensemble, target) == pytest.approx(value, abs=1e-12)
