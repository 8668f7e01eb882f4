"""
Oracolo denso a forza bruta: enumera l'intera base (cutoff+1)^m senza pruning.
Non condivide percorsi di calcolo col motore sparso: le unitarie vengono sollevate
tramite permanenti, le misure sommando esplicitamente su tutta la base.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

import config
from fock.detection import ClickPattern, DetectorAssignment, ThresholdDetector
from fock.errors import FockError
from fock.optics import ModeUnitary
from fock.state import FockKet, ModeRegister

logger = logging.getLogger(__name__)


class OracleSizeError(FockError):
    pass


def _max_dimension() -> int:
    return (config.DENSE_MAX_CUTOFF + 1) ** config.DENSE_MAX_MODES


def _check_input_cutoff(register: ModeRegister):
    if register.cutoff > config.DENSE_MAX_CUTOFF:
        raise OracleSizeError(f"Cutoff in ingresso {register.cutoff} oltre il limite {config.DENSE_MAX_CUTOFF}")


def _check_size(register: ModeRegister):
    if len(register) > config.DENSE_MAX_MODES:
        raise OracleSizeError(f"Troppi modi per l'oracolo: {len(register)} > {config.DENSE_MAX_MODES}")
    if (register.cutoff + 1) ** len(register) > _max_dimension():
        raise OracleSizeError(f"Dimensione {(register.cutoff + 1) ** len(register)} oltre il limite {_max_dimension()}")


@dataclass(frozen=True, eq=False)
class DenseState:
    register: ModeRegister
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        expected = (self.register.cutoff + 1,) * len(self.register)
        if amplitudes.shape != expected:
            raise ValueError(f"Forma {amplitudes.shape} diversa da {expected}")
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_ket(cls, ket: FockKet, cutoff: int = None) -> "DenseState":
        cutoff = ket.register.cutoff if cutoff is None else cutoff
        register = ket.register.with_cutoff(cutoff)
        _check_size(register)
        amplitudes = np.zeros((cutoff + 1,) * len(register), dtype=complex)
        for occ, amp in ket.terms.items():
            amplitudes[occ] = amp
        return cls(register, amplitudes)

    @classmethod
    def initial(cls, ket: FockKet) -> "DenseState":
        """Stato in ingresso all'oracolo: il cutoff del registro non può superare DENSE_MAX_CUTOFF."""
        _check_input_cutoff(ket.register)
        return cls.from_ket(ket)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "DenseState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("Impossibile normalizzare lo stato denso nullo")
        return DenseState(self.register, self.amplitudes / n)

    def padded(self, cutoff: int) -> "DenseState":
        if cutoff == self.register.cutoff:
            return self
        extra = cutoff - self.register.cutoff
        amplitudes = np.pad(self.amplitudes, [(0, extra)] * self.amplitudes.ndim)
        return DenseState(self.register.with_cutoff(cutoff), amplitudes)


# ---------------------- UNITARIE ----------------------

def permanent(matrix: np.ndarray) -> complex:
    """Permanente con la formula di Ryser."""
    n = matrix.shape[0]
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for subset in range(1, 2 ** n):
        cols = [j for j in range(n) if subset & (1 << j)]
        term = np.prod(matrix[:, cols].sum(axis=1))
        total += (-1) ** len(cols) * term
    return (-1) ** n * total


def transition_amplitude(matrix: np.ndarray, n_in: tuple, n_out: tuple) -> complex:
    """<n_out|U|n_in> = Per(M[out, in]) / sqrt(prod n_in! prod n_out!)."""
    if sum(n_in) != sum(n_out):
        return 0j
    rows = [j for j, n in enumerate(n_out) for _ in range(n)]
    cols = [k for k, n in enumerate(n_in) for _ in range(n)]
    norm = math.prod(math.factorial(n) for n in n_in) * math.prod(math.factorial(n) for n in n_out)
    return permanent(matrix[np.ix_(rows, cols)]) / math.sqrt(norm)


def lifted_matrix(u: ModeUnitary, cutoff: int) -> np.ndarray:
    """Matrice di U sull'intero spazio dei modi agiti, a blocchi per numero di fotoni."""
    dim = cutoff + 1
    basis = list(itertools.product(range(dim), repeat=u.size))
    lift = np.zeros((len(basis), len(basis)), dtype=complex)
    for a, n_in in enumerate(basis):
        if sum(n_in) > cutoff:
            continue
        for b, n_out in enumerate(basis):
            if sum(n_out) == sum(n_in):
                lift[b, a] = transition_amplitude(u.matrix, n_in, n_out)
    return lift


def dense_apply(state: DenseState, u: ModeUnitary, modes: tuple) -> DenseState:
    _check_size(state.register)
    axes = list(state.register.indices(modes))
    occupied = np.argwhere(state.amplitudes != 0)
    photons = int(occupied[:, axes].sum(axis=1).max()) if len(occupied) else 0
    state = state.padded(max(state.register.cutoff, photons))
    dim = state.register.cutoff + 1

    lift = lifted_matrix(u, state.register.cutoff)
    moved = np.moveaxis(state.amplitudes, axes, list(range(len(axes))))
    shape = moved.shape
    out = (lift @ moved.reshape(dim ** len(axes), -1)).reshape(shape)
    return DenseState(state.register, np.moveaxis(out, list(range(len(axes))), axes))


def dense_relabel(state: DenseState, mapping: dict, order: tuple) -> DenseState:
    labels = tuple(mapping.get(label, label) for label in state.register.labels)
    perm = [labels.index(str(label)) for label in order]
    return DenseState(ModeRegister(tuple(order), state.register.cutoff), np.transpose(state.amplitudes, perm))


# ---------------------- MISURE ----------------------

@dataclass(frozen=True, eq=False)
class DenseOutcome:
    probability: float
    members: tuple

    @property
    def impossible(self) -> bool:
        return not self.members


def _outcome(branches: list) -> DenseOutcome:
    total = sum(w for w, _ in branches)
    if total <= config.IMPOSSIBLE_TOL:
        return DenseOutcome(0.0, ())
    members = tuple((w / total, s.normalize()) for w, s in branches if w > 0.0)
    return DenseOutcome(min(1.0, total), members)


def _slice(state: DenseState, axes: list, key: tuple) -> DenseState:
    index = [slice(None)] * len(state.register)
    for ax, value in zip(axes, key):
        index[ax] = value
    rest = state.register.without([state.register.labels[ax] for ax in axes])
    return DenseState(rest, state.amplitudes[tuple(index)])


def dense_measure(state: DenseState, pattern: ClickPattern, eta: float = None) -> DenseOutcome:
    """POVM a soglia applicato sommando su ogni occupazione dei modi misurati."""
    _check_size(state.register)
    if eta is not None:
        pattern = ClickPattern(tuple(
            DetectorAssignment(a.modes, ThresholdDetector(eta, a.detector.name), a.outcome)
            for a in pattern.assignments
        ))
    measured = pattern.measured_modes
    axes = list(state.register.indices(measured))
    dim = state.register.cutoff + 1
    branches = []
    for key in itertools.product(range(dim), repeat=len(axes)):
        counts = dict(zip(measured, key))
        factor = 1.0
        for a in pattern.assignments:
            n = sum(counts[m] for m in a.modes)
            survive = (1.0 - a.detector.eta) ** n
            factor *= (1.0 - survive) if a.outcome == "click" else survive
        sub = _slice(state, axes, key)
        weight = factor * float(np.sum(np.abs(sub.amplitudes) ** 2))
        if weight > 0.0:
            branches.append((weight, sub))
    return _outcome(branches)


def number_resolving_measure(state: DenseState, mode: str, n: int) -> DenseOutcome:
    """Proiezione sull'occupazione esattamente n del modo indicato."""
    _check_size(state.register)
    axis = state.register.index(mode)
    if n > state.register.cutoff:
        return DenseOutcome(0.0, ())
    sub = _slice(state, [axis], (n,))
    return _outcome([(float(np.sum(np.abs(sub.amplitudes) ** 2)), sub)])


def dense_project(state: DenseState, bra: FockKet) -> DenseOutcome:
    """Proiettore ideale: <bra| sui modi di bra, stato condizionato sui restanti."""
    axes = list(state.register.indices(bra.register.labels))
    bra_dense = DenseState.from_ket(bra, state.register.cutoff)
    rest = state.register.without(bra.register.labels)
    contracted = np.tensordot(bra_dense.amplitudes.conj(), state.amplitudes, axes=(list(range(len(axes))), axes))
    sub = DenseState(rest, contracted)
    return _outcome([(float(np.sum(np.abs(contracted) ** 2)), sub)])


def dense_trace_out(outcome: DenseOutcome, modes: tuple) -> DenseOutcome:
    if outcome.impossible:
        return outcome
    branches = []
    for w, s in outcome.members:
        axes = list(s.register.indices(modes))
        for key in itertools.product(range(s.register.cutoff + 1), repeat=len(axes)):
            sub = _slice(s, axes, key)
            weight = w * float(np.sum(np.abs(sub.amplitudes) ** 2))
            if weight > 0.0:
                branches.append((weight, sub))
    result = _outcome(branches)
    return DenseOutcome(outcome.probability, result.members)


def dense_fidelity(outcome: DenseOutcome, target: Union[FockKet, DenseState]) -> Optional[float]:
    if outcome.impossible:
        return None
    value = 0.0
    for w, s in outcome.members:
        if isinstance(target, FockKet):
            if target.register.labels != s.register.labels:
                raise ValueError(f"Registri diversi: {target.register.labels} vs {s.register.labels}")
            t = DenseState.from_ket(target, max(s.register.cutoff, target.register.cutoff))
        else:
            t = target
        s = s.padded(t.register.cutoff)
        t = t.padded(s.register.cutoff)
        value += w * abs(np.vdot(t.amplitudes, s.amplitudes)) ** 2
    return float(value)
