import logging
import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

import config
from fock.errors import CutoffOverflowError, LabelCollisionError
from fock.state import FockKet, OccupationVector

logger = logging.getLogger(__name__)


# ---------------------- UNITARIE SUI MODI ----------------------

@dataclass(frozen=True, eq=False)
class ModeUnitary:
    """
    Matrice unitaria M che agisce sugli operatori di creazione dei modi scelti:
        a_k^dagger  ->  sum_j M[j, k] a_j^dagger
    (la colonna k è l'immagine del creatore del k-esimo modo).
    """
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"La matrice deve essere quadrata, forma {matrix.shape}")
        defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
        if defect > config.UNITARY_TOL:
            raise ValueError(f"Matrice non unitaria (scarto {defect:.3e})")
        object.__setattr__(self, "matrix", matrix)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T, f"{self.name}^dagger")


def balanced_bs() -> ModeUnitary:
    return ModeUnitary(np.array([[1, 1], [1, -1]]) / math.sqrt(2.0), "BS")


def unbalanced_bs(epsilon: float) -> ModeUnitary:
    """Beam splitter quasi trasparente: (1/sqrt(1+eps^2)) [[1, eps], [eps, -1]]."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon deve stare in (0, 1], ricevuto {epsilon}")
    return ModeUnitary(np.array([[1, epsilon], [epsilon, -1]]) / math.sqrt(1.0 + epsilon ** 2), f"UBS({epsilon:g})")


def polarization_rotation(epsilon: float) -> ModeUnitary:
    """Rotazione sulla coppia (H, V): H -> (H + eps V)/sqrt(1+eps^2), V -> (V - eps H)/sqrt(1+eps^2)."""
    if epsilon < 0.0:
        raise ValueError(f"epsilon deve essere non negativo, ricevuto {epsilon}")
    return ModeUnitary(np.array([[1, -epsilon], [epsilon, 1]]) / math.sqrt(1.0 + epsilon ** 2), f"R({epsilon:g})")


def pbs(beam_in: tuple, beam_out_pair: tuple) -> dict[str, str]:
    """
    Beam splitter polarizzatore come permutazione dei modi: la componente H del fascio
    in ingresso va nel primo fascio di uscita, la V nel secondo.
    Convenzione di fase: nessuna fase aggiuntiva sulle uscite (pura rietichettatura).
    """
    h_in, v_in = (str(x) for x in beam_in)
    h_out, v_out = (str(x) for x in beam_out_pair)
    labels = (h_in, v_in, h_out, v_out)
    if len(set(labels)) != 4:
        raise LabelCollisionError(f"Il PBS richiede quattro etichette distinte: {labels}")
    return {h_in: h_out, v_in: v_out}


# ---------------------- SOLLEVAMENTO SUI KET ----------------------

def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def _lift_column(matrix: np.ndarray, n_in: OccupationVector) -> dict[OccupationVector, complex]:
    """Ampiezze <m|U|n_in> per sostituzione dei creatori ed espansione multinomiale."""
    if max(n_in) > config.MAX_FACTORIAL_CUTOFF:
        raise CutoffOverflowError(f"Occupazione {n_in} oltre il limite {config.MAX_FACTORIAL_CUTOFF}")
    size = len(n_in)
    poly = {(0,) * size: 1 + 0j}
    for k, n_k in enumerate(n_in):
        if n_k == 0:
            continue
        column = matrix[:, k]
        expansion = {}
        for comp in _compositions(n_k, size):
            multinomial = math.factorial(n_k)
            for c in comp:
                multinomial //= math.factorial(c)
            value = complex(multinomial)
            for j, c in enumerate(comp):
                value *= column[j] ** c
            if value != 0:
                expansion[comp] = value
        product = {}
        for a, ca in poly.items():
            for b, cb in expansion.items():
                key = tuple(x + y for x, y in zip(a, b))
                product[key] = product.get(key, 0j) + ca * cb
        poly = product
    norm_in = math.prod(math.factorial(n) for n in n_in)
    return {
        m: coeff * math.sqrt(math.prod(math.factorial(x) for x in m) / norm_in)
        for m, coeff in poly.items()
        if coeff != 0
    }


def apply_mode_unitary(state: FockKet, u: ModeUnitary, modes: tuple, policy: str = None) -> FockKet:
    """
    Applica `u` ai modi indicati (nell'ordine dato). Il numero di fotoni si conserva;
    con policy "grow" il cutoff del registro cresce se l'interferenza lo richiede.
    """
    policy = policy or config.DEFAULT_CUTOFF_POLICY
    if policy not in ("grow", "strict"):
        raise ValueError(f"Policy di cutoff sconosciuta: {policy!r}")
    modes = tuple(str(m) for m in modes)
    if len(set(modes)) != len(modes):
        raise LabelCollisionError(f"Modi ripetuti: {modes}")
    if len(modes) != u.size:
        raise ValueError(f"La matrice {u.size}x{u.size} non corrisponde a {len(modes)} modi")
    idx = state.register.indices(modes)

    columns = {}
    out = {}
    for occ, amp in state.terms.items():
        n_in = tuple(occ[i] for i in idx)
        if n_in not in columns:
            columns[n_in] = _lift_column(u.matrix, n_in)
        for n_out, coeff in columns[n_in].items():
            new = list(occ)
            for i, n in zip(idx, n_out):
                new[i] = n
            key = tuple(new)
            out[key] = out.get(key, 0j) + amp * coeff

    register = state.register
    top = max((max(k) for k in out if k), default=0)
    if top > register.cutoff:
        if policy == "strict":
            raise CutoffOverflowError(f"{u.name} porta {top} fotoni in un modo (cutoff {register.cutoff})")
        logger.debug("Cutoff esteso da %d a %d dopo %s", register.cutoff, top, u.name)
        register = register.with_cutoff(top)
    return FockKet.from_terms(register, out)


# ---------------------- PASSI DI UN SETUP OTTICO ----------------------

@dataclass(frozen=True, eq=False)
class OpticalStep:
    unitary: ModeUnitary
    modes: tuple

    def apply(self, state: FockKet) -> FockKet:
        return apply_mode_unitary(state, self.unitary, self.modes)

    def describe(self) -> str:
        return f"{self.unitary.name} su {','.join(str(m) for m in self.modes)}"


@dataclass(frozen=True)
class Relabel:
    """Instradamento (es. PBS): rinomina i modi e fissa l'ordine finale del registro."""
    mapping: Mapping[str, str]
    order: tuple

    def apply(self, state: FockKet) -> FockKet:
        return state.relabel(self.mapping).reorder(self.order)

    def describe(self) -> str:
        routes = ", ".join(f"{a}->{b}" for a, b in self.mapping.items())
        return f"instradamento {routes}"
