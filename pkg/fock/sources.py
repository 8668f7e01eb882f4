import logging
import math
from dataclasses import dataclass

from fock.errors import CutoffOverflowError
from fock.state import FockKet, ModeRegister, bell_state, normalize, tensor_product

logger = logging.getLogger(__name__)

# Codifica di polarizzazione: il fascio b diventa la coppia di modi "bH", "bV"
POLARIZATION_MODES = ("1H", "1V", "2H", "2V", "3H", "3V", "4H", "4V")
VACUUM_ONE_PHOTON_MODES = ("2'", "3'", "1", "4")


@dataclass(frozen=True)
class SpdcParams:
    tau: complex
    order: int = 1

    def __post_init__(self):
        if abs(self.tau) >= 1.0:
            raise ValueError(f"|tau| deve essere minore di 1, ricevuto {abs(self.tau)}")
        if int(self.order) < 1:
            raise ValueError(f"L'ordine di troncamento deve essere almeno 1, ricevuto {self.order}")
        object.__setattr__(self, "order", int(self.order))

    @classmethod
    def from_tau2(cls, tau2: float, order: int = 1) -> "SpdcParams":
        if tau2 < 0.0:
            raise ValueError(f"|tau|^2 non può essere negativo: {tau2}")
        return cls(math.sqrt(tau2), order)


def spdc_pair(p: SpdcParams, modes: tuple = ("a", "b"), cutoff: int = None) -> FockKet:
    """Coppia SPDC troncata: sum_{n=0..order} tau^n |n, n>, normalizzata."""
    cutoff = p.order if cutoff is None else cutoff
    if p.order > cutoff:
        raise CutoffOverflowError(f"Ordine {p.order} oltre il cutoff {cutoff}")
    register = ModeRegister(tuple(modes), cutoff)
    tau = complex(p.tau)
    terms = {(n, n): tau ** n for n in range(p.order + 1)}
    return normalize(FockKet.from_terms(register, terms))


def double_pass_source(p: SpdcParams) -> FockKet:
    """Due coppie indipendenti sui fasci (1,4) e (2,3); registro nell'ordine (1, 4, 2, 3)."""
    return tensor_product(spdc_pair(p, ("1", "4")), spdc_pair(p, ("2", "3")))


def pair_emission(tau: complex = None, order: int = 1, modes: tuple = ("u", "l")) -> FockKet:
    """Sorgente a singolo passaggio: esattamente |1>_u|1>_l se tau è None, altrimenti SPDC troncata."""
    if tau is None:
        if order != 1:
            raise ValueError("Con ordine > 1 serve il parametro tau")
        return FockKet.basis(ModeRegister(tuple(modes), 1), (1, 1))
    return spdc_pair(SpdcParams(tau, order), modes)


# ---------------------- SORGENTE A DOPPIO PASSAGGIO (POLARIZZAZIONE) ----------------------

def _polarization_ket(terms: list[tuple[dict, float]], cutoff: int) -> FockKet:
    register = ModeRegister(POLARIZATION_MODES, cutoff)
    out = {}
    for counts, amp in terms:
        occ = tuple(counts.get(label, 0) for label in POLARIZATION_MODES)
        out[occ] = out.get(occ, 0.0) + amp
    return FockKet.from_terms(register, out)


def polarization_x_terms(cutoff: int = 2) -> FockKet:
    """|X>_{1324} = (|H>_1|V>_3 - |V>_1|H>_3)(|H>_2|V>_4 - |V>_2|H>_4), non normalizzato."""
    return _polarization_ket([
        ({"1H": 1, "3V": 1, "2H": 1, "4V": 1}, 1.0),
        ({"1H": 1, "3V": 1, "2V": 1, "4H": 1}, -1.0),
        ({"1V": 1, "3H": 1, "2H": 1, "4V": 1}, -1.0),
        ({"1V": 1, "3H": 1, "2V": 1, "4H": 1}, 1.0),
    ], cutoff)


def polarization_y_terms(i: str, j: str, cutoff: int = 2) -> FockKet:
    """|Y>_{ij} = |2H>_i|2V>_j + |2V>_i|2H>_j - |HV>_i|HV>_j, non normalizzato."""
    return _polarization_ket([
        ({f"{i}H": 2, f"{j}V": 2}, 1.0),
        ({f"{i}V": 2, f"{j}H": 2}, 1.0),
        ({f"{i}H": 1, f"{i}V": 1, f"{j}H": 1, f"{j}V": 1}, -1.0),
    ], cutoff)


def polarization_double_pass(y_weight: float = 1.0, cutoff: int = 2) -> FockKet:
    """
    Stato emesso con la pompa che attraversa il cristallo due volte:
    |X>_{1324} + y_weight (|Y>_{13} + |Y>_{24}), poi normalizzato.
    y_weight = 1 riproduce i pesi relativi così come scritti; y_weight = 0 toglie |Y>.
    """
    if cutoff < 2:
        raise CutoffOverflowError(f"La sorgente a doppio passaggio richiede cutoff >= 2, ricevuto {cutoff}")
    state = polarization_x_terms(cutoff)
    if y_weight != 0.0:
        y = polarization_y_terms("1", "3", cutoff) + polarization_y_terms("2", "4", cutoff)
        state = state + y.scaled(y_weight)
    return normalize(state)


# ---------------------- ALTRI STATI INIZIALI ----------------------

def vacuum_one_photon_postbs() -> FockKet:
    """Stato a cinque rami dopo il beam splitter nella codifica vuoto/un-fotone, modi (2', 3', 1, 4)."""
    register = ModeRegister(VACUUM_ONE_PHOTON_MODES, 2)
    terms = {(0, 0, 1, 1): 1.0}
    for occ, amp in bell_state("psi+", ("1", "4")).terms.items():
        terms[(1, 0) + occ] = 0.5 * amp
    for occ, amp in bell_state("psi-", ("1", "4")).terms.items():
        terms[(0, 1) + occ] = 0.5 * amp
    terms[(2, 0, 0, 0)] = 1.0 / math.sqrt(2.0)
    terms[(0, 2, 0, 0)] = -1.0 / math.sqrt(2.0)
    return normalize(FockKet.from_terms(register, terms))


def theta_pair(theta: float, modes: tuple) -> FockKet:
    # il termine |11> ha coefficiente sin(theta)
    return normalize(FockKet.from_terms(ModeRegister(tuple(modes), 1),
                                        {(0, 0): math.cos(theta), (1, 1): math.sin(theta)}))


def theta_product(theta: float) -> FockKet:
    return tensor_product(theta_pair(theta, ("1", "2")), theta_pair(theta, ("3", "4")))


def chi_state(epsilon: float, modes: tuple = ("A", "C")) -> FockKet:
    """Stato debolmente entangled (|00> + eps|11>)/sqrt(1+eps^2)."""
    return normalize(FockKet.from_terms(ModeRegister(tuple(modes), 1), {(0, 0): 1.0, (1, 1): epsilon}))
