import json
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Union

import config
from fock.errors import (
    CutoffOverflowError,
    LabelCollisionError,
    RegisterMismatchError,
    UnknownModeError,
    ZeroKetError,
)

logger = logging.getLogger(__name__)

# Numeri di occupazione, uno per modo del registro
OccupationVector = tuple[int, ...]


# ---------------------- REGISTRO DEI MODI ----------------------

@dataclass(frozen=True)
class ModeRegister:
    """
    Insieme ordinato di modi ottici con un cutoff comune sul numero di fotoni.
    L'ordine delle etichette è quello usato per stampare i ket (da sinistra a destra).
    """
    labels: tuple[str, ...]
    cutoff: int = 1

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise LabelCollisionError(f"Etichette duplicate nel registro: {labels}")
        if int(self.cutoff) < 1:
            raise ValueError(f"Il cutoff deve essere almeno 1, ricevuto {self.cutoff}")
        object.__setattr__(self, "cutoff", int(self.cutoff))

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return str(label) in self.labels

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise UnknownModeError(f"Modo sconosciuto: {label!r} (registro {self.labels})") from None

    def indices(self, labels: Iterable) -> tuple[int, ...]:
        return tuple(self.index(label) for label in labels)

    def with_cutoff(self, cutoff: int) -> "ModeRegister":
        return ModeRegister(self.labels, cutoff)

    def subregister(self, labels: Iterable) -> "ModeRegister":
        labels = tuple(str(label) for label in labels)
        self.indices(labels)
        return ModeRegister(labels, self.cutoff)

    def without(self, labels: Iterable) -> "ModeRegister":
        removed = {str(label) for label in labels}
        for label in removed:
            self.index(label)
        return ModeRegister(tuple(l for l in self.labels if l not in removed), self.cutoff)

    def same_modes(self, other: "ModeRegister") -> bool:
        return self.labels == other.labels


def _check_same_modes(a: ModeRegister, b: ModeRegister):
    if not a.same_modes(b):
        raise RegisterMismatchError(f"Registri diversi: {a.labels} vs {b.labels}")


# ---------------------- KET SPARSO ----------------------

@dataclass(frozen=True)
class FockKet:
    """
    Ket multimodale sparso: mappa occupazione -> ampiezza complessa.
    Usare FockKet.from_terms per costruirlo (applica il pruning e i controlli).
    """
    register: ModeRegister
    terms: Mapping[OccupationVector, complex]

    @classmethod
    def from_terms(cls, register: ModeRegister, terms, prune_tol: float = None) -> "FockKet":
        tol = config.PRUNE_TOL if prune_tol is None else prune_tol
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for occ, amp in items:
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(register):
                raise ValueError(f"Occupazione {occ} incompatibile con {len(register)} modi")
            if any(n < 0 for n in occ):
                raise ValueError(f"Occupazione negativa: {occ}")
            if any(n > register.cutoff for n in occ):
                raise CutoffOverflowError(f"Occupazione {occ} oltre il cutoff {register.cutoff}")
            clean[occ] = clean.get(occ, 0j) + complex(amp)
        # pruning dopo la somma: occupazioni ripetute possono cancellarsi
        clean = {occ: amp for occ, amp in clean.items() if amp != 0 and abs(amp) >= tol}
        return cls(register, MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def vacuum(cls, register: ModeRegister) -> "FockKet":
        return cls.from_terms(register, {(0,) * len(register): 1.0})

    @classmethod
    def basis(cls, register: ModeRegister, occ: Iterable[int]) -> "FockKet":
        return cls.from_terms(register, {tuple(occ): 1.0})

    def __len__(self) -> int:
        return len(self.terms)

    def amplitude(self, occ: Iterable[int]) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def scaled(self, factor: complex) -> "FockKet":
        return FockKet.from_terms(self.register, {occ: factor * amp for occ, amp in self.terms.items()})

    def __add__(self, other: "FockKet") -> "FockKet":
        _check_same_modes(self.register, other.register)
        merged = dict(self.terms)
        for occ, amp in other.terms.items():
            merged[occ] = merged.get(occ, 0j) + amp
        cutoff = max(self.register.cutoff, other.register.cutoff)
        return FockKet.from_terms(self.register.with_cutoff(cutoff), merged)

    def __sub__(self, other: "FockKet") -> "FockKet":
        return self + other.scaled(-1.0)

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self.terms}

    def reorder(self, labels: Iterable) -> "FockKet":
        """Permuta i modi secondo l'ordine `labels` (stesso insieme di modi)."""
        labels = tuple(str(label) for label in labels)
        if sorted(labels) != sorted(self.register.labels):
            raise RegisterMismatchError(f"Riordino non valido: {labels} vs {self.register.labels}")
        idx = self.register.indices(labels)
        register = ModeRegister(labels, self.register.cutoff)
        return FockKet.from_terms(register, {tuple(occ[i] for i in idx): amp for occ, amp in self.terms.items()})

    def relabel(self, mapping: Mapping[str, str]) -> "FockKet":
        labels = tuple(mapping.get(label, label) for label in self.register.labels)
        return FockKet(ModeRegister(labels, self.register.cutoff), self.terms)

    def filter(self, predicate: Callable[[OccupationVector], bool]) -> "FockKet":
        """Mantiene solo i termini la cui occupazione soddisfa `predicate` (non normalizza)."""
        return FockKet.from_terms(self.register, {occ: amp for occ, amp in self.terms.items() if predicate(occ)})

    def to_json(self) -> str:
        return json.dumps({
            "modes": list(self.register.labels),
            "terms": [
                {"occ": list(occ), "re": amp.real, "im": amp.imag}
                for occ, amp in self.terms.items()
            ],
        })

    @classmethod
    def from_json(cls, text: str, cutoff: int = None) -> "FockKet":
        data = json.loads(text)
        terms = {tuple(t["occ"]): complex(t["re"], t["im"]) for t in data["terms"]}
        if cutoff is None:
            cutoff = max([1] + [max(occ) for occ in terms if occ])
        return cls.from_terms(ModeRegister(tuple(data["modes"]), cutoff), terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for occ, amp in self.terms.items():
            ket = "|" + "".join(str(n) for n in occ) + ">"
            if abs(amp.imag) < config.PRUNE_TOL:
                parts.append(f"{amp.real:+.6g}{ket}")
            else:
                parts.append(f"+({amp.real:.6g}{amp.imag:+.6g}j){ket}")
        return " ".join(parts)


# ---------------------- OPERAZIONI DI BASE ----------------------

def norm(a: FockKet) -> float:
    return math.sqrt(sum(abs(amp) ** 2 for amp in a.terms.values()))


def normalize(a: FockKet) -> FockKet:
    n = norm(a)
    if n == 0.0:
        raise ZeroKetError("Impossibile normalizzare il ket nullo")
    return FockKet.from_terms(a.register, {occ: amp / n for occ, amp in a.terms.items()})


def is_normalized(a: FockKet, tol: float = None) -> bool:
    tol = config.NORM_TOL if tol is None else tol
    return abs(norm(a) - 1.0) <= tol


def tensor_product(a: FockKet, b: FockKet) -> FockKet:
    """Prodotto tensoriale; il registro risultante è la concatenazione a + b."""
    clash = set(a.register.labels) & set(b.register.labels)
    if clash:
        raise LabelCollisionError(f"Modi in comune nel prodotto tensoriale: {sorted(clash)}")
    register = ModeRegister(a.register.labels + b.register.labels,
                            max(a.register.cutoff, b.register.cutoff))
    terms = {}
    for occ_a, amp_a in a.terms.items():
        for occ_b, amp_b in b.terms.items():
            terms[occ_a + occ_b] = amp_a * amp_b
    return FockKet.from_terms(register, terms)


def inner_product(a: FockKet, b: FockKet) -> complex:
    """<a|b>, antilineare nel primo argomento."""
    _check_same_modes(a.register, b.register)
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    total = 0j
    for occ in small:
        if occ in large:
            total += a.terms[occ].conjugate() * b.terms[occ]
    return total


def contract(state: FockKet, bra: FockKet) -> FockKet:
    """
    Prodotto scalare parziale <bra|state> sui modi di `bra`.
    Restituisce il ket (non normalizzato) sui modi restanti, nell'ordine del registro.
    """
    idx = state.register.indices(bra.register.labels)
    register = state.register.without(bra.register.labels)
    keep = [i for i in range(len(state.register)) if i not in idx]
    out = {}
    for occ, amp in state.terms.items():
        coeff = bra.terms.get(tuple(occ[i] for i in idx))
        if coeff is None:
            continue
        rest = tuple(occ[i] for i in keep)
        out[rest] = out.get(rest, 0j) + coeff.conjugate() * amp
    return FockKet.from_terms(register, out)


# ---------------------- ENSEMBLE E FEDELTÀ ----------------------

@dataclass(frozen=True)
class WeightedEnsemble:
    """Miscela statistica di ket puri normalizzati: [(peso, stato), ...]."""
    register: ModeRegister
    members: tuple[tuple[float, FockKet], ...]

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("Un ensemble deve avere almeno un membro")
        for w, s in members:
            if w <= 0.0:
                raise ValueError(f"Peso non positivo nell'ensemble: {w}")
            _check_same_modes(self.register, s.register)
            if not is_normalized(s):
                raise ValueError(f"Stato non normalizzato nell'ensemble (norma {norm(s)})")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > config.NORM_TOL:
            raise ValueError(f"I pesi dell'ensemble sommano a {total}, non a 1")

    @classmethod
    def pure(cls, ket: FockKet) -> "WeightedEnsemble":
        return cls(ket.register, ((1.0, normalize(ket)),))

    @classmethod
    def from_branches(cls, register: ModeRegister, branches: Iterable[tuple[float, FockKet]]) -> "WeightedEnsemble":
        """Costruisce l'ensemble da rami non normalizzati (peso, ket)."""
        kept = [(w, s) for w, s in branches if w > 0.0 and s.terms]
        total = sum(w for w, _ in kept)
        if total <= 0.0:
            raise ZeroKetError("Nessun ramo con peso positivo")
        return cls(register, tuple((w / total, normalize(s)) for w, s in kept))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def weight_where(self, predicate: Callable[[OccupationVector], bool]) -> float:
        """Peso totale dei termini (su tutti i membri) la cui occupazione soddisfa `predicate`."""
        return sum(
            w * sum(abs(amp) ** 2 for occ, amp in s.terms.items() if predicate(occ))
            for w, s in self.members
        )


def fidelity(e: Union[WeightedEnsemble, FockKet], target: FockKet) -> float:
    """Sum_i w_i |<target|psi_i>|^2, limitata a [0, 1]."""
    if isinstance(e, FockKet):
        e = WeightedEnsemble.pure(e)
    _check_same_modes(e.register, target.register)
    if not is_normalized(target):
        raise ValueError("Lo stato bersaglio deve essere normalizzato")
    value = sum(w * abs(inner_product(target, s)) ** 2 for w, s in e.members)
    return min(1.0, max(0.0, value))


def trace_out(x: Union[WeightedEnsemble, FockKet], modes: Iterable) -> WeightedEnsemble:
    """Traccia parziale esatta: ogni membro si divide secondo l'occupazione dei modi tracciati."""
    if isinstance(x, FockKet):
        x = WeightedEnsemble.pure(x)
    modes = tuple(str(m) for m in modes)
    idx = x.register.indices(modes)
    register = x.register.without(modes)
    keep = [i for i in range(len(x.register)) if i not in idx]
    branches = []
    for w, s in x.members:
        groups = {}
        for occ, amp in s.terms.items():
            key = tuple(occ[i] for i in idx)
            groups.setdefault(key, {})[tuple(occ[i] for i in keep)] = amp
        for key in sorted(groups):
            sub = FockKet.from_terms(register, groups[key])
            branches.append((w * norm(sub) ** 2, sub))
    return WeightedEnsemble.from_branches(register, branches)


# ---------------------- STATI DI BELL ----------------------

_BELL_ALIASES = {
    "phi+": "phi+", "Φ+": "phi+", "Φ⁺": "phi+",
    "phi-": "phi-", "Φ-": "phi-", "Φ⁻": "phi-",
    "psi+": "psi+", "Ψ+": "psi+", "Ψ⁺": "psi+",
    "psi-": "psi-", "Ψ-": "psi-", "Ψ⁻": "psi-",
}

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


def bell_state(kind: str, modes: tuple, register: ModeRegister = None) -> FockKet:
    """
    Stati di Bell nella codifica vuoto/un-fotone:
      Phi± = (|0>_i|0>_j ± |1>_i|1>_j)/sqrt(2)
      Psi± = (|0>_i|1>_j ± |1>_i|0>_j)/sqrt(2)
    """
    name = _BELL_ALIASES.get(kind)
    if name is None:
        raise ValueError(f"Stato di Bell sconosciuto: {kind!r}")
    if len(modes) != 2:
        raise ValueError("Uno stato di Bell richiede esattamente due modi")
    if register is None:
        sub = ModeRegister(tuple(modes), 1)
    else:
        sub = register.subregister(modes)
    sign = 1.0 if name.endswith("+") else -1.0
    r = 1.0 / math.sqrt(2.0)
    if name.startswith("phi"):
        terms = {(0, 0): r, (1, 1): sign * r}
    else:
        terms = {(0, 1): r, (1, 0): sign * r}
    return FockKet.from_terms(sub, terms)
