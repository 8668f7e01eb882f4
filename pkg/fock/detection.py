import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import pandas as pd

import config
from fock.errors import LabelCollisionError
from fock.state import FockKet, OccupationVector, WeightedEnsemble, is_normalized, norm

logger = logging.getLogger(__name__)

CLICK = "click"
SILENT = "silent"
OUTCOMES = (CLICK, SILENT)


@dataclass(frozen=True)
class ThresholdDetector:
    """
    Rivelatore a soglia (vuoto / non vuoto) con efficienza eta.
    Ogni fotone sopravvive indipendentemente con probabilità eta:
    P(silenzio | n fotoni) = (1 - eta)^n.
    """
    eta: float = 1.0
    name: str = "D"
    dark_count: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"L'efficienza deve stare in [0, 1], ricevuto {self.eta}")
        if self.dark_count != 0.0:
            raise ValueError("I conteggi di buio non sono modellati (dark_count deve essere 0)")

    def silent_probability(self, n: int) -> float:
        return (1.0 - self.eta) ** n

    def click_probability(self, n: int) -> float:
        return 1.0 - self.silent_probability(n)


@dataclass(frozen=True)
class DetectorAssignment:
    """Un rivelatore su uno o più modi (es. entrambe le polarizzazioni di un fascio) con l'esito richiesto."""
    modes: tuple
    detector: ThresholdDetector
    outcome: str

    def __post_init__(self):
        modes = (self.modes,) if isinstance(self.modes, str) else tuple(self.modes)
        object.__setattr__(self, "modes", tuple(str(m) for m in modes))
        if self.outcome not in OUTCOMES:
            raise ValueError(f"Esito non valido: {self.outcome!r}")

    def probability(self, n: int) -> float:
        if self.outcome == CLICK:
            return self.detector.click_probability(n)
        return self.detector.silent_probability(n)


@dataclass(frozen=True)
class ClickPattern:
    assignments: tuple[DetectorAssignment, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignments", tuple(self.assignments))
        modes = self.measured_modes
        if len(set(modes)) != len(modes):
            raise LabelCollisionError(f"Modi ripetuti nel pattern: {modes}")

    @classmethod
    def of(cls, *items, eta: float = 1.0) -> "ClickPattern":
        """
        Scorciatoia: ClickPattern.of(("1", "click"), ("2", "silent"), eta=0.9).
        Un terzo elemento opzionale dà il nome del rivelatore.
        """
        assignments = []
        for item in items:
            modes, outcome = item[0], item[1]
            name = item[2] if len(item) > 2 else f"D{modes if isinstance(modes, str) else modes[0]}"
            assignments.append(DetectorAssignment(modes, ThresholdDetector(eta, name), outcome))
        return cls(tuple(assignments))

    @property
    def measured_modes(self) -> tuple[str, ...]:
        return tuple(m for a in self.assignments for m in a.modes)

    def probability(self, counts: dict) -> float:
        """Probabilità del pattern dati i numeri di fotoni {modo: n} sui modi misurati."""
        p = 1.0
        for a in self.assignments:
            p *= a.probability(sum(counts[m] for m in a.modes))
        return p

    def describe(self) -> str:
        return ", ".join(f"{a.detector.name}={a.outcome}" for a in self.assignments)


@dataclass(frozen=True)
class ConditionalOutcome:
    probability: float
    ensemble: Optional[WeightedEnsemble]

    @property
    def impossible(self) -> bool:
        return self.ensemble is None


def _split_measured(state: FockKet, measured: tuple) -> tuple[list[int], list[int]]:
    idx = list(state.register.indices(measured))
    keep = [i for i in range(len(state.register)) if i not in idx]
    return idx, keep


def measure_pattern(state: FockKet, pattern: ClickPattern) -> ConditionalOutcome:
    """
    Condiziona `state` su un pattern di click/silenzi.
    I rami con occupazioni diverse sui modi misurati sono incoerenti; quelli con la
    stessa occupazione restano in sovrapposizione coerente.
    """
    if not is_normalized(state):
        raise ValueError(f"Lo stato da misurare deve essere normalizzato (norma {norm(state)})")
    measured = pattern.measured_modes
    idx, keep = _split_measured(state, measured)
    rest = state.register.without(measured)

    groups: dict[OccupationVector, dict] = {}
    for occ, amp in state.terms.items():
        key = tuple(occ[i] for i in idx)
        groups.setdefault(key, {})[tuple(occ[i] for i in keep)] = amp

    branches = []
    for key in sorted(groups):
        factor = pattern.probability(dict(zip(measured, key)))
        if factor == 0.0:
            continue
        sub = FockKet.from_terms(rest, groups[key])
        branches.append((factor * norm(sub) ** 2, sub))

    total = min(1.0, sum(w for w, _ in branches))
    logger.debug("Pattern [%s]: probabilità %.6g su %d rami", pattern.describe(), total, len(branches))
    if total <= config.IMPOSSIBLE_TOL:
        return ConditionalOutcome(0.0, None)
    return ConditionalOutcome(total, WeightedEnsemble.from_branches(rest, branches))


def occupation_distribution(state: FockKet, modes: Iterable) -> dict[OccupationVector, float]:
    """Distribuzione del numero di fotoni sui modi indicati (rivelatori ideali risolventi)."""
    modes = tuple(str(m) for m in modes)
    idx = state.register.indices(modes)
    dist = {}
    for occ, amp in state.terms.items():
        key = tuple(occ[i] for i in idx)
        dist[key] = dist.get(key, 0.0) + abs(amp) ** 2
    return dict(sorted(dist.items()))


def coincidence_table(state: FockKet, detectors: list, eta: float) -> pd.DataFrame:
    """
    Probabilità congiunte di tutte le combinazioni click/silenzio.
    `detectors` è una lista di (nome, modi) oppure di etichette di modo.
    Una riga per combinazione, colonne = nomi dei rivelatori + "probability".
    """
    named = []
    for d in detectors:
        if isinstance(d, str):
            named.append((f"D{d}", (d,)))
        else:
            name, modes = d
            named.append((name, (modes,) if isinstance(modes, str) else tuple(modes)))
    all_modes = [m for _, modes in named for m in modes]
    if len(set(all_modes)) != len(all_modes):
        raise LabelCollisionError(f"Rivelatori su modi non distinti: {all_modes}")

    dist = occupation_distribution(state, all_modes)
    rows = []
    for outcomes in itertools.product(OUTCOMES, repeat=len(named)):
        pattern = ClickPattern(tuple(
            DetectorAssignment(modes, ThresholdDetector(eta, name), outcome)
            for (name, modes), outcome in zip(named, outcomes)
        ))
        p = sum(w * pattern.probability(dict(zip(all_modes, key))) for key, w in dist.items())
        row = {name: outcome for (name, _), outcome in zip(named, outcomes)}
        row["probability"] = p
        rows.append(row)
    return pd.DataFrame(rows, columns=[name for name, _ in named] + ["probability"])
