import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

import config
from fock.detection import ConditionalOutcome
from fock.state import FockKet, fidelity

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["event", "probability", "fidelity_psi_plus", "fidelity_psi_minus"]


def round_float(value):
    """Arrotonda a 12 cifre significative (None e non-numeri passano invariati)."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, complex):
        return {"re": round_float(value.real), "im": round_float(value.imag)}
    if isinstance(value, float) and math.isnan(value):
        return None
    return float(config.FLOAT_FORMAT % value)


def clean_values(obj):
    if isinstance(obj, dict):
        return {str(k): clean_values(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_values(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, int) and not isinstance(obj, bool):
        return obj
    if isinstance(obj, (float, complex)):
        return round_float(obj)
    return obj


@dataclass
class EventSummary:
    name: str
    probability: float
    fidelity_psi_plus: Optional[float] = None
    fidelity_psi_minus: Optional[float] = None
    fidelities: dict = field(default_factory=dict)
    branches: list = field(default_factory=list)
    dropped_mass: float = 0.0

    def to_dict(self) -> dict:
        return clean_values({
            "name": self.name,
            "probability": self.probability,
            "fidelity_psi_plus": self.fidelity_psi_plus,
            "fidelity_psi_minus": self.fidelity_psi_minus,
            "fidelities": self.fidelities,
            "branches": self.branches,
            "dropped_mass": self.dropped_mass,
        })


def summarize_event(name: str, outcome: ConditionalOutcome, targets: dict[str, FockKet]) -> EventSummary:
    """
    Riassume un esito condizionato: probabilità, fedeltà con ciascun bersaglio e i rami
    dell'ensemble con peso >= BRANCH_TOL (la massa dei rami più piccoli viene riportata).
    """
    if outcome.impossible:
        return EventSummary(name, 0.0, fidelities={key: None for key in targets})
    fids = {key: fidelity(outcome.ensemble, target) for key, target in targets.items()}
    branches, dropped = [], 0.0
    for w, s in outcome.ensemble.members:
        if w >= config.BRANCH_TOL:
            branches.append({"weight": w, "state": str(s)})
        else:
            dropped += w
    return EventSummary(
        name,
        outcome.probability,
        fidelity_psi_plus=fids.get("psi+"),
        fidelity_psi_minus=fids.get("psi-"),
        fidelities=fids,
        branches=branches,
        dropped_mass=dropped,
    )


@dataclass
class ProtocolReport:
    scheme: str
    params: dict
    events: list[EventSummary] = field(default_factory=list)
    coincidences: Optional[pd.DataFrame] = None
    extras: dict = field(default_factory=dict)
    setup: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def dropped_mass(self) -> float:
        return sum(e.dropped_mass for e in self.events)

    def event(self, name: str) -> EventSummary:
        for e in self.events:
            if e.name == name:
                return e
        raise KeyError(f"Evento sconosciuto: {name!r} (disponibili: {[e.name for e in self.events]})")

    def events_frame(self) -> pd.DataFrame:
        rows = [{
            "event": e.name,
            "probability": e.probability,
            "fidelity_psi_plus": e.fidelity_psi_plus,
            "fidelity_psi_minus": e.fidelity_psi_minus,
        } for e in self.events]
        # None -> NaN: colonne sempre float, anche per eventi impossibili
        return pd.DataFrame(rows, columns=EVENT_COLUMNS).astype({c: float for c in EVENT_COLUMNS[1:]})

    def to_dict(self) -> dict:
        coincidences = None
        if self.coincidences is not None:
            coincidences = {
                "detectors": [c for c in self.coincidences.columns if c != "probability"],
                "rows": self.coincidences.to_dict(orient="records"),
            }
        return clean_values({
            "scheme": self.scheme,
            "params": self.params,
            "setup": self.setup,
            "events": [e.to_dict() for e in self.events],
            "coincidences": coincidences,
            "extras": self.extras,
            "dropped_mass": self.dropped_mass,
            "notes": self.notes,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)
