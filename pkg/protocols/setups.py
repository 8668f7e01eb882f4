import logging
from dataclasses import dataclass, field
from typing import Union

import config
from fock.detection import ClickPattern, ConditionalOutcome, measure_pattern
from fock.optics import OpticalStep, Relabel
from fock.state import FockKet, WeightedEnsemble, contract, norm, trace_out

logger = logging.getLogger(__name__)

# Un evento è un pattern di rivelatori oppure un proiettore ideale (bra sui modi misurati)
Event = Union[ClickPattern, FockKet]
Step = Union[OpticalStep, Relabel]


@dataclass(frozen=True, eq=False)
class Setup:
    """
    Descrizione completa di un esperimento: stato iniziale, elementi ottici in ordine,
    eventi di condizionamento, modi scartati dopo la misura e stati bersaglio.
    La stessa descrizione viene valutata dal motore sparso e dall'oracolo denso.
    """
    name: str
    initial: FockKet
    steps: tuple = ()
    events: dict = field(default_factory=dict)
    traced: tuple = ()
    targets: dict = field(default_factory=dict)
    detectors: tuple = ()

    def final_state(self) -> FockKet:
        state = self.initial
        for step in self.steps:
            state = step.apply(state)
            logger.debug("%s: %s -> %d termini", self.name, step.describe(), len(state))
        return state

    def describe(self) -> list[str]:
        return [step.describe() for step in self.steps]


def condition(state: FockKet, event: Event, traced: tuple = ()) -> ConditionalOutcome:
    if isinstance(event, FockKet):
        projected = contract(state, event)
        probability = norm(projected) ** 2
        if probability <= config.IMPOSSIBLE_TOL:
            return ConditionalOutcome(0.0, None)
        outcome = ConditionalOutcome(probability, WeightedEnsemble.pure(projected))
    else:
        outcome = measure_pattern(state, event)
    if traced and not outcome.impossible:
        outcome = ConditionalOutcome(outcome.probability, trace_out(outcome.ensemble, traced))
    return outcome


def evaluate_setup(setup: Setup, state: FockKet = None) -> dict[str, ConditionalOutcome]:
    state = setup.final_state() if state is None else state
    return {name: condition(state, event, setup.traced) for name, event in setup.events.items()}
