import logging

import numpy as np

import config
from fock.optics import OpticalStep, Relabel
from fock.state import FockKet, fidelity
from oracle.dense import (
    DenseOutcome,
    DenseState,
    dense_apply,
    dense_fidelity,
    dense_measure,
    dense_project,
    dense_relabel,
    dense_trace_out,
)
from protocols.setups import Setup, evaluate_setup

logger = logging.getLogger(__name__)


def dense_final_state(setup: Setup) -> DenseState:
    state = DenseState.initial(setup.initial)
    for step in setup.steps:
        if isinstance(step, OpticalStep):
            state = dense_apply(state, step.unitary, step.modes)
        elif isinstance(step, Relabel):
            state = dense_relabel(state, step.mapping, step.order)
        else:
            raise TypeError(f"Passo non supportato dall'oracolo: {step!r}")
    return state


def dense_evaluate(setup: Setup, state: DenseState = None) -> dict[str, DenseOutcome]:
    state = dense_final_state(setup) if state is None else state
    results = {}
    for name, event in setup.events.items():
        if isinstance(event, FockKet):
            outcome = dense_project(state, event)
        else:
            outcome = dense_measure(state, event)
        if setup.traced:
            outcome = dense_trace_out(outcome, setup.traced)
        results[name] = outcome
    return results


def max_amplitude_difference(ket: FockKet, dense: DenseState) -> float:
    """Massima differenza tra ampiezze, sull'unione dei supporti."""
    cutoff = max(ket.register.cutoff, dense.register.cutoff)
    a = DenseState.from_ket(ket, cutoff).amplitudes
    b = dense.padded(cutoff).amplitudes
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def verify_setup(setup: Setup, tol: float = None) -> list[str]:
    """
    Confronta motore sparso e oracolo denso sullo stesso setup: ampiezze dello stato finale,
    probabilità degli eventi e fedeltà con i bersagli. Restituisce l'elenco delle discrepanze.
    """
    tol = config.VERIFY_TOL if tol is None else tol
    problems = []

    sparse_state = setup.final_state()
    dense_state = dense_final_state(setup)
    if sparse_state.register.labels != dense_state.register.labels:
        problems.append(f"ordine dei modi diverso: {sparse_state.register.labels} vs {dense_state.register.labels}")
        return problems
    diff = max_amplitude_difference(sparse_state, dense_state)
    if diff > tol:
        problems.append(f"stato finale: differenza massima di ampiezza {diff:.3e}")

    sparse = evaluate_setup(setup, sparse_state)
    dense = dense_evaluate(setup, dense_state)
    for name in setup.events:
        s, d = sparse[name], dense[name]
        if abs(s.probability - d.probability) > tol:
            problems.append(f"{name}: probabilità {s.probability:.12g} vs oracolo {d.probability:.12g}")
        if s.impossible != d.impossible:
            problems.append(f"{name}: evento impossibile solo per uno dei due motori")
            continue
        if s.impossible:
            continue
        for key, target in setup.targets.items():
            fs = fidelity(s.ensemble, target)
            fd = dense_fidelity(d, target)
            if abs(fs - fd) > tol:
                problems.append(f"{name}: fedeltà {key} {fs:.12g} vs oracolo {fd:.12g}")

    for p in problems:
        logger.error("Verifica %s: %s", setup.name, p)
    if not problems:
        logger.info("Verifica %s superata (%d eventi)", setup.name, len(setup.events))
    return problems
