"""
Pipeline complete degli schemi di entanglement swapping.
Ogni schema ha una funzione *_setup (descrizione ottica, usata anche da --verify)
e una funzione run_*/analyze_* che produce il ProtocolReport.
"""
import logging
import math

import config
from fock.detection import CLICK, SILENT, ClickPattern, coincidence_table, occupation_distribution
from fock.optics import OpticalStep, Relabel, balanced_bs, pbs, polarization_rotation, unbalanced_bs
from fock.sources import (
    SpdcParams,
    double_pass_source,
    pair_emission,
    polarization_double_pass,
    theta_product,
    vacuum_one_photon_postbs,
)
from fock.state import (
    BELL_KINDS,
    FockKet,
    ModeRegister,
    bell_state,
    contract,
    inner_product,
    normalize,
    tensor_product,
)
from oracle.dense import DenseState, dense_fidelity, dense_trace_out, number_resolving_measure
from protocols.report import EventSummary, ProtocolReport, summarize_event
from protocols.setups import Setup, evaluate_setup

logger = logging.getLogger(__name__)

BEAMS = ("1", "2", "3", "4")
POLARIZATION_KEPT = ("1H", "1V", "4H", "4V")


# ---------------------- CONTROLLI SUI PARAMETRI ----------------------

def _check_eta(eta: float):
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta deve stare in [0, 1], ricevuto {eta}")


def _check_order(order: int):
    if int(order) < 1:
        raise ValueError(f"order deve essere almeno 1, ricevuto {order}")


def _check_epsilon(epsilon: float):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon deve stare in (0, 1), ricevuto {epsilon}")


def _param(value):
    if isinstance(value, complex) and value.imag == 0.0:
        return value.real
    return value


def _bell_targets(modes: tuple) -> dict[str, FockKet]:
    return {kind: bell_state(kind, modes) for kind in ("psi+", "psi-")}


def _favored(events: list[EventSummary]) -> dict[str, str]:
    """Associazione evento -> stato di Bell, calcolata dalle fedeltà."""
    return {
        e.name: "psi+" if e.fidelity_psi_plus >= e.fidelity_psi_minus else "psi-"
        for e in events
        if e.fidelity_psi_plus is not None
    }


# ---------------------- PROIEZIONE DI BELL IDEALE ----------------------

def bell_projection_setup(name: str, state: FockKet) -> Setup:
    return Setup(
        name,
        state,
        events={kind: bell_state(kind, ("2", "3")) for kind in BELL_KINDS},
        targets={kind: bell_state(kind, ("1", "4")) for kind in BELL_KINDS},
    )


def _bell_projection_report(scheme: str, setup: Setup, params: dict, notes: list) -> ProtocolReport:
    outcomes = evaluate_setup(setup)
    events, coefficients, same_bell = [], {}, {}
    for kind, outcome in outcomes.items():
        summary = summarize_event(kind, outcome, setup.targets)
        events.append(summary)
        same_bell[kind] = summary.fidelities[kind]
        # coefficiente del ramo |B>_23 |B>_14 nella decomposizione dello stato iniziale
        c = inner_product(setup.targets[kind], contract(setup.initial, setup.events[kind]))
        coefficients[kind] = c.real if abs(c.imag) < config.PRUNE_TOL else c
    return ProtocolReport(
        scheme,
        params,
        events,
        extras={"same_bell_fidelity": same_bell, "branch_coefficients": coefficients},
        setup=["proiezione di Bell ideale sui modi 2,3"],
        notes=notes,
    )


def bell_check_setup() -> Setup:
    """Psi-_12 (x) Psi-_34 proiettato sulla base di Bell dei modi (2,3)."""
    state = tensor_product(bell_state("psi-", ("1", "2")), bell_state("psi-", ("3", "4")))
    return bell_projection_setup("bell-check", state)


def theta_setup(theta: float) -> Setup:
    return bell_projection_setup("theta", theta_product(theta))


def bell_decomposition_check() -> ProtocolReport:
    return _bell_projection_report("bell-check", bell_check_setup(), {}, [])


def run_theta_swapping(theta: float) -> ProtocolReport:
    setup = theta_setup(theta)
    notes = [
        "probabilità calcolate dallo stato normalizzato: P(psi+) = P(psi-) = sin^2(theta) cos^2(theta); "
        "un prefattore 1/2 sui rami psi+- non sarebbe compatibile con la normalizzazione",
    ]
    report = _bell_projection_report("theta", setup, {"theta": theta}, notes)
    report.extras["expected_psi_probability"] = (math.sin(theta) * math.cos(theta)) ** 2
    return report


# ---------------------- SCHEMA A (DOPPIO PASSAGGIO) ----------------------

def scheme_a_setup(tau: complex, eta: float = 1.0, order: int = 1, single_pair: bool = False) -> Setup:
    _check_eta(eta)
    _check_order(order)
    source = double_pass_source(SpdcParams(tau, order)).reorder(BEAMS)
    if single_pair:
        # solo il settore con al più una coppia: dopo l'evento resta un Psi+- ideale
        source = normalize(source.filter(lambda occ: sum(occ) <= 2))
    return Setup(
        "scheme-a",
        source,
        steps=(OpticalStep(balanced_bs(), ("1", "2")),),
        events={
            "event1": ClickPattern.of(("1", CLICK, "D1"), ("2", SILENT, "D2"), eta=eta),
            "event2": ClickPattern.of(("1", SILENT, "D1"), ("2", CLICK, "D2"), eta=eta),
        },
        targets=_bell_targets(("3", "4")),
        detectors=(("D1", "1"), ("D2", "2")),
    )


def run_scheme_a(tau: complex, eta: float = 1.0, order: int = 1, single_pair: bool = False) -> ProtocolReport:
    setup = scheme_a_setup(tau, eta, order, single_pair)
    state = setup.final_state()
    outcomes = evaluate_setup(setup, state)
    events = [summarize_event(name, outcome, setup.targets) for name, outcome in outcomes.items()]
    tau2 = abs(tau) ** 2

    extras = {"event_bell_mapping": _favored(events)}
    if order == 1 and eta == 1.0 and not single_pair:
        extras["closed_form_fidelity"] = 1.0 / (1.0 + tau2 / 2.0)
    logger.info("Schema A: P(event1)=%.6g P(event2)=%.6g", events[0].probability, events[1].probability)
    return ProtocolReport(
        "A",
        {"tau": _param(tau), "tau2": tau2, "eta": eta, "order": order, "single_pair": single_pair},
        events,
        coincidences=coincidence_table(state, list(setup.detectors), eta),
        extras=extras,
        setup=setup.describe(),
        notes=["lo stato viene sempre rinormalizzato dopo il troncamento in tau"],
    )


def phase_verification_setup(tau: complex, eta: float = 1.0, order: int = 1, single_pair: bool = False) -> Setup:
    base = scheme_a_setup(tau, eta, order, single_pair)
    events = dict(base.events)
    for event, (d1, d2) in (("event1", (CLICK, SILENT)), ("event2", (SILENT, CLICK))):
        for det, mode in (("D3", "3"), ("D4", "4")):
            events[f"{event}&{det}"] = ClickPattern.of(
                ("1", d1, "D1"), ("2", d2, "D2"), (mode, CLICK, det), eta=eta
            )
    return Setup(
        "phase-verification",
        base.initial,
        steps=base.steps + (OpticalStep(balanced_bs(), ("3", "4")),),
        events=events,
        detectors=(("D1", "1"), ("D2", "2"), ("D3", "3"), ("D4", "4")),
    )


def _beam_marginals(outcome) -> dict:
    """Distribuzione del fotone tra i fasci 3 e 4 prima del secondo beam splitter."""
    if outcome.impossible:
        return None
    p3 = p4 = both = 0.0
    for w, s in outcome.ensemble:
        for (n3, n4), p in occupation_distribution(s, ("3", "4")).items():
            if n3 and not n4:
                p3 += w * p
            elif n4 and not n3:
                p4 += w * p
            elif n3 and n4:
                both += w * p
    single = p3 + p4
    return {
        "beam3": p3 / single if single else None,
        "beam4": p4 / single if single else None,
        "both_beams": both,
    }


def run_phase_verification(tau: complex, eta: float = 1.0, order: int = 1, single_pair: bool = False) -> ProtocolReport:
    """
    Dopo l'evento 1 o 2 i fasci 3 e 4 passano per un secondo beam splitter bilanciato
    con i rivelatori D3/D4: Psi+ manda il fotone verso D3, Psi- verso D4.
    """
    pre = scheme_a_setup(tau, eta, order, single_pair)
    pre_outcomes = evaluate_setup(pre)
    setup = phase_verification_setup(tau, eta, order, single_pair)
    state = setup.final_state()
    outcomes = evaluate_setup(setup, state)

    events = [summarize_event(name, pre_outcomes[name], pre.targets) for name in ("event1", "event2")]
    conditional = {}
    for event, det in (("event1", "D3"), ("event1", "D4"), ("event2", "D4"), ("event2", "D3")):
        p_event = outcomes[event].probability
        value = outcomes[f"{event}&{det}"].probability / p_event if p_event > 0.0 else None
        conditional[f"{det}|{event}"] = value
        events.append(EventSummary(f"{det}|{event}", 0.0 if value is None else value))

    return ProtocolReport(
        "phase-verification",
        {"tau": _param(tau), "tau2": abs(tau) ** 2, "eta": eta, "order": order, "single_pair": single_pair},
        events,
        coincidences=coincidence_table(state, list(setup.detectors), eta),
        extras={
            "conditional": conditional,
            "marginals": {name: _beam_marginals(pre_outcomes[name]) for name in ("event1", "event2")},
            "d4_given_event1_bound": abs(tau) ** 2,
            "event_bell_mapping": _favored(events[:2]),
        },
        setup=setup.describe(),
    )


# ---------------------- SCHEMA B (SINGOLO PASSAGGIO) ----------------------

def _scheme_b_front(epsilon: float, variant: str, tau: complex, order: int) -> tuple[FockKet, tuple]:
    """Stato iniziale ed elementi che preparano i fasci 1-4 (UBS oppure rotazione + PBS)."""
    if variant == "ubs":
        pair = pair_emission(tau, order, ("1", "4"))
        vacuum = FockKet.vacuum(ModeRegister(("2", "3"), pair.register.cutoff))
        initial = tensor_product(pair, vacuum).reorder(BEAMS)
        steps = (
            OpticalStep(unbalanced_bs(epsilon), ("1", "2")),
            OpticalStep(unbalanced_bs(epsilon), ("4", "3")),
        )
    elif variant == "pbs":
        pair = pair_emission(tau, order, ("uH", "lH"))
        vacuum = FockKet.vacuum(ModeRegister(("uV", "lV"), pair.register.cutoff))
        initial = tensor_product(pair, vacuum).reorder(("uH", "uV", "lH", "lV"))
        routing = {**pbs(("uH", "uV"), ("1", "2")), **pbs(("lH", "lV"), ("4", "3"))}
        steps = (
            OpticalStep(polarization_rotation(epsilon), ("uH", "uV")),
            OpticalStep(polarization_rotation(epsilon), ("lH", "lV")),
            Relabel(routing, BEAMS),
        )
    else:
        raise ValueError(f"Variante sconosciuta: {variant!r} (ubs oppure pbs)")
    return initial, steps


def scheme_b_prebs_state(epsilon: float, variant: str = "ubs", tau: complex = None, order: int = 1) -> FockKet:
    """Stato dei fasci (1,2,3,4) subito prima del beam splitter bilanciato."""
    _check_epsilon(epsilon)
    state, steps = _scheme_b_front(epsilon, variant, tau, order)
    for step in steps:
        state = step.apply(state)
    return state


def scheme_b_setup(epsilon: float, eta: float = 1.0, order: int = 1, variant: str = "ubs", tau: complex = None) -> Setup:
    _check_epsilon(epsilon)
    _check_eta(eta)
    _check_order(order)
    initial, steps = _scheme_b_front(epsilon, variant, tau, order)
    return Setup(
        f"scheme-b-{variant}",
        initial,
        steps=steps + (OpticalStep(balanced_bs(), ("2", "3")),),
        events={
            "D2-click": ClickPattern.of(("2", CLICK, "D2"), ("3", SILENT, "D3"), eta=eta),
            "D3-click": ClickPattern.of(("2", SILENT, "D2"), ("3", CLICK, "D3"), eta=eta),
        },
        targets=_bell_targets(("1", "4")),
        detectors=(("D2", "2"), ("D3", "3")),
    )


def run_scheme_b(epsilon: float, eta: float = 1.0, order: int = 1, variant: str = "ubs", tau: complex = None) -> ProtocolReport:
    setup = scheme_b_setup(epsilon, eta, order, variant, tau)
    state = setup.final_state()
    outcomes = evaluate_setup(setup, state)
    events = [summarize_event(name, outcome, setup.targets) for name, outcome in outcomes.items()]

    extras = {"event_bell_mapping": _favored(events)}
    if tau is None and eta == 1.0:
        extras["closed_form_fidelity"] = 1.0 / (1.0 + epsilon ** 2 / 2.0)
    return ProtocolReport(
        "B",
        {"epsilon": epsilon, "eta": eta, "order": order, "variant": variant,
         "tau": None if tau is None else _param(tau)},
        events,
        coincidences=coincidence_table(state, list(setup.detectors), eta),
        extras=extras,
        setup=setup.describe(),
    )


# ---------------------- ANALISI DELLA POST-SELEZIONE ----------------------

def polarization_targets() -> dict[str, FockKet]:
    """Stati di Bell di polarizzazione (|H>_1|V>_4 +- |V>_1|H>_4)/sqrt(2) sui modi (1H, 1V, 4H, 4V)."""
    register = ModeRegister(POLARIZATION_KEPT, 1)
    r = 1.0 / math.sqrt(2.0)
    return {
        "psi+": FockKet.from_terms(register, {(1, 0, 0, 1): r, (0, 1, 1, 0): r}),
        "psi-": FockKet.from_terms(register, {(1, 0, 0, 1): r, (0, 1, 1, 0): -r}),
    }


def polarization_setup(eta: float = 1.0, y_weight: float = 1.0) -> Setup:
    _check_eta(eta)
    return Setup(
        "postselect-pol",
        polarization_double_pass(y_weight),
        steps=(
            OpticalStep(balanced_bs(), ("2H", "3H")),
            OpticalStep(balanced_bs(), ("2V", "3V")),
        ),
        events={
            "D2&D3": ClickPattern.of((("2H", "2V"), CLICK, "D2"), (("3H", "3V"), CLICK, "D3"), eta=eta),
        },
        targets=polarization_targets(),
        detectors=(("D2", ("2H", "2V")), ("D3", ("3H", "3V"))),
    )


def analyze_polarization_postselection(eta: float = 1.0, y_weight: float = 1.0) -> ProtocolReport:
    """
    Sorgente a doppio passaggio in polarizzazione, misura di Bell sui fasci 2 e 3
    (beam splitter bilanciato su ciascuna polarizzazione, rivelatori a secchio D2 e D3),
    condizionamento sulla coincidenza D2 e D3.
    """
    setup = polarization_setup(eta, y_weight)
    state = setup.final_state()
    outcome = evaluate_setup(setup, state)["D2&D3"]
    summary = summarize_event("D2&D3", outcome, setup.targets)

    empty = None
    if not outcome.impossible:
        empty = outcome.ensemble.weight_where(lambda occ: occ[0] + occ[1] == 0 or occ[2] + occ[3] == 0)
    return ProtocolReport(
        "postselect-pol",
        {"eta": eta, "y_weight": y_weight},
        [summary],
        coincidences=coincidence_table(state, list(setup.detectors), eta),
        extras={"impossible": outcome.impossible, "empty_beam_weight": empty, "target": "psi-"},
        setup=setup.describe(),
        notes=["rivelatori D2 e D3 a soglia su entrambe le polarizzazioni dei fasci di uscita 2 e 3"],
    )


def vacuum_one_photon_setup(eta: float = 1.0) -> Setup:
    _check_eta(eta)
    return Setup(
        "postselect-vac",
        vacuum_one_photon_postbs(),
        events={"click": ClickPattern.of(("2'", CLICK, "D"), eta=eta)},
        traced=("3'",),
        targets=_bell_targets(("1", "4")),
        detectors=(("D", "2'"),),
    )


def analyze_vacuum_one_photon(eta: float = 1.0) -> ProtocolReport:
    """Condizionamento sul click del rivelatore a soglia sul fascio 2'; il fascio 3' viene scartato."""
    setup = vacuum_one_photon_setup(eta)
    outcome = evaluate_setup(setup)["click"]
    summary = summarize_event("click", outcome, setup.targets)

    vacuum_weight = None
    if not outcome.impossible:
        vacuum_weight = outcome.ensemble.weight_where(lambda occ: sum(occ) == 0)

    # rivelatore ideale che seleziona esattamente un fotone: esiste solo nell'oracolo denso,
    # che qui calcola una grandezza del report e non fa da verifica
    resolved = number_resolving_measure(DenseState.initial(setup.initial), "2'", 1)
    resolved = dense_trace_out(resolved, setup.traced)
    return ProtocolReport(
        "postselect-vac",
        {"eta": eta},
        [summary],
        coincidences=coincidence_table(setup.initial, list(setup.detectors), eta),
        extras={
            "impossible": outcome.impossible,
            "vacuum_weight": vacuum_weight,
            "number_resolving_probability": resolved.probability,
            "number_resolving_fidelity": dense_fidelity(resolved, setup.targets["psi+"]),
        },
        setup=["stato dopo il beam splitter, rivelatore sul fascio 2'"],
    )
