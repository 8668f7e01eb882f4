import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import argparse
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

import config
from oracle.verify import verify_setup
from protocols import schemes
from protocols.analysis import prepare_sweep_frame
from protocols.report import ProtocolReport, clean_values
from protocols.sampling import sample_run
from protocols.setups import Setup

logger = logging.getLogger(__name__)

SCHEMES = ("scheme-a", "scheme-b", "theta", "bell-check", "postselect-pol", "postselect-vac", "verify-phase")
FORMATS = ("json", "csv", "table")
SWEEPABLE = ("tau", "tau2", "epsilon", "eta", "theta", "y_weight")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3


class VerificationError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    scheme: str
    tau: float = None
    tau2: float = None
    epsilon: float = config.DEFAULT_EPSILON
    eta: float = config.DEFAULT_ETA
    theta: float = config.DEFAULT_THETA
    order: int = config.DEFAULT_ORDER
    variant: str = "ubs"
    y_weight: float = 1.0
    single_pair: bool = False
    shots: int = None
    seed: int = config.DEFAULT_SEED
    fmt: str = "json"
    verify: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"Schema sconosciuto: {self.scheme!r}")
        if self.fmt not in FORMATS:
            raise ValueError(f"Formato sconosciuto: {self.fmt!r}")
        if self.tau is not None and self.tau2 is not None:
            raise ValueError("Specificare --tau oppure --tau2, non entrambi")
        if self.tau2 is not None and self.tau2 < 0.0:
            raise ValueError(f"tau2 deve essere non negativo, ricevuto {self.tau2}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots deve essere almeno 1, ricevuto {self.shots}")

    def spdc_tau(self, default: bool = True) -> float:
        """Ampiezza tau; senza --tau/--tau2 usa |tau|^2 di default (o None se default=False)."""
        if self.tau is not None:
            return self.tau
        if self.tau2 is not None:
            return math.sqrt(self.tau2)
        return math.sqrt(config.DEFAULT_TAU2) if default else None


# ---------------------- COSTRUZIONE DEI REPORT ----------------------

def build_report(cfg: RunConfig) -> ProtocolReport:
    if cfg.scheme == "scheme-a":
        return schemes.run_scheme_a(cfg.spdc_tau(), cfg.eta, cfg.order, cfg.single_pair)
    if cfg.scheme == "verify-phase":
        return schemes.run_phase_verification(cfg.spdc_tau(), cfg.eta, cfg.order, cfg.single_pair)
    if cfg.scheme == "scheme-b":
        return schemes.run_scheme_b(cfg.epsilon, cfg.eta, cfg.order, cfg.variant, cfg.spdc_tau(default=False))
    if cfg.scheme == "theta":
        return schemes.run_theta_swapping(cfg.theta)
    if cfg.scheme == "bell-check":
        return schemes.bell_decomposition_check()
    if cfg.scheme == "postselect-pol":
        return schemes.analyze_polarization_postselection(cfg.eta, cfg.y_weight)
    return schemes.analyze_vacuum_one_photon(cfg.eta)


def build_setup(cfg: RunConfig) -> Setup:
    """Setup ottico corrispondente allo schema, valutato anche dall'oracolo con --verify."""
    if cfg.scheme == "scheme-a":
        return schemes.scheme_a_setup(cfg.spdc_tau(), cfg.eta, cfg.order, cfg.single_pair)
    if cfg.scheme == "verify-phase":
        return schemes.phase_verification_setup(cfg.spdc_tau(), cfg.eta, cfg.order, cfg.single_pair)
    if cfg.scheme == "scheme-b":
        return schemes.scheme_b_setup(cfg.epsilon, cfg.eta, cfg.order, cfg.variant, cfg.spdc_tau(default=False))
    if cfg.scheme == "theta":
        return schemes.theta_setup(cfg.theta)
    if cfg.scheme == "bell-check":
        return schemes.bell_check_setup()
    if cfg.scheme == "postselect-pol":
        return schemes.polarization_setup(cfg.eta, cfg.y_weight)
    return schemes.vacuum_one_photon_setup(cfg.eta)


def _verify(cfg: RunConfig):
    problems = verify_setup(build_setup(cfg))
    if problems:
        raise VerificationError(f"{len(problems)} discrepanze tra motore sparso e oracolo: {problems[0]}")


# ---------------------- FORMATTAZIONE ----------------------

def _format_float(value) -> str:
    return config.FLOAT_FORMAT % value


def _csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n")


def _table(frame: pd.DataFrame) -> str:
    return frame.to_string(index=False, float_format=_format_float, na_rep="-") + "\n"


def render(report: ProtocolReport, fmt: str, samples: pd.DataFrame = None) -> str:
    if fmt == "json":
        data = report.to_dict()
        if samples is not None:
            data["samples"] = clean_values(samples.to_dict(orient="records"))
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return _csv(report.events_frame())

    parts = [f"schema: {report.scheme}", _table(report.events_frame())]
    if report.coincidences is not None:
        parts += ["coincidenze:", _table(report.coincidences)]
    if samples is not None:
        parts += ["campionamento:", _table(samples)]
    return "\n".join(parts)


# ---------------------- ESECUZIONE ----------------------

def run(cfg: RunConfig) -> str:
    """Calcola il report (con verifica e campionamento opzionali) e restituisce l'output testuale."""
    report = build_report(cfg)
    if cfg.verify:
        _verify(cfg)
    samples = sample_run(report, cfg.shots, cfg.seed) if cfg.shots else None
    return render(report, cfg.fmt, samples)


def sweep_values(start: float, stop: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError(f"Intervallo vuoto: steps deve essere almeno 1, ricevuto {steps}")
    return np.linspace(start, stop, steps)


def sweep(cfg: RunConfig, param: str, start: float, stop: float, steps: int, jobs: int = 1) -> str:
    """Valuta la griglia (eventualmente in parallelo) ed emette le righe CSV nell'ordine della griglia."""
    if param not in SWEEPABLE:
        raise ValueError(f"Parametro non variabile: {param!r} (ammessi: {', '.join(SWEEPABLE)})")
    values = [float(v) for v in sweep_values(start, stop, steps)]
    configs = [replace(cfg, **{param: v}) for v in values]

    def evaluate(point: RunConfig) -> ProtocolReport:
        if point.verify:
            _verify(point)
        return build_report(point)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        reports = list(pool.map(evaluate, configs))
    logger.info("Sweep di %s: %d punti", param, len(values))
    return _csv(prepare_sweep_frame(param, list(zip(values, reports))))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swap_cli",
        description="Simulatore in spazio di Fock degli schemi di entanglement swapping",
    )
    parser.add_argument("scheme", choices=SCHEMES)
    tau = parser.add_mutually_exclusive_group()
    tau.add_argument("--tau", type=float, help="Ampiezza tau della sorgente SPDC")
    tau.add_argument("--tau2", type=float, help="|tau|^2 della sorgente SPDC (default %g)" % config.DEFAULT_TAU2)
    parser.add_argument("--epsilon", type=float, default=config.DEFAULT_EPSILON)
    parser.add_argument("--eta", type=float, default=config.DEFAULT_ETA, help="Efficienza dei rivelatori")
    parser.add_argument("--theta", type=float, default=config.DEFAULT_THETA)
    parser.add_argument("--order", type=int, default=config.DEFAULT_ORDER, help="Ordine del troncamento in tau")
    parser.add_argument("--variant", choices=("ubs", "pbs"), default="ubs")
    parser.add_argument("--y-weight", type=float, default=1.0, dest="y_weight")
    parser.add_argument("--single-pair", action="store_true", dest="single_pair",
                        help="Tiene solo il settore con al più una coppia")
    parser.add_argument("--shots", type=int, nargs="?", const=config.DEFAULT_SHOTS,
                        help="Campionamento sintetico dei conteggi (default %d colpi)" % config.DEFAULT_SHOTS)
    parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    parser.add_argument("--format", choices=FORMATS, default="json", dest="fmt")
    parser.add_argument("--verify", action="store_true", help="Confronto con l'oracolo denso")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--param", choices=SWEEPABLE, help="Parametro da variare (sweep, output CSV)")
    parser.add_argument("--from", type=float, dest="start")
    parser.add_argument("--to", type=float, dest="stop")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--jobs", type=int, default=1, help="Thread per lo sweep")
    return parser


def main(argv: list[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.LOG_LEVEL,
        format=config.LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )

    try:
        cfg = RunConfig(
            scheme=args.scheme, tau=args.tau, tau2=args.tau2, epsilon=args.epsilon, eta=args.eta,
            theta=args.theta, order=args.order, variant=args.variant, y_weight=args.y_weight,
            single_pair=args.single_pair, shots=args.shots, seed=args.seed, fmt=args.fmt,
            verify=args.verify,
        )
        if args.param is not None:
            if args.start is None or args.stop is None or args.steps is None:
                parser.error("--param richiede --from, --to e --steps")
            output = sweep(cfg, args.param, args.start, args.stop, args.steps, args.jobs)
        else:
            output = run(cfg)
    except VerificationError as e:
        print(f"Verifica fallita: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as e:
        print(f"Errore: {e}", file=sys.stderr)
        return EXIT_USAGE

    sys.stdout.write(output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
