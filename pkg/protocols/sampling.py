import logging

import numpy as np
import pandas as pd

import config
from protocols.report import ProtocolReport

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ["outcome", "probability", "counts", "frequency"]


def outcome_distribution(report: ProtocolReport) -> pd.DataFrame:
    """
    Distribuzione esatta degli esiti del report: la tabella delle coincidenze se presente,
    altrimenti gli eventi più il resto ("other") quando la loro somma è minore di 1.
    """
    if report.coincidences is not None:
        table = report.coincidences
        detectors = [c for c in table.columns if c != "probability"]
        labels = table[detectors].apply(
            lambda row: ",".join(f"{d}={row[d]}" for d in detectors), axis=1
        )
        return pd.DataFrame({"outcome": labels, "probability": table["probability"].astype(float)})

    rows = [{"outcome": e.name, "probability": e.probability} for e in report.events]
    remainder = 1.0 - sum(r["probability"] for r in rows)
    if remainder > config.NORM_TOL:
        rows.append({"outcome": "other", "probability": remainder})
    return pd.DataFrame(rows, columns=["outcome", "probability"])


def sample_run(report: ProtocolReport, shots: int, seed: int = None) -> pd.DataFrame:
    """Conteggi sintetici: campionamento multinomiale con generatore esplicito e seed fissato."""
    if shots < 1:
        raise ValueError(f"shots deve essere almeno 1, ricevuto {shots}")
    dist = outcome_distribution(report).reset_index(drop=True)
    p = np.clip(dist["probability"].to_numpy(dtype=float), 0.0, None)
    if p.sum() <= 0.0:
        raise ValueError("Distribuzione degli esiti nulla: niente da campionare")
    p = p / p.sum()

    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), p)
    logger.debug("Campionati %d colpi su %d esiti (seed=%s)", shots, len(p), seed)

    dist["counts"] = counts.astype(int)
    dist["frequency"] = counts / float(shots)
    return dist[SAMPLE_COLUMNS]
