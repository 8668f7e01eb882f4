import logging

import numpy as np
import pandas as pd

from protocols.report import ProtocolReport

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["param", "value", "event", "probability", "fidelity_psi_plus", "fidelity_psi_minus"]


# ---------------------- FUNZIONI DI PREPARAZIONE DATI ----------------------

def prepare_sweep_frame(param: str, points: list[tuple[float, ProtocolReport]]) -> pd.DataFrame:
    """
    Una riga per (punto della griglia, evento), nell'ordine della griglia
    e, per ciascun punto, nell'ordine degli eventi del report.
    """
    frames = []
    for value, report in points:
        events = report.events_frame()
        events.insert(0, "value", float(value))
        events.insert(0, "param", param)
        frames.append(events)
    if not frames:
        return pd.DataFrame(columns=SWEEP_COLUMNS)
    return pd.concat(frames, ignore_index=True)[SWEEP_COLUMNS]


def prepare_infidelity_series(frame: pd.DataFrame, event: str, column: str) -> pd.DataFrame:
    """Valori del parametro e infedeltà 1 - F per un evento, scartando i punti senza fedeltà."""
    rows = frame[frame["event"] == event].dropna(subset=[column])
    return pd.DataFrame({
        "value": rows["value"].to_numpy(dtype=float),
        "infidelity": 1.0 - rows[column].to_numpy(dtype=float),
    })


def fit_loglog_slope(values, infidelities) -> float:
    """Pendenza della retta log(infedeltà) contro log(valore): esponente di scala."""
    x = np.asarray(values, dtype=float)
    y = np.asarray(infidelities, dtype=float)
    if len(x) < 2 or len(x) != len(y):
        raise ValueError("Servono almeno due punti (stessa lunghezza) per il fit")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("Il fit log-log richiede valori strettamente positivi")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    logger.debug("Pendenza log-log: %.6g su %d punti", slope, len(x))
    return float(slope)
