"""Synthetic ensembles for the analysis tests."""

from typing import Dict, Optional

import numpy as np

from tamedlib.montecarlo.ensemble import Aggregation, FunctionalTrace, PathEnsemble


def make_ensemble(
    times: np.ndarray,
    traces: Dict[str, np.ndarray],
    terminal: Optional[np.ndarray] = None,
    n_diverged: int = 0,
    h: Optional[float] = None,
) -> PathEnsemble:
    """Return a PathEnsemble carrying the given mean traces with zero standard errors."""
    terminal = np.zeros((10, 1)) if terminal is None else terminal
    n_paths = terminal.shape[0]
    diverged = np.zeros(n_paths, dtype=bool)
    diverged[:n_diverged] = True
    built = {
        name: FunctionalTrace(
            name,
            Aggregation.count if name == "negative_count" else Aggregation.mean,
            np.asarray(values, dtype=float),
            np.zeros(len(values)),
            np.full(len(values), n_paths),
        )
        for name, values in traces.items()
    }
    return PathEnsemble(
        times=np.asarray(times, dtype=float),
        terminal=terminal,
        diverged=diverged,
        divergence_index=np.where(diverged, 1, -1),
        traces=built,
        initial=np.zeros_like(terminal),
        h=float(times[1] - times[0]) if h is None else h,
    )
