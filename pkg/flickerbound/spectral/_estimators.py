import math
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.exceptions import DbtValidationError

from flickerbound.spectral._models import SignalWindow, SpectrumSeries, SpectrumUnits
from flickerbound.utility import require_finite


logger = AdapterLogger("FlickerBound")


def trapezoid_weights(n: int, dt: float) -> np.ndarray:
    if n == 1:
        return np.array([dt])
    weights = np.full(n, dt)
    weights[0] = weights[-1] = dt / 2
    return weights


def _trig_kernels(dt: float, n: int, omegas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # phases from |omega| so the sine kernel is exactly odd and the cosine exactly even
    phase = np.abs(omegas)[:, None] * (np.arange(n) * dt)[None, :]
    weights = trapezoid_weights(n, dt)[None, :]
    return np.sign(omegas)[:, None] * weights * np.sin(phase), weights * np.cos(phase)


def window_transforms(window: SignalWindow, omega: float) -> Tuple[float, float]:
    """(Us, Uc): trapezoidal sine and cosine transforms over [0, t_m], in V s."""
    require_finite("omega", omega)
    sin_k, cos_k = _trig_kernels(window.dt, window.n, np.array([float(omega)]))
    return float(sin_k[0] @ window.samples), float(cos_k[0] @ window.samples)


def _frequencies(f_grid: Sequence[float]) -> np.ndarray:
    f = np.atleast_1d(np.asarray(f_grid, dtype=float))
    for value in f:
        require_finite("f", value)
    return f


def _window_powers(ensemble: Iterable[SignalWindow], omegas: np.ndarray) -> np.ndarray:
    """(Us^2 + Uc^2) / t_m per window and frequency; the ensemble is consumed once."""
    shape = None
    rows: List[np.ndarray] = []
    for index, window in enumerate(ensemble):
        if shape is None:
            shape = window.shape
            sin_k, cos_k = _trig_kernels(window.dt, window.n, omegas)
        elif window.shape != shape:
            raise DbtValidationError(
                f"window {index} has (dt, n) = {window.shape}, expected {shape}"
            )
        us = sin_k @ window.samples
        uc = cos_k @ window.samples
        rows.append((us * us + uc * uc) / window.t_m)
    if shape is None:
        raise DbtValidationError("ensemble must contain at least one window")
    return np.array(rows)


def _mean(powers: np.ndarray) -> np.ndarray:
    # fsum: independent of window order
    count = powers.shape[0]
    return np.array([math.fsum(powers[:, j]) / count for j in range(powers.shape[1])])


def power_spectrum(ensemble: Iterable[SignalWindow], f_grid: Sequence[float]) -> SpectrumSeries:
    """Ensemble mean of (Us^2 + Uc^2) / t_m at each grid frequency, in V^2/Hz."""
    f = _frequencies(f_grid)
    powers = _window_powers(ensemble, 2.0 * math.pi * f)
    logger.debug(f"power spectrum over {powers.shape[0]} windows at {f.size} frequencies")
    return SpectrumSeries(f, _mean(powers), SpectrumUnits.VoltsSquaredPerHertz)


def power_estimate(ensemble: Iterable[SignalWindow], f: float) -> float:
    f_grid = _frequencies([f])
    return float(_mean(_window_powers(ensemble, 2.0 * math.pi * f_grid))[0])


def ensemble_statistics(
    ensemble: Iterable[SignalWindow], f_grid: Sequence[float]
) -> Dict[str, List[float]]:
    """Mean power and the standard error of that mean at each frequency."""
    f = _frequencies(f_grid)
    powers = _window_powers(ensemble, 2.0 * math.pi * f)
    count = powers.shape[0]
    std = powers.std(axis=0, ddof=1) if count > 1 else np.full(f.size, math.inf)
    return {"mean": list(_mean(powers)), "std_error": list(std / math.sqrt(count))}
