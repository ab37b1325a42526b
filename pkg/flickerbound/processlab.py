"""Stationary Gaussian test signals with a prescribed covariance or 1/f^gamma spectrum."""
from dataclasses import dataclass
import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.dataclass_schema import StrEnum
from dbt_common.exceptions import DbtValidationError

from flickerbound.exceptions import EmbeddingClippingError
from flickerbound.spectral import CovarianceModel, SignalWindow, SpectrumSeries
from flickerbound.utility import require_finite, require_positive, require_seed


logger = AdapterLogger("FlickerBound")

MIN_SAMPLES = 64
MAX_CLIPPED_FRACTION = 0.01
MIN_FIT_POINTS = 8


class SynthesisKind(StrEnum):
    Covariance = "covariance"
    PowerLaw = "power-law"


@dataclass(frozen=True)
class SynthesisSpec:
    kind: SynthesisKind
    n: int
    dt: float
    seed: int
    model: Optional[CovarianceModel] = None
    gamma: float = 1.0
    f_low: Optional[float] = None
    f_high: Optional[float] = None

    def __post_init__(self):
        if self.n < MIN_SAMPLES or self.n & (self.n - 1):
            raise DbtValidationError(f"n must be a power of two >= {MIN_SAMPLES}, received: {self.n}")
        require_positive("dt", self.dt)
        require_seed(self.seed)

        if self.kind == SynthesisKind.Covariance:
            if self.model is None:
                raise DbtValidationError("model is required for covariance synthesis")
            if not self.model.synthesizable:
                raise DbtValidationError(
                    f"{type(self.model).__name__} is not a valid covariance for synthesis"
                )
            return

        require_finite("gamma", self.gamma)
        if not 0.0 <= self.gamma <= 2.0:
            raise DbtValidationError(f"gamma must lie in [0, 2], received: {self.gamma}")
        nyquist = 1.0 / (2.0 * self.dt)
        f_high = nyquist if self.f_high is None else self.f_high
        if self.f_low is None:
            raise DbtValidationError("f_low is required for power-law synthesis")
        require_positive("f_low", self.f_low)
        require_positive("f_high", f_high)
        if not self.f_low < f_high <= nyquist * (1 + 1e-12):
            raise DbtValidationError(
                f"need 0 < f_low < f_high <= 1/(2 dt) = {nyquist:g} Hz, "
                f"received f_low={self.f_low}, f_high={f_high}"
            )
        object.__setattr__(self, "f_high", f_high)

    @classmethod
    def covariance(cls, model: CovarianceModel, n: int, dt: float, seed: int) -> "SynthesisSpec":
        return cls(kind=SynthesisKind.Covariance, n=n, dt=dt, seed=seed, model=model)

    @classmethod
    def power_law(
        cls,
        gamma: float,
        f_low: float,
        n: int,
        dt: float,
        seed: int,
        f_high: Optional[float] = None,
    ) -> "SynthesisSpec":
        return cls(
            kind=SynthesisKind.PowerLaw,
            n=n,
            dt=dt,
            seed=seed,
            gamma=gamma,
            f_low=f_low,
            f_high=f_high,
        )

    @property
    def t_m(self) -> float:
        return self.n * self.dt


def power_law_target(spec: SynthesisSpec, f: Sequence[float]) -> np.ndarray:
    """Two-sided target PSD max(|f|, f_low)^-gamma, zero above f_high; V^2/Hz."""
    freq = np.abs(np.asarray(f, dtype=float))
    target = np.maximum(freq, spec.f_low) ** (-spec.gamma)
    return np.where(freq > spec.f_high, 0.0, target)


@dataclass(frozen=True)
class Embedding:
    """Square roots of the clipped circulant eigenvalues, scaled by 1/sqrt(2n)."""

    amplitudes: np.ndarray
    clipped_fraction: float


def circulant_embedding(model: CovarianceModel, n: int, dt: float) -> Embedding:
    lags = np.arange(n + 1) * dt
    c = model(lags)
    row = np.concatenate([c, c[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real
    total = float(np.abs(eigenvalues).sum())
    negative = float(-eigenvalues[eigenvalues < 0].sum())
    clipped_fraction = negative / total if total > 0 else 0.0

    if clipped_fraction > MAX_CLIPPED_FRACTION:
        raise EmbeddingClippingError(
            f"clipped {clipped_fraction:.3%} of the embedding spectral mass "
            f"(limit {MAX_CLIPPED_FRACTION:.0%}); min eigenvalue {eigenvalues.min():.3g}, "
            f"n={n}, dt={dt}"
        )
    if clipped_fraction > 0:
        logger.warning(f"circulant embedding clipped {clipped_fraction:.2e} of its spectral mass")
    else:
        logger.debug(f"circulant embedding of size {row.size} is nonnegative")
    amplitudes = np.sqrt(np.clip(eigenvalues, 0.0, None) / row.size)
    return Embedding(amplitudes=amplitudes, clipped_fraction=clipped_fraction)


def _shaping_filter(spec: SynthesisSpec) -> np.ndarray:
    f = np.fft.rfftfreq(spec.n, spec.dt)
    return np.sqrt(power_law_target(spec, f) / spec.dt)


def _draw(spec: SynthesisSpec, rng: np.random.Generator, shape: np.ndarray) -> np.ndarray:
    if spec.kind == SynthesisKind.Covariance:
        m = shape.size
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        return np.fft.fft(shape * z).real[: spec.n]
    white = rng.standard_normal(spec.n)
    return np.fft.irfft(np.fft.rfft(white) * shape, spec.n)


def _shape(spec: SynthesisSpec) -> np.ndarray:
    if spec.kind == SynthesisKind.Covariance:
        assert spec.model is not None  # keeping mypy happy
        return circulant_embedding(spec.model, spec.n, spec.dt).amplitudes
    return _shaping_filter(spec)


def synthesize(spec: SynthesisSpec) -> SignalWindow:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    return SignalWindow(spec.dt, _draw(spec, rng, _shape(spec)))


def iter_ensemble(spec: SynthesisSpec, count: int) -> Iterator[SignalWindow]:
    """count windows, lazily; window k draws from the substream SeedSequence(seed, spawn_key=(k,))."""
    if count < 1:
        raise DbtValidationError(f"count must be at least 1, received: {count}")
    shape = _shape(spec)

    def windows() -> Iterator[SignalWindow]:
        for k in range(count):
            rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(k,)))
            yield SignalWindow(spec.dt, _draw(spec, rng, shape))

    return windows()


def synthesize_ensemble(spec: SynthesisSpec, count: int) -> List[SignalWindow]:
    return list(iter_ensemble(spec, count))


def slope_fit(spectrum: SpectrumSeries, f_low: float, f_high: float) -> float:
    """Negated least-squares slope of log S against log f over [f_low, f_high]."""
    require_positive("f_low", f_low)
    if not f_high > f_low:
        raise DbtValidationError(f"f_high must exceed f_low, received {f_low}..{f_high}")
    part = spectrum.restricted(f_low, f_high)
    if len(part) < MIN_FIT_POINTS:
        raise DbtValidationError(
            f"need at least {MIN_FIT_POINTS} grid points in [{f_low}, {f_high}] Hz, found {len(part)}"
        )
    if np.any(part.values <= 0):
        raise DbtValidationError("spectrum values must be positive in the fit range")
    slope, _ = np.polyfit(np.log(part.f_grid), np.log(part.values), 1)
    return float(-slope)


def log_grid(f_low: float, f_high: float, count: int) -> np.ndarray:
    return np.geomspace(f_low, f_high, count)


def excess_kurtosis(samples: np.ndarray) -> Tuple[float, float]:
    """(excess kurtosis, its large-sample standard error sqrt(24/n))."""
    x = np.asarray(samples, dtype=float).ravel()
    return float(stats.kurtosis(x, fisher=True)), math.sqrt(24.0 / x.size)


def half_split_moments(samples: np.ndarray) -> Dict[str, float]:
    x = np.asarray(samples, dtype=float)
    first, second = np.array_split(x, 2, axis=-1)
    return {
        "mean_first": float(first.mean()),
        "mean_second": float(second.mean()),
        "var_first": float(first.var()),
        "var_second": float(second.var()),
    }


def sample_autocovariance(ensemble: Sequence[SignalWindow], lag: int) -> Tuple[float, float]:
    """Ensemble mean of the per-window lagged product average (known zero mean) and its standard error."""
    if lag < 0:
        raise DbtValidationError(f"lag must be non-negative, received: {lag}")
    per_window = []
    for window in ensemble:
        x = window.samples
        if lag >= x.size:
            raise DbtValidationError(f"lag {lag} exceeds the window length {x.size}")
        per_window.append(float(np.mean(x[: x.size - lag] * x[lag:])))
    values = np.array(per_window)
    if values.size < 2:
        return float(values.mean()), math.inf
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))
