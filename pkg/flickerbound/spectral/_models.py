from dataclasses import dataclass, field
import math
from typing import Iterable, Tuple, Union

import numpy as np

from dbt_common.dataclass_schema import StrEnum
from dbt_common.exceptions import DbtValidationError

from flickerbound.utility import require_finite, require_positive


ArrayLike = Union[float, np.ndarray]


class SpectrumUnits(StrEnum):
    VoltsSquaredPerHertz = "V^2/Hz"
    Dimensionless = "dimensionless"


@dataclass(frozen=True)
class SpectrumSeries:
    f_grid: np.ndarray
    values: np.ndarray
    units: SpectrumUnits = SpectrumUnits.VoltsSquaredPerHertz

    def __post_init__(self):
        f_grid = np.asarray(self.f_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if f_grid.ndim != 1 or f_grid.shape != values.shape:
            raise DbtValidationError(
                f"f_grid and values must be 1-d and of equal length, "
                f"received shapes {f_grid.shape} and {values.shape}"
            )
        if f_grid.size > 1 and not np.all(np.diff(f_grid) > 0):
            raise DbtValidationError("f_grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DbtValidationError("spectrum values must be finite")
        object.__setattr__(self, "f_grid", f_grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "units", SpectrumUnits(self.units))

    def __len__(self) -> int:
        return int(self.f_grid.size)

    def restricted(self, f_low: float, f_high: float) -> "SpectrumSeries":
        mask = (self.f_grid >= f_low) & (self.f_grid <= f_high)
        return SpectrumSeries(self.f_grid[mask], self.values[mask], self.units)


@dataclass(frozen=True)
class SignalWindow:
    """Samples of Delta U(t_i) at t_i = i * dt, i = 0 .. n - 1; t_m = n * dt."""

    dt: float
    samples: np.ndarray

    def __post_init__(self):
        require_positive("dt", self.dt)
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise DbtValidationError(
                f"a signal window needs at least 2 samples, received shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise DbtValidationError("signal samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def t_m(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    @property
    def shape(self) -> Tuple[float, int]:
        return (self.dt, self.n)


class CovarianceModel:
    """Stationary autocovariance S(tau), symmetric in tau by construction."""

    # whether circulant-embedding synthesis may draw from this model
    synthesizable: bool = True

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        raise NotImplementedError("`evaluate()` is not implemented for this covariance model")

    def __call__(self, tau: ArrayLike) -> np.ndarray:
        return self.evaluate(np.abs(np.asarray(tau, dtype=float)))

    def spectrum(self, omega: ArrayLike) -> np.ndarray:
        """Infinite-window transform: integral of S(tau) exp(i omega tau) over the real line."""
        raise NotImplementedError("`spectrum()` is not implemented for this covariance model")

    def windowed_spectrum(self, omega: ArrayLike, t_m: float) -> np.ndarray:
        """Closed form of the triangular-window transform, where one exists."""
        raise NotImplementedError(
            "`windowed_spectrum()` is not implemented for this covariance model"
        )


@dataclass(frozen=True)
class OrnsteinUhlenbeck(CovarianceModel):
    """S(tau) = variance * exp(-|tau| / correlation_time); variance in V^2, time in s."""

    variance: float
    correlation_time: float

    def __post_init__(self):
        require_positive("variance", self.variance)
        require_positive("correlation_time", self.correlation_time)

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        return self.variance * np.exp(-tau / self.correlation_time)

    def spectrum(self, omega: ArrayLike) -> np.ndarray:
        wt = np.asarray(omega, dtype=float) * self.correlation_time
        return 2.0 * self.variance * self.correlation_time / (1.0 + wt * wt)

    def windowed_spectrum(self, omega: ArrayLike, t_m: float) -> np.ndarray:
        z = 1.0 / self.correlation_time - 1j * np.asarray(omega, dtype=float)
        decay = np.exp(-z * t_m)
        one_sided = (1.0 - decay) / z - (1.0 - decay * (1.0 + z * t_m)) / (z * z * t_m)
        return 2.0 * self.variance * one_sided.real


@dataclass(frozen=True)
class LogCovariance(CovarianceModel):
    """S(tau) = ln(a + (tau / tau0)^2); a dimensionless, tau0 in s.

    Only a formal example: S(0) = ln a can have any sign, so it is never handed
    to the stochastic synthesizer.
    """

    a: float
    tau0: float
    synthesizable = False

    def __post_init__(self):
        require_positive("a", self.a)
        require_positive("tau0", self.tau0)

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        ratio = tau / self.tau0
        return np.log(self.a + ratio * ratio)

    def spectrum(self, omega: ArrayLike) -> np.ndarray:
        w = np.abs(np.asarray(omega, dtype=float))
        with np.errstate(divide="ignore"):
            return -2.0 * math.pi / w * np.exp(-math.sqrt(self.a) * self.tau0 * w)


@dataclass(frozen=True)
class SumCovariance(CovarianceModel):
    """Sum of component models; the empty sum is the zero covariance."""

    components: Tuple[CovarianceModel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def synthesizable(self) -> bool:  # type: ignore[override]
        return all(c.synthesizable for c in self.components)

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        total = np.zeros_like(tau, dtype=float)
        for component in self.components:
            total = total + component.evaluate(tau)
        return total

    def spectrum(self, omega: ArrayLike) -> np.ndarray:
        total = np.zeros_like(np.asarray(omega, dtype=float))
        for component in self.components:
            total = total + component.spectrum(omega)
        return total

    def windowed_spectrum(self, omega: ArrayLike, t_m: float) -> np.ndarray:
        total = np.zeros_like(np.asarray(omega, dtype=float))
        for component in self.components:
            total = total + component.windowed_spectrum(omega, t_m)
        return total


def sum_of(models: Iterable[CovarianceModel]) -> CovarianceModel:
    models = tuple(models)
    if len(models) == 1:
        return models[0]
    return SumCovariance(models)


def require_nonzero_omega(omega: float) -> float:
    require_finite("omega", omega)
    if omega == 0:
        raise DbtValidationError("omega must be non-zero (the spectrum is singular at f = 0)")
    return omega
