"""Operator-level checks of the uncertainty bound on finite-dimensional systems.

A ToySystem is a density matrix plus a Hermitian operator U(t_i) on the time
grid t_i = t0 + i * dt. The sine and cosine quadratures Us, Uc are built with
trapezoidal weights; t_m = n * dt.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import statistics
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.exceptions import DbtValidationError

from flickerbound.spectral import trapezoid_weights
from flickerbound.utility import require_finite, require_positive, require_seed


logger = AdapterLogger("FlickerBound")

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-12
SLACK_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2)))))


@dataclass(frozen=True)
class ToySystem:
    rho: np.ndarray
    family: np.ndarray
    dt: float
    u0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        family = np.asarray(self.family, dtype=complex)
        require_positive("dt", self.dt)
        require_finite("u0", self.u0)
        require_finite("t0", self.t0)

        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
            raise DbtValidationError(f"rho must be a d x d matrix with d >= 2, received shape {rho.shape}")
        d = rho.shape[0]
        if family.ndim != 3 or family.shape[1:] != (d, d) or family.shape[0] < 1:
            raise DbtValidationError(
                f"family must have shape (n, {d}, {d}) with n >= 1, received {family.shape}"
            )
        if _hermitian_defect(rho) > HERMITIAN_TOL:
            raise DbtValidationError("rho is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise DbtValidationError(f"rho must have unit trace, received {np.trace(rho).real!r}")
        if float(np.linalg.eigvalsh(rho).min()) < -PSD_TOL:
            raise DbtValidationError("rho is not positive semidefinite")
        scale = max(1.0, float(np.max(np.abs(family))))
        if _hermitian_defect(family) > HERMITIAN_TOL * scale:
            raise DbtValidationError("family contains a non-Hermitian U(t_i)")

        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "family", family)

    @property
    def dim(self) -> int:
        return int(self.rho.shape[0])

    @property
    def n(self) -> int:
        return int(self.family.shape[0])

    @property
    def t_m(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) * self.dt

    @property
    def deviations(self) -> np.ndarray:
        """Delta U(t_i) = U(t_i) - U0 * I."""
        return self.family - self.u0 * np.eye(self.dim)

    def expectation(self, operator: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ operator))

    def scaled(self, factor: float) -> "ToySystem":
        return ToySystem(self.rho, self.family * factor, self.dt, self.u0 * factor, self.t0)


def _quadrature_coefficients(sys: ToySystem, omega: float) -> Tuple[np.ndarray, np.ndarray]:
    weights = trapezoid_weights(sys.n, sys.dt)
    phase = abs(omega) * sys.times
    return math.copysign(1.0, omega) * weights * np.sin(phase), weights * np.cos(phase)


def quadrature_operators(sys: ToySystem, omega: float) -> Tuple[np.ndarray, np.ndarray]:
    """(Us, Uc): trapezoidal sine and cosine quadratures of Delta U(t)."""
    require_finite("omega", omega)
    sin_w, cos_w = _quadrature_coefficients(sys, omega)
    deviations = sys.deviations
    return np.einsum("i,iab->ab", sin_w, deviations), np.einsum("i,iab->ab", cos_w, deviations)


@dataclass(frozen=True)
class BoundReport:
    omega: float
    t_m: float
    us_squared: float
    uc_squared: float
    commutator: complex

    @property
    def s_est(self) -> float:
        return (self.us_squared + self.uc_squared) / self.t_m

    @property
    def s_f_est(self) -> float:
        return abs(self.commutator) / self.t_m

    @property
    def slack(self) -> float:
        return self.s_est - self.s_f_est

    @property
    def product_slack(self) -> float:
        return self.us_squared * self.uc_squared - 0.25 * abs(self.commutator) ** 2


def spectrum_and_bound(sys: ToySystem, omega: float) -> BoundReport:
    us, uc = quadrature_operators(sys, omega)
    return BoundReport(
        omega=omega,
        t_m=sys.t_m,
        us_squared=sys.expectation(us @ us).real,
        uc_squared=sys.expectation(uc @ uc).real,
        commutator=sys.expectation(us @ uc - uc @ us),
    )


@dataclass(frozen=True)
class CommutatorCheck:
    lhs: complex
    rhs: complex

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative_residual(self) -> float:
        return self.residual / max(abs(self.lhs), 1.0)


def two_point_expectations(sys: ToySystem) -> np.ndarray:
    """G_ij = tr(rho Delta U(t_i) Delta U(t_j))."""
    d = sys.deviations
    return np.einsum("ab,ibc,jca->ij", sys.rho, d, d, optimize=True)


def commutator_identity(sys: ToySystem, omega: float) -> CommutatorCheck:
    """tr(rho [Us, Uc]) against the double sum of G_ij sin(omega (t_i - t_j))."""
    require_finite("omega", omega)
    us, uc = quadrature_operators(sys, omega)
    lhs = sys.expectation(us @ uc - uc @ us)

    weights = trapezoid_weights(sys.n, sys.dt)
    t = sys.times
    kernel = np.sin(omega * (t[:, None] - t[None, :]))
    rhs = complex(np.sum(np.outer(weights, weights) * two_point_expectations(sys) * kernel))
    return CommutatorCheck(lhs=lhs, rhs=rhs)


def random_density_matrix(rng: np.random.Generator, dim: int, pure: bool = False) -> np.ndarray:
    if pure:
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
    else:
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = m @ m.conj().T
        rho /= np.trace(rho).real
    return (rho + rho.conj().T) / 2


def random_hermitian_family(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    a = rng.normal(size=(n, dim, dim)) + 1j * rng.normal(size=(n, dim, dim))
    return (a + np.conj(np.swapaxes(a, -1, -2))) / 2


def random_system(rng: np.random.Generator, dim: int, n: int, pure: bool = False) -> ToySystem:
    """Ginibre-style rho (or a random pure state) with a random Hermitian family; dt = 1/n."""
    return ToySystem(
        rho=random_density_matrix(rng, dim, pure),
        family=random_hermitian_family(rng, n, dim),
        dt=1.0 / n,
        u0=float(rng.normal()),
    )


def rotating_qubit_system(n: int, dt: float, nu: float, t0: float = 0.0) -> ToySystem:
    """U(t) = cos(nu t) sigma_x + sin(nu t) sigma_y observed in the sigma_z ground state."""
    times = t0 + np.arange(n) * dt
    family = (
        np.cos(nu * times)[:, None, None] * SIGMA_X + np.sin(nu * times)[:, None, None] * SIGMA_Y
    )
    ground = np.array([[0, 0], [0, 1]], dtype=complex)
    return ToySystem(rho=ground, family=family, dt=dt, u0=0.0, t0=t0)


@dataclass(frozen=True)
class SystemCheck:
    index: int
    dim: int
    n: int
    pure: bool
    omega: float
    slack: float
    product_slack: float
    commutator_residual: float
    commutator_real: float
    odd_residual: float

    @property
    def holds(self) -> bool:
        return (
            self.slack >= -SLACK_TOL
            and self.product_slack >= -SLACK_TOL
            and self.commutator_residual <= SLACK_TOL
        )


@dataclass(frozen=True)
class VerificationSummary:
    checks: List[SystemCheck]

    @property
    def count(self) -> int:
        return len(self.checks)

    @property
    def failures(self) -> List[SystemCheck]:
        return [c for c in self.checks if not c.holds]

    @property
    def min_slack(self) -> float:
        return min(c.slack for c in self.checks)

    @property
    def median_slack(self) -> float:
        return statistics.median(c.slack for c in self.checks)

    @property
    def min_product_slack(self) -> float:
        return min(c.product_slack for c in self.checks)

    @property
    def median_product_slack(self) -> float:
        return statistics.median(c.product_slack for c in self.checks)

    @property
    def max_commutator_residual(self) -> float:
        return max(c.commutator_residual for c in self.checks)

    @property
    def max_odd_residual(self) -> float:
        return max(c.odd_residual for c in self.checks)


def _check_one(index: int, seed: int, max_dim: int, max_n: int) -> SystemCheck:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    dim = int(rng.integers(2, max_dim + 1))
    n = int(rng.integers(2, max_n + 1))
    pure = bool(rng.integers(0, 2))
    omega = float(rng.uniform(0.5, 50.0) * rng.choice([-1.0, 1.0]))
    sys = random_system(rng, dim, n, pure)

    bound = spectrum_and_bound(sys, omega)
    identity = commutator_identity(sys, omega)
    mirrored = spectrum_and_bound(sys, -omega)
    return SystemCheck(
        index=index,
        dim=dim,
        n=n,
        pure=pure,
        omega=omega,
        slack=bound.slack,
        product_slack=bound.product_slack,
        commutator_residual=identity.relative_residual,
        commutator_real=abs(bound.commutator.real),
        odd_residual=abs(bound.commutator + mirrored.commutator),
    )


def verify_random_systems(
    count: int,
    seed: int,
    max_dim: int = 6,
    max_n: int = 128,
    workers: Optional[int] = None,
) -> VerificationSummary:
    if count < 1:
        raise DbtValidationError(f"count must be at least 1, received: {count}")
    require_seed(seed)
    if max_dim < 2:
        raise DbtValidationError(f"max_dim must be at least 2, received: {max_dim}")
    if max_n < 2:
        raise DbtValidationError(f"max_n must be at least 2, received: {max_n}")

    def run(index: int) -> SystemCheck:
        return _check_one(index, seed, max_dim, max_n)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            checks = list(pool.map(run, range(count)))
    else:
        checks = [run(index) for index in range(count)]

    summary = VerificationSummary(checks)
    if summary.failures:
        logger.warning(f"{len(summary.failures)} of {count} random systems violate a bound")
    return summary


@dataclass(frozen=True)
class LadderPoint:
    n: int
    t_m: float
    s_est: float
    s_f_est: float


def tm_ladder(
    factory: Callable[[int], ToySystem], omega: float, n_values: Sequence[int]
) -> List[LadderPoint]:
    """Finite-t_m estimates over a ladder of grid sizes; no limit is taken."""
    points = []
    for n in n_values:
        bound = spectrum_and_bound(factory(n), omega)
        points.append(LadderPoint(n=n, t_m=bound.t_m, s_est=bound.s_est, s_f_est=bound.s_f_est))
    return points


def doubling(start: int, steps: int) -> List[int]:
    return [start * 2**k for k in range(steps)]
