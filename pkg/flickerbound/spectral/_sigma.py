"""The finite-measurement-time functional Sigma(f) and the kernel residual checks."""
from dataclasses import dataclass
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import sici

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.exceptions import DbtRuntimeError, DbtValidationError

from flickerbound.spectral._models import CovarianceModel, require_nonzero_omega
from flickerbound.spectral._quadrature import (
    DEFAULT_RTOL,
    QuadratureRule,
    log_singular_integral,
    oscillatory_rule,
)
from flickerbound.utility import require_finite, require_positive


logger = AdapterLogger("FlickerBound")

IMAGINARY_RTOL = 1e-9
SINC_CUTOFF_PHASE = 1e3


@dataclass(frozen=True)
class SigmaResult:
    omega: float
    t_m: float
    value: float
    imaginary: float
    direct_term: float
    lag_term: float
    panels: int

    @property
    def two_term(self) -> float:
        """Integral of S(tau) e^{i omega tau} minus (1/t_m) times that of |tau| S(tau) e^{i omega tau}."""
        return self.direct_term - self.lag_term


def _sigma_rule(model: CovarianceModel, omega: float, t_m: float, rtol: float) -> QuadratureRule:
    def integrand(tau: np.ndarray) -> np.ndarray:
        return (1.0 - tau / t_m) * model(tau) * np.cos(omega * tau)

    return oscillatory_rule(integrand, omega, t_m, rtol=rtol).mirrored()


def sigma_two_term(
    model: CovarianceModel, omega: float, t_m: float, rtol: float = DEFAULT_RTOL
) -> SigmaResult:
    """Both forms of Sigma evaluated on one symmetric grid over [-t_m, t_m]."""
    require_nonzero_omega(omega)
    require_positive("t_m", t_m)

    rule = _sigma_rule(model, omega, t_m, rtol)
    tau = rule.nodes
    s = model(tau)
    phase = omega * tau
    cos, sin = np.cos(phase), np.sin(phase)
    triangle = 1.0 - np.abs(tau) / t_m

    value = rule.integrate(triangle * s * cos)
    imaginary = rule.integrate(triangle * s * sin)
    direct = rule.integrate(s * cos)
    lag = rule.integrate(np.abs(tau) * s * cos) / t_m

    scale = max(abs(value), rule.integrate(np.abs(triangle * s)) * 1e-6)
    if abs(imaginary) > IMAGINARY_RTOL * scale:
        raise DbtRuntimeError(
            f"imaginary part of Sigma does not vanish: {imaginary!r} against {value!r}"
        )
    return SigmaResult(
        omega=omega,
        t_m=t_m,
        value=value,
        imaginary=imaginary,
        direct_term=direct,
        lag_term=lag,
        panels=rule.panels,
    )


def sigma_of_f(model: CovarianceModel, omega: float, t_m: float) -> float:
    """Triangular-window transform of S(tau) over [-t_m, t_m]; real by symmetry."""
    return sigma_two_term(model, omega, t_m).value


@dataclass(frozen=True)
class KernelResiduals:
    omega: float
    t_m: float
    a_numeric: float
    b_numeric: float
    a_closed_form: float
    b_closed_form: float
    log_envelope: float
    sign_kernel: float
    sign_kernel_exact: float
    sinc_tau: float
    sinc_cutoff: float
    sinc_truncated: float
    sinc_tail: float

    @property
    def difference(self) -> float:
        return self.a_numeric - self.b_numeric

    @property
    def predicted_limit(self) -> float:
        return -math.pi / abs(self.omega)

    @property
    def limit_residual(self) -> float:
        return self.difference - self.predicted_limit

    @property
    def sign_kernel_residual(self) -> float:
        # the exact value vanishes at whole periods; 2/|omega| is its typical size
        scale = max(abs(self.sign_kernel_exact), 2.0 / abs(self.omega))
        return abs(self.sign_kernel - self.sign_kernel_exact) / scale

    @property
    def sinc_corrected(self) -> float:
        return self.sinc_truncated + self.sinc_tail

    @property
    def sinc_target(self) -> float:
        return math.copysign(math.pi / 2, self.sinc_tau)

    @property
    def sinc_residual(self) -> float:
        return abs(self.sinc_corrected - self.sinc_target)


def _cin(x: float) -> float:
    """Entire cosine integral, the integral of (1 - cos t)/t over [0, x]."""
    if x >= 1.0:
        _, ci = sici(x)
        return float(np.euler_gamma + math.log(x) - ci)
    # power series; gamma + ln x - Ci(x) cancels catastrophically here
    return math.fsum(
        (-1) ** (k + 1) * x ** (2 * k) / (2 * k * math.factorial(2 * k)) for k in range(1, 11)
    )


def _log_kernels_closed_form(omega: float, t_m: float) -> Tuple[float, float, float]:
    # A = int ln|tau| e^{i w tau}, B = (1/t_m) int |tau| ln|tau| e^{i w tau}, both over [-t_m, t_m]
    w = abs(omega)
    x = w * t_m
    si, _ = sici(x)
    s = math.sin(x)
    one_minus_c = 2.0 * math.sin(0.5 * x) ** 2
    log_t = math.log(t_m)
    cin = _cin(x)
    a = 2.0 * log_t * s / w - 2.0 * si / w
    half_b = t_m * log_t * s / w - (log_t * one_minus_c / w - cin / w + one_minus_c / w) / w
    return float(a), float(2.0 * half_b / t_m), 2.0 * log_t * s / w


def sinc_tail(cutoff: float, tau: float) -> float:
    """Two-term asymptotic value of the integral of sin(k tau)/k over k > cutoff."""
    x = cutoff * abs(tau)
    return math.copysign(1.0, tau) * (math.cos(x) / x + math.sin(x) / (x * x))


def kernel_asymptotics(
    omega: float,
    t_m: float,
    sinc_tau: float = 1.0,
    sinc_cutoff: Optional[float] = None,
) -> KernelResiduals:
    require_nonzero_omega(omega)
    require_positive("t_m", t_m)
    require_finite("sinc_tau", sinc_tau)
    if sinc_tau == 0:
        raise DbtValidationError("sinc_tau must be non-zero")
    w = abs(omega)

    # even integrands: twice the half-line integral
    half_a, rule_a = log_singular_integral(lambda tau: np.cos(w * tau), w, t_m)
    half_b, _ = log_singular_integral(lambda tau: tau * np.cos(w * tau), w, t_m)
    a_numeric = 2.0 * half_a
    b_numeric = 2.0 * half_b / t_m
    a_cf, b_cf, envelope = _log_kernels_closed_form(omega, t_m)
    logger.debug(f"log kernels on {rule_a.panels} panels, omega={omega}, t_m={t_m}")

    # sign(tau) e^{i w tau} integrates to i * 2 * (integral of sin over [0, t_m])
    sine_rule = oscillatory_rule(lambda tau: np.sin(w * tau), w, t_m)
    sign_kernel = math.copysign(2.0, omega) * sine_rule.integrate(np.sin(w * sine_rule.nodes))
    sign_exact = 2.0 / omega * (1.0 - math.cos(omega * t_m))

    cutoff = sinc_cutoff if sinc_cutoff is not None else SINC_CUTOFF_PHASE / abs(sinc_tau)
    require_positive("sinc_cutoff", cutoff)

    def sinc(k: np.ndarray) -> np.ndarray:
        return sinc_tau * np.sinc(k * sinc_tau / math.pi)

    sinc_rule = oscillatory_rule(sinc, sinc_tau, cutoff)
    truncated = sinc_rule.integrate(sinc(sinc_rule.nodes))

    return KernelResiduals(
        omega=omega,
        t_m=t_m,
        a_numeric=a_numeric,
        b_numeric=b_numeric,
        a_closed_form=a_cf,
        b_closed_form=b_cf,
        log_envelope=envelope,
        sign_kernel=sign_kernel,
        sign_kernel_exact=sign_exact,
        sinc_tau=sinc_tau,
        sinc_cutoff=cutoff,
        sinc_truncated=truncated,
        sinc_tail=sinc_tail(cutoff, sinc_tau),
    )
