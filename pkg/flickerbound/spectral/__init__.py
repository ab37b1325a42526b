from flickerbound.spectral._models import (
    CovarianceModel,
    LogCovariance,
    OrnsteinUhlenbeck,
    SignalWindow,
    SpectrumSeries,
    SpectrumUnits,
    SumCovariance,
    sum_of,
)
from flickerbound.spectral._estimators import (
    ensemble_statistics,
    power_estimate,
    power_spectrum,
    trapezoid_weights,
    window_transforms,
)
from flickerbound.spectral._quadrature import QuadratureRule, half_period_edges
from flickerbound.spectral._sigma import (
    KernelResiduals,
    SigmaResult,
    kernel_asymptotics,
    sigma_of_f,
    sigma_two_term,
    sinc_tail,
)
