from dbt_common.exceptions import DbtRuntimeError, DbtValidationError


class QuadratureConvergenceError(DbtRuntimeError):
    CODE = 20001
    MESSAGE = "Quadrature did not converge"

    @property
    def type(self):
        return "Quadrature"


class EmbeddingClippingError(DbtRuntimeError):
    CODE = 20002
    MESSAGE = "Circulant embedding is not positive semidefinite"

    @property
    def type(self):
        return "Embedding"


# numerical failures share an exit code in the CLI; validation errors do not
NumericalFailure = (QuadratureConvergenceError, EmbeddingClippingError)

__all__ = [
    "DbtValidationError",
    "EmbeddingClippingError",
    "NumericalFailure",
    "QuadratureConvergenceError",
]
