"""Panel quadrature for oscillatory integrals on [0, upper].

Panels start at half-period boundaries of exp(i omega tau) and are bisected
until a 16-point Gauss-Legendre rule agrees with its two-halves refinement.
Every rule built here has at least 32 nodes per oscillation period.
"""
from dataclasses import dataclass
import math
from typing import Callable, List, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from dbt.adapters.events.logging import AdapterLogger

from flickerbound.exceptions import QuadratureConvergenceError


logger = AdapterLogger("FlickerBound")

Integrand = Callable[[np.ndarray], np.ndarray]

GAUSS_ORDER = 16
DEFAULT_RTOL = 1e-12
MAX_PASSES = 40

_NODES, _WEIGHTS = leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    panels: int

    def integrate(self, values: np.ndarray) -> float:
        return float(math.fsum(self.weights * values))

    def mirrored(self) -> "QuadratureRule":
        """The same rule reflected onto [-upper, upper]."""
        return QuadratureRule(
            nodes=np.concatenate([-self.nodes[::-1], self.nodes]),
            weights=np.concatenate([self.weights[::-1], self.weights]),
            panels=2 * self.panels,
        )


def half_period_edges(omega: float, upper: float) -> np.ndarray:
    step = math.pi / abs(omega)
    count = int(upper // step)
    if count == 0:
        return np.array([0.0, upper])
    edges = np.arange(count + 1) * step
    if upper - edges[-1] > 1e-9 * step:
        edges = np.append(edges, upper)
    else:
        edges[-1] = upper
    return edges


def _panel_nodes(lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _NODES[None, :]
    weights = half[:, None] * _WEIGHTS[None, :]
    return nodes, weights


def _panel_sums(integrand: Integrand, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = _panel_nodes(lo, hi)
    values = integrand(nodes)
    return (weights * values).sum(axis=1), (weights * np.abs(values)).sum(axis=1)


def refine(
    integrand: Integrand,
    edges: np.ndarray,
    rtol: float = DEFAULT_RTOL,
    max_passes: int = MAX_PASSES,
) -> QuadratureRule:
    """Adaptive bisection of the starting panels.

    A panel is accepted when its coarse and bisected sums differ by less than
    rtol times the larger of its own absolute mass and its width-share of the
    total absolute mass.
    """
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    span = float(edges[-1] - edges[0])

    _, mass = _panel_sums(integrand, lo, hi)
    total_mass = float(mass.sum())

    accepted_lo: List[np.ndarray] = []
    accepted_hi: List[np.ndarray] = []
    for passes in range(max_passes):
        mid = 0.5 * (lo + hi)
        coarse, _ = _panel_sums(integrand, lo, hi)
        left, left_mass = _panel_sums(integrand, lo, mid)
        right, right_mass = _panel_sums(integrand, mid, hi)
        local = left_mass + right_mass
        share = total_mass * (hi - lo) / span
        ok = np.abs(left + right - coarse) <= rtol * np.maximum(local, share)

        accepted_lo.append(lo[ok])
        accepted_hi.append(hi[ok])
        bad = ~ok
        if not bad.any():
            logger.debug(f"quadrature converged after {passes + 1} passes")
            break
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
    else:
        raise QuadratureConvergenceError(
            f"{lo.size} panels still unresolved after {max_passes} bisection passes"
        )

    lo = np.concatenate(accepted_lo)
    hi = np.concatenate(accepted_hi)
    order = np.argsort(lo)
    nodes, weights = _panel_nodes(lo[order], hi[order])
    return QuadratureRule(nodes=nodes.ravel(), weights=weights.ravel(), panels=int(lo.size))


def oscillatory_rule(
    integrand: Integrand, omega: float, upper: float, rtol: float = DEFAULT_RTOL
) -> QuadratureRule:
    return refine(integrand, half_period_edges(omega, upper), rtol=rtol)


def log_singular_integral(
    phi: Integrand, omega: float, upper: float, rtol: float = DEFAULT_RTOL
) -> Tuple[float, QuadratureRule]:
    """Integral of ln(tau) * phi(tau) over [0, upper], phi smooth.

    On the first panel [0, h] the phi(0) part is integrated analytically,
    h (ln h - 1), and only ln(tau) (phi(tau) - phi(0)) is left to the rule.
    """
    edges = half_period_edges(omega, upper)
    h = float(edges[1])
    phi0 = float(phi(np.zeros(1))[0])

    def integrand(tau: np.ndarray) -> np.ndarray:
        subtracted = np.where(tau < h, phi0, 0.0)
        return np.log(tau) * (phi(tau) - subtracted)

    rule = refine(integrand, edges, rtol=rtol)
    value = rule.integrate(integrand(rule.nodes)) + phi0 * h * (math.log(h) - 1.0)
    return value, rule
