"""Self-potential of a rectangular sample and the geometrical factor of the noise floor.

The sample occupies the box [0, l] x [0, w] x [0, a] (length along the current,
then width, then thickness). All lengths are in centimeters.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.dataclass_schema import StrEnum
from dbt_common.exceptions import DbtValidationError

from flickerbound.units import Unit, convert
from flickerbound.utility import require_finite, require_positive, require_seed


logger = AdapterLogger("FlickerBound")

Point = Tuple[float, float, float]

MC_BLOCK_SIZE = 1 << 16
MC_MIN_SAMPLES = 1000
# relative slack when deciding whether a probe sits inside the closed box
_CONTAINMENT_RTOL = 1e-12


@dataclass(frozen=True)
class BoxSample:
    w: float
    l: float  # noqa: E741
    a: float

    def __post_init__(self):
        for name in ("w", "l", "a"):
            require_positive(name, getattr(self, name))

    @classmethod
    def from_micrometers(cls, width_um: float, length_um: float, thickness_nm: float) -> "BoxSample":
        return cls(
            w=convert(width_um, Unit.MICROMETER, Unit.CENTIMETER),
            l=convert(length_um, Unit.MICROMETER, Unit.CENTIMETER),
            a=convert(thickness_nm, Unit.NANOMETER, Unit.CENTIMETER),
        )

    @property
    def volume(self) -> float:
        return self.w * self.l * self.a

    @property
    def extent(self) -> np.ndarray:
        """Edge lengths in coordinate order (x, y, z) = (l, w, a)."""
        return np.array([self.l, self.w, self.a])

    def scaled(self, factor: float) -> "BoxSample":
        return BoxSample(w=self.w * factor, l=self.l * factor, a=self.a * factor)

    def contains(self, p: Sequence[float]) -> bool:
        slack = _CONTAINMENT_RTOL * float(self.extent.max())
        return all(-slack <= c <= e + slack for c, e in zip(p, self.extent))


class ProbePlacement(StrEnum):
    EndEdgeMidpoints = "end-edge-midpoints"
    Explicit = "explicit"


@dataclass(frozen=True)
class ProbePair:
    x1: Point
    x2: Point
    placement: ProbePlacement = ProbePlacement.Explicit
    allow_coincident: bool = False

    def __post_init__(self):
        for name in ("x1", "x2"):
            point = getattr(self, name)
            if len(point) != 3:
                raise DbtValidationError(f"{name} must have three coordinates, received: {point}")
            for c in point:
                require_finite(name, c)
        if tuple(self.x1) == tuple(self.x2) and not self.allow_coincident:
            raise DbtValidationError(
                "x1 and x2 coincide; pass allow_coincident=True for the degenerate pair"
            )

    @classmethod
    def end_edge_midpoints(cls, box: BoxSample) -> "ProbePair":
        """Midpoints of the two end faces x = 0 and x = l, centered in width and thickness."""
        return cls(
            x1=(0.0, box.w / 2, box.a / 2),
            x2=(box.l, box.w / 2, box.a / 2),
            placement=ProbePlacement.EndEdgeMidpoints,
        )

    @classmethod
    def explicit(cls, x1: Point, x2: Point, allow_coincident: bool = False) -> "ProbePair":
        return cls(
            x1=tuple(x1),  # type: ignore[arg-type]
            x2=tuple(x2),  # type: ignore[arg-type]
            placement=ProbePlacement.Explicit,
            allow_coincident=allow_coincident,
        )

    def swapped(self) -> "ProbePair":
        return ProbePair(self.x2, self.x1, self.placement, self.allow_coincident)

    def scaled(self, factor: float) -> "ProbePair":
        return ProbePair(
            tuple(c * factor for c in self.x1),  # type: ignore[arg-type]
            tuple(c * factor for c in self.x2),  # type: ignore[arg-type]
            self.placement,
            self.allow_coincident,
        )


def _coeff_log(coeff: np.ndarray, u: np.ndarray, r: np.ndarray, rest_sq: np.ndarray) -> np.ndarray:
    # coeff * ln(u + r); for u < 0 use u + r = rest_sq / (r - u) to avoid cancellation.
    # Where coeff vanishes the term is defined by its limit, 0.
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(u >= 0, np.log(u + r), np.log(rest_sq / (r - u)))
        term = coeff * value
    return np.where(coeff == 0, 0.0, term)


def _coeff_arctan(sq: np.ndarray, num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # sq * arctan(num / den), 0 in the limit den -> 0 (den carries the factor that sq squares)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = sq * np.arctan(num / den)
    return np.where(den == 0, 0.0, term)


def _prism_kernel(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Antiderivative F with d3F/dxdydz = 1/r, evaluated at corner offsets."""
    r = np.sqrt(x * x + y * y + z * z)
    return (
        _coeff_log(x * y, z, r, x * x + y * y)
        + _coeff_log(y * z, x, r, y * y + z * z)
        + _coeff_log(z * x, y, r, z * z + x * x)
        - 0.5 * _coeff_arctan(x * x, y * z, x * r)
        - 0.5 * _coeff_arctan(y * y, z * x, y * r)
        - 0.5 * _coeff_arctan(z * z, x * y, z * r)
    )


def box_potential(box: BoxSample, p: Sequence[float]) -> float:
    """Phi(p) = integral over the box of d3r / |r - p|, in cm^2.

    Exact eight-corner evaluation of the rectangular-prism potential. The point
    may be inside, on the surface of, or outside the box.
    """
    if len(p) != 3:
        raise DbtValidationError(f"p must have three coordinates, received: {p}")
    for c in p:
        require_finite("p", c)

    lower = np.zeros(3) - np.asarray(p, dtype=float)
    upper = box.extent - np.asarray(p, dtype=float)
    bounds = np.stack([upper, lower])  # index 0 = upper limit, sign +

    i, j, k = np.meshgrid([0, 1], [0, 1], [0, 1], indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    signs = (-1.0) ** (i + j + k)
    values = _prism_kernel(bounds[i, 0], bounds[j, 1], bounds[k, 2])
    return float(math.fsum(signs * values))


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    std_error: float
    samples: int


def _mc_block(box: BoxSample, p: np.ndarray, seed: int, block: int, size: int) -> Tuple[int, float, float]:
    # one counter-based substream per block: the result never depends on how blocks are sharded
    rng = np.random.Generator(np.random.Philox(key=seed, counter=block << 128))
    points = rng.random((size, 3)) * box.extent
    q = 1.0 / np.linalg.norm(points - p, axis=1)
    mean = float(q.mean())
    m2 = float(((q - mean) ** 2).sum())
    return size, mean, m2


def mc_box_potential(
    box: BoxSample,
    p: Sequence[float],
    n: int,
    seed: int,
    workers: Optional[int] = None,
) -> MonteCarloEstimate:
    """Uniform-sampling oracle for box_potential: Omega * mean(1 / |r_i - p|)."""
    if n < MC_MIN_SAMPLES:
        raise DbtValidationError(f"n (Monte Carlo samples) must be at least {MC_MIN_SAMPLES}, received: {n}")
    require_seed(seed)
    for c in p:
        require_finite("p", c)

    point = np.asarray(p, dtype=float)
    sizes = [MC_BLOCK_SIZE] * (n // MC_BLOCK_SIZE)
    if n % MC_BLOCK_SIZE:
        sizes.append(n % MC_BLOCK_SIZE)
    logger.debug(f"MC oracle: {n} samples in {len(sizes)} blocks, workers={workers or 1}")

    def run(block: int) -> Tuple[int, float, float]:
        return _mc_block(box, point, seed, block, sizes[block])

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts: List[Tuple[int, float, float]] = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(block) for block in range(len(sizes))]

    # Chan et al. pairwise update, always in block order
    count, mean, m2 = parts[0]
    for size, block_mean, block_m2 in parts[1:]:
        total = count + size
        delta = block_mean - mean
        mean += delta * size / total
        m2 += block_m2 + delta * delta * count * size / total
        count = total

    variance = m2 / (count - 1)
    return MonteCarloEstimate(
        estimate=box.volume * mean,
        std_error=box.volume * math.sqrt(variance / count),
        samples=count,
    )


def _check_probes(box: BoxSample, probes: ProbePair) -> None:
    for name in ("x1", "x2"):
        point = getattr(probes, name)
        if not box.contains(point):
            raise DbtValidationError(f"probe {name}={point} lies outside the sample box")


def geometric_factor(box: BoxSample, probes: ProbePair) -> float:
    """g = (Phi(x1) + Phi(x2)) / (3 Omega), in cm^-1."""
    _check_probes(box, probes)
    total = box_potential(box, probes.x1) + box_potential(box, probes.x2)
    return total / (3.0 * box.volume)


def _rectangle_corner_integral(a: float, b: float) -> float:
    # integral of 1/rho over [0, a] x [0, b] seen from the origin corner
    if a == 0 or b == 0:
        return 0.0
    return a * math.asinh(b / a) + b * math.asinh(a / b)


def thin_film_factor(box: BoxSample, probes: ProbePair) -> float:
    """Thin-film limit of g: the thickness is taken to zero inside the integrand.

    Phi(p) ~ a * (in-plane integral of 1/rho), which is what the closed form
    approaches when a << w, l.
    """
    _check_probes(box, probes)
    total = 0.0
    for x, y, _ in (probes.x1, probes.x2):
        in_plane = sum(
            _rectangle_corner_integral(dx, dy)
            for dx in (x, box.l - x)
            for dy in (y, box.w - y)
        )
        total += box.a * in_plane
    return total / (3.0 * box.volume)
