"""The coefficient kappa, the fundamental spectrum S_F(f) = kappa U0^2 / |f| and the sample report."""
from dataclasses import dataclass, field
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.dataclass_schema import dbtClassMixin, ValidationError
from dbt_common.exceptions import DbtValidationError

from flickerbound.geometry import BoxSample, ProbePair, geometric_factor
from flickerbound.spectral import SpectrumSeries, SpectrumUnits
from flickerbound.units import CGS, CarrierSpecies, PhysicalConstants, Unit, convert
from flickerbound.utility import float_setting, point_setting, require_finite, require_positive


logger = AdapterLogger("FlickerBound")

# relative deviation from the reference kappa that marks a report row
FLAG_RTOL = 0.10


def kappa_per_cm(species: Sequence[CarrierSpecies], constants: PhysicalConstants = CGS) -> float:
    """kappa / g = 2 e^4 / (pi hbar c^3) * sum of 1/m_i, in cm."""
    if not species:
        raise DbtValidationError("species must name at least one carrier species")
    inverse_mass = math.fsum(1.0 / s.mass(constants) for s in species)
    return 2.0 * constants.e**4 * inverse_mass / (math.pi * constants.hbar * constants.c**3)


def kappa(g: float, species: Sequence[CarrierSpecies], constants: PhysicalConstants = CGS) -> float:
    require_positive("g", g)
    return g * kappa_per_cm(species, constants)


def single_species_kappa(g: float, mass_ratio: float, constants: PhysicalConstants = CGS) -> float:
    """The one-mass form 2 e^4 g / (pi m hbar c^3)."""
    return kappa(g, [CarrierSpecies("carrier", mass_ratio)], constants)


def fundamental_spectrum(kappa: float, u0_volts: float, f_grid: Sequence[float]) -> SpectrumSeries:
    """S_F(f) = kappa U0^2 / |f| in V^2/Hz on a strictly increasing grid without f = 0."""
    require_finite("kappa", kappa)
    require_finite("u0_volts", u0_volts)
    f = np.asarray(f_grid, dtype=float)
    for value in f:
        require_finite("f", value)
    if np.any(f == 0):
        raise DbtValidationError("f_grid contains f = 0, where S_F is singular")
    return SpectrumSeries(f, kappa * u0_volts**2 / np.abs(f), SpectrumUnits.VoltsSquaredPerHertz)


@dataclass(frozen=True)
class NoiseFloorResult:
    g: float
    kappa: float
    per_species: List[Tuple[str, float]]
    u0: Optional[float] = None  # statvolt

    def __post_init__(self):
        total = math.fsum(c for _, c in self.per_species)
        if not math.isclose(total, self.kappa, rel_tol=1e-12):
            raise DbtValidationError(
                f"kappa={self.kappa} is not the sum of its species contributions ({total})"
            )

    def spectrum(self, f_grid: Sequence[float]) -> SpectrumSeries:
        if self.u0 is None:
            raise DbtValidationError("u0 is required to evaluate S_F")
        return fundamental_spectrum(self.kappa, convert(self.u0, Unit.STATVOLT, Unit.VOLT), f_grid)


def noise_floor(
    box: BoxSample,
    probes: ProbePair,
    species: Sequence[CarrierSpecies],
    u0_volts: Optional[float] = None,
    constants: PhysicalConstants = CGS,
) -> NoiseFloorResult:
    g = geometric_factor(box, probes)
    contributions = [(s.label, kappa(g, [s], constants)) for s in species]
    return NoiseFloorResult(
        g=g,
        kappa=kappa(g, species, constants),
        per_species=contributions,
        u0=None if u0_volts is None else convert(u0_volts, Unit.VOLT, Unit.STATVOLT),
    )


@dataclass
class SampleRecord(dbtClassMixin):
    """One sample descriptor: dimensions in um/nm, masses in units of m0, optional reference values."""

    name: str
    width_um: float
    length_um: float
    thickness_nm: float
    electron_mass_ratio: float = 0.06
    hole_mass_ratio: float = 0.09
    g_reference: Optional[float] = None
    kappa_reference: Optional[float] = None
    kappa_measured: Optional[float] = None
    probe1_um: Optional[str] = None
    probe2_um: Optional[str] = None

    _numeric = (
        "width_um",
        "length_um",
        "thickness_nm",
        "electron_mass_ratio",
        "hole_mass_ratio",
        "g_reference",
        "kappa_reference",
        "kappa_measured",
    )

    def __post_init__(self):
        for name in ("width_um", "length_um", "thickness_nm", "electron_mass_ratio", "hole_mass_ratio"):
            require_positive(name, getattr(self, name))
        for name in ("g_reference", "kappa_reference", "kappa_measured"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value >= 0):
                raise DbtValidationError(f"{name} must be nonnegative, received: {value}")
        if (self.probe1_um is None) != (self.probe2_um is None):
            raise DbtValidationError("probe1_um and probe2_um must be given together")

    @classmethod
    def parse(cls, raw: Dict[str, Any]) -> "SampleRecord":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise DbtValidationError(f"Unknown sample descriptor keys: {', '.join(unknown)}")

        data = dict(raw)
        for key in cls._numeric:
            if key in data:
                try:
                    data[key] = float_setting(data[key])
                except (TypeError, ValueError):
                    raise DbtValidationError(
                        f"{key} must be a number, received: {data[key]!r}"
                    ) from None
        try:
            cls.validate(data)
        except ValidationError as exc:
            raise DbtValidationError(f"Could not parse sample descriptor: {exc.message}") from exc
        return cls.from_dict(data)

    def box(self) -> BoxSample:
        return BoxSample.from_micrometers(self.width_um, self.length_um, self.thickness_nm)

    def probes(self) -> ProbePair:
        box = self.box()
        if self.probe1_um is None or self.probe2_um is None:
            return ProbePair.end_edge_midpoints(box)
        points = []
        for key in ("probe1_um", "probe2_um"):
            try:
                point = point_setting(getattr(self, key))
            except ValueError as exc:
                raise DbtValidationError(f"{key}: {exc}") from None
            points.append(tuple(convert(c, Unit.MICROMETER, Unit.CENTIMETER) for c in point))
        return ProbePair.explicit(points[0], points[1])

    def species(self) -> List[CarrierSpecies]:
        return [
            CarrierSpecies("electron", self.electron_mass_ratio),
            CarrierSpecies("hole", self.hole_mass_ratio),
        ]


@dataclass(frozen=True)
class ReportRow:
    name: str
    g_calc: float
    g_reference: Optional[float]
    kappa_calc: float
    kappa_reference: Optional[float]
    kappa_measured: Optional[float]
    flag: bool
    ratio: float = field(init=False)
    kappa_measured_over_calc: Optional[float] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ratio", self.kappa_calc / self.g_calc)
        object.__setattr__(
            self,
            "kappa_measured_over_calc",
            None if self.kappa_measured is None else self.kappa_measured / self.kappa_calc,
        )


REPORT_COLUMNS = (
    "name",
    "g_calc",
    "g_reference",
    "kappa_calc",
    "kappa_reference",
    "kappa_measured",
    "ratio",
    "kappa_measured_over_calc",
    "flag",
)


def _deviates(calc: float, reference: Optional[float]) -> bool:
    if not reference:
        return False
    return abs(calc - reference) / reference > FLAG_RTOL


def table_one_report(
    records: Sequence[SampleRecord], constants: PhysicalConstants = CGS
) -> List[ReportRow]:
    rows = []
    for record in records:
        result = noise_floor(record.box(), record.probes(), record.species(), constants=constants)
        flag = _deviates(result.kappa, record.kappa_reference)
        if flag:
            logger.warning(
                f"{record.name}: kappa={result.kappa:.3g} deviates from the reference "
                f"{record.kappa_reference:.3g} by more than {FLAG_RTOL:.0%}"
            )
        rows.append(
            ReportRow(
                name=record.name,
                g_calc=result.g,
                g_reference=record.g_reference,
                kappa_calc=result.kappa,
                kappa_reference=record.kappa_reference,
                kappa_measured=record.kappa_measured,
                flag=flag,
            )
        )
    return rows
