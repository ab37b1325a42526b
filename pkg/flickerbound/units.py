"""Physical constants and the handful of unit conversions used at the I/O boundary.

Everything inside the package is Gaussian CGS: charge in esu, lengths in cm,
masses in g, action in erg*s. SI volts, micrometers and nanometers only appear
in sample descriptors and on the command line.
"""
from dataclasses import dataclass
import math
from typing import Dict, Tuple

from dbt_common.dataclass_schema import StrEnum
from dbt_common.exceptions import DbtValidationError


class Unit(StrEnum):
    VOLT = "V"
    STATVOLT = "statV"
    MICROMETER = "um"
    NANOMETER = "nm"
    CENTIMETER = "cm"
    KILOGRAM = "kg"
    GRAM = "g"
    ELECTRONVOLT_SECOND = "eV*s"
    ERG_SECOND = "erg*s"

    @classmethod
    def parse(cls, raw: "str | Unit") -> "Unit":
        if isinstance(raw, Unit):
            return raw
        key = raw.strip()
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DbtValidationError(f"Unsupported unit: {raw!r}") from None


_ALIASES = {
    "volt": "V",
    "statvolt": "statV",
    "μm": "um",
    "µm": "um",
    "micrometer": "um",
    "nanometer": "nm",
    "eV·s": "eV*s",
    "erg·s": "erg*s",
}

# 1 statvolt is exactly c[m/s] / 1e6 volts
VOLTS_PER_STATVOLT = 299.792458
ERG_PER_EV = 1.602176634e-12

# forward factors; the reverse direction divides by the same number so that
# a round trip is within one ulp
_FACTORS: Dict[Tuple[Unit, Unit], float] = {
    (Unit.VOLT, Unit.STATVOLT): 1.0 / VOLTS_PER_STATVOLT,
    (Unit.MICROMETER, Unit.CENTIMETER): 1e-4,
    (Unit.NANOMETER, Unit.CENTIMETER): 1e-7,
    (Unit.KILOGRAM, Unit.GRAM): 1e3,
    (Unit.ELECTRONVOLT_SECOND, Unit.ERG_SECOND): ERG_PER_EV,
}


def convert(value: float, from_unit: "str | Unit", to_unit: "str | Unit") -> float:
    source, target = Unit.parse(from_unit), Unit.parse(to_unit)
    if source == target:
        return value
    if (source, target) in _FACTORS:
        return value * _FACTORS[(source, target)]
    if (target, source) in _FACTORS:
        return value / _FACTORS[(target, source)]
    raise DbtValidationError(f"Unsupported unit pair: {source} -> {target}")


@dataclass(frozen=True)
class PhysicalConstants:
    """Gaussian-CGS constants: e [esu], hbar [erg*s], c [cm/s], m0 [g]."""

    e: float
    hbar: float
    c: float
    m0: float

    def __post_init__(self):
        for name in ("e", "hbar", "c", "m0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DbtValidationError(f"{name} must be strictly positive, received: {value}")


# CODATA 2018, the SI-exact values of e, hbar and c carried over to CGS
CGS = PhysicalConstants(
    e=1.602176634e-19 * 2.99792458e9,
    hbar=1.054571817e-27,
    c=2.99792458e10,
    m0=9.1093837015e-28,
)


@dataclass(frozen=True)
class CarrierSpecies:
    label: str
    mass_ratio: float

    def __post_init__(self):
        if not (self.mass_ratio > 0):
            raise DbtValidationError(
                f"mass_ratio of {self.label!r} must be positive, received: {self.mass_ratio}"
            )

    def mass(self, constants: PhysicalConstants = CGS) -> float:
        return self.mass_ratio * constants.m0


# rough InGaAs effective masses
ELECTRON = CarrierSpecies("electron", 0.06)
LIGHT_HOLE = CarrierSpecies("light_hole", 0.09)
