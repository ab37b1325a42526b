import math

import numpy as np
import pytest

from dbt_common.exceptions import DbtValidationError

from flickerbound.geometry import BoxSample, ProbePair
from flickerbound.noisefloor import (
    FLAG_RTOL,
    NoiseFloorResult,
    SampleRecord,
    fundamental_spectrum,
    kappa,
    kappa_per_cm,
    noise_floor,
    single_species_kappa,
    table_one_report,
)
from flickerbound.units import (
    CGS,
    ELECTRON,
    LIGHT_HOLE,
    VOLTS_PER_STATVOLT,
    CarrierSpecies,
    PhysicalConstants,
)

INGAAS = [ELECTRON, LIGHT_HOLE]


def test_kappa_per_cm():
    assert kappa_per_cm(INGAAS) == pytest.approx(3.637e-14, rel=1e-3)


def test_kappa_is_additive_over_species():
    g = 9634.0
    total = kappa(g, INGAAS)
    assert total == pytest.approx(kappa(g, [ELECTRON]) + kappa(g, [LIGHT_HOLE]), rel=1e-14)


def test_single_species_form():
    g, ratio = 100.0, 0.067
    expected = 2 * CGS.e**4 * g / (math.pi * ratio * CGS.m0 * CGS.hbar * CGS.c**3)
    assert single_species_kappa(g, ratio) == pytest.approx(expected, rel=1e-14)


def test_kappa_rejects_bad_inputs():
    with pytest.raises(DbtValidationError, match="at least one carrier"):
        kappa(1.0, [])
    with pytest.raises(DbtValidationError, match="g must be positive"):
        kappa(-1.0, INGAAS)


class TestFundamentalSpectrum:
    f = np.array([-10.0, -1.0, 0.5, 1.0, 2.0, 4.0])

    def test_flat_in_f_times_s(self):
        series = fundamental_spectrum(3.5e-10, 0.1, self.f)
        np.testing.assert_allclose(np.abs(self.f) * series.values, 3.5e-10 * 0.01, rtol=1e-15)
        assert series.units == "V^2/Hz"

    def test_doubling_f_halves_s(self):
        series = fundamental_spectrum(1e-9, 1.0, self.f)
        doubled = fundamental_spectrum(1e-9, 1.0, 2 * self.f)
        np.testing.assert_array_equal(doubled.values, series.values / 2)

    def test_doubling_u0_quadruples_s(self):
        series = fundamental_spectrum(1e-9, 0.25, self.f)
        doubled = fundamental_spectrum(1e-9, 0.5, self.f)
        np.testing.assert_array_equal(doubled.values, 4 * series.values)

    def test_symmetric_in_f(self):
        series = fundamental_spectrum(1e-9, 1.0, [-2.0, 2.0])
        assert series.values[0] == series.values[1]

    def test_zero_frequency(self):
        with pytest.raises(DbtValidationError, match="f = 0"):
            fundamental_spectrum(1e-9, 1.0, [0.0, 1.0])


def test_noise_floor_result():
    box = BoxSample.from_micrometers(1.0, 2.2, 10.0)
    result = noise_floor(box, ProbePair.end_edge_midpoints(box), INGAAS, u0_volts=VOLTS_PER_STATVOLT)
    assert result.u0 == pytest.approx(1.0)
    assert [label for label, _ in result.per_species] == ["electron", "light_hole"]
    assert result.kappa / result.g == pytest.approx(kappa_per_cm(INGAAS), rel=1e-14)
    series = result.spectrum([1.0, 10.0])
    assert series.values[0] == pytest.approx(result.kappa * VOLTS_PER_STATVOLT**2, rel=1e-12)


def test_noise_floor_result_checks_the_sum():
    with pytest.raises(DbtValidationError, match="sum of its species"):
        NoiseFloorResult(g=1.0, kappa=2.0, per_species=[("electron", 1.0)])


def test_spectrum_needs_u0():
    with pytest.raises(DbtValidationError, match="u0 is required"):
        NoiseFloorResult(g=1.0, kappa=1.0, per_species=[("x", 1.0)]).spectrum([1.0])


class TestSampleRecord:
    raw = {"name": "V1", "width_um": "1", "length_um": "2.2", "thickness_nm": "10"}

    def test_parse_coerces_numbers(self):
        record = SampleRecord.parse(self.raw)
        assert record.width_um == 1.0
        assert record.electron_mass_ratio == 0.06
        assert record.kappa_reference is None
        assert record.probes().placement == "end-edge-midpoints"

    def test_unknown_key(self):
        with pytest.raises(DbtValidationError, match="Unknown sample descriptor keys: colour"):
            SampleRecord.parse({**self.raw, "colour": "blue"})

    def test_names_the_offending_field(self):
        with pytest.raises(DbtValidationError, match="width_um must be positive"):
            SampleRecord.parse({**self.raw, "width_um": "-1"})

    def test_non_numeric(self):
        with pytest.raises(DbtValidationError, match="thickness_nm must be a number"):
            SampleRecord.parse({**self.raw, "thickness_nm": "thin"})

    def test_missing_field(self):
        raw = dict(self.raw)
        del raw["length_um"]
        with pytest.raises(DbtValidationError):
            SampleRecord.parse(raw)

    def test_explicit_probes(self):
        record = SampleRecord.parse({**self.raw, "probe1_um": "0,0.5,0.005", "probe2_um": "2.2,0.5,0.005"})
        probes = record.probes()
        assert probes.placement == "explicit"
        assert probes.x2 == pytest.approx((2.2e-4, 0.5e-4, 0.5e-6))

    def test_probes_come_in_pairs(self):
        with pytest.raises(DbtValidationError, match="together"):
            SampleRecord.parse({**self.raw, "probe1_um": "0,0,0"})

    def test_species(self):
        record = SampleRecord.parse({**self.raw, "hole_mass_ratio": "0.5"})
        assert [s.mass_ratio for s in record.species()] == [0.06, 0.5]


class TestTableOneReport:
    def test_bundled_samples(self, bundled_samples):
        rows = {r.name: r for r in table_one_report(list(bundled_samples.values()))}
        assert set(rows) == {"V1", "V1.5", "V2", "V5", "V80"}
        for row in rows.values():
            assert row.g_calc == pytest.approx(row.g_reference, rel=0.05), row.name
            assert row.ratio == pytest.approx(3.64e-14, rel=0.01)
        assert rows["V1"].kappa_calc == pytest.approx(3.5e-10, rel=0.03)
        assert rows["V80"].flag
        assert not any(rows[name].flag for name in ("V1", "V1.5", "V2", "V5"))

    def test_measured_ratio(self, bundled_samples):
        (row,) = table_one_report([bundled_samples["V1"]])
        assert row.kappa_measured_over_calc == pytest.approx(1.75e-9 / row.kappa_calc)
        assert row.kappa_measured_over_calc == pytest.approx(5.0, rel=0.03)

    def test_flag_threshold(self):
        record = SampleRecord.parse(
            {"name": "x", "width_um": 1, "length_um": 2.2, "thickness_nm": 10, "kappa_reference": 1e-12}
        )
        (row,) = table_one_report([record])
        assert abs(row.kappa_calc - 1e-12) / 1e-12 > FLAG_RTOL
        assert row.flag

    def test_constants_are_injectable(self, bundled_samples):
        heavy = PhysicalConstants(e=CGS.e, hbar=2 * CGS.hbar, c=CGS.c, m0=CGS.m0)
        (base,) = table_one_report([bundled_samples["V2"]])
        (halved,) = table_one_report([bundled_samples["V2"]], constants=heavy)
        assert halved.kappa_calc == pytest.approx(base.kappa_calc / 2, rel=1e-14)


def test_custom_species_labels():
    species = [CarrierSpecies("heavy_hole", 0.45)]
    box = BoxSample(1e-4, 2e-4, 1e-6)
    result = noise_floor(box, ProbePair.end_edge_midpoints(box), species)
    assert result.per_species[0][0] == "heavy_hole"


def test_kappa_is_the_same_in_metre_kilogram_units():
    # esu ~ g^1/2 cm^3/2 s^-1, erg s ~ g cm^2 s^-1
    length, mass = 1e-2, 1e-3
    mks = PhysicalConstants(
        e=CGS.e * length**1.5 * mass**0.5,
        hbar=CGS.hbar * mass * length**2,
        c=CGS.c * length,
        m0=CGS.m0 * mass,
    )
    g_per_cm = 9633.0
    assert kappa(g_per_cm / length, INGAAS, mks) == pytest.approx(kappa(g_per_cm, INGAAS), rel=1e-12)
