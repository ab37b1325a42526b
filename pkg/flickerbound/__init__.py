from flickerbound.__version__ import version as __version__
from flickerbound.geometry import (
    BoxSample,
    ProbePair,
    box_potential,
    geometric_factor,
    mc_box_potential,
    thin_film_factor,
)
from flickerbound.noisefloor import (
    SampleRecord,
    fundamental_spectrum,
    kappa,
    noise_floor,
    table_one_report,
)
from flickerbound.units import CGS, ELECTRON, LIGHT_HOLE, CarrierSpecies, PhysicalConstants, convert
