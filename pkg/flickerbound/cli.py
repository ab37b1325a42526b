"""Command-line front end: `flickerbound <subcommand> [options]`.

Every subcommand writes one CSV (to --output, or standard output) and a short
human-readable summary. Exit status is 0 on success, 1 for invalid input and 2
for numerical failures.
"""
import argparse
from contextlib import contextmanager
from dataclasses import dataclass, field
import math
import os
import sys
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.dataclass_schema import StrEnum, ValidationError, dbtClassMixin
from dbt_common.exceptions import DbtRuntimeError, DbtValidationError

from flickerbound import files, geometry, noisefloor, processlab, quantumtoy, spectral
from flickerbound.__version__ import version
from flickerbound.events import configure_logging, timed
from flickerbound.exceptions import NumericalFailure
from flickerbound.units import CarrierSpecies, Unit, convert
from flickerbound.utility import format_number, require_seed


logger = AdapterLogger("FlickerBound")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

Rows = List[List[Any]]


class Subcommand(StrEnum):
    GFactor = "gfactor"
    Kappa = "kappa"
    Table1 = "table1"
    Sigma = "sigma"
    Kernels = "kernels"
    ToyVerify = "toy-verify"
    Synthesize = "synthesize"
    Spectrum = "spectrum"
    Slope = "slope"


@dataclass
class RunConfig(dbtClassMixin):
    subcommand: Subcommand
    output: Optional[str] = None
    inputs: List[str] = field(default_factory=list)
    seed: int = 0
    workers: Optional[int] = None

    def __post_init__(self):
        require_seed(self.seed)
        if self.workers is not None and self.workers < 1:
            raise DbtValidationError(f"workers must be at least 1, received: {self.workers}")
        for path in self.inputs:
            if not os.access(path, os.R_OK):
                raise DbtValidationError(f"input {path} is not readable")
        if self.output is not None:
            parent = os.path.dirname(os.path.abspath(self.output))
            if not os.access(parent, os.W_OK):
                raise DbtValidationError(f"output directory {parent} is not writable")

    @classmethod
    def parse(cls, raw: Dict[str, Any]) -> "RunConfig":
        try:
            cls.validate(raw)
        except ValidationError as exc:
            raise DbtValidationError(f"Could not parse run options: {exc.message}") from exc
        return cls.from_dict(raw)


@dataclass
class Outcome:
    code: int = EXIT_OK


@contextmanager
def exception_handler(outcome: Outcome) -> Iterator[None]:
    try:
        yield
    except DbtValidationError as e:
        sys.stderr.write(f"error: {e.msg}\n")
        outcome.code = EXIT_VALIDATION
    except NumericalFailure as e:
        sys.stderr.write(f"numerical failure: {e.msg}\n")
        outcome.code = EXIT_NUMERICAL
    except DbtRuntimeError as e:
        logger.debug(f"Unhandled runtime error: {e}")
        sys.stderr.write(f"numerical failure: {e.msg}\n")
        outcome.code = EXIT_NUMERICAL


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise DbtValidationError(message)


def _float_list(name: str) -> Callable[[str], List[float]]:
    def parse(text: str) -> List[float]:
        try:
            return [float(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise DbtValidationError(f"{name} must be a comma-separated list of numbers: {text!r}")

    return parse


def _pair(name: str) -> Callable[[str], Tuple[float, float]]:
    def parse(text: str) -> Tuple[float, float]:
        values = _float_list(name)(text)
        if len(values) != 2:
            raise DbtValidationError(f"{name} takes two comma-separated numbers, received: {text!r}")
        return values[0], values[1]

    return parse


def _covariance_models(args: argparse.Namespace) -> spectral.CovarianceModel:
    models: List[spectral.CovarianceModel] = []
    for variance, tau_c in args.ou or []:
        models.append(spectral.OrnsteinUhlenbeck(variance=variance, correlation_time=tau_c))
    for a, tau0 in getattr(args, "log", None) or []:
        models.append(spectral.LogCovariance(a=a, tau0=tau0))
    if not models:
        raise DbtValidationError("give at least one covariance component with --ou or --log")
    return spectral.sum_of(models)


# gfactor / kappa / table1


def _records(args: argparse.Namespace) -> List[noisefloor.SampleRecord]:
    if args.sample:
        return [files.load_sample(p) for p in args.sample]
    raw: Dict[str, Any] = {"name": args.name}
    for key in ("width_um", "length_um", "thickness_nm", "probe1_um", "probe2_um"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    missing = [k for k in ("width_um", "length_um", "thickness_nm") if k not in raw]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise DbtValidationError(f"give --sample or all of: {flags}")
    return [noisefloor.SampleRecord.parse(raw)]


def _gfactor(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    if args.mc_samples and not args.mc_samples >= geometry.MC_MIN_SAMPLES:
        raise DbtValidationError(
            f"--mc-samples must be 0 or at least {geometry.MC_MIN_SAMPLES}, received: {args.mc_samples}"
        )
    columns = ["name", "g_per_cm", "thin_film_g_per_cm", "phi_x1_cm2", "phi_x2_cm2"]
    if args.mc_samples:
        columns += ["mc_phi_x1_cm2", "mc_std_error_cm2"]
    rows, summary = [], []
    for record in _records(args):
        box, probes = record.box(), record.probes()
        g = geometry.geometric_factor(box, probes)
        row = [
            record.name,
            g,
            geometry.thin_film_factor(box, probes),
            geometry.box_potential(box, probes.x1),
            geometry.box_potential(box, probes.x2),
        ]
        if args.mc_samples:
            mc = geometry.mc_box_potential(
                box, probes.x1, args.mc_samples, config.seed, workers=config.workers
            )
            row += [mc.estimate, mc.std_error]
        rows.append(row)
        summary.append(f"{record.name}: g = {format_number(g)} cm^-1")
    return columns, rows, summary


def _species(args: argparse.Namespace) -> List[CarrierSpecies]:
    return [
        CarrierSpecies("electron", args.electron_mass_ratio),
        CarrierSpecies("hole", args.hole_mass_ratio),
    ]


def _kappa(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    if args.g is None:
        raise DbtValidationError("--g is required (geometrical factor in cm^-1)")
    species = _species(args)
    u0 = None if args.u0_volts is None else convert(args.u0_volts, Unit.VOLT, Unit.STATVOLT)
    result = noisefloor.NoiseFloorResult(
        g=args.g,
        kappa=noisefloor.kappa(args.g, species),
        per_species=[(s.label, noisefloor.kappa(args.g, [s])) for s in species],
        u0=u0,
    )
    k = result.kappa
    summary = [f"kappa = {format_number(k)} (kappa/g = {format_number(k / args.g)} cm)"]
    if args.f_hz:
        if args.u0_volts is None:
            raise DbtValidationError("--u0-volts is required with --f-hz")
        series = result.spectrum(sorted(args.f_hz))
        rows = [[f, v, str(series.units)] for f, v in zip(series.f_grid, series.values)]
        return list(files.SPECTRUM_COLUMNS), rows, summary
    columns = ["g_per_cm", "kappa"] + [f"kappa_{label}" for label, _ in result.per_species]
    return columns, [[args.g, k] + [c for _, c in result.per_species]], summary


def _table1(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    records = (
        [files.load_sample(p) for p in args.sample] if args.sample else files.load_bundled_samples()
    )
    report = noisefloor.table_one_report(records)
    rows = [[getattr(r, c) for c in noisefloor.REPORT_COLUMNS] for r in report]
    summary = [
        f"{r.name}: g = {format_number(r.g_calc)} cm^-1, kappa = {format_number(r.kappa_calc)}"
        + ("  [FLAGGED]" if r.flag else "")
        for r in report
    ]
    return list(noisefloor.REPORT_COLUMNS), rows, summary


# spectral


def _sigma(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    model = _covariance_models(args)
    if not args.f_hz:
        raise DbtValidationError("--f-hz is required")
    columns = ["f_hz", "sigma", "sigma_times_f", "two_term", "infinite_window", "imaginary"]
    rows = []
    for f in sorted(args.f_hz):
        omega = 2.0 * math.pi * f
        result = spectral.sigma_two_term(model, omega, args.tm)
        try:
            limit = float(model.spectrum(omega))
        except NotImplementedError:
            limit = None
        rows.append([f, result.value, result.value * abs(f), result.two_term, limit, result.imaginary])
    return columns, rows, [f"Sigma evaluated at {len(rows)} frequencies, t_m = {args.tm} s"]


KERNEL_COLUMNS = (
    "omega",
    "t_m",
    "a_numeric",
    "b_numeric",
    "difference",
    "predicted_limit",
    "limit_residual",
    "a_closed_form",
    "b_closed_form",
    "log_envelope",
    "sign_kernel",
    "sign_kernel_exact",
    "sinc_tau",
    "sinc_cutoff",
    "sinc_corrected",
    "sinc_residual",
)


def _kernels(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    res = spectral.kernel_asymptotics(args.omega, args.tm, args.sinc_tau, args.sinc_cutoff)
    summary = [
        f"A - B = {format_number(res.difference)} vs -pi/|omega| = {format_number(res.predicted_limit)}",
        f"closed forms: A = {format_number(res.a_closed_form)}, B = {format_number(res.b_closed_form)}",
        f"sign kernel relative residual {res.sign_kernel_residual:.2e}",
        f"sinc residual {res.sinc_residual:.2e}",
    ]
    return list(KERNEL_COLUMNS), [[getattr(res, c) for c in KERNEL_COLUMNS]], summary


# quantum toy


def _toy_verify(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    result = quantumtoy.verify_random_systems(
        args.count, config.seed, args.max_dim, args.max_n, workers=config.workers
    )
    columns = [
        "index",
        "dim",
        "n",
        "pure",
        "omega",
        "slack",
        "product_slack",
        "commutator_residual",
        "commutator_real",
        "odd_residual",
    ]
    rows = [[getattr(c, name) for name in columns] for c in result.checks]
    summary = [
        f"{result.count} systems, {len(result.failures)} violations",
        f"slack: min {result.min_slack:.3e}, median {result.median_slack:.3e}",
        f"product slack: min {result.min_product_slack:.3e}, median {result.median_product_slack:.3e}",
        f"max commutator residual {result.max_commutator_residual:.2e}",
    ]
    if args.ladder_steps:
        omega = args.ladder_omega

        def qubit(n: int) -> quantumtoy.ToySystem:
            return quantumtoy.rotating_qubit_system(n, args.ladder_dt, nu=omega)

        for point in quantumtoy.tm_ladder(qubit, omega, quantumtoy.doubling(16, args.ladder_steps)):
            summary.append(
                f"t_m = {format_number(point.t_m)} s: S_est = {format_number(point.s_est)}, "
                f"S_F = {format_number(point.s_f_est)}"
            )
    return columns, rows, summary


# process lab


def _synthesis_spec(args: argparse.Namespace, config: RunConfig) -> processlab.SynthesisSpec:
    if args.gamma is not None:
        if args.ou:
            raise DbtValidationError("--gamma and --ou are mutually exclusive")
        return processlab.SynthesisSpec.power_law(
            args.gamma, args.f_low, args.n, args.dt, config.seed, f_high=args.f_high
        )
    return processlab.SynthesisSpec.covariance(_covariance_models(args), args.n, args.dt, config.seed)


def _synthesize(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    windows = processlab.synthesize_ensemble(_synthesis_spec(args, config), args.count)
    columns, rows = files.signal_table(windows)
    return columns, rows, [f"{len(windows)} windows of {windows[0].n} samples, dt = {args.dt} s"]


def _frequencies(args: argparse.Namespace) -> List[float]:
    if args.f_hz:
        return sorted(args.f_hz)
    if args.f_low is None or args.f_high is None:
        raise DbtValidationError("give --f-hz or both --f-low and --f-high")
    return list(processlab.log_grid(args.f_low, args.f_high, args.points))


def _spectrum(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    windows = files.read_signal_csv(args.input)
    f_grid = _frequencies(args)
    stats = spectral.ensemble_statistics(windows, f_grid)
    series = spectral.SpectrumSeries(f_grid, stats["mean"])
    rows = [
        [f, v, str(series.units), se]
        for f, v, se in zip(series.f_grid, series.values, stats["std_error"])
    ]
    columns = list(files.SPECTRUM_COLUMNS) + ["std_error"]
    return columns, rows, [f"power spectrum of {len(windows)} windows at {len(f_grid)} frequencies"]


def _slope(args: argparse.Namespace, config: RunConfig) -> Tuple[List[str], Rows, List[str]]:
    series = files.read_spectrum_csv(args.input)
    gamma = processlab.slope_fit(series, args.f_low, args.f_high)
    points = len(series.restricted(args.f_low, args.f_high))
    return (
        ["gamma_hat", "f_low_hz", "f_high_hz", "points"],
        [[gamma, args.f_low, args.f_high, points]],
        [f"gamma_hat = {format_number(gamma)}"],
    )


HANDLERS = {
    Subcommand.GFactor: _gfactor,
    Subcommand.Kappa: _kappa,
    Subcommand.Table1: _table1,
    Subcommand.Sigma: _sigma,
    Subcommand.Kernels: _kernels,
    Subcommand.ToyVerify: _toy_verify,
    Subcommand.Synthesize: _synthesize,
    Subcommand.Spectrum: _spectrum,
    Subcommand.Slope: _slope,
}


def _add_common(p: argparse.ArgumentParser, seeded: bool = False) -> None:
    p.add_argument("--output", "-o", help="CSV output path (default: standard output)")
    if seeded:
        p.add_argument("--seed", type=int, default=0, help="integer seed in [0, 2**64 - 1] (default 0)")


def _add_sample_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sample", action="append", help="key=value sample descriptor file (repeatable)")
    p.add_argument("--name", default="sample", help="label for a sample given by flags")
    p.add_argument("--width-um", dest="width_um", help="sample width w [um]")
    p.add_argument("--length-um", dest="length_um", help="sample length l [um]")
    p.add_argument("--thickness-nm", dest="thickness_nm", help="sample thickness a [nm]")
    p.add_argument("--probe1-um", dest="probe1_um", help='first probe "x,y,z" [um]')
    p.add_argument("--probe2-um", dest="probe2_um", help='second probe "x,y,z" [um]')


def _add_model_flags(p: argparse.ArgumentParser, with_log: bool) -> None:
    p.add_argument(
        "--ou",
        action="append",
        type=_pair("--ou"),
        metavar="VAR,TAU_C",
        help="Ornstein-Uhlenbeck component: variance [V^2], correlation time [s] (repeatable)",
    )
    if with_log:
        p.add_argument(
            "--log",
            action="append",
            type=_pair("--log"),
            metavar="A,TAU0",
            help="log component ln(a + (tau/tau0)^2): a [dimensionless], tau0 [s] (repeatable)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flickerbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"flickerbound {version}")
    parser.add_argument(
        "--log-level",
        choices=["debug", "info", "warn", "error"],
        default="info",
        help="event level written to standard error (default info)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser(Subcommand.GFactor.value, help="geometrical factor g [cm^-1] of box samples")
    _add_sample_flags(p)
    p.add_argument("--mc-samples", type=int, default=0, help="Monte Carlo oracle sample count (0 = off)")
    p.add_argument("--workers", type=int, help="threads for the Monte Carlo oracle")
    _add_common(p, seeded=True)

    p = sub.add_parser(Subcommand.Kappa.value, help="dimensionless kappa and S_F(f) [V^2/Hz]")
    p.add_argument("--g", type=float, help="geometrical factor g [cm^-1]")
    p.add_argument("--electron-mass-ratio", type=float, default=0.06, help="m_n / m0 [dimensionless]")
    p.add_argument("--hole-mass-ratio", type=float, default=0.09, help="m_p / m0 [dimensionless]")
    p.add_argument("--u0-volts", type=float, help="bias voltage U0 [V]")
    p.add_argument("--f-hz", type=_float_list("--f-hz"), help="comma-separated frequencies [Hz], f != 0")
    _add_common(p)

    p = sub.add_parser(Subcommand.Table1.value, help="computed vs reference g [cm^-1] and kappa per sample")
    p.add_argument("--sample", action="append", help="sample descriptor file (default: bundled samples)")
    _add_common(p)

    p = sub.add_parser(Subcommand.Sigma.value, help="Sigma(f) of a covariance model [V^2/Hz]")
    _add_model_flags(p, with_log=True)
    p.add_argument("--f-hz", type=_float_list("--f-hz"), help="comma-separated frequencies [Hz], f != 0")
    p.add_argument("--tm", type=float, required=True, help="measurement time t_m [s]")
    _add_common(p)

    p = sub.add_parser(Subcommand.Kernels.value, help="log, sign and sinc kernel residuals")
    p.add_argument("--omega", type=float, required=True, help="angular frequency [rad/s], non-zero")
    p.add_argument("--tm", type=float, required=True, help="measurement time t_m [s]")
    p.add_argument("--sinc-tau", type=float, default=1.0, help="lag tau of the sinc check [s]")
    p.add_argument("--sinc-cutoff", type=float, help="frequency cutoff K of the sinc check [rad/s]")
    _add_common(p)

    p = sub.add_parser(Subcommand.ToyVerify.value, help="uncertainty bound on random finite systems")
    p.add_argument("--count", type=int, default=1000, help="number of random systems")
    p.add_argument("--max-dim", type=int, default=6, help="largest Hilbert-space dimension")
    p.add_argument("--max-n", type=int, default=128, help="largest number of time nodes")
    p.add_argument("--workers", type=int, help="threads across systems")
    p.add_argument("--ladder-steps", type=int, default=0, help="doublings of t_m for the rotating qubit (0 = off)")
    p.add_argument("--ladder-omega", type=float, default=2 * math.pi, help="ladder angular frequency [rad/s]")
    p.add_argument("--ladder-dt", type=float, default=0.05, help="ladder time step [s]")
    _add_common(p, seeded=True)

    p = sub.add_parser(Subcommand.Synthesize.value, help="synthetic Gaussian signal windows [V]")
    _add_model_flags(p, with_log=False)
    p.add_argument("--gamma", type=float, help="power-law exponent in [0, 2] [dimensionless]")
    p.add_argument("--f-low", type=float, help="power-law low cutoff [Hz]")
    p.add_argument("--f-high", type=float, help="power-law high cutoff [Hz] (default: Nyquist)")
    p.add_argument("--n", type=int, default=4096, help="samples per window, a power of two >= 64")
    p.add_argument("--dt", type=float, default=1e-3, help="sample spacing [s]")
    p.add_argument("--count", type=int, default=1, help="number of windows")
    _add_common(p, seeded=True)

    p = sub.add_parser(Subcommand.Spectrum.value, help="ensemble power spectrum [V^2/Hz] of a signal CSV")
    p.add_argument("--input", required=True, help="signal CSV (t_s, window_0, ...)")
    p.add_argument("--f-hz", type=_float_list("--f-hz"), help="comma-separated frequencies [Hz]")
    p.add_argument("--f-low", type=float, help="lower end of a log grid [Hz]")
    p.add_argument("--f-high", type=float, help="upper end of a log grid [Hz]")
    p.add_argument("--points", type=int, default=16, help="log grid size")
    _add_common(p)

    p = sub.add_parser(Subcommand.Slope.value, help="fitted frequency exponent gamma [dimensionless]")
    p.add_argument("--input", required=True, help="spectrum CSV (f_hz, value, units)")
    p.add_argument("--f-low", type=float, required=True, help="fit range lower end [Hz]")
    p.add_argument("--f-high", type=float, required=True, help="fit range upper end [Hz]")
    _add_common(p)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    raw: Dict[str, Any] = {"subcommand": args.subcommand}
    if args.output is not None:
        raw["output"] = args.output
    inputs = list(getattr(args, "sample", None) or [])
    if getattr(args, "input", None):
        inputs.append(args.input)
    raw["inputs"] = inputs
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        raw["workers"] = args.workers
    return RunConfig.parse(raw)


def run(argv: Optional[Sequence[str]] = None) -> int:
    outcome = Outcome()
    with exception_handler(outcome):
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:
            # --help and --version
            return int(exc.code or 0)
        configure_logging(args.log_level, sys.stderr)
        config = _run_config(args)
        logger.info(f"running {config.subcommand}")
        with timed(str(config.subcommand)):
            columns, rows, summary = HANDLERS[config.subcommand](args, config)
        if config.output is None:
            # keep standard output a clean CSV stream
            files.write_table(sys.stdout, columns, rows)
            for line in summary:
                print(line, file=sys.stderr)
        else:
            files.write_table(config.output, columns, rows)
            for line in summary:
                print(line)
    return outcome.code


def main() -> None:
    sys.exit(run())
