"""File formats: key=value sample descriptors and the CSV contracts for signals, spectra and reports."""
import os
from typing import IO, TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.exceptions import DbtValidationError

from flickerbound.include import SAMPLES_PATH
from flickerbound.noisefloor import SampleRecord
from flickerbound.spectral import SignalWindow, SpectrumSeries, SpectrumUnits
from flickerbound.utility import format_number

if TYPE_CHECKING:
    # lazy loaded: agate is only needed when a table is read or written
    import agate


logger = AdapterLogger("FlickerBound")

PathOrStream = Union[str, "os.PathLike[str]", IO[str]]

# relative tolerance on the spacing of the t_s column
_SPACING_RTOL = 1e-9

SIGNAL_TIME_COLUMN = "t_s"
SPECTRUM_COLUMNS = ("f_hz", "value", "units")


def read_descriptor(path: Union[str, "os.PathLike[str]"]) -> Dict[str, str]:
    """key=value lines; blank lines and lines starting with # are skipped."""
    raw: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise DbtValidationError(f"{path}:{lineno}: expected key=value, received: {line!r}")
            if key in raw:
                raise DbtValidationError(f"{path}:{lineno}: duplicate key {key}")
            raw[key] = value.strip()
    return raw


def load_sample(path: Union[str, "os.PathLike[str]"]) -> SampleRecord:
    try:
        return SampleRecord.parse(read_descriptor(path))
    except DbtValidationError as exc:
        raise DbtValidationError(f"{os.path.basename(path)}: {exc.msg}") from exc


def bundled_sample_paths() -> List[str]:
    names = sorted(n for n in os.listdir(SAMPLES_PATH) if n.endswith(".sample"))
    return [os.path.join(SAMPLES_PATH, n) for n in names]


def load_bundled_samples() -> List[SampleRecord]:
    records = [load_sample(p) for p in bundled_sample_paths()]
    return sorted(records, key=lambda r: (r.width_um, r.name))


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None or isinstance(value, (int, float, np.floating, np.integer)):
        return format_number(None if value is None else float(value))
    return str(value)


def write_table(target: PathOrStream, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """Write rows as CSV with a header; every cell is pre-rendered text so output is byte-stable."""
    import agate

    table = agate.Table(
        [[_cell(v) for v in row] for row in rows],
        column_names=list(columns),
        column_types=[agate.Text(cast_nulls=False)] * len(columns),
    )
    table.to_csv(target)


def read_table(source: PathOrStream) -> "agate.Table":
    import agate

    tester = agate.TypeTester(types=[agate.Text(cast_nulls=False)])
    try:
        return agate.Table.from_csv(source, column_types=tester)
    except (OSError, ValueError) as exc:
        raise DbtValidationError(f"Could not read CSV {source}: {exc}") from exc


def _float_column(table: "agate.Table", name: str) -> np.ndarray:
    if name not in table.column_names:
        raise DbtValidationError(f"CSV is missing the {name} column")
    try:
        return np.array([float(v) for v in table.columns[name].values()])
    except (TypeError, ValueError) as exc:
        raise DbtValidationError(f"column {name} must be numeric: {exc}") from None


def signal_table(windows: Sequence[SignalWindow]) -> Tuple[List[str], List[List[Any]]]:
    if not windows:
        raise DbtValidationError("at least one window is required")
    dt, n = windows[0].shape
    if any(w.shape != (dt, n) for w in windows):
        raise DbtValidationError("all windows must share dt and n")
    columns = [SIGNAL_TIME_COLUMN] + [f"window_{k}" for k in range(len(windows))]
    times = windows[0].times
    rows = [[times[i]] + [w.samples[i] for w in windows] for i in range(n)]
    return columns, rows


def write_signal_csv(target: PathOrStream, windows: Sequence[SignalWindow]) -> None:
    write_table(target, *signal_table(windows))


def read_signal_csv(source: PathOrStream) -> List[SignalWindow]:
    table = read_table(source)
    times = _float_column(table, SIGNAL_TIME_COLUMN)
    if times.size < 2:
        raise DbtValidationError("a signal CSV needs at least two rows")
    dt = float(times[1] - times[0])
    expected = np.arange(times.size) * dt
    if dt <= 0 or not np.allclose(times, expected, rtol=_SPACING_RTOL, atol=_SPACING_RTOL * dt):
        raise DbtValidationError("t_s must start at 0 and be uniformly spaced")
    names = [c for c in table.column_names if c != SIGNAL_TIME_COLUMN]
    if not names:
        raise DbtValidationError("a signal CSV needs at least one window column")
    return [SignalWindow(dt, _float_column(table, c)) for c in names]


def write_spectrum_csv(
    target: PathOrStream,
    series: SpectrumSeries,
    extra: Optional[Dict[str, Sequence[float]]] = None,
) -> None:
    extra = extra or {}
    columns = list(SPECTRUM_COLUMNS) + list(extra)
    rows = [
        [series.f_grid[i], series.values[i], str(series.units)] + [extra[k][i] for k in extra]
        for i in range(len(series))
    ]
    write_table(target, columns, rows)


def read_spectrum_csv(source: PathOrStream) -> SpectrumSeries:
    table = read_table(source)
    units = {str(u) for u in table.columns["units"].values()} if "units" in table.column_names else set()
    if len(units) > 1:
        raise DbtValidationError(f"mixed units in spectrum CSV: {sorted(units)}")
    try:
        tag = SpectrumUnits(units.pop()) if units else SpectrumUnits.VoltsSquaredPerHertz
    except ValueError:
        raise DbtValidationError("units must be one of V^2/Hz, dimensionless") from None
    return SpectrumSeries(_float_column(table, "f_hz"), _float_column(table, "value"), tag)
