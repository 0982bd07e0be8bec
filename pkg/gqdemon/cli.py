"""
Command-line interface for gqdemon.

Provides the `gqdemon` command with `measure`, `protocol`, `sweep` and
`validate` subcommands. Tables go to stdout or `--out`; diagnostics go to
stderr. Exit codes: 0 success, 2 usage or parse error, 3 validation error,
4 numerical failure.
"""

import contextlib
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional

import numpy as np
import pydantic
import typer
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from typing_extensions import Annotated

from .config import RunConfig
from .correlations import mid_multipartite
from .demon import run_protocol
from .errors import LabelError, NumericalError, StateSpecError, ValidationError
from .measurement import ProductBasisSpec
from .optimizer import (
    MinimizationResult,
    minimize_gqd,
    minimize_original_qd,
    minimize_thermal_qd,
)
from .qcore import DensityMatrix, SubsystemLayout, von_neumann_entropy
from .report import metadata, render_csv, render_json, write_output
from .states import StateFamilySpec


logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

app = typer.Typer(add_completion=False, no_args_is_help=True)
_console = Console(stderr=True)


class MeasureName(str, Enum):
    thermal_qd = "thermal_qd"
    original_qd = "original_qd"
    gqd = "gqd"
    mid = "mid"


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"


StateOption = Annotated[
    Optional[str],
    typer.Option("--state", help="State spec, e.g. ghz:3, schmidt:3:0.25, werner-ghz:0.5"),
]
StateFileOption = Annotated[
    Optional[Path],
    typer.Option("--state-file", help="Density matrix file (header qubits=<n>)", dir_okay=False),
]
ThetaOption = Annotated[
    int, typer.Option("--theta-steps", envvar="GQDEMON_THETA_STEPS", help="Polar grid points")
]
PhiOption = Annotated[
    int, typer.Option("--phi-steps", envvar="GQDEMON_PHI_STEPS", help="Azimuthal grid points")
]
NoRefineOption = Annotated[
    bool, typer.Option("--no-refine", help="Skip the simplex refinement after the grid search")
]
OrderOption = Annotated[
    Optional[str], typer.Option("--order", help="Comma-separated measurement order, e.g. C,A,B")
]
FormatOption = Annotated[OutputFormat, typer.Option("--format", help="Output format")]
OutOption = Annotated[
    Optional[Path], typer.Option("--out", "-o", help="Output file (default: stdout)", dir_okay=False)
]
PrecisionOption = Annotated[
    int, typer.Option("--precision", help="Significant digits in the output (1-12)")
]
SeedOption = Annotated[int, typer.Option("--seed", help="Grid enumeration seed (tie-breaking)")]
ParallelOption = Annotated[int, typer.Option("--parallel", help="Worker threads")]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging on stderr")]


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=_console, show_path=False)],
        force=True,
    )


def _fail(message: str, code: int) -> typer.Exit:
    typer.echo(f"Error: {message}", err=True)
    return typer.Exit(code)


@contextlib.contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate library errors into exit codes with a message on stderr."""
    try:
        yield
    except StateSpecError as exc:
        raise _fail(str(exc), EXIT_USAGE) from None
    except pydantic.ValidationError as exc:
        raise _fail(str(exc), EXIT_USAGE) from None
    except (ValidationError, LabelError) as exc:
        raise _fail(str(exc), EXIT_VALIDATION) from None
    except NumericalError as exc:
        raise _fail(str(exc), EXIT_NUMERICAL) from None


def _parse_complex(token: str, line: int, column: int) -> complex:
    try:
        return complex(token)
    except ValueError:
        raise StateSpecError(f"not a complex number: {token!r}", line, column) from None


def load_state(path: Path) -> DensityMatrix:
    """Read a density matrix file.

    Format: a `qubits=<n>` header, then 2^n rows of 2^n whitespace-separated
    complex entries written as `re+imj`. Blank lines and lines starting with
    `#` are ignored.
    """
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateSpecError(f"cannot read {path}: {exc}") from None

    lines = [
        (number, line)
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise StateSpecError("empty matrix file")

    number, header = lines[0]
    key, _, value = header.strip().partition("=")
    if key.strip() != "qubits" or not value.strip().isdigit():
        raise StateSpecError(f"expected header 'qubits=<n>', got {header.strip()!r}", number, 1)
    n = int(value)
    layout = SubsystemLayout.qubits(n)
    dim = layout.dim

    rows = lines[1:]
    if len(rows) != dim:
        line = rows[-1][0] if rows else number
        raise StateSpecError(f"expected {dim} matrix rows, got {len(rows)}", line)

    matrix = np.zeros((dim, dim), dtype=complex)
    for i, (number, line) in enumerate(rows):
        tokens = []
        position = 0
        for token in line.split():
            position = line.index(token, position)
            tokens.append((token, position + 1))
            position += len(token)
        if len(tokens) != dim:
            raise StateSpecError(f"expected {dim} entries, got {len(tokens)}", number)
        for j, (token, column) in enumerate(tokens):
            matrix[i, j] = _parse_complex(token, number, column)

    logger.debug("loaded %d-qubit state from %s", n, path)
    return DensityMatrix(layout, matrix)


def _resolve_state(config: RunConfig) -> DensityMatrix:
    if (config.state is None) == (config.state_file is None):
        raise StateSpecError("give exactly one of --state or --state-file")
    if config.state_file is not None:
        return load_state(Path(config.state_file))
    return StateFamilySpec.parse(config.state).build()


def _state_name(config: RunConfig) -> str:
    if config.state_file is not None:
        return config.state_file
    return StateFamilySpec.parse(config.state).canonical()


def _parse_order(order: Optional[str]) -> Optional[tuple[str, ...]]:
    if order is None:
        return None
    return tuple(label.strip() for label in order.split(",") if label.strip())


def _angles(spec: ProductBasisSpec) -> dict[str, float]:
    columns = {}
    for label, basis in spec.bases.items():
        columns[f"theta_{label}"] = basis.theta
        columns[f"phi_{label}"] = basis.phi
    return columns


def _emit(config: RunConfig, rows: list[dict[str, Any]], payload: dict[str, Any], meta: dict) -> None:
    out = Path(config.out) if config.out else None
    if config.format == "json":
        text = render_json(payload, meta, config.precision)
    else:
        columns = list(rows[0]) if rows else []
        text = render_csv(rows, columns, meta, config.precision)
    write_output(text, out)


def _measure_value(config: RunConfig, rho: DensityMatrix) -> dict[str, Any]:
    grid = config.grid()
    apparatus = config.apparatus or rho.labels[0]
    row: dict[str, Any] = {"state": _state_name(config), "measure": config.measure}

    if config.measure == "mid":
        mid = mid_multipartite(rho)
        row.update(value=mid.value, evaluations=0, refined=False, heuristic=False)
        row.update(_angles(mid.spec))
        row["fallback"] = ",".join(mid.fallback)
        return row

    result: MinimizationResult
    if config.measure == "gqd":
        result = minimize_gqd(rho, grid, [mid_multipartite(rho).spec], config.parallel)
    elif config.measure == "thermal_qd":
        row["apparatus"] = apparatus
        result = minimize_thermal_qd(rho, apparatus, grid)
    else:
        row["apparatus"] = apparatus
        result = minimize_original_qd(rho, apparatus, grid)

    row.update(
        value=result.value,
        evaluations=result.evaluations,
        refined=result.refined,
        heuristic=result.heuristic,
    )
    row.update(_angles(result.argmin_spec))
    return row


@app.command()
def measure(
    state: StateOption = None,
    state_file: StateFileOption = None,
    measure: Annotated[
        MeasureName, typer.Option("--measure", help="Quantity to compute")
    ] = MeasureName.gqd,
    apparatus: Annotated[
        Optional[str], typer.Option("--apparatus", help="Measured subsystem for thermal_qd/original_qd")
    ] = None,
    theta_steps: ThetaOption = 25,
    phi_steps: PhiOption = 25,
    no_refine: NoRefineOption = False,
    output_format: FormatOption = OutputFormat.csv,
    out: OutOption = None,
    precision: PrecisionOption = 6,
    seed: SeedOption = 0,
    parallel: ParallelOption = 1,
    verbose: VerboseOption = False,
):
    """Compute one correlation measure of a state."""
    _configure_logging(verbose)
    with _exit_codes():
        config = RunConfig(
            command="measure",
            state=state,
            state_file=str(state_file) if state_file else None,
            measure=measure.value,
            apparatus=apparatus,
            theta_steps=theta_steps,
            phi_steps=phi_steps,
            refine=not no_refine,
            format=output_format.value,
            out=str(out) if out else None,
            precision=precision,
            seed=seed,
            parallel=parallel,
        )
        rho = _resolve_state(config)
        row = _measure_value(config, rho)
        meta = metadata(config.grid().to_dict())
        _emit(config, [row], row, meta)


@app.command()
def protocol(
    state: StateOption = None,
    state_file: StateFileOption = None,
    order: OrderOption = None,
    theta_steps: ThetaOption = 25,
    phi_steps: PhiOption = 25,
    no_refine: NoRefineOption = False,
    output_format: FormatOption = OutputFormat.csv,
    out: OutOption = None,
    precision: PrecisionOption = 6,
    seed: SeedOption = 0,
    parallel: ParallelOption = 1,
    verbose: VerboseOption = False,
):
    """Run the sequential demon protocol and compare it with the GQD and MID bounds."""
    _configure_logging(verbose)
    with _exit_codes():
        config = RunConfig(
            command="protocol",
            state=state,
            state_file=str(state_file) if state_file else None,
            order=_parse_order(order),
            theta_steps=theta_steps,
            phi_steps=phi_steps,
            refine=not no_refine,
            format=output_format.value,
            out=str(out) if out else None,
            precision=precision,
            seed=seed,
            parallel=parallel,
        )
        rho = _resolve_state(config)
        report = run_protocol(rho, config.order, config.grid(), config.parallel)

        rows = []
        for step in report.steps:
            row = {
                "step": step.index,
                "apparatus": step.apparatus,
                "dw": step.advantage,
                "quantum_work": step.quantum_work,
                "classical_work": step.classical_work,
                "erasure_cost": step.erasure_cost,
            }
            row.update(_angles(step.argmin_spec))
            rows.append(row)

        meta = metadata(
            report.grid,
            state=_state_name(config),
            order=",".join(report.order),
            dw_total=report.total_advantage,
            gqd_bound=report.gqd_bound,
            mid_bound=report.mid_bound,
            saturated=report.saturated,
            heuristic=report.heuristic,
        )
        _emit(config, rows, report.to_dict(), meta)


def _sweep_row(spec: StateFamilySpec, lam: float, config: RunConfig) -> dict[str, float]:
    report = run_protocol(spec.with_lambda(lam).build(), None, config.grid())
    return {
        "lambda": lam,
        "mid": report.mid_bound,
        "gqd": report.gqd_bound,
        "dw_total": report.total_advantage,
    }


@app.command()
def sweep(
    state: Annotated[
        str, typer.Option("--state", help="Mixture family: werner-ghz or w-ghz")
    ] = "w-ghz",
    lam_from: Annotated[float, typer.Option("--from", help="First lambda")] = 0.0,
    lam_to: Annotated[float, typer.Option("--to", help="Last lambda")] = 1.0,
    step: Annotated[float, typer.Option("--step", help="Lambda increment")] = 0.05,
    theta_steps: ThetaOption = 25,
    phi_steps: PhiOption = 25,
    no_refine: NoRefineOption = False,
    output_format: FormatOption = OutputFormat.csv,
    out: OutOption = None,
    precision: PrecisionOption = 6,
    seed: SeedOption = 0,
    parallel: ParallelOption = 1,
    verbose: VerboseOption = False,
):
    """Tabulate MID, GQD and the demon's total advantage across lambda."""
    _configure_logging(verbose)
    with _exit_codes():
        config = RunConfig(
            command="sweep",
            state=state,
            lam_from=lam_from,
            lam_to=lam_to,
            lam_step=step,
            theta_steps=theta_steps,
            phi_steps=phi_steps,
            refine=not no_refine,
            format=output_format.value,
            out=str(out) if out else None,
            precision=precision,
            seed=seed,
            parallel=parallel,
        )
        spec = StateFamilySpec.parse(config.state)
        spec.with_lambda(0.0)
        lambdas = config.lambdas()
        logger.debug("sweep %s over %d points", spec.family, len(lambdas))

        if config.parallel > 1:
            with ThreadPoolExecutor(max_workers=config.parallel) as pool:
                rows = list(pool.map(lambda lam: _sweep_row(spec, lam, config), lambdas))
        else:
            rows = [_sweep_row(spec, lam, config) for lam in lambdas]

        meta = metadata(
            config.grid().to_dict(),
            state=spec.family,
            lambda_from=config.lam_from,
            lambda_to=config.lam_to,
            lambda_step=config.lam_step,
        )
        _emit(config, rows, {"rows": rows}, meta)


@app.command()
def validate(
    state_file: Annotated[
        Path, typer.Option("--state-file", help="Density matrix file to check", dir_okay=False)
    ],
    verbose: VerboseOption = False,
):
    """Check a density matrix file and summarize it."""
    _configure_logging(verbose)
    with _exit_codes():
        rho = load_state(state_file)
        entropy = von_neumann_entropy(rho)
        purity = float(np.real(np.trace(rho.entries @ rho.entries)))
        panel = Panel.fit(
            f"[bold]{state_file}[/bold]\n"
            f"qubits   {rho.n}\n"
            f"trace    {rho.trace():.12g}\n"
            f"purity   {purity:.6g}\n"
            f"entropy  {entropy:.6g} bits",
            title="valid density matrix",
            box=box.ROUNDED,
            padding=(1, 2),
        )
        Console().print(panel)


def main():
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    app()
