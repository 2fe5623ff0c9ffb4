"""Command-line front end: analysis, rendering and verification."""

import re
import sys
from pathlib import Path
from typing import Literal, Optional, Tuple

import click
from pydantic import BaseModel, ConfigDict, PositiveInt, ValidationError

# Add parent directory to path
sys.path.append(str(Path(__file__).parent.parent))
from config.config import (
    BASINS_DIR,
    ORBIT_DEFAULTS,
    PARAMETER_SPACES_DIR,
    PLANES_DIR,
    RENDER_CONFIG,
    STABILITY_DIR,
    VERIFY_CONFIG,
    worker_count,
)
from dynamics.analysis import (
    attracting_strange_points,
    critical_points_G,
    critical_points_S,
    fixed_points_G,
    fixed_points_S,
    stability_discrepancies,
)
from dynamics.errors import ChebydynError, format_ratio
from dynamics.numerics import INFINITY, format_point
from dynamics.operators import as_ratio, build_G, build_S
from dynamics.orbits import OrbitConfig, iterate_orbit, orbit_trace
from dynamics.raster import (
    CRITICAL_POINTS,
    STABILITY_TARGETS,
    RenderRegion,
    render_basins_G,
    render_dynamical_plane,
    render_parameter_space,
    render_stability_regions,
    save_csv,
    save_ppm,
)
from dynamics.verify import format_reports, is_healthy, reports_frame, run_all

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_IO = 3

SUBCOMMANDS = (
    "fixed-points",
    "critical-points",
    "render-plane",
    "render-param",
    "render-basins",
    "render-stability",
    "verify",
    "orbit",
)

# orbit budget used when --iters/--tol are not given
RENDERER_DEFAULTS = {
    "render-plane": "plane",
    "render-param": "param",
    "render-basins": "basins",
    "orbit": "plane",
}

DECIMAL = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


class CommandSpec(BaseModel):
    """A parsed invocation; every flag carries a default."""

    model_config = ConfigDict(frozen=True)

    subcommand: Literal[SUBCOMMANDS]
    k: Tuple[float, float] = (1.0, 0.0)
    region: RenderRegion = RenderRegion()
    iters: Optional[PositiveInt] = None
    tol: Optional[float] = None
    inf_threshold: Optional[float] = None
    critical: Literal[CRITICAL_POINTS] = "c1"
    which: Literal[STABILITY_TARGETS] = "z1"
    operator: Literal["s", "g"] = "s"
    out: Optional[Path] = None
    csv: Optional[Path] = None
    workers: PositiveInt = 1
    seed: int = VERIFY_CONFIG["seed"]
    seed_point: Tuple[float, float] = (0.0, 0.0)
    steps: int = 10

    @property
    def K(self) -> complex:
        return complex(*self.k)

    def orbit_config(self) -> OrbitConfig:
        defaults = ORBIT_DEFAULTS[RENDERER_DEFAULTS.get(self.subcommand, "plane")]
        return OrbitConfig(
            max_iters=defaults["max_iters"] if self.iters is None else self.iters,
            tol=defaults["tol"] if self.tol is None else self.tol,
            inf_threshold=self.inf_threshold,
        )


# ---------------------------------------------------------------------------
# Parameter types
# ---------------------------------------------------------------------------

class ComplexPair(click.ParamType):
    """Complex number written as "RE,IM" in plain decimals."""

    name = "RE,IM"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = str(value).split(",")
        if len(parts) != 2 or not all(DECIMAL.fullmatch(p.strip()) for p in parts):
            self.fail(f"expected RE,IM decimals, got {value!r}", param, ctx)
        return float(parts[0]), float(parts[1])


class DecimalFloat(click.ParamType):
    name = "DECIMAL"

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        if not DECIMAL.fullmatch(str(value).strip()):
            self.fail(f"expected a decimal number, got {value!r}", param, ctx)
        return float(value)


COMPLEX = ComplexPair()
DECIMAL_FLOAT = DecimalFloat()


def _options(*decorators):
    def apply(command):
        for decorator in reversed(decorators):
            command = decorator(command)
        return command

    return apply


k_option = click.option("--k", "k", type=COMPLEX, default="1,0", show_default=True, help="Multiplicity ratio K as RE,IM.")
map_option = click.option("--map", "operator", type=click.Choice(["s", "g"]), default="s", show_default=True, help="Operator to analyse.")
region_options = _options(
    click.option(
        "--region",
        default=RENDER_CONFIG["region"],
        show_default=True,
        help="re_min,re_max,im_min,im_max (parameter-space and stability windows are unpublished defaults).",
    ),
    click.option("--grid", default=RENDER_CONFIG["grid"], show_default=True, help="Raster size WxH."),
)
orbit_options = _options(
    click.option("--iters", type=click.IntRange(min=1), default=None, help="Iteration budget."),
    click.option("--tol", type=DECIMAL_FLOAT, default=None, help="Attractor proximity tolerance."),
    click.option("--inf-threshold", type=DECIMAL_FLOAT, default=None, help="Escape modulus (default 1/tol)."),
)
output_options = _options(
    click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Output file."),
    click.option("--csv", type=click.Path(dir_okay=False, path_type=Path), default=None, help="CSV sidecar."),
)
workers_option = click.option(
    "--workers",
    type=click.IntRange(min=1),
    envvar="CHEBYDYN_WORKERS",
    default=None,
    help="Parallel render workers (never changes output bytes).",
)


def _spec(subcommand: str, **params) -> CommandSpec:
    if "region" in params:
        try:
            params["region"] = RenderRegion.from_text(params["region"], params.pop("grid"))
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--region/--grid")
    if "workers" in params and params["workers"] is None:
        params["workers"] = worker_count()
    try:
        spec = CommandSpec(subcommand=subcommand, **params)
        if subcommand in RENDERER_DEFAULTS:
            spec.orbit_config()
    except ValidationError as e:
        raise click.UsageError(str(e))
    return spec


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@click.group(name="chebydyn")
def cli():
    """Dynamics of the modified Chebyshev family S(z;K) and G(z;K)."""


@cli.command("fixed-points")
@k_option
@map_option
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def fixed_points_command(**params):
    """Fixed points with multiplier moduli and stability."""
    return _spec("fixed-points", **params)


@cli.command("critical-points")
@k_option
@map_option
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def critical_points_command(**params):
    """Finite critical points with multiplicities."""
    return _spec("critical-points", **params)


@cli.command("render-plane")
@k_option
@region_options
@orbit_options
@output_options
@workers_option
def render_plane_command(**params):
    """Dynamical plane of S_K."""
    return _spec("render-plane", **params)


@cli.command("render-param")
@click.option("--critical", type=click.Choice(CRITICAL_POINTS), default="c1", show_default=True)
@region_options
@orbit_options
@output_options
@workers_option
def render_param_command(**params):
    """Parameter space seeded by a critical point."""
    return _spec("render-param", **params)


@cli.command("render-basins")
@k_option
@region_options
@orbit_options
@output_options
@workers_option
def render_basins_command(**params):
    """Basins of 1 and -1 under G_K."""
    return _spec("render-basins", **params)


@cli.command("render-stability")
@click.option("--which", type=click.Choice(STABILITY_TARGETS), default="z1", show_default=True)
@region_options
@output_options
@workers_option
def render_stability_command(**params):
    """Attraction zones of a strange fixed point over the K-plane."""
    return _spec("render-stability", **params)


@cli.command("verify")
@click.option("--seed", type=int, default=VERIFY_CONFIG["seed"], show_default=True)
@output_options
def verify_command(**params):
    """Run the numerical oracle suite."""
    return _spec("verify", **params)


@cli.command("orbit")
@k_option
@map_option
@click.option("--seed-point", type=COMPLEX, default="0,0", show_default=True)
@click.option("--steps", type=click.IntRange(min=0, max=10 ** 6), default=10, show_default=True)
@orbit_options
def orbit_command(**params):
    """Orbit of a seed and its classification."""
    return _spec("orbit", **params)


def parse_args(argv) -> CommandSpec:
    """Parse argv into a CommandSpec; raises click.UsageError on bad input."""
    return cli.main(args=list(argv), prog_name="chebydyn", standalone_mode=False)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _emit(lines, out: Optional[Path]):
    text = "\n".join(lines) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        click.echo(f"✓ Written {out}")


def _run_fixed_points(spec: CommandSpec) -> int:
    finder = fixed_points_S if spec.operator == "s" else fixed_points_G
    lines = [report.as_record(spec.K) for report in finder(spec.K)]
    if spec.operator == "s":
        discrepancies = stability_discrepancies(spec.K)
        if discrepancies:
            lines.append("")
            lines.append("closed forms disagreeing with direct evaluation:")
            lines += [d.as_record() for d in discrepancies]
    _emit(lines, spec.out)
    return EXIT_OK


def _run_critical_points(spec: CommandSpec) -> int:
    finder = critical_points_S if spec.operator == "s" else critical_points_G
    K = format_ratio(as_ratio(spec.K).K)
    lines = [f"{K}, {format_point(point)}, {mult}" for point, mult in finder(spec.K).points]
    _emit(lines, spec.out)
    return EXIT_OK


def default_output(spec: CommandSpec) -> Path:
    K = format_ratio(spec.K)
    return {
        "render-plane": PLANES_DIR / f"plane_K{K}.ppm",
        "render-param": PARAMETER_SPACES_DIR / f"param_{spec.critical}.ppm",
        "render-basins": BASINS_DIR / f"basins_K{K}.ppm",
        "render-stability": STABILITY_DIR / f"stability_{spec.which}.ppm",
    }[spec.subcommand]


def render(spec: CommandSpec):
    if spec.subcommand == "render-plane":
        return render_dynamical_plane(spec.K, spec.region, spec.orbit_config(), spec.workers, RENDER_CONFIG["tile_rows"])
    if spec.subcommand == "render-param":
        return render_parameter_space(spec.critical, spec.region, spec.orbit_config(), spec.workers, RENDER_CONFIG["tile_rows"])
    if spec.subcommand == "render-basins":
        return render_basins_G(spec.K, spec.region, spec.orbit_config(), spec.workers, RENDER_CONFIG["tile_rows"])
    return render_stability_regions(spec.which, spec.region, spec.workers, RENDER_CONFIG["tile_rows"])


def _run_render(spec: CommandSpec) -> int:
    grid = render(spec)
    path = save_ppm(grid, spec.out or default_output(spec))
    if spec.csv:
        save_csv(grid, spec.csv)
    counts = ", ".join(f"{letter}={n}" for letter, n in grid.summary().items())
    click.echo(f"✓ {spec.subcommand} -> {path} ({counts})")
    return EXIT_OK


def _run_verify(spec: CommandSpec) -> int:
    reports = run_all(
        seed=spec.seed,
        samples=VERIFY_CONFIG["samples"],
        random_ratio_count=VERIFY_CONFIG["random_ratio_count"],
    )
    _emit([format_reports(reports)], spec.out)
    if spec.csv:
        spec.csv.parent.mkdir(parents=True, exist_ok=True)
        reports_frame(reports).to_csv(spec.csv, index=False)
    if is_healthy(reports):
        click.echo("✓ All oracles behave as expected")
        return EXIT_OK
    for report in reports:
        if not report.healthy:
            click.echo(f"✗ {report.name}: {report.notes or report.max_rel_error}", err=True)
    return EXIT_DOMAIN


def _run_orbit(spec: CommandSpec) -> int:
    if spec.operator == "s":
        F, targets, reports = build_S(spec.K), (0j, INFINITY), fixed_points_S(spec.K)
    else:
        F, targets, reports = build_G(spec.K), (1 + 0j, -1 + 0j), fixed_points_G(spec.K)
    seed = complex(*spec.seed_point)
    lines = [f"{n}: {format_point(z)}" for n, z in enumerate(orbit_trace(F, seed, spec.steps))]
    strange = attracting_strange_points(reports)
    outcome = iterate_orbit(F, seed, spec.orbit_config(), strange, targets)
    lines.append(f"outcome: {outcome.describe()}, final {format_point(outcome.final)}")
    _emit(lines, None)
    return EXIT_OK


HANDLERS = {
    "fixed-points": _run_fixed_points,
    "critical-points": _run_critical_points,
    "render-plane": _run_render,
    "render-param": _run_render,
    "render-basins": _run_render,
    "render-stability": _run_render,
    "verify": _run_verify,
    "orbit": _run_orbit,
}


def run(spec: CommandSpec) -> int:
    """Execute a parsed command and return its exit code."""
    try:
        return HANDLERS[spec.subcommand](spec)
    except ChebydynError as e:
        click.echo(f"✗ Error: {e}", err=True)
        return EXIT_DOMAIN
    except OSError as e:
        click.echo(f"✗ I/O error: {e}", err=True)
        return EXIT_IO


def main(argv=None) -> int:
    """Main entry point."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return e.exit_code
    if not isinstance(spec, CommandSpec):
        return spec or EXIT_OK
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
