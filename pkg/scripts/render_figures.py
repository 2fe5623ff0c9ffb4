"""Master script to render every figure preset at desk scale."""

import sys
from pathlib import Path

import click

# Add parent directory to path
sys.path.append(str(Path(__file__).parent.parent))
from config.config import (
    BASINS_DIR,
    FIGURE_PRESETS,
    ORBIT_DEFAULTS,
    PARAMETER_SPACES_DIR,
    PLANES_DIR,
    RENDER_CONFIG,
    REPORTS_DIR,
    STABILITY_DIR,
    VERIFY_CONFIG,
    ensure_directories,
    worker_count,
)
from dynamics.errors import format_ratio
from dynamics.orbits import OrbitConfig
from dynamics.raster import (
    RenderRegion,
    render_basins_G,
    render_dynamical_plane,
    render_parameter_space,
    render_stability_regions,
    save_csv,
    save_ppm,
)
from dynamics.verify import is_healthy, reports_frame, run_all


def _save(grid, directory: Path, stem: str):
    path = save_ppm(grid, directory / f"{stem}.ppm")
    save_csv(grid, directory / f"{stem}.csv")
    click.echo(f"  ✓ {stem} -> {path}")


def render_all_figures(grid: str = RENDER_CONFIG["grid"], workers: int = 1, skip_verify: bool = False) -> bool:
    """Render the presets in order and write the oracle report.

    Args:
        grid: Raster size "WxH" used for every image.
        workers: Render threads per image.
        skip_verify: Leave out the oracle suite.
    """
    region = RenderRegion.from_text(RENDER_CONFIG["region"], grid)
    tile_rows = RENDER_CONFIG["tile_rows"]
    plane_cfg = OrbitConfig(**ORBIT_DEFAULTS["plane"])
    strict_cfg = OrbitConfig(**ORBIT_DEFAULTS["plane_strict"])

    click.echo("=" * 60)
    click.echo("CHEBYDYN - FIGURE RENDERING")
    click.echo("=" * 60)

    click.echo("\n1. Setting up directory structure...")
    ensure_directories()

    click.echo("\n2. Rendering stable dynamical planes...")
    for K in FIGURE_PRESETS["stable_real_planes"]:
        _save(render_dynamical_plane(K, region, plane_cfg, workers, tile_rows), PLANES_DIR, f"plane_K{format_ratio(K)}")
    for K in FIGURE_PRESETS["complex_planes"]:
        _save(render_dynamical_plane(K, region, strict_cfg, workers, tile_rows), PLANES_DIR, f"plane_K{format_ratio(K)}")

    click.echo("\n3. Rendering unstable dynamical planes...")
    for K in FIGURE_PRESETS["unstable_planes"]:
        _save(render_dynamical_plane(K, region, strict_cfg, workers, tile_rows), PLANES_DIR, f"plane_K{format_ratio(K)}")

    click.echo("\n4. Rendering parameter spaces...")
    param_cfg = OrbitConfig(**ORBIT_DEFAULTS["param"])
    for which in FIGURE_PRESETS["parameter_spaces"]:
        _save(render_parameter_space(which, region, param_cfg, workers, tile_rows), PARAMETER_SPACES_DIR, f"param_{which}")

    click.echo("\n5. Rendering basins of G...")
    basins_cfg = OrbitConfig(**ORBIT_DEFAULTS["basins"])
    for K in FIGURE_PRESETS["basins"]:
        _save(render_basins_G(K, region, basins_cfg, workers, tile_rows), BASINS_DIR, f"basins_K{format_ratio(K)}")

    click.echo("\n6. Rendering stability regions...")
    for which in FIGURE_PRESETS["stability_regions"]:
        _save(render_stability_regions(which, region, workers, tile_rows), STABILITY_DIR, f"stability_{which}")

    healthy = True
    if not skip_verify:
        click.echo("\n7. Running oracle suite...")
        reports = run_all(VERIFY_CONFIG["seed"], VERIFY_CONFIG["samples"], VERIFY_CONFIG["random_ratio_count"])
        path = REPORTS_DIR / "oracles.csv"
        reports_frame(reports).to_csv(path, index=False)
        healthy = is_healthy(reports)
        mark = "✓" if healthy else "✗"
        click.echo(f"  {mark} {len(reports)} oracle reports -> {path}")

    click.echo("\n" + "=" * 60)
    click.echo("✓ ALL FIGURES RENDERED!" if healthy else "✗ FIGURES RENDERED, ORACLES REGRESSED")
    click.echo("=" * 60)
    return healthy


@click.command()
@click.option("--grid", default=RENDER_CONFIG["grid"], show_default=True, help="Raster size WxH.")
@click.option("--workers", type=click.IntRange(min=1), envvar="CHEBYDYN_WORKERS", default=None)
@click.option("--skip-verify", is_flag=True, help="Do not run the oracle suite.")
def main(grid, workers, skip_verify):
    """Render all figure presets into the output directory."""
    try:
        healthy = render_all_figures(grid, workers or worker_count(), skip_verify)
    except Exception as e:
        click.echo(f"\n✗ Error during rendering: {e}", err=True)
        raise SystemExit(1)
    raise SystemExit(0 if healthy else 1)


if __name__ == "__main__":
    main()
