"""Grid renderers and image encoding.

Rows are cut into fixed-height tiles that are rendered independently
(optionally on a thread pool) and stitched back by index, so the worker
count never changes a single output byte.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator

from dynamics.analysis import (
    attracting_strange_points,
    critical_point,
    fixed_points_G,
    fixed_points_S,
    stability_min_fns,
)
from dynamics.errors import is_undefined
from dynamics.numerics import INFINITY, rational_apply_batch
from dynamics.operators import (
    REMOVABLE_RATIOS,
    as_ratio,
    build_G,
    build_S,
    s_coefficient_columns,
    snap_ratio,
)
from dynamics.orbits import OrbitConfig, OrbitStatus, iterate_orbit, map_step, run_orbits

DEFAULT_TILE_ROWS = 8
SHADE_RANGE = 200

CRITICAL_POINTS = ("c1", "c2", "c3")
STABILITY_TARGETS = ("z1", "z2", "z3")


class RenderRegion(BaseModel):
    """Rectangle of the complex plane sampled at pixel centres; row 0 is the top."""

    model_config = ConfigDict(frozen=True)

    re_min: float = -5.0
    re_max: float = 5.0
    im_min: float = -5.0
    im_max: float = 5.0
    width: PositiveInt = 200
    height: PositiveInt = 200

    @model_validator(mode="after")
    def _ordered_bounds(self):
        if not self.re_min < self.re_max:
            raise ValueError(f"re_min must be below re_max ({self.re_min} >= {self.re_max})")
        if not self.im_min < self.im_max:
            raise ValueError(f"im_min must be below im_max ({self.im_min} >= {self.im_max})")
        return self

    @classmethod
    def from_text(cls, region: str, grid: str) -> "RenderRegion":
        """Parse "re_min,re_max,im_min,im_max" and "WxH"."""
        bounds = [float(part) for part in region.split(",")]
        if len(bounds) != 4:
            raise ValueError(f"region needs four comma-separated numbers, got {region!r}")
        size = grid.lower().split("x")
        if len(size) != 2:
            raise ValueError(f"grid must look like WxH, got {grid!r}")
        width, height = (int(part) for part in size)
        re_min, re_max, im_min, im_max = bounds
        return cls(re_min=re_min, re_max=re_max, im_min=im_min, im_max=im_max, width=width, height=height)

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / self.width

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / self.height

    def point(self, i: int, j: int) -> complex:
        return complex(self.re_min + (i + 0.5) * self.dx, self.im_max - (j + 0.5) * self.dy)

    def points(self, j0: int, j1: int) -> np.ndarray:
        """Pixel centres of rows j0..j1-1, shape (j1 - j0, width)."""
        re = self.re_min + (np.arange(self.width) + 0.5) * self.dx
        im = self.im_max - (np.arange(j0, j1) + 0.5) * self.dy
        out = np.empty((j1 - j0, self.width), dtype=complex)
        out.real = re[None, :]
        out.imag = im[:, None]
        return out


class PixelColor(IntEnum):
    BLACK = 0
    RED = 1
    GREEN = 2
    YELLOW = 3
    WHITE = 4
    BLUE = 5


CLASS_LETTERS = {
    PixelColor.RED: "R",
    PixelColor.GREEN: "G",
    PixelColor.YELLOW: "Y",
    PixelColor.BLACK: "B",
    PixelColor.WHITE: "W",
    PixelColor.BLUE: "Z",
}

PLANE_COLORS = {
    OrbitStatus.TO_ZERO: PixelColor.RED,
    OrbitStatus.TO_INFINITY: PixelColor.GREEN,
    OrbitStatus.TO_STRANGE: PixelColor.YELLOW,
    OrbitStatus.NO_CONVERGENCE: PixelColor.BLACK,
}

# parameter spaces keep the three-colour legend: strange landings are black
PARAMETER_COLORS = {**PLANE_COLORS, OrbitStatus.TO_STRANGE: PixelColor.BLACK}


@dataclass(frozen=True)
class PixelClass:
    color: PixelColor
    iters: int

    @property
    def letter(self) -> str:
        return CLASS_LETTERS[self.color]


@dataclass(frozen=True)
class RasterGrid:
    """Rendered grid; arrays are (height, width), row 0 on top."""

    region: RenderRegion
    colors: np.ndarray
    iters: np.ndarray
    max_iters: int
    finals: np.ndarray
    final_inf: np.ndarray
    shade: Optional[np.ndarray] = None

    @property
    def width(self) -> int:
        return self.region.width

    @property
    def height(self) -> int:
        return self.region.height

    def pixel(self, i: int, j: int) -> PixelClass:
        return PixelClass(PixelColor(int(self.colors[j, i])), int(self.iters[j, i]))

    def count(self, color: PixelColor) -> int:
        return int(np.count_nonzero(self.colors == color))

    def fraction(self, color: PixelColor) -> float:
        return self.count(color) / self.colors.size

    def summary(self) -> Dict[str, int]:
        return {CLASS_LETTERS[color]: self.count(color) for color in PixelColor if self.count(color)}


# ---------------------------------------------------------------------------
# Tiling
# ---------------------------------------------------------------------------

def _tiles(height: int, tile_rows: int) -> List[Tuple[int, int]]:
    return [(j0, min(j0 + tile_rows, height)) for j0 in range(0, height, tile_rows)]


def _render_tiles(region: RenderRegion, render_tile: Callable, workers: int, tile_rows: int):
    tiles = _tiles(region.height, max(1, tile_rows))
    if workers > 1 and len(tiles) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(render_tile, tiles))
    else:
        parts = [render_tile(tile) for tile in tiles]
    return [np.concatenate(arrays, axis=0) for arrays in zip(*parts)]


def _batch_tile(batch, shape, palette: Dict[OrbitStatus, PixelColor]):
    lookup = np.zeros(len(OrbitStatus), dtype=np.uint8)
    for status, color in palette.items():
        lookup[status] = color
    return (
        lookup[batch.status].reshape(shape),
        batch.iters.reshape(shape),
        batch.final.reshape(shape),
        batch.final_inf.reshape(shape),
    )


def _orbit_grid(F, region, cfg, targets, strange, palette, workers, tile_rows) -> RasterGrid:
    step = map_step(F)

    def render_tile(rows):
        seeds = region.points(*rows)
        batch = run_orbits(step, seeds, np.zeros(seeds.shape, dtype=bool), cfg, targets, strange)
        return _batch_tile(batch, seeds.shape, palette)

    colors, iters, finals, final_inf = _render_tiles(region, render_tile, workers, tile_rows)
    return RasterGrid(region, colors, iters, cfg.max_iters, finals, final_inf)


# ---------------------------------------------------------------------------
# Renderers
# ---------------------------------------------------------------------------

def render_dynamical_plane(
    K, region: RenderRegion, cfg: OrbitConfig, workers: int = 1, tile_rows: int = DEFAULT_TILE_ROWS
) -> RasterGrid:
    """Seeds coloured by where their S_K orbit settles: red 0, green infinity, yellow strange."""
    ratio = as_ratio(K)
    strange = attracting_strange_points(fixed_points_S(ratio))
    return _orbit_grid(
        build_S(ratio), region, cfg, (0j, INFINITY), strange, PLANE_COLORS, workers, tile_rows
    )


def render_basins_G(
    K, region: RenderRegion, cfg: OrbitConfig, workers: int = 1, tile_rows: int = DEFAULT_TILE_ROWS
) -> RasterGrid:
    """Basins of the roots 1 (red) and -1 (green) under G_K."""
    ratio = as_ratio(K)
    strange = attracting_strange_points(fixed_points_G(ratio))
    return _orbit_grid(
        build_G(ratio), region, cfg, (1 + 0j, -1 + 0j), strange, PLANE_COLORS, workers, tile_rows
    )


def _parameter_seeds(K_values: np.ndarray, which: str):
    """Snapped ratios and critical seeds; absent seeds are flagged."""
    ratios = np.empty(K_values.shape, dtype=complex)
    seeds = np.zeros(K_values.shape, dtype=complex)
    present = np.zeros(K_values.shape, dtype=bool)
    for n, K in enumerate(K_values):
        K = snap_ratio(K)
        ratios[n] = K
        if K == 0:
            continue
        seed = critical_point(K, which)
        if seed is not None:
            seeds[n] = seed
            present[n] = True
    return ratios, seeds, present


def render_parameter_space(
    which: str, region: RenderRegion, cfg: OrbitConfig, workers: int = 1, tile_rows: int = DEFAULT_TILE_ROWS
) -> RasterGrid:
    """K-plane coloured by the fate of the chosen critical point of S_K."""
    which = which.lower()
    if which not in CRITICAL_POINTS:
        raise ValueError(f"unknown critical point {which!r}")

    def render_tile(rows):
        shape = (rows[1] - rows[0], region.width)
        ratios, seeds, present = _parameter_seeds(region.points(*rows).ravel(), which)
        colors = np.zeros(ratios.shape, dtype=np.uint8)
        iters = np.zeros(ratios.shape, dtype=np.int32)
        finals = np.zeros(ratios.shape, dtype=complex)
        final_inf = np.zeros(ratios.shape, dtype=bool)

        reduced = present & np.isin(ratios, REMOVABLE_RATIOS)
        batched = np.flatnonzero(present & ~reduced)
        if batched.size:
            num, den = s_coefficient_columns(ratios[batched])

            def step(z, z_inf, index):
                return rational_apply_batch(num[:, index], den[:, index], z, z_inf)

            batch = run_orbits(step, seeds[batched], np.zeros(batched.size, dtype=bool), cfg)
            tile = _batch_tile(batch, batched.shape, PARAMETER_COLORS)
            colors[batched] = tile[0]
            iters[batched] = tile[1]
            finals[batched] = tile[2]
            final_inf[batched] = tile[3]

        for n in np.flatnonzero(reduced):
            outcome = iterate_orbit(build_S(ratios[n]), seeds[n], cfg)
            colors[n] = PARAMETER_COLORS[outcome.status]
            iters[n] = outcome.iters
            final_inf[n] = outcome.final is INFINITY
            finals[n] = 0j if final_inf[n] else outcome.final
        return colors.reshape(shape), iters.reshape(shape), finals.reshape(shape), final_inf.reshape(shape)

    colors, iters, finals, final_inf = _render_tiles(region, render_tile, workers, tile_rows)
    return RasterGrid(region, colors, iters, cfg.max_iters, finals, final_inf)


def stability_pixel(K: complex, which: str) -> Tuple[PixelColor, int]:
    """Colour and blue intensity of one stability-region pixel."""
    z1, (z2, z3) = stability_min_fns(K)
    value = {"z1": z1, "z2": z2, "z3": z3}[which]
    if is_undefined(value):
        return PixelColor.BLACK, 0
    if value >= 1:
        return PixelColor.WHITE, 0
    return PixelColor.BLUE, int(np.floor(255 * (1 - value)))


def render_stability_regions(
    which: str, region: RenderRegion, workers: int = 1, tile_rows: int = DEFAULT_TILE_ROWS
) -> RasterGrid:
    """K-plane shaded where the chosen strange fixed point attracts."""
    which = which.lower()
    if which not in STABILITY_TARGETS:
        raise ValueError(f"unknown stability target {which!r}")

    def render_tile(rows):
        K_values = region.points(*rows)
        colors = np.zeros(K_values.shape, dtype=np.uint8)
        shade = np.zeros(K_values.shape, dtype=np.uint8)
        for (r, c), K in np.ndenumerate(K_values):
            colors[r, c], shade[r, c] = stability_pixel(K, which)
        return colors, shade

    colors, shade = _render_tiles(region, render_tile, workers, tile_rows)
    shape = colors.shape
    return RasterGrid(
        region,
        colors,
        np.zeros(shape, dtype=np.int32),
        1,
        np.zeros(shape, dtype=complex),
        np.zeros(shape, dtype=bool),
        shade,
    )


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def _rgb(grid: RasterGrid) -> np.ndarray:
    c = (255 - (SHADE_RANGE * grid.iters.astype(np.int64)) // grid.max_iters).clip(0, 255).astype(np.uint8)
    rgb = np.zeros(grid.colors.shape + (3,), dtype=np.uint8)
    colors = grid.colors

    red = colors == PixelColor.RED
    green = colors == PixelColor.GREEN
    yellow = colors == PixelColor.YELLOW
    rgb[..., 0] = np.where(red | yellow, c, 0)
    rgb[..., 1] = np.where(green | yellow, c, 0)
    rgb[colors == PixelColor.WHITE] = 255
    if grid.shade is not None:
        blue = colors == PixelColor.BLUE
        rgb[..., 2] = np.where(blue, grid.shade, rgb[..., 2])
    return rgb


def encode_ppm(grid: RasterGrid) -> bytes:
    """Binary P6 image, rows top to bottom."""
    header = f"P6\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + _rgb(grid).tobytes()


def grid_frame(grid: RasterGrid) -> pd.DataFrame:
    """One row per pixel, row-major: i, j, class, iters."""
    j, i = np.indices(grid.colors.shape)
    letters = np.array([CLASS_LETTERS.get(PixelColor(v), "B") for v in range(len(PixelColor))])
    return pd.DataFrame(
        {
            "i": i.ravel(),
            "j": j.ravel(),
            "class": letters[grid.colors.ravel()],
            "iters": grid.iters.ravel(),
        }
    )


def save_ppm(grid: RasterGrid, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_ppm(grid))
    return path


def save_csv(grid: RasterGrid, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid_frame(grid).to_csv(path, index=False)
    return path
