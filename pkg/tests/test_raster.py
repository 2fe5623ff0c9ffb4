import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from config.config import ORBIT_DEFAULTS
from dynamics.analysis import attracting_strange_points, fixed_points_S
from dynamics.operators import build_S
from dynamics.orbits import OrbitConfig, iterate_orbit
from dynamics.raster import (
    PLANE_COLORS,
    PixelColor,
    RasterGrid,
    RenderRegion,
    encode_ppm,
    grid_frame,
    render_basins_G,
    render_dynamical_plane,
    render_parameter_space,
    render_stability_regions,
    save_csv,
    save_ppm,
    stability_pixel,
)

HEADER_1x1 = b"P6\n1 1\n255\n"


def single_pixel(center: complex) -> RenderRegion:
    return RenderRegion(
        re_min=center.real - 0.5,
        re_max=center.real + 0.5,
        im_min=center.imag - 0.5,
        im_max=center.imag + 0.5,
        width=1,
        height=1,
    )


def hand_grid(colors, iters, max_iters=50) -> RasterGrid:
    colors = np.array(colors, dtype=np.uint8)
    shape = colors.shape
    region = RenderRegion(width=shape[1], height=shape[0])
    return RasterGrid(
        region,
        colors,
        np.array(iters, dtype=np.int32),
        max_iters,
        np.zeros(shape, dtype=complex),
        np.zeros(shape, dtype=bool),
    )


class TestRenderRegion:
    def test_defaults(self):
        region = RenderRegion()
        assert (region.width, region.height) == (200, 200)
        assert region.dx == pytest.approx(0.05)

    def test_bounds_must_be_ordered(self):
        with pytest.raises(ValidationError):
            RenderRegion(re_min=1, re_max=-1)
        with pytest.raises(ValidationError):
            RenderRegion(im_min=2, im_max=2)

    def test_from_text(self):
        region = RenderRegion.from_text("-2,2,-1,1", "40x20")
        assert (region.re_min, region.re_max, region.im_min, region.im_max) == (-2, 2, -1, 1)
        assert (region.width, region.height) == (40, 20)

    @pytest.mark.parametrize("region, grid", [("-2,2,-1", "4x4"), ("-2,2,-1,1", "44"), ("-2,2,-1,1", "0x4")])
    def test_from_text_rejects(self, region, grid):
        with pytest.raises(ValueError):
            RenderRegion.from_text(region, grid)

    def test_pixel_centres_top_row_first(self):
        region = RenderRegion.from_text("0,4,0,2", "4x2")
        assert region.point(0, 0) == 0.5 + 1.5j
        assert region.point(3, 1) == 3.5 + 0.5j
        points = region.points(0, 2)
        assert points.shape == (2, 4)
        assert points[1, 3] == region.point(3, 1)


class TestEncodePPM:
    def test_black_pixel(self):
        assert encode_ppm(hand_grid([[PixelColor.BLACK]], [[50]])) == HEADER_1x1 + bytes((0, 0, 0))

    def test_shading_runs_top_to_bottom(self):
        grid = hand_grid([[PixelColor.RED], [PixelColor.GREEN]], [[0], [50]])
        assert encode_ppm(grid) == b"P6\n1 2\n255\n" + bytes((255, 0, 0, 0, 55, 0))

    def test_yellow_and_white(self):
        grid = hand_grid([[PixelColor.YELLOW, PixelColor.WHITE]], [[25, 0]])
        assert encode_ppm(grid)[-6:] == bytes((155, 155, 0, 255, 255, 255))

    def test_save_ppm_creates_parents(self, tmp_path):
        path = save_ppm(hand_grid([[PixelColor.RED]], [[0]]), tmp_path / "a" / "b" / "out.ppm")
        assert path.read_bytes() == HEADER_1x1 + bytes((255, 0, 0))


class TestSinglePixelRenders:
    def test_plane_seed_at_zero(self):
        grid = render_dynamical_plane(2, single_pixel(0j), OrbitConfig())
        assert grid.pixel(0, 0).color is PixelColor.RED
        assert grid.pixel(0, 0).iters == 0
        assert encode_ppm(grid) == HEADER_1x1 + bytes((255, 0, 0))

    def test_basins_at_the_roots(self):
        cfg = OrbitConfig(max_iters=30, tol=1e-5)
        assert render_basins_G(1, single_pixel(1 + 0j), cfg).pixel(0, 0).color is PixelColor.RED
        pixel = render_basins_G(1, single_pixel(-1 + 0j), cfg).pixel(0, 0)
        assert pixel.color is PixelColor.GREEN
        assert pixel.iters == 0

    def test_parameter_pixel_landing_on_repelling_point(self):
        pixel = render_parameter_space("c1", single_pixel(2 + 0j), OrbitConfig()).pixel(0, 0)
        assert pixel.color is PixelColor.BLACK
        assert pixel.iters == 50

    def test_parameter_pixel_reaching_zero(self):
        assert render_parameter_space("C3", single_pixel(3 + 0j), OrbitConfig()).pixel(0, 0).color is PixelColor.RED

    def test_parameter_pixel_without_critical_point(self):
        pixel = render_parameter_space("c2", single_pixel(1 + 0j), OrbitConfig()).pixel(0, 0)
        assert pixel.color is PixelColor.BLACK
        assert pixel.iters == 0

    def test_parameter_pixel_on_removable_ratio(self):
        pixel = render_parameter_space("c1", single_pixel(-2 + 0j), OrbitConfig()).pixel(0, 0)
        assert pixel.color is PixelColor.RED
        assert pixel.iters == 4

    def test_parameter_rejects_unknown_point(self):
        with pytest.raises(ValueError):
            render_parameter_space("c4", single_pixel(2 + 0j), OrbitConfig())


class TestStability:
    @pytest.mark.parametrize(
        "K, which, expected",
        [
            (2, "z1", (PixelColor.WHITE, 0)),
            (-1.5, "z1", (PixelColor.WHITE, 0)),
            (-1, "z1", (PixelColor.BLUE, 255)),
            (-1.2, "z1", (PixelColor.BLUE, 229)),
            (-2, "z1", (PixelColor.BLACK, 0)),
            (-1, "z2", (PixelColor.BLACK, 0)),
            (-1, "z3", (PixelColor.WHITE, 0)),
        ],
    )
    def test_pixels(self, K, which, expected):
        assert stability_pixel(K, which) == expected

    def test_region_render(self):
        grid = render_stability_regions("Z1", single_pixel(-1 + 0j))
        assert grid.pixel(0, 0).color is PixelColor.BLUE
        assert encode_ppm(grid) == HEADER_1x1 + bytes((0, 0, 255))

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            render_stability_regions("z4", single_pixel(0j))


class TestPlaneProperties:
    region = RenderRegion.from_text("-5,5,-5,5", "12x12")
    cfg = OrbitConfig(max_iters=30)

    def test_pixels_match_single_orbits(self):
        K = 1.5 + 0.5j
        grid = render_dynamical_plane(K, self.region, self.cfg)
        S = build_S(K)
        strange = attracting_strange_points(fixed_points_S(K))
        for j in range(0, 12, 3):
            for i in range(0, 12, 4):
                outcome = iterate_orbit(S, self.region.point(i, j), self.cfg, strange)
                assert grid.pixel(i, j).color is PLANE_COLORS[outcome.status]
                assert grid.pixel(i, j).iters == outcome.iters

    def test_legend_soundness(self):
        grid = render_dynamical_plane(0.6, self.region, self.cfg)
        red = grid.colors == PixelColor.RED
        green = grid.colors == PixelColor.GREEN
        black = grid.colors == PixelColor.BLACK
        assert (np.abs(grid.finals[red]) < self.cfg.tol).all()
        assert (grid.final_inf[green] | (np.abs(grid.finals[green]) > self.cfg.inf_threshold)).all()
        assert (grid.iters[black] == self.cfg.max_iters).all()

    def test_plane_preset_reaches_linearly_attracting_infinity(self):
        region = RenderRegion.from_text("-5,5,-5,5", "40x40")
        grid = render_dynamical_plane(0.2, region, OrbitConfig(**ORBIT_DEFAULTS["plane"]))
        assert grid.count(PixelColor.BLACK) == 0

    def test_summary_counts_every_pixel(self):
        grid = render_dynamical_plane(2, self.region, self.cfg)
        assert sum(grid.summary().values()) == 144


class TestWorkerDeterminism:
    region = RenderRegion.from_text("-5,5,-5,5", "12x12")

    @pytest.mark.parametrize(
        "render",
        [
            lambda region, workers: render_dynamical_plane(0.6, region, OrbitConfig(max_iters=30), workers, 5),
            lambda region, workers: render_parameter_space("c2", region, OrbitConfig(max_iters=30, tol=1e-2), workers, 5),
            lambda region, workers: render_basins_G(1.5, region, OrbitConfig(max_iters=30, tol=1e-5), workers, 5),
            lambda region, workers: render_stability_regions("z3", region, workers, 5),
        ],
        ids=["plane", "parameter", "basins", "stability"],
    )
    def test_one_and_four_workers_give_identical_bytes(self, render):
        assert encode_ppm(render(self.region, 1)) == encode_ppm(render(self.region, 4))


class TestGridFrame:
    def test_row_major_records(self):
        grid = hand_grid([[PixelColor.RED, PixelColor.GREEN, PixelColor.BLACK], [PixelColor.YELLOW] * 3], [[1, 2, 50], [3, 3, 3]])
        frame = grid_frame(grid)
        assert list(frame.columns) == ["i", "j", "class", "iters"]
        assert len(frame) == 6
        assert frame.iloc[1].tolist() == [1, 0, "G", 2]
        assert frame["class"].tolist() == ["R", "G", "B", "Y", "Y", "Y"]

    def test_save_csv(self, tmp_path):
        grid = hand_grid([[PixelColor.RED, PixelColor.BLACK]], [[0, 50]])
        frame = pd.read_csv(save_csv(grid, tmp_path / "grid.csv"))
        assert frame["class"].tolist() == ["R", "B"]
        assert frame["iters"].tolist() == [0, 50]


@pytest.mark.slow
class TestPublishedFigures:
    region = RenderRegion()

    @pytest.mark.parametrize("K", [0.2, 0.6, 1.0, 1.4, 1.8])
    def test_stable_planes_have_no_black(self, K):
        grid = render_dynamical_plane(K, self.region, OrbitConfig(**ORBIT_DEFAULTS["plane"]), workers=4)
        assert grid.count(PixelColor.BLACK) == 0

    def test_stable_plane_with_fine_tolerance(self):
        grid = render_dynamical_plane(0.6, self.region, OrbitConfig(max_iters=50, tol=1e-12), workers=4)
        assert grid.count(PixelColor.BLACK) == 0

    @pytest.mark.parametrize("K", [-0.2j, -0.1j])
    def test_unstable_planes_have_no_green(self, K):
        grid = render_dynamical_plane(K, self.region, OrbitConfig(**ORBIT_DEFAULTS["plane_strict"]), workers=4)
        assert grid.count(PixelColor.GREEN) == 0
        if K == -0.2j:
            assert grid.fraction(PixelColor.BLACK) > 0.3

    @pytest.mark.parametrize("K", [0.5, 1.5, 2.5])
    def test_basins_are_nearly_black_free(self, K):
        grid = render_basins_G(K, self.region, OrbitConfig(**ORBIT_DEFAULTS["basins"]), workers=4)
        assert grid.fraction(PixelColor.BLACK) < 0.01
        assert grid.count(PixelColor.RED) > 0
        assert grid.count(PixelColor.GREEN) > 0
