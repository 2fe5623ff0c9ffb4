import pytest

from config.config import FIGURE_PRESETS
from scripts import render_figures


@pytest.fixture
def output_dirs(tmp_path, monkeypatch):
    dirs = {}
    for name in ("PLANES_DIR", "PARAMETER_SPACES_DIR", "BASINS_DIR", "STABILITY_DIR", "REPORTS_DIR"):
        dirs[name] = tmp_path / name.lower()
        monkeypatch.setattr(render_figures, name, dirs[name])
    monkeypatch.setattr(render_figures, "ensure_directories", lambda: [d.mkdir() for d in dirs.values()])
    return dirs


def test_renders_every_preset(output_dirs, capsys):
    assert render_figures.render_all_figures(grid="2x2", workers=1, skip_verify=True)

    planes = FIGURE_PRESETS["stable_real_planes"] + FIGURE_PRESETS["complex_planes"] + FIGURE_PRESETS["unstable_planes"]
    assert len(list(output_dirs["PLANES_DIR"].glob("*.ppm"))) == len(planes)
    assert len(list(output_dirs["BASINS_DIR"].glob("*.csv"))) == len(FIGURE_PRESETS["basins"])
    assert (output_dirs["PARAMETER_SPACES_DIR"] / "param_c2.ppm").read_bytes().startswith(b"P6\n2 2\n255\n")
    assert (output_dirs["STABILITY_DIR"] / "stability_z3.csv").exists()
    assert (output_dirs["PLANES_DIR"] / "plane_K0-0.2i.ppm").exists()

    out = capsys.readouterr().out
    assert "CHEBYDYN - FIGURE RENDERING" in out
    assert "✓ ALL FIGURES RENDERED!" in out
