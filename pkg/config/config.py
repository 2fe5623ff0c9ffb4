"""Configuration management for the chebydyn toolkit."""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base paths
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"

# Output directory structure
OUTPUT_DIR = Path(os.getenv("CHEBYDYN_OUTPUT_DIR", DATA_DIR / "output"))
PLANES_DIR = OUTPUT_DIR / "planes"
PARAMETER_SPACES_DIR = OUTPUT_DIR / "parameter_spaces"
BASINS_DIR = OUTPUT_DIR / "basins"
STABILITY_DIR = OUTPUT_DIR / "stability"
REPORTS_DIR = OUTPUT_DIR / "reports"

# Rendering settings
RENDER_CONFIG = {
    "workers": int(os.getenv("CHEBYDYN_WORKERS", os.cpu_count() or 1)),
    "tile_rows": int(os.getenv("CHEBYDYN_TILE_ROWS", 8)),
    "grid": os.getenv("CHEBYDYN_GRID", "200x200"),
    "region": os.getenv("CHEBYDYN_REGION", "-5,5,-5,5"),
}

# Iteration budgets and tolerances per renderer
ORBIT_DEFAULTS = {
    "plane": {"max_iters": 50, "tol": 1e-2},
    "plane_strict": {"max_iters": 50, "tol": 1e-20},
    "param": {"max_iters": 50, "tol": 1e-2},
    "basins": {"max_iters": 30, "tol": 1e-5},
}

# Verification settings
VERIFY_CONFIG = {
    "seed": int(os.getenv("CHEBYDYN_SEED", 20240611)),
    "samples": int(os.getenv("CHEBYDYN_SAMPLES", 100)),
    "random_ratio_count": int(os.getenv("CHEBYDYN_RANDOM_RATIOS", 20)),
    "oracle_bound": 1e-8,
    "published_bound": 5e-4,
}

# Desk-scale versions of the published figures
FIGURE_PRESETS = {
    "stable_real_planes": [0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8],
    "complex_planes": [0.1j, 0.1 + 0.1j, 0.2 + 0.1j],
    "unstable_planes": [-0.5j, -0.2j, -0.1j, -0.05j, 0.4j, 0.6j],
    "basins": [0.5, 0.7, 0.9, 1.4, 1.6, 1.8, 2.3, 2.5, 2.7],
    "parameter_spaces": ["c1", "c2", "c3"],
    "stability_regions": ["z1", "z2", "z3"],
}


def worker_count() -> int:
    """Worker count from CHEBYDYN_WORKERS, falling back to available parallelism."""
    return max(1, int(os.getenv("CHEBYDYN_WORKERS", RENDER_CONFIG["workers"])))


def ensure_directories():
    """Create all necessary directories if they don't exist."""
    directories = [
        PLANES_DIR,
        PARAMETER_SPACES_DIR,
        BASINS_DIR,
        STABILITY_DIR,
        REPORTS_DIR,
    ]

    for directory in directories:
        directory.mkdir(parents=True, exist_ok=True)
        # Create .gitkeep file
        gitkeep = directory / ".gitkeep"
        if not gitkeep.exists():
            gitkeep.touch()


if __name__ == "__main__":
    ensure_directories()
    print("Directory structure created successfully!")
