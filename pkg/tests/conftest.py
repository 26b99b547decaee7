import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from sparsesens.geometry import sample_poisson  # noqa: E402
from sparsesens.graphs import build_knn, build_udg  # noqa: E402
from sparsesens.subnet import construct_subnet, tile_window  # noqa: E402
from sparsesens.tiling import TileGeom  # noqa: E402


@lru_cache(maxsize=None)
def udg_instance(lam: float, tiles: int, seed: int):
    geom = TileGeom.udg()
    pts = sample_poisson(tile_window(geom, tiles), lam, seed)
    base = build_udg(pts)
    return geom, pts, base, construct_subnet(pts, base, geom)


@lru_cache(maxsize=None)
def nn_instance(k: int, tiles: int, seed: int, lam: float = 1.0):
    geom = TileGeom.nn()
    pts = sample_poisson(tile_window(geom, tiles, margin_tiles=1.0), lam, seed)
    base = build_knn(pts, k)
    return geom, pts, base, construct_subnet(pts, base, geom, k)


def random_xy(n, seed, side=10.0):
    return np.random.default_rng(seed).uniform(0, side, (n, 2))


def pytest_terminal_summary(terminalreporter):
    import acceptance_log
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(acceptance_log.LINES):
            terminalreporter.write_line(acceptance_log.LINES[n])
