import os
from pathlib import Path

import pytest

from pellclass.store import CacheError, RunConfig, build_cache, read_cache, write_cache

CACHE_DIR = Path(__file__).parent / "_cache"

_WORKERS = min(2, os.cpu_count() or 1)


def family_records(x: float, alpha: float, workers: int = _WORKERS):
    """Records for D_alpha(x), built once per (x, alpha) and reused from an
    on-disk cache across test sessions.  Reads are fully validated; anything
    suspect triggers a rebuild."""
    CACHE_DIR.mkdir(exist_ok=True)
    cfg = RunConfig(x=x, alpha=alpha, workers=workers,
                    cache_path=str(CACHE_DIR / f"x{x:g}_a{alpha:g}.cache"))
    if os.path.exists(cfg.cache_path):
        try:
            _, records = read_cache(cfg.cache_path, expect_x=x, expect_alpha=alpha)
            return records
        except CacheError:
            os.unlink(cfg.cache_path)
    records = build_cache(cfg)
    write_cache(cfg.cache_path, records, cfg)
    return records


@pytest.fixture(scope="session")
def records_1e5():
    return family_records(1e5, 0.25)


@pytest.fixture(scope="session")
def records_1e6():
    return family_records(1e6, 0.25)
