"""On-disk discriminant cache and CSV emission.

Cache layout: one plain-text JSON header line (with a digest over its own
canonical form), then length-prefixed binary rows, one per DiscriminantRecord,
sorted strictly increasing in d.  Reals are IEEE-754 doubles, little-endian.
Readers validate the digest, the ordering, and the class-number-formula
residual of every row; writers take an exclusive lock file.

CSV files start with one '#'-prefixed JSON line echoing the resolved run
configuration (minus anything that cannot change results, like the worker
count), then a header row, then data with '.' decimals and 17 significant
digits for doubles.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .classno import DiscriminantRecord, build_records
from .pell import enumerate_family, family_bounds

CACHE_VERSION = 1
_ROW = struct.Struct("<qqqdqd")   # d, t, u, epsilon, h, L1
_LEN = struct.Struct("<I")


class CacheError(RuntimeError):
    pass


@dataclass
class RunConfig:
    x: float = 1e5
    alpha: float = 0.25
    seed: int = 0
    p_trunc: int = 100_000
    tol: float = 1e-5
    out_dir: str = "."
    workers: int = 1
    cache_path: str | None = None
    mc_p_trunc: int = 10_000
    mc_samples: int = 1_000_000

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")
        if self.tol <= 0 or self.p_trunc < 2:
            raise ValueError("tolerances and prime cutoffs must be positive")

    def result_fields(self) -> dict:
        """Everything that can influence numerical output (no paths, no
        worker count: those must not change results)."""
        return dict(x=self.x, alpha=self.alpha, seed=self.seed,
                    p_trunc=self.p_trunc, tol=self.tol,
                    mc_p_trunc=self.mc_p_trunc, mc_samples=self.mc_samples)


def _canonical(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode()


def _digest(header: dict) -> str:
    h = {k: v for k, v in header.items() if k != "digest"}
    return hashlib.sha256(_canonical(h)).hexdigest()


def cache_header(config: RunConfig) -> dict:
    header = dict(format=CACHE_VERSION, x=config.x, alpha=config.alpha,
                  p_trunc=config.p_trunc, l_tol=config.tol)
    header["digest"] = _digest(header)
    return header


class _Lock:
    def __init__(self, path: str):
        self.path = path + ".lock"

    def __enter__(self):
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise CacheError(f"cache is locked by another writer: {self.path}")
        return self

    def __exit__(self, *exc):
        os.close(self.fd)
        os.unlink(self.path)


def write_cache(path: str, records, config: RunConfig) -> None:
    rows = sorted(records, key=lambda r: r.d)
    for a, b in zip(rows, rows[1:]):
        if a.d >= b.d:
            raise CacheError(f"duplicate discriminant {b.d} in cache rows")
    with _Lock(path):
        with open(path, "wb") as fh:
            fh.write(_canonical(cache_header(config)) + b"\n")
            for r in rows:
                payload = _ROW.pack(r.d, r.t, r.u, r.epsilon, r.h, r.L1)
                fh.write(_LEN.pack(len(payload)))
                fh.write(payload)


def read_cache(path: str, expect_x: float | None = None,
               expect_alpha: float | None = None, validate: bool = True):
    """(header, records).  Raises CacheError on version/digest/order/row
    trouble, naming the offending row."""
    try:
        fh = open(path, "rb")
    except OSError as e:
        raise CacheError(f"cannot open cache {path}: {e}")
    with fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError:
            raise CacheError(f"{path}: unreadable header line")
        if header.get("format") != CACHE_VERSION:
            raise CacheError(
                f"{path}: cache format {header.get('format')!r} unsupported; "
                f"this build reads version {CACHE_VERSION}")
        if header.get("digest") != _digest(header):
            raise CacheError(f"{path}: header digest mismatch (corrupt header)")
        if expect_x is not None and header["x"] < expect_x:
            raise CacheError(
                f"{path}: cache has x={header['x']}, request needs x={expect_x}")
        if expect_alpha is not None and header["alpha"] < expect_alpha:
            raise CacheError(
                f"{path}: cache has alpha={header['alpha']}, request needs "
                f"alpha={expect_alpha}")
        records = []
        prev_d = 0
        i = 0
        while True:
            lenb = fh.read(_LEN.size)
            if not lenb:
                break
            (n,) = _LEN.unpack(lenb)
            payload = fh.read(n)
            if len(payload) != n or n != _ROW.size:
                raise CacheError(f"{path}: truncated row {i}")
            d, t, u, eps, h, l1 = _ROW.unpack(payload)
            rec = DiscriminantRecord(d=d, t=t, u=u, epsilon=eps, h=h, L1=l1)
            if validate:
                if d <= prev_d:
                    raise CacheError(f"{path}: row {i} (d={d}) breaks ordering")
                if not rec.consistent():
                    raise CacheError(
                        f"{path}: row {i} (d={d}) fails the class number "
                        f"formula residual: {rec.formula_residual():.3f}")
            prev_d = d
            records.append(rec)
            i += 1
    return header, records


def _record_chunk(args):
    points, tol = args
    return build_records(points, tol)


def build_cache(config: RunConfig, points=None) -> list:
    """Enumerate the family and compute records, optionally in parallel.
    The result is independent of the worker count (pure per-d work)."""
    params = family_bounds(config.x, config.alpha)
    if points is None:
        points = enumerate_family(params)
    if config.workers == 1 or len(points) < 64:
        return build_records(points, config.tol)
    chunks = [points[i : i + 64] for i in range(0, len(points), 64)]
    out = []
    with ProcessPoolExecutor(max_workers=config.workers) as ex:
        for part in ex.map(_record_chunk, [(c, config.tol) for c in chunks]):
            out.extend(part)
    return out


# ---------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(path: str, fieldnames, rows, meta: dict) -> None:
    lines = ["# " + json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    lines.append(",".join(fieldnames))
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in fieldnames))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str):
    """(meta, fieldnames, rows-as-string-dicts) for our own CSV dialect."""
    with open(path) as fh:
        first = fh.readline()
        meta = json.loads(first[1:].strip()) if first.startswith("#") else {}
        names = (first if not first.startswith("#") else fh.readline()).strip().split(",")
        rows = []
        for line in fh:
            line = line.strip()
            if line:
                rows.append(dict(zip(names, line.split(","))))
    return meta, names, rows
