import csv
import math
import numpy as np
from lib.analysis import ReferenceKind, ReferenceSeries
from lib.csvfiles import ensure_dir, write_csv
from lib.exceptions import InvalidConfig, ParseError
from lib.models import CASE_STUDIES, MODELS
from pathlib import Path
from typing import Any

REFERENCE_HEADER = ["t", "value"]


def load_config(env_file: Path | None = None) -> dict[str, Any]:
    """Load configuration from .env file or environment.

    Search order for .env file:
    1. Current working directory (.env)
    2. Parent directory of this package (for local development)
    3. Fall back to environment variables

    Environment variables take precedence over values in the .env file.

    Args:
        env_file: Path to .env file. If None, searches automatically.

    Returns:
        Dict with 'log_level', 'workers', 'fixture_seed', 'fixture_noise' and 'fixture_points' keys.
    """
    from decouple import Config, RepositoryEmpty, RepositoryEnv

    if env_file is None:
        # Check current working directory first (for tool installations)
        cwd_env = Path.cwd() / ".env"
        # Fall back to parent directory (for local development)
        env_file = cwd_env if cwd_env.exists() else Path(__file__).parent.parent / ".env"

    config = Config(RepositoryEnv(str(env_file)) if env_file.exists() else RepositoryEmpty())
    return {
        "log_level": config("ODEBENCH_LOG_LEVEL", default="WARNING").upper(),
        "workers": config("ODEBENCH_WORKERS", default=1, cast=int),
        "fixture_seed": config("ODEBENCH_FIXTURE_SEED", default=1729, cast=int),
        "fixture_noise": config("ODEBENCH_FIXTURE_NOISE", default=0.01, cast=float),
        "fixture_points": config("ODEBENCH_FIXTURE_POINTS", default=101, cast=int),
    }


def read_reference_csv(path: Path, kind: ReferenceKind = ReferenceKind.EXPERIMENTAL) -> ReferenceSeries:
    """Load a ``t,value`` series.

    Args:
        path: CSV file, optionally starting with ``#`` comment lines.
        kind: Which reference the series stands for.

    Returns:
        The validated series.

    Raises:
        ParseError: If the header or a row is malformed, with the file line number.
        InvalidConfig: If t does not strictly increase, a value is non-finite or fewer than 2 rows.
    """
    points = []
    header_seen = False
    with open(path, newline="", encoding="utf-8") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            cells = [cell.strip() for cell in row]
            if not header_seen:
                if cells != REFERENCE_HEADER:
                    raise ParseError(f"{path}: expected header 't,value', got {','.join(cells)!r}", line=lineno)
                header_seen = True
                continue
            if len(cells) != 2:
                raise ParseError(f"{path}: expected 2 columns, got {len(cells)}", line=lineno)
            try:
                points.append((float(cells[0]), float(cells[1])))
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", line=lineno) from exc
    if not header_seen:
        raise ParseError(f"{path}: missing 't,value' header")
    return ReferenceSeries(kind, tuple(points))


def fixture_series(kind: str, seed: int, noise: float, points: int) -> list[tuple[float, float]]:
    """Model oracle on the default interval times (1 + noise * U(-1, 1)), one generator per model."""
    entry = MODELS[kind]
    model = entry.build()
    rng = np.random.default_rng(seed)
    ts = np.linspace(entry.interval[0], entry.interval[1], points)
    jitter = rng.uniform(-1.0, 1.0, size=points)
    return [(float(t), entry.exact(model, float(t)) * (1 + noise * float(u))) for t, u in zip(ts, jitter, strict=True)]


def write_fixtures(out_dir: Path, seed: int = 1729, noise: float = 0.01, points: int = 101) -> list[Path]:
    """Write one synthetic experimental series per case study into ``out_dir``.

    Args:
        out_dir: Destination directory, created if missing.
        seed: Random generator seed, recorded in each file's comment line.
        noise: Relative noise amplitude.
        points: Samples per series.

    Returns:
        Paths of the written files, in case-study order.
    """
    if points < 2:
        raise InvalidConfig(f"fixtures need at least 2 points, got {points}")
    if not (math.isfinite(noise) and 0 <= noise < 1):
        raise InvalidConfig(f"noise amplitude must lie in [0, 1), got {noise!r}")
    out_dir = ensure_dir(out_dir)
    written = []
    for kind in CASE_STUDIES:
        comment = f"model={kind} seed={seed} noise=uniform relative amplitude {noise!r}"
        written.append(write_csv(out_dir / f"{kind}.csv", REFERENCE_HEADER, fixture_series(kind, seed, noise, points), comment))
    return written
