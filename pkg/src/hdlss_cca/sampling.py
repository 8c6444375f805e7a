"""Gaussian data generation for the spiked two-block model."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spiked_model import PopulationModel, StructuredSqrt


def make_stream(master_seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(master_seed, *keys)``.

    Streams for different key tuples are statistically independent and do not
    depend on the order in which they are created, so replications can run in
    any order or thread and still draw the same numbers.
    """
    seq = np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(seq))


def gaussian_matrix(rows: int, cols: int, stream: np.random.Generator) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1 (got {rows}x{cols})")
    return stream.standard_normal((rows, cols))


@dataclass(frozen=True)
class DataSet:
    """Observations in the d x n layout (columns are samples).

    ``z1`` and ``z2`` are latent rows 0 and d of the 2d x n standard normal draw,
    i.e. the rows feeding the spike coordinate of X and of Y.
    """

    x: np.ndarray
    y: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    seed_record: tuple

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def to_csv(self, out_dir: str | Path) -> tuple[Path, Path]:
        """Write ``x.csv`` and ``y.csv`` (headerless, full precision)."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = out_dir / "x.csv", out_dir / "y.csv"
        for path, mat in zip(paths, (self.x, self.y)):
            write_matrix_csv(path, mat)
        return paths


def write_matrix_csv(path: str | Path, mat: np.ndarray) -> None:
    # 17 significant digits round-trip every float64 exactly
    np.savetxt(path, np.atleast_2d(mat), delimiter=",", fmt="%.17g")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float, ndmin=2))


def generate_dataset(
    m: PopulationModel,
    s: StructuredSqrt,
    n: int,
    stream: np.random.Generator,
    seed_record: tuple = (),
) -> DataSet:
    """Draw n i.i.d. columns of T = Sigma_T^{1/2} Z and split them into (X, Y)."""
    if n < 2:
        raise ValueError(f"n must be >= 2 (got {n})")
    d = m.d
    z = gaussian_matrix(2 * d, n, stream)

    x = s.bulk_x * z[:d]
    y = s.bulk_y * z[d:]
    mixed = s.core4 @ z[[0, 1, d, d + 1]]
    x[0], x[1] = mixed[0], mixed[1]
    y[0], y[1] = mixed[2], mixed[3]

    z1 = z[0].copy()
    z2 = z[d].copy()
    for arr in (x, y, z1, z2):
        arr.setflags(write=False)
    return DataSet(x=x, y=y, z1=z1, z2=z2, seed_record=tuple(seed_record))
