"""Adaptive sub-image split planning, resize geometry, and grid interpolation.

High-resolution images are split into a grid of fixed-size cells. The grid is
chosen by scoring every candidate whose cell count is within one of the ideal
count (image area / cell area), preferring grids whose aspect ratio matches
the image. Multi-cell plans get a whole-image thumbnail for global context.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels

PAD_GRAY = 128


@dataclass(frozen=True)
class TilePlan:
    grid_rows: int
    grid_cols: int
    cell_size: int
    thumbnail: bool
    score: float

    @property
    def resized_width(self) -> int:
        return self.grid_cols * self.cell_size

    @property
    def resized_height(self) -> int:
        return self.grid_rows * self.cell_size

    @property
    def units(self) -> int:
        return self.grid_rows * self.grid_cols + (1 if self.thumbnail else 0)


@dataclass(frozen=True)
class EmbeddingGrid:
    rows: int
    cols: int
    dim: int
    values: np.ndarray  # shape (rows, cols, dim), float32

    def __post_init__(self) -> None:
        if self.values.shape != (self.rows, self.cols, self.dim):
            raise ValueError(
                f"values shape {self.values.shape} != ({self.rows},{self.cols},{self.dim})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding values must be finite")


def grid_score(width: int, height: int, rows: int, cols: int) -> float:
    """Log-aspect mismatch score; 0 is a perfect aspect match, more negative is worse."""
    return -abs(math.log((width / height) / (cols / rows)))


def plan_tiles(width: int, height: int, max_slices: int = 9, cell_size: int = 448) -> TilePlan:
    """Choose the sub-image grid for an image of the given pixel dimensions."""
    if width <= 0 or height <= 0:
        raise ValueError(f"image dimensions must be positive, got {width}x{height}")
    if not 1 <= max_slices <= 9:
        raise ValueError(f"max_slices must be in 1..9, got {max_slices}")
    ideal = math.ceil(width * height / (cell_size * cell_size))
    ideal = min(max(ideal, 1), max_slices)
    if ideal == 1:
        return TilePlan(1, 1, cell_size, thumbnail=False, score=grid_score(width, height, 1, 1))
    best: tuple[float, int, int] | None = None
    for n_cells in (ideal - 1, ideal, ideal + 1):
        if not 1 <= n_cells <= max_slices:
            continue
        for rows in range(1, n_cells + 1):
            if n_cells % rows:
                continue
            cols = n_cells // rows
            # sort key: higher score wins, then fewer cells, then fewer rows
            key = (-grid_score(width, height, rows, cols), n_cells, rows)
            if best is None or key < best[0:3]:
                best = (*key, rows, cols)
    assert best is not None
    _, _, _, rows, cols = best
    return TilePlan(
        rows,
        cols,
        cell_size,
        thumbnail=rows * cols > 1,
        score=grid_score(width, height, rows, cols),
    )


def resize_geometry(width: int, height: int, plan: TilePlan) -> tuple[int, int, int, int]:
    """Aspect-preserving fit of the image into the plan's grid canvas.

    Returns (scaled_w, scaled_h, pad_x, pad_y) with padding centering the
    scaled image; at least one axis fills the canvas exactly.
    """
    rw, rh = plan.resized_width, plan.resized_height
    s = min(rw / width, rh / height)
    scaled_w = round(s * width)
    scaled_h = round(s * height)
    return scaled_w, scaled_h, (rw - scaled_w) // 2, (rh - scaled_h) // 2


def bilinear_resize(image: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Resize an (H, W, 3) uint8 image with half-pixel-center bilinear sampling."""
    if out_w <= 0 or out_h <= 0:
        raise ValueError(f"output dimensions must be positive, got {out_w}x{out_h}")
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("expected an (H, W, 3) uint8 image")
    if (image.shape[0], image.shape[1]) == (out_h, out_w):
        return image.copy()
    return _kernels.bilinear_resize_u8(image, out_h, out_w)


def place_on_canvas(image: np.ndarray, plan: TilePlan) -> np.ndarray:
    """Resize into the grid canvas, mid-gray padding around the scaled image."""
    h, w = image.shape[:2]
    scaled_w, scaled_h, pad_x, pad_y = resize_geometry(w, h, plan)
    canvas = np.full((plan.resized_height, plan.resized_width, 3), PAD_GRAY, dtype=np.uint8)
    canvas[pad_y : pad_y + scaled_h, pad_x : pad_x + scaled_w] = bilinear_resize(
        image, scaled_w, scaled_h
    )
    return canvas


def interpolate_pos_embed(grid: EmbeddingGrid, out_rows: int, out_cols: int) -> EmbeddingGrid:
    """Resize a position-embedding grid with align-corners bilinear interpolation."""
    if out_rows < 1 or out_cols < 1:
        raise ValueError(f"output grid must be at least 1x1, got {out_rows}x{out_cols}")
    if (out_rows, out_cols) == (grid.rows, grid.cols):
        return EmbeddingGrid(grid.rows, grid.cols, grid.dim, grid.values.copy())
    if (grid.rows < 2 and out_rows != grid.rows) or (grid.cols < 2 and out_cols != grid.cols):
        raise ValueError(
            f"cannot interpolate a degenerate axis: source {grid.rows}x{grid.cols}, "
            f"target {out_rows}x{out_cols}"
        )
    values = _kernels.grid_interp(grid.values, out_rows, out_cols)
    return EmbeddingGrid(out_rows, out_cols, grid.dim, values)


# ---------------------------------------------------------------------------
# serialization: binary PPM for images, "EGRD" container for embedding grids


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"not a binary PPM: magic {fields[0]!r}")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    return pixels.reshape(height, width, 3).copy()


def write_ppm(image: np.ndarray, path: str | Path) -> None:
    h, w = image.shape[:2]
    with Path(path).open("wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_embedding_grid(path: str | Path) -> EmbeddingGrid:
    data = Path(path).read_bytes()
    if data[:4] != b"EGRD":
        raise ValueError(f"bad magic {data[:4]!r}, expected b'EGRD'")
    rows, cols, dim = struct.unpack_from("<III", data, 4)
    values = np.frombuffer(data, dtype="<f4", count=rows * cols * dim, offset=16)
    return EmbeddingGrid(rows, cols, dim, values.reshape(rows, cols, dim).copy())


def write_embedding_grid(grid: EmbeddingGrid, path: str | Path) -> None:
    with Path(path).open("wb") as fh:
        fh.write(b"EGRD")
        fh.write(struct.pack("<III", grid.rows, grid.cols, grid.dim))
        fh.write(np.ascontiguousarray(grid.values, dtype="<f4").tobytes())
