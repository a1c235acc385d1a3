"""Gridded channel power-gain maps (dB) over planar movement regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, Region, field_on_grid
from .util import write_csv_atomic

__all__ = ["DB_FLOOR", "GainMap", "evaluate_map", "map_extrema", "write_gain_map_csv"]

# Exact nulls are floored so exported maps stay finite.
DB_FLOOR = -120.0


@dataclass(eq=False)
class GainMap:
    """Power gain 10*log10(|h|^2) sampled on a 2D grid.

    ``values[i, j]`` corresponds to ``(coords0[i], coords1[j])`` along the
    region's two free axes; extrema ties are broken by lowest row-major
    index.
    """

    region: Region
    step: float
    coords0: np.ndarray
    coords1: np.ndarray
    values: np.ndarray
    max_db: float
    min_db: float
    argmax: np.ndarray
    argmin: np.ndarray


def _grid_position(region: Region, coords, index) -> np.ndarray:
    pos = np.array(region.origin, dtype=float)
    for axis, c, i in zip(region.free_axes, coords, index):
        pos[axis] = c[i]
    return pos


def evaluate_map(spec: ChannelSpec, region: Region, step: float) -> GainMap:
    """Evaluate the power-gain map of ``spec`` over a planar region.

    The region must have exactly two free axes; ``step`` is the grid
    resolution in wavelengths.
    """
    if step <= 0:
        raise ValueError("grid step must be positive")
    if len(region.free_axes) != 2:
        raise ValueError("gain maps need a two-dimensional region (exactly one zero extent)")
    h, coords = field_on_grid(spec, region, step)
    power = np.abs(h) ** 2
    with np.errstate(divide="ignore"):
        values = np.where(power > 0.0, 10.0 * np.log10(np.where(power > 0.0, power, 1.0)), DB_FLOOR)
    imax = np.unravel_index(int(np.argmax(values)), values.shape)
    imin = np.unravel_index(int(np.argmin(values)), values.shape)
    return GainMap(
        region=region,
        step=step,
        coords0=coords[0],
        coords1=coords[1],
        values=values,
        max_db=float(values[imax]),
        min_db=float(values[imin]),
        argmax=_grid_position(region, coords, imax),
        argmin=_grid_position(region, coords, imin),
    )


def map_extrema(gain_map: GainMap):
    """(max_dB, min_dB, argmax, argmin) from a grid scan, row-major tie-break."""
    values = gain_map.values
    if values.size == 0:
        raise ValueError("gain map is empty")
    coords = [gain_map.coords0, gain_map.coords1]
    imax = np.unravel_index(int(np.argmax(values)), values.shape)
    imin = np.unravel_index(int(np.argmin(values)), values.shape)
    return (
        float(values[imax]),
        float(values[imin]),
        _grid_position(gain_map.region, coords, imax),
        _grid_position(gain_map.region, coords, imin),
    )


def write_gain_map_csv(gain_map: GainMap, path: str) -> None:
    """Export as ``x,y,gain_db`` rows in row-major order."""
    rows = (
        (float(x), float(y), float(gain_map.values[i, j]))
        for i, x in enumerate(gain_map.coords0)
        for j, y in enumerate(gain_map.coords1)
    )
    write_csv_atomic(path, "x,y,gain_db", rows)
