"""Angle-domain field-response estimation from positional measurements.

The channel response sampled at chosen MA positions is a linear combination
of angle-domain atoms exp(j*2*pi*<dir_g, r_k>), so path angles and
coefficients can be recovered by sparse regression (orthogonal matching
pursuit here) with a measurement matrix set by the visited positions.  A
separate least-squares refit supports the two-time-scale strategy where
angles are reused and only coefficients are re-estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, PathSpec, Region, channel_gain, field_on_grid

__all__ = [
    "MeasurementSet",
    "AngleDictionary",
    "cosine_grid_dictionary",
    "measurement_matrix",
    "FriEstimate",
    "plan_measurement_positions",
    "simulate_measurements",
    "omp_estimate",
    "refit_coefficients",
    "reconstruct_and_score",
    "mutual_coherence",
]


@dataclass(eq=False)
class MeasurementSet:
    """Channel samples y_k = h(r_k) + n_k at K probe positions."""

    positions: np.ndarray
    samples: np.ndarray
    noise_var: float

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        y = np.asarray(self.samples, dtype=complex)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 1:
            raise ValueError("positions must have shape (K, 3) with K >= 1")
        if y.shape != (p.shape[0],):
            raise ValueError("need one complex sample per position")
        if self.noise_var < 0:
            raise ValueError("noise variance must be nonnegative")
        self.positions = p
        self.samples = y

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass(eq=False)
class AngleDictionary:
    """Candidate arrival directions for sparse recovery."""

    directions: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        if d.ndim != 2 or d.shape[1] != 3 or d.shape[0] < 1:
            raise ValueError("directions must have shape (G, 3) with G >= 1")
        self.directions = d

    @property
    def size(self) -> int:
        return self.directions.shape[0]


def cosine_grid_dictionary(grid_size: int = 64) -> AngleDictionary:
    """Upper-hemisphere dictionary on a grid over the 2D cosine disk.

    ``grid_size`` points per cosine axis; points outside the unit disk are
    dropped, the rest lifted to unit vectors (u, v, sqrt(1-u^2-v^2)).
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    u = np.linspace(-1.0, 1.0, grid_size)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    keep = uu ** 2 + vv ** 2 <= 1.0 + 1e-12
    uu, vv = uu[keep], vv[keep]
    ww = np.sqrt(np.maximum(0.0, 1.0 - uu ** 2 - vv ** 2))
    return AngleDictionary(np.column_stack([uu, vv, ww]))


def measurement_matrix(dictionary: AngleDictionary, positions) -> np.ndarray:
    """(K, G) matrix of atoms exp(j*2*pi*<dir_g, r_k>)."""
    p = np.asarray(positions, dtype=float)
    return np.exp(2j * np.pi * (p @ dictionary.directions.T))


def mutual_coherence(matrix: np.ndarray) -> float:
    """Largest normalized off-diagonal column correlation."""
    a = np.asarray(matrix)
    norms = np.linalg.norm(a, axis=0)
    gram = np.abs(np.conj(a.T) @ a) / np.outer(norms, norms)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


@dataclass(eq=False)
class FriEstimate:
    """Recovered directions (dictionary indices) and complex coefficients."""

    indices: tuple[int, ...]
    directions: np.ndarray
    coefficients: np.ndarray
    residual_norm: float

    @property
    def num_paths(self) -> int:
        return len(self.indices)

    def to_channel_spec(self) -> ChannelSpec | None:
        """Equivalent channel spec, or None for an empty estimate."""
        if not self.indices:
            return None
        return ChannelSpec(tuple(
            PathSpec(rx_dir=self.directions[i], coeff=self.coefficients[i])
            for i in range(self.num_paths)))


def _most_square_lattice(count: int) -> tuple[int, int]:
    """Factor count = nx * ny with nx the largest divisor <= sqrt(count)."""
    nx = 1
    for d in range(1, int(math.isqrt(count)) + 1):
        if count % d == 0:
            nx = d
    return nx, count // nx


def plan_measurement_positions(region: Region, num_positions: int,
                               strategy: str = "uniform-random", seed=0) -> np.ndarray:
    """Probe positions inside the region.

    ``uniform-random`` draws i.i.d. uniform points (deterministic per
    seed); ``grid`` lays out the most-square lattice whose corner points
    include the region corners.  Grid counts that cannot be hosted on the
    region's free axes are rejected.
    """
    if num_positions < 1:
        raise ValueError("need at least one position")
    axes = region.free_axes
    positions = np.tile(region.origin, (num_positions, 1))
    if strategy == "uniform-random":
        rng = np.random.default_rng(seed)
        for a in axes:
            positions[:, a] = region.origin[a] + rng.random(num_positions) * region.extents[a]
        return positions
    if strategy != "grid":
        raise ValueError("strategy must be 'uniform-random' or 'grid'")
    if len(axes) == 0:
        if num_positions != 1:
            raise ValueError("a degenerate region can host only one grid position")
        return positions
    if len(axes) > 2:
        raise ValueError("grid strategy supports regions with at most two free axes")
    counts = (num_positions,) if len(axes) == 1 else _most_square_lattice(num_positions)
    lines = []
    for a, n in zip(axes, counts):
        if n == 1:
            lines.append(np.array([region.origin[a] + region.extents[a] / 2.0]))
        else:
            lines.append(np.linspace(region.origin[a], region.origin[a] + region.extents[a], n))
    mesh = np.meshgrid(*lines, indexing="ij")
    for a, grid in zip(axes, mesh):
        positions[:, a] = grid.ravel()
    return positions


def simulate_measurements(spec: ChannelSpec, positions, noise_var: float, seed=0) -> MeasurementSet:
    """Synthetic sounding: y_k = h(r_k) + CSCG noise of the given variance."""
    if noise_var < 0:
        raise ValueError("noise variance must be nonnegative")
    p = np.asarray(positions, dtype=float)
    clean = np.asarray(channel_gain(spec, p))
    if noise_var > 0:
        rng = np.random.default_rng(seed)
        sd = math.sqrt(noise_var / 2.0)
        noise = sd * (rng.standard_normal(p.shape[0]) + 1j * rng.standard_normal(p.shape[0]))
        clean = clean + noise
    return MeasurementSet(positions=p, samples=clean, noise_var=noise_var)


def omp_estimate(measurements: MeasurementSet, dictionary: AngleDictionary,
                 max_paths: int, eps_residual: float = 1e-12) -> FriEstimate:
    """Orthogonal matching pursuit over the angle dictionary.

    Greedily selects the atom most correlated with the residual and
    least-squares refits the coefficients on the selected support each
    iteration; stops after ``max_paths`` atoms or when the residual norm
    drops below ``eps_residual``.
    """
    if dictionary.size < 1:
        raise ValueError("dictionary is empty")
    if max_paths < 1:
        raise ValueError("max_paths must be at least 1")
    if measurements.count < max_paths:
        raise ValueError("need at least as many measurements as paths sought")
    a = measurement_matrix(dictionary, measurements.positions)
    y = measurements.samples
    support: list[int] = []
    coeffs = np.zeros(0, dtype=complex)
    residual = y.copy()
    for _ in range(max_paths):
        if np.linalg.norm(residual) <= eps_residual:
            break
        corr = np.abs(np.conj(a.T) @ residual)
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        sub = a[:, support]
        coeffs, *_ = np.linalg.lstsq(sub, y, rcond=None)
        residual = y - sub @ coeffs
    return FriEstimate(
        indices=tuple(support),
        directions=dictionary.directions[support].copy(),
        coefficients=np.asarray(coeffs, dtype=complex),
        residual_norm=float(np.linalg.norm(residual)),
    )


def refit_coefficients(measurements: MeasurementSet, directions) -> np.ndarray:
    """Least-squares path coefficients for known arrival directions.

    Supports the two-time-scale strategy: directions estimated rarely,
    coefficients refit from fresh measurements.  The residual is orthogonal
    to the span of the atoms; a rank-deficient atom matrix is rejected with
    a conditioning diagnostic.
    """
    d = np.asarray(directions, dtype=float)
    if d.ndim != 2 or d.shape[1] != 3 or d.shape[0] < 1:
        raise ValueError("directions must have shape (k, 3)")
    if measurements.count < d.shape[0]:
        raise ValueError("need at least as many measurements as directions")
    a = measurement_matrix(AngleDictionary(d), measurements.positions)
    coeffs, _, rank, _ = np.linalg.lstsq(a, measurements.samples, rcond=None)
    if rank < d.shape[0]:
        raise ValueError(
            f"atom matrix is rank deficient (rank {rank} < {d.shape[0]}, "
            f"condition number {np.linalg.cond(a):.3e})")
    return coeffs


def reconstruct_and_score(estimate: FriEstimate, truth: ChannelSpec,
                          region: Region, step: float) -> float:
    """Normalized MSE of the reconstructed field against the true field.

    NMSE = sum |h_hat - h|^2 / sum |h|^2 over the region grid; an empty
    estimate scores exactly 1.
    """
    h_true, _ = field_on_grid(truth, region, step)
    energy = float(np.sum(np.abs(h_true) ** 2))
    if energy == 0.0:
        raise ValueError("true field has zero energy on the grid")
    spec_hat = estimate.to_channel_spec()
    if spec_hat is None:
        return 1.0
    h_hat, _ = field_on_grid(spec_hat, region, step)
    return float(np.sum(np.abs(h_hat - h_true) ** 2) / energy)
