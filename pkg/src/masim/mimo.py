"""MIMO channels from path geometry, capacity metrics, and the greedy
per-antenna Rx placement search.

Entry (m, n) of the channel matrix is
``sum_l c_l * exp(j*2*pi*<rx_dir_l, r_m>) * exp(j*2*pi*<tx_dir_l, t_n>)``,
the natural two-sided extension of the scalar field response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, Region
from .util import write_csv_atomic

__all__ = [
    "MIN_ANTENNA_SPACING",
    "RxPlacement",
    "tx_ula",
    "build_channel_matrix",
    "capacity_identity_cov",
    "WaterfillingResult",
    "capacity_waterfilling",
    "SequentialSearchResult",
    "sequential_position_search",
    "write_capacity_csv",
]

# Minimum pairwise antenna separation in wavelengths (coupling constraint).
MIN_ANTENNA_SPACING = 0.5
_SPACING_SLACK = 1e-9


def _pairwise_ok(positions: np.ndarray) -> bool:
    m = positions.shape[0]
    for i in range(m - 1):
        d = np.linalg.norm(positions[i + 1:] - positions[i], axis=1)
        if d.min() < MIN_ANTENNA_SPACING - _SPACING_SLACK:
            return False
    return True


@dataclass(eq=False)
class RxPlacement:
    """Rx antenna positions with the pairwise half-wavelength constraint."""

    positions: np.ndarray
    region: Region | None = None

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 1:
            raise ValueError("positions must have shape (M, 3)")
        if not np.isfinite(p).all():
            raise ValueError("positions must be finite")
        if p.shape[0] > 1 and not _pairwise_ok(p):
            raise ValueError(
                f"antenna positions must be at least {MIN_ANTENNA_SPACING} wavelengths apart")
        if self.region is not None and not all(self.region.contains(r) for r in p):
            raise ValueError("all positions must lie inside the region")
        p.flags.writeable = False
        self.positions = p

    @property
    def count(self) -> int:
        return self.positions.shape[0]


def tx_ula(num_elements: int, spacing: float = 0.5) -> np.ndarray:
    """Tx positions (N, 3): uniform linear array along x at the origin."""
    if num_elements < 1:
        raise ValueError("need at least one element")
    t = np.zeros((num_elements, 3))
    t[:, 0] = np.arange(num_elements) * spacing
    return t


def build_channel_matrix(spec: ChannelSpec, tx_positions, rx) -> np.ndarray:
    """M x N channel matrix for the given Tx/Rx antenna positions."""
    if not spec.has_tx:
        raise ValueError("every path needs a departure direction for MIMO channels")
    t = np.asarray(tx_positions, dtype=float)
    if t.ndim != 2 or t.shape[1] != 3:
        raise ValueError("tx_positions must have shape (N, 3)")
    if t.shape[0] > 1 and not _pairwise_ok(t):
        raise ValueError(
            f"tx positions must be at least {MIN_ANTENNA_SPACING} wavelengths apart")
    if not isinstance(rx, RxPlacement):
        rx = RxPlacement(rx)
    b = np.exp(2j * np.pi * (rx.positions @ spec.rx_directions.T))  # (M, L)
    a = np.exp(2j * np.pi * (t @ spec.tx_directions.T))             # (N, L)
    return (b * spec.coefficients) @ a.T


def _capacity_batch(h_batch: np.ndarray, rho: float, num_tx: int) -> np.ndarray:
    """log2 det(I + rho/N * H H^H) for a (..., M, N) batch."""
    m = h_batch.shape[-2]
    gram = np.eye(m) + (rho / num_tx) * (h_batch @ np.conj(np.swapaxes(h_batch, -1, -2)))
    _, logdet = np.linalg.slogdet(gram)
    return logdet / math.log(2.0)


def capacity_identity_cov(h_matrix, rho: float, num_tx: int | None = None) -> float:
    """Capacity with an identity transmit covariance scaled by 1/N.

    ``C = log2 det(I_M + (rho/N) H H^H)`` in bits/s/Hz, where ``rho`` is the
    total transmit SNR and ``N`` the number of transmit antennas (defaults
    to the column count of H).
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    h = np.asarray(h_matrix, dtype=complex)
    if h.ndim != 2:
        raise ValueError("H must be a matrix")
    n = h.shape[1] if num_tx is None else int(num_tx)
    return float(_capacity_batch(h, rho, n))


@dataclass(eq=False)
class WaterfillingResult:
    """Water-filling capacity with the per-eigenchannel power allocation.

    ``allocation[k]`` is the power on the k-th strongest eigenchannel
    (singular values sorted descending, zeros included); the water level
    satisfies ``allocation[k] + 1/gain[k] == water_level`` on active
    channels.
    """

    capacity: float
    allocation: np.ndarray
    water_level: float
    singular_values: np.ndarray


def capacity_waterfilling(h_matrix, rho_total: float) -> WaterfillingResult:
    """Optimal power allocation over the eigenchannels of H.

    Solves max sum log2(1 + p_k s_k^2) subject to sum p_k = rho_total,
    p_k >= 0 by the active-set water-filling rule.
    """
    if rho_total <= 0:
        raise ValueError("rho_total must be positive")
    h = np.asarray(h_matrix, dtype=complex)
    s = np.linalg.svd(h, compute_uv=False)
    gains = s ** 2
    active = gains > gains.max() * 1e-15 if gains.size and gains.max() > 0 else np.zeros_like(gains, bool)
    if not active.any():
        raise ValueError("channel matrix has rank zero")
    g = gains[active]  # sorted descending by svd convention
    inv = 1.0 / g
    # Largest k such that the water level mu_k covers channel k.
    k_active = g.size
    for k in range(1, g.size + 1):
        mu = (rho_total + inv[:k].sum()) / k
        if mu < inv[k - 1]:
            k_active = k - 1
            break
    mu = (rho_total + inv[:k_active].sum()) / k_active
    allocation = np.zeros_like(gains)
    allocation[:k_active] = mu - inv[:k_active]
    capacity = float(np.log2(1.0 + allocation * gains).sum())
    return WaterfillingResult(capacity=capacity, allocation=allocation,
                              water_level=float(mu), singular_values=s)


@dataclass(eq=False)
class SequentialSearchResult:
    """Outcome of the greedy per-antenna placement search."""

    placement: RxPlacement
    capacity: float
    initial_capacity: float
    pass_capacities: list[float]


def _initial_ula_placement(region: Region, num_rx: int) -> np.ndarray:
    axes = region.free_axes
    if not axes:
        raise ValueError("region has no free axis to host the antennas")
    axis = max(axes, key=lambda a: region.extents[a])
    needed = (num_rx - 1) * MIN_ANTENNA_SPACING
    if needed > region.extents[axis] + 1e-12:
        raise ValueError(
            f"region too small to host {num_rx} antennas at "
            f"{MIN_ANTENNA_SPACING} wavelength spacing")
    positions = np.tile(region.center, (num_rx, 1))
    offsets = (np.arange(num_rx) - (num_rx - 1) / 2.0) * MIN_ANTENNA_SPACING
    positions[:, axis] = region.center[axis] + offsets
    return positions


def sequential_position_search(spec: ChannelSpec, region: Region, num_rx: int,
                               tx_positions, rho: float, step: float = 0.1,
                               tol_bits: float = 1e-6, max_passes: int = 10) -> SequentialSearchResult:
    """Greedy capacity-maximizing placement of the Rx antennas.

    Starting from a half-wavelength ULA inside the region (a valid
    fixed-antenna placement, whose capacity is the FPA baseline), each
    antenna in index order is moved to the best candidate grid point with
    the others fixed; candidates violating the pairwise spacing are
    skipped.  Passes repeat until the per-pass improvement drops below
    ``tol_bits`` or ``max_passes`` is reached, so the returned capacity
    never falls below the baseline.
    """
    t = np.asarray(tx_positions, dtype=float)
    num_tx = t.shape[0]
    positions = _initial_ula_placement(region, num_rx)
    h = build_channel_matrix(spec, t, RxPlacement(positions, region))
    capacity = float(_capacity_batch(h, rho, num_tx))
    initial_capacity = capacity

    coords = region.grid_coords(step)
    mesh = np.meshgrid(*coords, indexing="ij") if coords else []
    candidates = np.tile(region.origin, (int(np.prod([c.size for c in coords])) or 1, 1))
    for axis, grid in zip(region.free_axes, mesh):
        candidates[:, axis] = grid.ravel()
    b_cand = np.exp(2j * np.pi * (candidates @ spec.rx_directions.T))
    rows_cand = (b_cand * spec.coefficients) @ np.exp(2j * np.pi * (t @ spec.tx_directions.T)).T

    pass_capacities = []
    for _ in range(max_passes):
        before = capacity
        for m in range(num_rx):
            others = np.delete(positions, m, axis=0)
            if others.size:
                dists = np.linalg.norm(candidates[:, None, :] - others[None, :, :], axis=2)
                ok = dists.min(axis=1) >= MIN_ANTENNA_SPACING - _SPACING_SLACK
            else:
                ok = np.ones(candidates.shape[0], dtype=bool)
            if not ok.any():
                continue
            h_batch = np.broadcast_to(h, (int(ok.sum()),) + h.shape).copy()
            h_batch[:, m, :] = rows_cand[ok]
            caps = _capacity_batch(h_batch, rho, num_tx)
            best = int(np.argmax(caps))
            if caps[best] > capacity:
                capacity = float(caps[best])
                idx = np.nonzero(ok)[0][best]
                positions[m] = candidates[idx]
                h[m, :] = rows_cand[idx]
        pass_capacities.append(capacity)
        if capacity - before < tol_bits:
            break
    return SequentialSearchResult(
        placement=RxPlacement(positions, region),
        capacity=capacity,
        initial_capacity=initial_capacity,
        pass_capacities=pass_capacities,
    )


def write_capacity_csv(rows, path: str) -> None:
    """Export rows ``(snr_db, L, seed, capacity_fpa, capacity_ma)``."""
    write_csv_atomic(path, "snr_db,L,seed,capacity_fpa,capacity_ma",
                     ((float(s), int(l), int(k), float(cf), float(cm))
                      for s, l, k, cf, cm in rows))
