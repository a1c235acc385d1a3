"""Far-field multipath channel model over movable-antenna regions.

All positions and region sizes are expressed in wavelength units, so the
carrier wavelength never appears in a phase formula: a path with arrival
direction d contributes ``coeff * exp(+1j * 2*pi * <d, r>)`` at position
``r``.  The ``+j`` sign convention applies identically on the Tx side.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UNIT_NORM_TOL",
    "PathSpec",
    "ChannelSpec",
    "Region",
    "direction_from_angles",
    "angles_from_direction",
    "channel_gain",
    "field_on_grid",
    "sample_stochastic_channel",
    "channel_spec_to_json",
    "channel_spec_from_json",
]

UNIT_NORM_TOL = 1e-12


def direction_from_angles(theta: float, phi: float) -> np.ndarray:
    """Unit direction vector from elevation ``theta`` and azimuth ``phi``.

    Convention: ``(sin(theta)cos(phi), sin(theta)sin(phi), cos(theta))``
    with ``theta`` measured from the +z axis, ``theta in [0, pi]``.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def angles_from_direction(direction: np.ndarray) -> tuple[float, float]:
    """Inverse of :func:`direction_from_angles`; azimuth returned in [0, 2*pi)."""
    d = np.asarray(direction, dtype=float)
    theta = math.acos(min(1.0, max(-1.0, float(d[2]))))
    phi = math.atan2(float(d[1]), float(d[0])) % (2.0 * math.pi)
    return theta, phi


def _as_direction(value) -> np.ndarray:
    d = np.array(value, dtype=float)
    if d.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {d.shape}")
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"direction must have unit norm (|norm-1|={abs(norm - 1.0):.2e})")
    d.flags.writeable = False
    return d


@dataclass(eq=False)
class PathSpec:
    """One propagation path: arrival direction, complex coefficient, and an
    optional departure direction for scenarios with a Tx-side array."""

    rx_dir: np.ndarray
    coeff: complex
    tx_dir: np.ndarray | None = None

    def __post_init__(self):
        self.rx_dir = _as_direction(self.rx_dir)
        if self.tx_dir is not None:
            self.tx_dir = _as_direction(self.tx_dir)
        self.coeff = complex(self.coeff)
        if not (math.isfinite(self.coeff.real) and math.isfinite(self.coeff.imag)):
            raise ValueError("path coefficient must be finite")


@dataclass(eq=False)
class ChannelSpec:
    """Ordered list of paths defining the channel field over a region."""

    paths: tuple[PathSpec, ...]

    def __post_init__(self):
        self.paths = tuple(self.paths)
        if len(self.paths) < 1:
            raise ValueError("a channel needs at least one path")
        has_tx = self.paths[0].tx_dir is not None
        if any((p.tx_dir is not None) != has_tx for p in self.paths):
            raise ValueError("all paths must agree on the presence of a departure direction")
        rx = np.array([p.rx_dir for p in self.paths])
        rx.flags.writeable = False
        coeff = np.array([p.coeff for p in self.paths], dtype=complex)
        coeff.flags.writeable = False
        self._rx_directions = rx
        self._coefficients = coeff
        if has_tx:
            tx = np.array([p.tx_dir for p in self.paths])
            tx.flags.writeable = False
            self._tx_directions = tx
        else:
            self._tx_directions = None

    @property
    def num_paths(self) -> int:
        return len(self.paths)

    @property
    def has_tx(self) -> bool:
        return self._tx_directions is not None

    @property
    def rx_directions(self) -> np.ndarray:
        """(L, 3) arrival directions."""
        return self._rx_directions

    @property
    def tx_directions(self) -> np.ndarray | None:
        """(L, 3) departure directions, or None for Rx-only channels."""
        return self._tx_directions

    @property
    def coefficients(self) -> np.ndarray:
        """(L,) complex path coefficients."""
        return self._coefficients


@dataclass(eq=False)
class Region:
    """Axis-aligned movement region in wavelength units.

    A zero extent collapses that axis; the reference point defaults to the
    region center and must lie inside the box.
    """

    origin: np.ndarray
    extents: np.ndarray
    reference_point: np.ndarray = field(default=None)

    def __post_init__(self):
        self.origin = np.array(self.origin, dtype=float)
        self.extents = np.array(self.extents, dtype=float)
        if self.origin.shape != (3,) or self.extents.shape != (3,):
            raise ValueError("origin and extents must be 3-vectors")
        if not np.isfinite(self.origin).all() or not np.isfinite(self.extents).all():
            raise ValueError("region must be finite")
        if (self.extents < 0).any():
            raise ValueError("extents must be nonnegative")
        if self.reference_point is None:
            self.reference_point = self.origin + self.extents / 2.0
        else:
            self.reference_point = np.array(self.reference_point, dtype=float)
        if not self.contains(self.reference_point):
            raise ValueError("reference point must lie inside the region")
        for arr in (self.origin, self.extents, self.reference_point):
            arr.flags.writeable = False

    @classmethod
    def square(cls, size: float, center=(0.0, 0.0, 0.0)) -> "Region":
        """Square ``size x size`` region in the xy-plane, centered at ``center``."""
        c = np.asarray(center, dtype=float)
        return cls(origin=c - [size / 2.0, size / 2.0, 0.0], extents=[size, size, 0.0])

    @property
    def center(self) -> np.ndarray:
        return self.origin + self.extents / 2.0

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.extents

    @property
    def free_axes(self) -> tuple[int, ...]:
        """Axes with nonzero extent, in x, y, z order."""
        return tuple(int(a) for a in np.nonzero(self.extents > 0)[0])

    def contains(self, r, tol: float = 1e-9) -> bool:
        r = np.asarray(r, dtype=float)
        return bool((r >= self.origin - tol).all() and (r <= self.upper + tol).all())

    def grid_coords(self, step: float) -> list[np.ndarray]:
        """Per-free-axis grid coordinates with floor(extent/step)+1 points."""
        if step <= 0:
            raise ValueError("grid step must be positive")
        coords = []
        for a in self.free_axes:
            n = int(math.floor(self.extents[a] / step + 1e-9)) + 1
            coords.append(self.origin[a] + np.arange(n) * step)
        return coords


def channel_gain(spec: ChannelSpec, r) -> complex | np.ndarray:
    """Complex channel response ``h(r) = sum_l c_l exp(j 2 pi <d_l, r>)``.

    Parameters
    ----------
    spec : ChannelSpec
    r : array_like
        Position(s) in wavelengths, shape (3,) or (..., 3).

    Returns
    -------
    complex scalar for a single position, else ndarray of shape (...).
    """
    r = np.asarray(r, dtype=float)
    if r.shape[-1] != 3:
        raise ValueError("positions must have a trailing dimension of 3")
    if not np.isfinite(r).all():
        raise ValueError("positions must be finite")
    phases = r @ spec.rx_directions.T
    values = np.exp(2j * np.pi * phases) @ spec.coefficients
    if r.ndim == 1:
        return complex(values)
    return values


def field_on_grid(spec: ChannelSpec, region: Region, step: float):
    """Sample the channel response on the region's grid.

    Returns ``(values, coords)`` where ``values`` has one axis per free
    region axis (shape () for a degenerate region) and ``coords`` lists the
    grid coordinates along each free axis.  Uses the separability of the
    plane-wave phase across axes, so cost scales with the grid perimeter
    rather than its area.
    """
    coords = region.grid_coords(step)
    axes = region.free_axes
    dirs = spec.rx_directions
    # Phase contribution of the collapsed coordinates is constant per path.
    fixed = region.origin.copy()
    for a in axes:
        fixed[a] = 0.0
    base = spec.coefficients * np.exp(2j * np.pi * (dirs @ fixed))
    if len(axes) == 0:
        return np.asarray(complex(base.sum())), coords
    factors = [np.exp(2j * np.pi * np.outer(c, dirs[:, a])) for c, a in zip(coords, axes)]
    if len(axes) == 1:
        return factors[0] @ base, coords
    if len(axes) == 2:
        return (factors[0] * base) @ factors[1].T, coords
    return np.einsum("il,jl,kl->ijk", factors[0] * base, factors[1], factors[2]), coords


def _sample_hemisphere(rng: np.random.Generator, count: int) -> np.ndarray:
    """Directions uniform in solid angle over the upper (z >= 0) hemisphere."""
    z = rng.random(count)
    phi = rng.uniform(0.0, 2.0 * np.pi, count)
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def sample_stochastic_channel(num_paths: int, seed, include_tx: bool = False) -> ChannelSpec:
    """Draw a random multipath channel.

    Coefficients are i.i.d. zero-mean circularly symmetric complex Gaussian
    with per-path variance ``1/num_paths`` (unit total mean power, so the
    expected power gain is 1 at every position).  Directions are uniform in
    solid angle over the upper hemisphere; this distribution is a modeling
    choice recorded here so experiments are self-describing.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`; pass
    an ``(experiment_seed, trial_index)`` tuple to derive per-trial streams.
    """
    if num_paths < 1:
        raise ValueError("num_paths must be at least 1")
    rng = np.random.default_rng(seed)
    rx = _sample_hemisphere(rng, num_paths)
    tx = _sample_hemisphere(rng, num_paths) if include_tx else None
    scale = math.sqrt(1.0 / (2.0 * num_paths))
    coeff = scale * (rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths))
    paths = [
        PathSpec(rx_dir=rx[l], coeff=coeff[l], tx_dir=None if tx is None else tx[l])
        for l in range(num_paths)
    ]
    return ChannelSpec(tuple(paths))


def channel_spec_to_json(spec: ChannelSpec, indent: int | None = None) -> str:
    """Serialize a channel to JSON.

    Schema: ``{"paths": [{"rx_theta", "rx_phi", "coeff_re", "coeff_im"}, ...]}``
    with angles in radians; paths with a Tx side carry ``tx_theta``/``tx_phi``.
    """
    records = []
    for p in spec.paths:
        theta, phi = angles_from_direction(p.rx_dir)
        rec = {"rx_theta": theta, "rx_phi": phi,
               "coeff_re": p.coeff.real, "coeff_im": p.coeff.imag}
        if p.tx_dir is not None:
            rec["tx_theta"], rec["tx_phi"] = angles_from_direction(p.tx_dir)
        records.append(rec)
    return json.dumps({"paths": records}, indent=indent)


def channel_spec_from_json(text: str) -> ChannelSpec:
    """Parse the JSON format produced by :func:`channel_spec_to_json`."""
    data = json.loads(text)
    paths = []
    for rec in data["paths"]:
        rx = direction_from_angles(rec["rx_theta"], rec["rx_phi"])
        tx = None
        if "tx_theta" in rec:
            tx = direction_from_angles(rec["tx_theta"], rec["tx_phi"])
        paths.append(PathSpec(rx_dir=rx, coeff=complex(rec["coeff_re"], rec["coeff_im"]), tx_dir=tx))
    return ChannelSpec(tuple(paths))
