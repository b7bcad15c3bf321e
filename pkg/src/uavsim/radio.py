"""Air-to-ground radio model and connectivity heatmap.

RSRP at a point is tx_power + antenna_gain - mean_pathloss (dB arithmetic),
with no interference term (frequency planning is assumed orthogonal) and no
fading realizations (average pathloss only).

Channel model family (all coefficients live in ChannelParams):
  * LoS pathloss: free-space distance term plus a fixed excess,
    L = 32.45 + 20 log10(d3d_m) + 20 log10(f_GHz) + excess.
  * NLoS pathloss: urban-macro aerial form with an altitude-dependent
    distance exponent, floored at the LoS value,
    L = max(L_los, -17.5 + (46 - 7 log10(h)) log10(d3d) + 20 log10(40 pi f_GHz / 3)).
  * LoS probability: height-dependent piecewise model; closed-form urban
    curve below 22.5 m, (d1, p1) aerial curve up to 100 m, 1 above.
  * Antenna: sectorized element pattern (65/10 degree 3 dB beamwidths,
    30 dB floor) referenced to the tilted boresight, combined with an
    N-element vertical array factor electrically steered to the downtilt.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .scenario import Cell, GridSpec, Scenario, grid_to_coords, scenario_checksum

_LN10_OVER_10 = np.log(10.0) / 10.0


@dataclass(frozen=True)
class ChannelParams:
    """Coefficients of the air-to-ground channel and BS antenna model."""

    carrier_freq: float = 1.8e9  # Hz
    # LoS probability, aerial branch (heights in (low_alt_max, full_los_alt]):
    #   d1 = max(los_d1_a * log10(h) + los_d1_b, los_d1_min)
    #   p1 = los_p1_a * log10(h) + los_p1_b
    los_d1_a: float = 460.0
    los_d1_b: float = -700.0
    los_d1_min: float = 18.0
    los_p1_a: float = 4300.0
    los_p1_b: float = -3800.0
    low_alt_max: float = 22.5    # below: ground-UE urban curve
    full_los_alt: float = 300.0  # above: always line-of-sight
    # Pathloss
    los_excess_db: float = 2.0
    nlos_base_db: float = -17.5
    nlos_exp_a: float = 46.0
    nlos_exp_height: float = 7.0
    # Antenna
    element_gain_dbi: float = 7.0
    horiz_beamwidth_deg: float = 65.0
    vert_beamwidth_deg: float = 10.0
    max_attenuation_db: float = 30.0  # element floor and front-to-back ratio
    vertical_elements: int = 8
    element_spacing_wl: float = 0.8  # vertical spacing in wavelengths

    @property
    def peak_gain_dbi(self) -> float:
        return self.element_gain_dbi + 10.0 * np.log10(self.vertical_elements)

    def validate(self) -> None:
        if self.carrier_freq <= 0:
            raise ValidationError("carrier_freq must be positive")
        if self.vertical_elements < 1:
            raise ValidationError("vertical_elements must be >= 1")
        if self.horiz_beamwidth_deg <= 0 or self.vert_beamwidth_deg <= 0:
            raise ValidationError("beamwidths must be positive")
        if self.max_attenuation_db <= 0:
            raise ValidationError("max_attenuation_db must be positive")


def los_probability(d2d, uav_height: float, params: ChannelParams):
    """Line-of-sight probability at horizontal distance d2d (m) and UAV height (m).

    Equals 1 overhead (d2d = 0) and is non-increasing in d2d at fixed height.
    Accepts scalar or ndarray d2d.
    """
    if uav_height <= 0:
        raise ValidationError("uav_height must be positive")
    d = np.asarray(d2d, dtype=float)
    if np.any(d < 0):
        raise ValidationError("d2d must be nonnegative")
    if uav_height > params.full_los_alt:
        p = np.ones_like(d)
    elif uav_height > params.low_alt_max:
        logh = np.log10(uav_height)
        d1 = max(params.los_d1_a * logh + params.los_d1_b, params.los_d1_min)
        p1 = params.los_p1_a * logh + params.los_p1_b
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, d1 / np.maximum(d, 1e-12), 1.0)
        p = np.where(d <= d1, 1.0, ratio + np.exp(-d / p1) * (1.0 - ratio))
    else:
        # Ground-UE urban curve with the elevated-user correction term.
        h = uav_height
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.where(
                d <= 18.0, 1.0,
                18.0 / np.maximum(d, 1e-12)
                + np.exp(-d / 63.0) * (1.0 - 18.0 / np.maximum(d, 1e-12)))
        c = 0.0 if h <= 13.0 else ((h - 13.0) / 10.0) ** 1.5
        bump = 1.0 + c * 1.25 * (d / 100.0) ** 3 * np.exp(-d / 150.0)
        p = np.clip(base * bump, 0.0, 1.0)
    return float(p) if np.isscalar(d2d) else p


def los_pathloss(d3d, params: ChannelParams):
    """Line-of-sight pathloss (dB): free-space distance term plus fixed excess."""
    d = np.asarray(d3d, dtype=float)
    if np.any(d <= 0):
        raise ValidationError("3D distance must be positive")
    f_ghz = params.carrier_freq / 1e9
    out = 32.45 + 20.0 * np.log10(d) + 20.0 * np.log10(f_ghz) + params.los_excess_db
    return float(out) if np.isscalar(d3d) else out


def nlos_pathloss(d3d, uav_height: float, params: ChannelParams):
    """Non-LoS pathloss (dB), never below the LoS value at the same geometry."""
    d = np.asarray(d3d, dtype=float)
    if np.any(d <= 0):
        raise ValidationError("3D distance must be positive")
    f_ghz = params.carrier_freq / 1e9
    exponent10 = params.nlos_exp_a - params.nlos_exp_height * np.log10(uav_height)
    raw = params.nlos_base_db + exponent10 * np.log10(d) \
        + 20.0 * np.log10(40.0 * np.pi * f_ghz / 3.0)
    out = np.maximum(raw, los_pathloss(d, params))
    return float(out) if np.isscalar(d3d) else out


def mean_pathloss(cell: Cell, target, params: ChannelParams):
    """Expected pathloss (dB): P_los * L_los + (1 - P_los) * L_nlos."""
    tx, ty, tz = _target_arrays(target)
    d2d = np.hypot(tx - cell.position[0], ty - cell.position[1])
    d3d = np.sqrt(d2d ** 2 + (tz - cell.position[2]) ** 2)
    if np.any(d3d <= 0):
        raise ValidationError("target coincides with the BS antenna")
    uav_height = float(np.asarray(tz).reshape(-1)[0])
    p = los_probability(d2d, uav_height, params)
    out = p * los_pathloss(d3d, params) + (1.0 - p) * nlos_pathloss(d3d, uav_height, params)
    return float(out) if np.isscalar(d3d) or np.asarray(out).ndim == 0 else out


def _target_arrays(target):
    t = np.asarray(target, dtype=float)
    if t.ndim == 1:
        return t[0], t[1], t[2]
    return t[..., 0], t[..., 1], t[..., 2]


def _wrap_deg(a):
    """Wrap angles to (-180, 180]."""
    return -((-np.asarray(a) + 180.0) % 360.0 - 180.0)


def antenna_gain(cell: Cell, target, params: ChannelParams):
    """Sector antenna gain (dBi) from a cell toward a 3D target point.

    Element pattern is referenced to the mechanically+electrically tilted
    boresight; the vertical array factor is steered to the same downtilt.
    The composite is clamped to peak - max_attenuation_db from below.
    """
    tx, ty, tz = _target_arrays(target)
    dx = tx - cell.position[0]
    dy = ty - cell.position[1]
    dz = tz - cell.position[2]
    d2d = np.hypot(dx, dy)
    if np.any((d2d == 0) & (np.asarray(dz) == 0)):
        raise ValidationError("target coincides with the BS antenna")

    az = np.degrees(np.arctan2(dy, dx))  # 0 deg = +x axis, CCW
    phi = _wrap_deg(az - cell.azimuth_deg)
    elev = np.degrees(np.arctan2(dz, d2d))  # >0 above the antenna
    theta_off = elev + cell.downtilt_deg    # 0 on the tilted boresight

    am = params.max_attenuation_db
    att_h = 12.0 * (phi / params.horiz_beamwidth_deg) ** 2
    att_v = 12.0 * (theta_off / params.vert_beamwidth_deg) ** 2
    element = params.element_gain_dbi - np.minimum(att_h + att_v, am)

    # Uniform vertical ULA, electrically steered to -downtilt; zenith angles.
    n = params.vertical_elements
    theta = np.radians(90.0 - elev)
    theta_tilt = np.radians(90.0 + cell.downtilt_deg)
    psi = 2.0 * np.pi * params.element_spacing_wl * (np.cos(theta) - np.cos(theta_tilt))
    steps = np.arange(n).reshape((n,) + (1,) * np.ndim(psi))
    af = np.abs(np.exp(1j * steps * psi).sum(axis=0)) ** 2 / n
    af_db = 10.0 * np.log10(np.maximum(af, 1e-30))

    gain = np.maximum(element + af_db, params.peak_gain_dbi - am)
    return float(gain) if np.ndim(gain) == 0 else gain


def rsrp(cell: Cell, target, params: ChannelParams):
    """Reference signal received power (dBm) from one cell at a target point."""
    return cell.tx_power_dbm + antenna_gain(cell, target, params) \
        - mean_pathloss(cell, target, params)


def is_covered(rsrp_value: float, threshold: float) -> bool:
    """A point is covered when RSRP is equal or higher than the threshold."""
    return rsrp_value >= threshold


@dataclass(frozen=True, eq=False)
class RadioMap:
    """Per grid point, the mprime strongest cells with their RSRP values.

    cell_ids and rsrp_dbm are (size, size, mprime) arrays indexed [i, j, rank],
    rank 0 strongest; ties broken toward the lower cell id.
    """

    grid: GridSpec
    mprime: int
    num_cells: int
    cell_ids: np.ndarray   # int32
    rsrp_dbm: np.ndarray   # float64
    scenario_sha: bytes = b"\x00" * 32

    def __post_init__(self):
        self.cell_ids.setflags(write=False)
        self.rsrp_dbm.setflags(write=False)

    def validate(self) -> "RadioMap":
        j = self.grid.size
        if self.cell_ids.shape != (j, j, self.mprime) or self.rsrp_dbm.shape != (j, j, self.mprime):
            raise ValidationError("radio map arrays do not match grid/mprime shape")
        if self.mprime < 1 or self.mprime > self.num_cells:
            raise ValidationError(f"mprime must be in [1, {self.num_cells}], got {self.mprime}")
        if np.any(np.diff(self.rsrp_dbm, axis=2) > 0):
            raise ValidationError("radio map ranks are not sorted by descending RSRP")
        return self

    def max_rsrp(self) -> np.ndarray:
        return self.rsrp_dbm[:, :, 0]

    def coverage_fraction(self, threshold: float) -> float:
        return float(np.mean(self.max_rsrp() >= threshold))


def rsrp_field(scenario: Scenario, cell: Cell, altitude: float | None = None) -> np.ndarray:
    """RSRP (dBm) of one cell over the whole grid; (size, size) array indexed [i, j]."""
    g = scenario.grid
    h = g.altitude if altitude is None else altitude
    xs = g.origin[0] + np.arange(g.size) * g.step
    ys = g.origin[1] + np.arange(g.size) * g.step
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    target = np.stack([gx, gy, np.full_like(gx, h)], axis=-1)
    return rsrp(cell, target, scenario.channel)


def build_radio_map(scenario: Scenario, mprime: int, altitude: float | None = None) -> RadioMap:
    """Evaluate RSRP for all cells at every grid point, keep the mprime strongest."""
    m = scenario.num_cells
    if not 1 <= mprime <= m:
        raise ValidationError(f"mprime must be in [1, {m}], got {mprime}")
    g = scenario.grid
    h = g.altitude if altitude is None else altitude
    grid = g if altitude is None else GridSpec(g.origin, g.step, g.size, altitude)

    stack = np.empty((m, g.size, g.size))
    for cell in scenario.cells:
        stack[cell.cell_id] = rsrp_field(scenario, cell, h)

    ids = np.broadcast_to(np.arange(m, dtype=np.int64)[:, None, None], stack.shape)
    order = np.lexsort((ids, -stack), axis=0)[:mprime]
    top_rsrp = np.take_along_axis(stack, order, axis=0)
    return RadioMap(
        grid=grid,
        mprime=mprime,
        num_cells=m,
        cell_ids=np.ascontiguousarray(np.moveaxis(order, 0, 2).astype(np.int32)),
        rsrp_dbm=np.ascontiguousarray(np.moveaxis(top_rsrp, 0, 2)),
        scenario_sha=scenario_checksum(scenario),
    ).validate()


# ---------------------------------------------------------------------------
# Persistence: compact binary container and CSV exports
# ---------------------------------------------------------------------------

_MAP_MAGIC = b"RMAP\x01"
_HEADER = struct.Struct("<5sIddII32s")  # magic, size, step, altitude, mprime, M, scenario sha


def save_radio_map(rmap: RadioMap, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(
            _MAP_MAGIC, rmap.grid.size, rmap.grid.step, rmap.grid.altitude,
            rmap.mprime, rmap.num_cells, rmap.scenario_sha))
        fh.write(struct.pack("<dd", *rmap.grid.origin))
        fh.write(np.ascontiguousarray(rmap.cell_ids).tobytes())
        fh.write(np.ascontiguousarray(rmap.rsrp_dbm).tobytes())


def load_radio_map(path) -> RadioMap:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ValidationError(f"radio map file {path} is truncated")
        magic, size, step, altitude, mprime, m, sha = _HEADER.unpack(header)
        if magic != _MAP_MAGIC:
            raise ValidationError(f"{path} is not a radio map file")
        ox, oy = struct.unpack("<dd", fh.read(16))
        n = size * size * mprime
        ids = np.frombuffer(fh.read(n * 4), dtype=np.int32).reshape(size, size, mprime)
        vals = np.frombuffer(fh.read(n * 8), dtype=np.float64).reshape(size, size, mprime)
        if ids.size != n or vals.size != n:
            raise ValidationError(f"radio map file {path} is truncated")
    grid = GridSpec(origin=(ox, oy), step=step, size=size, altitude=altitude)
    return RadioMap(grid=grid, mprime=mprime, num_cells=m,
                    cell_ids=ids.copy(), rsrp_dbm=vals.copy(), scenario_sha=sha).validate()


def write_map_csv(rmap: RadioMap, path) -> None:
    """Full map export: one row per (i, j, rank, cell_id, rsrp_dbm)."""
    with open(path, "w") as fh:
        fh.write("i,j,rank,cell_id,rsrp_dbm\n")
        for i in range(rmap.grid.size):
            for j in range(rmap.grid.size):
                for r in range(rmap.mprime):
                    fh.write(f"{i},{j},{r},{rmap.cell_ids[i, j, r]},"
                             f"{rmap.rsrp_dbm[i, j, r]:.6f}\n")


def write_heatmap_csv(rmap: RadioMap, path) -> None:
    """Per-point maximum RSRP for plotting; coordinates in meters."""
    g = rmap.grid
    best = rmap.max_rsrp()
    with open(path, "w") as fh:
        fh.write("i,j,x_m,y_m,altitude_m,max_rsrp_dbm\n")
        for i in range(g.size):
            x = g.origin[0] + i * g.step
            for j in range(g.size):
                y = g.origin[1] + j * g.step
                fh.write(f"{i},{j},{x:.3f},{y:.3f},{g.altitude:.3f},{best[i, j]:.6f}\n")


def map_checksum(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
