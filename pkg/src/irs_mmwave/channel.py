"""Geometric mmWave channels between a TX, an IRS and an RX.

Every link is a sum of rank-one paths ``alpha_q a_r(aoa_q) a_t(aod_q)^H``
seen through uniform planar arrays. Link distances set the per-path gain
variance through a 28 GHz log-distance path-loss model with log-normal
shadowing.

Random draws are taken from an explicit ``numpy.random.Generator`` in a fixed
order (see :func:`sample_paths` and :func:`sample_link_geometry`), so a seed
reproduces a realization bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

import numpy as np

# (alpha [dB], beta, shadowing std [dB]) of the path-loss model
LOS_PARAMS = (61.4, 2.0, 5.8)
NLOS_PARAMS = (72.0, 2.92, 8.7)
DIRECT_PENETRATION_DB = 40.1


class Link(str, Enum):
    TR = "TR"  # TX -> RX (direct)
    TI = "TI"  # TX -> IRS
    IR = "IR"  # IRS -> RX


@dataclass(frozen=True)
class UpaGeometry:
    """Uniform planar array of ``horizontal x vertical`` elements.

    ``spacing`` is the element spacing in wavelengths.
    """

    horizontal: int
    vertical: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.horizontal < 1 or self.vertical < 1:
            raise ValueError(f"UPA needs at least one element per axis, got "
                             f"{self.horizontal}x{self.vertical}")
        if not self.spacing > 0:
            raise ValueError(f"element spacing must be positive, got {self.spacing}")

    @property
    def size(self) -> int:
        return self.horizontal * self.vertical

    @classmethod
    def square(cls, n: int, spacing: float = 0.5) -> "UpaGeometry":
        """Most nearly square UPA with exactly ``n`` elements."""
        h = int(np.floor(np.sqrt(n)))
        while n % h:
            h -= 1
        return cls(n // h, h, spacing)

    def response(self, azimuth, elevation) -> np.ndarray:
        """Array response; see :func:`upa_response`."""
        return upa_response(self, azimuth, elevation)


def upa_response(geom: UpaGeometry, azimuth, elevation) -> np.ndarray:
    """Normalized UPA response vector(s).

    Element ``(i_h, i_v)`` sits at flat index ``i_h * vertical + i_v`` (the
    vertical index runs fastest) and equals
    ``exp(j 2 pi d (i_h sin(az) sin(el) + i_v cos(el))) / sqrt(N)``.

    Parameters
    ----------
    geom : UpaGeometry
    azimuth, elevation : float or array_like of shape (P,)
        Angles in radians.

    Returns
    -------
    ndarray
        Shape (N,) for scalar angles, (N, P) for angle arrays.
    """
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    if not (np.all(np.isfinite(az)) and np.all(np.isfinite(el))):
        raise ValueError("angles must be finite")
    scalar = az.ndim == 0 and el.ndim == 0
    az, el = np.broadcast_arrays(np.atleast_1d(az), np.atleast_1d(el))
    i_h = np.repeat(np.arange(geom.horizontal), geom.vertical)
    i_v = np.tile(np.arange(geom.vertical), geom.horizontal)
    phase = 2 * np.pi * geom.spacing * (
        np.outer(i_h, np.sin(az) * np.sin(el)) + np.outer(i_v, np.cos(el)))
    out = np.exp(1j * phase) / np.sqrt(geom.size)
    return out[:, 0] if scalar else out


def path_loss_db(distance: float, los: bool, shadowing_db: float = 0.0,
                 penetration_db: float = 0.0) -> float:
    """``alpha + 10 beta log10(d) + xi + penetration`` in dB."""
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    alpha, beta, _ = LOS_PARAMS if los else NLOS_PARAMS
    return alpha + 10 * beta * np.log10(distance) + shadowing_db + penetration_db


@dataclass(frozen=True)
class LinkGeometry:
    d_tr: float
    d_ti: float
    d_ir: float

    def __post_init__(self):
        for name in ("d_tr", "d_ti", "d_ir"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def distance(self, link: Link) -> float:
        return {Link.TR: self.d_tr, Link.TI: self.d_ti, Link.IR: self.d_ir}[Link(link)]


def sample_link_geometry(rng: np.random.Generator, ti_range=(50.0, 60.0),
                         ir_range=(10.0, 20.0), tr_offset: float = 10.0) -> LinkGeometry:
    """Draw ``d_TI``, ``d_IR`` then ``d_TR ~ U[d_TI + d_IR - offset, d_TI + d_IR)``."""
    d_ti = rng.uniform(*ti_range)
    d_ir = rng.uniform(*ir_range)
    total = d_ti + d_ir
    d_tr = rng.uniform(total - tr_offset, total)
    return LinkGeometry(d_tr=d_tr, d_ti=d_ti, d_ir=d_ir)


@dataclass(frozen=True)
class PathSet:
    """Propagation paths of one link, strongest first.

    ``delays`` holds the tap index of each path in the frequency-selective
    model; a freshly sampled set has ``delays == arange(n)``.
    """

    gains: np.ndarray
    aoa_az: np.ndarray
    aoa_el: np.ndarray
    aod_az: np.ndarray
    aod_el: np.ndarray
    los: np.ndarray
    delays: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.gains)
        if n < 1:
            raise ValueError("a path set needs at least one path")
        if self.delays is None:
            object.__setattr__(self, "delays", np.arange(n))
        for name in ("aoa_az", "aoa_el", "aod_az", "aod_el", "los", "delays"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, expected {n}")
        if not (np.all(np.isfinite(self.gains)) and np.all(np.isfinite(self.angles))):
            raise ValueError("path gains and angles must be finite")

    def __len__(self) -> int:
        return len(self.gains)

    @property
    def angles(self) -> np.ndarray:
        return np.stack([self.aoa_az, self.aoa_el, self.aod_az, self.aod_el])

    def sorted(self) -> "PathSet":
        """Copy reordered by non-increasing ``|gain|`` (stable)."""
        order = np.argsort(-np.abs(self.gains), kind="stable")
        return PathSet(*(np.asarray(a)[order] for a in (
            self.gains, self.aoa_az, self.aoa_el, self.aod_az, self.aod_el,
            self.los, self.delays)))

    def with_taps(self) -> "PathSet":
        """Copy whose delay taps follow the current path order."""
        return replace(self, delays=np.arange(len(self)))

    def rx_responses(self, geom: UpaGeometry) -> np.ndarray:
        return upa_response(geom, self.aoa_az, self.aoa_el)

    def tx_responses(self, geom: UpaGeometry) -> np.ndarray:
        return upa_response(geom, self.aod_az, self.aod_el)


def sample_paths(rng: np.random.Generator, n_path: int, link: Link, distance: float,
                 n_rows: int, n_cols: int, angle_range: float = 1.0,
                 shadowing: bool = True,
                 penetration_db: float = DIRECT_PENETRATION_DB) -> PathSet:
    """Draw the paths of one link.

    Draw order: LOS shadowing, NLOS shadowing (both skipped when
    ``shadowing`` is False), ``2 * n_path`` standard normals for the gains,
    then ``4 * n_path`` uniforms for AoA az/el and AoD az/el.

    The direct link is all-NLOS with an extra ``penetration_db``; on the
    IRS links path 0 (before sorting) is LOS and the rest NLOS. Shadowing is
    drawn once per link and path class. Azimuths are uniform on
    ``[0, 2 pi nu)``, elevations on ``[0, pi nu)`` with ``nu = angle_range``.
    Gain variance is ``(n_rows n_cols / n_path) 10^(-PL/10)``.
    """
    if n_path < 1:
        raise ValueError("n_path must be >= 1")
    link = Link(link)
    if shadowing:
        xi_los = rng.normal(0.0, LOS_PARAMS[2])
        xi_nlos = rng.normal(0.0, NLOS_PARAMS[2])
    else:
        xi_los = xi_nlos = 0.0

    los = np.zeros(n_path, dtype=bool)
    if link is not Link.TR:
        los[0] = True
    pen = penetration_db if link is Link.TR else 0.0
    pl = np.array([path_loss_db(distance, bool(l), xi_los if l else xi_nlos, pen) for l in los])
    variance = (n_rows * n_cols / n_path) * 10.0 ** (-0.1 * pl)

    z = rng.standard_normal((2, n_path))
    gains = np.sqrt(variance / 2) * (z[0] + 1j * z[1])

    u = rng.random((4, n_path))
    scale = np.array([2 * np.pi, np.pi, 2 * np.pi, np.pi])[:, None] * angle_range
    aoa_az, aoa_el, aod_az, aod_el = u * scale
    return PathSet(gains, aoa_az, aoa_el, aod_az, aod_el, los).sorted().with_taps()


def _sum_paths(a_r: np.ndarray, gains: np.ndarray, a_t: np.ndarray) -> np.ndarray:
    return (a_r * gains) @ a_t.conj().T


def synthesize_narrowband(paths: PathSet, rx_geom: UpaGeometry, tx_geom: UpaGeometry) -> np.ndarray:
    """``A_r diag(gains) A_t^H`` for one link."""
    return _sum_paths(paths.rx_responses(rx_geom), paths.gains, paths.tx_responses(tx_geom))


def ofdm_tap_phases(delays: np.ndarray, n_subcarriers: int) -> np.ndarray:
    """``exp(-j 2 pi q k / K)`` as a (K, n_path) array, exactly 1 where ``q k = 0``."""
    if n_subcarriers < 1:
        raise ValueError("number of subcarriers must be >= 1")
    qk = np.outer(np.arange(n_subcarriers), delays)
    phases = np.exp(-2j * np.pi * (qk % n_subcarriers) / n_subcarriers)
    phases[qk % n_subcarriers == 0] = 1.0
    return phases


def synthesize_ofdm(paths: PathSet, rx_geom: UpaGeometry, tx_geom: UpaGeometry,
                    n_subcarriers: int) -> np.ndarray:
    """Per-subcarrier channel matrices, shape (K, rows, cols)."""
    a_r = paths.rx_responses(rx_geom)
    a_t = paths.tx_responses(tx_geom)
    phases = ofdm_tap_phases(paths.delays, n_subcarriers)
    return np.stack([_sum_paths(a_r, paths.gains * ph, a_t) for ph in phases])


@dataclass(frozen=True)
class ArrayConfig:
    """TX, RX and IRS array geometries."""

    tx: UpaGeometry
    rx: UpaGeometry
    irs: UpaGeometry

    def link_arrays(self, link: Link) -> tuple[UpaGeometry, UpaGeometry]:
        """(receiving side, transmitting side) of ``link``."""
        return {Link.TR: (self.rx, self.tx), Link.TI: (self.irs, self.tx),
                Link.IR: (self.rx, self.irs)}[Link(link)]


@dataclass(frozen=True)
class ChannelTriple:
    """Direct, TX-IRS and IRS-RX channels with their paths.

    ``h_tr``, ``h_ti``, ``h_ir`` are 2-D for a narrowband triple and carry a
    leading subcarrier axis for an OFDM triple (``n_subcarriers`` set).
    """

    arrays: ArrayConfig
    paths_tr: PathSet
    paths_ti: PathSet
    paths_ir: PathSet
    h_tr: np.ndarray
    h_ti: np.ndarray
    h_ir: np.ndarray
    n_subcarriers: Union[int, None] = None

    @property
    def is_ofdm(self) -> bool:
        return self.n_subcarriers is not None

    def paths(self, link: Link) -> PathSet:
        return {Link.TR: self.paths_tr, Link.TI: self.paths_ti, Link.IR: self.paths_ir}[Link(link)]

    def with_paths(self, paths_tr: PathSet, paths_ti: PathSet, paths_ir: PathSet) -> "ChannelTriple":
        """Re-synthesize the matrices from new path sets."""
        return build_triple(self.arrays, paths_tr, paths_ti, paths_ir, self.n_subcarriers)


def build_triple(arrays: ArrayConfig, paths_tr: PathSet, paths_ti: PathSet, paths_ir: PathSet,
                 n_subcarriers: Union[int, None] = None) -> ChannelTriple:
    mats = []
    for link, paths in zip(Link, (paths_tr, paths_ti, paths_ir)):
        rx, tx = arrays.link_arrays(link)
        if n_subcarriers is None:
            mats.append(synthesize_narrowband(paths, rx, tx))
        else:
            mats.append(synthesize_ofdm(paths, rx, tx, n_subcarriers))
    return ChannelTriple(arrays, paths_tr, paths_ti, paths_ir, *mats, n_subcarriers=n_subcarriers)


def sample_triple(rng: np.random.Generator, arrays: ArrayConfig, geometry: LinkGeometry,
                  n_path, angle_range: float = 1.0, shadowing: bool = True,
                  penetration_db: float = DIRECT_PENETRATION_DB,
                  n_subcarriers: Union[int, None] = None) -> ChannelTriple:
    """Sample the TR, TI and IR paths (in that order) and synthesize the matrices.

    ``n_path`` is an int shared by all links or a mapping keyed by link name.
    """
    path_sets = []
    for link in Link:
        count = n_path[link.value] if isinstance(n_path, dict) else n_path
        rx, tx = arrays.link_arrays(link)
        path_sets.append(sample_paths(rng, count, link, geometry.distance(link), rx.size, tx.size,
                                      angle_range, shadowing, penetration_db))
    return build_triple(arrays, *path_sets, n_subcarriers=n_subcarriers)


def perturb_paths(paths: PathSet, rng: np.random.Generator, rho: float) -> PathSet:
    """Estimated paths: ``(1 + delta) alpha`` and ``angle + delta`` degrees.

    Every ``delta`` is an independent draw from ``U[-rho, rho]``: one per
    gain and one per angle (draw order: gains, then AoA az/el, AoD az/el).
    The result is re-sorted by estimated gain magnitude; each path keeps its
    delay tap.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    n = len(paths)
    delta_gain = rng.uniform(-rho, rho, n)
    delta_ang = np.deg2rad(rng.uniform(-rho, rho, (4, n)))
    angles = paths.angles + delta_ang
    return PathSet((1 + delta_gain) * paths.gains, *angles, paths.los, paths.delays).sorted()


def apply_estimation_error(triple: ChannelTriple, rng: np.random.Generator,
                           rho: float) -> ChannelTriple:
    """Channel estimate used for design, re-synthesized from perturbed paths.

    ``rho == 0`` returns ``triple`` unchanged without consuming draws.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if rho == 0:
        return triple
    return triple.with_paths(*(perturb_paths(triple.paths(link), rng, rho) for link in Link))
