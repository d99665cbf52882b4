"""Hybrid and fully-digital beamformer construction.

The analog stages pick array response vectors of the propagation paths
(candidate columns) whose images under the total channel are strongest. The
baseband stages are the SVD of the effective channel with waterfilling,
rescaled so the hybrid precoder meets the power budget with equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .channel import UpaGeometry
from .numerics import DegenerateChannelError, svd_descending


class PowerAllocation(NamedTuple):
    levels: np.ndarray
    water_level: float

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.levels))


def waterfill(singular_values, noise_power: float, total_power: float,
              n_streams: int) -> PowerAllocation:
    """Capacity-achieving power split over the ``n_streams`` strongest modes.

    ``P_l = (mu - noise / s_l^2)^+`` with the water level ``mu`` fixed by
    ``sum(P_l) = total_power``. Streams are dropped weakest-first until every
    remaining level is positive.

    Raises
    ------
    DegenerateChannelError
        If every singular value is zero.
    """
    s = np.asarray(singular_values, dtype=float)
    if n_streams < 1 or n_streams > s.size:
        raise ValueError(f"n_streams={n_streams} incompatible with {s.size} singular values")
    if not total_power > 0:
        raise ValueError("total_power must be positive")
    s = s[:n_streams]
    if np.any(np.diff(s) > 0):
        raise ValueError("singular values must be sorted in descending order")
    gain = s ** 2 / noise_power
    n = int(np.count_nonzero(gain > 0))
    if n == 0:
        raise DegenerateChannelError("channel has no non-zero singular value")
    inv = 1.0 / gain[:n]
    # Work with gaps between floors so a tiny gain cannot swallow the budget in
    # rounding; the strongest stream is always active.
    while n > 1 and total_power <= np.sum(inv[n - 1] - inv[:n]):
        n -= 1
    gaps = inv[:n, None] - inv[None, :n]
    levels = np.zeros(n_streams)
    levels[:n] = (total_power - gaps.sum(axis=1)) / n
    levels[:n] = np.maximum(levels[:n], 0.0)
    levels *= total_power / levels.sum()
    return PowerAllocation(levels, float(inv[0] + levels[0]))


def rate_from_allocation(singular_values, levels, noise_power: float) -> float:
    s = np.asarray(singular_values, dtype=float)[:len(levels)]
    return float(np.sum(np.log2(1.0 + levels * s ** 2 / noise_power)))


def max_rate(singular_values, noise_power: float, total_power: float, n_streams: int) -> float:
    """Best rate over ``n_streams`` modes; 0 for an all-zero channel."""
    try:
        alloc = waterfill(singular_values, noise_power, total_power, n_streams)
    except DegenerateChannelError:
        return 0.0
    return rate_from_allocation(singular_values, alloc.levels, noise_power)


def max_rate_batch(singular_values, noise_power: float, total_power: float,
                   n_streams: int) -> np.ndarray:
    """Vectorized :func:`max_rate` over the leading axes of ``singular_values``.

    Each row must be sorted in descending order.
    """
    s = np.asarray(singular_values, dtype=float)[..., :n_streams]
    gain = s ** 2 / noise_power
    n = s.shape[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(gain > 0, 1.0 / np.where(gain > 0, gain, 1.0), np.inf)
        gaps = inv[..., :, None] - inv[..., None, :]
        lower = np.tril(np.ones((n, n), dtype=bool))
        need = np.sum(np.where(lower, gaps, 0.0), axis=-1)  # budget at which stream l switches on
        n_active = np.sum((need < total_power) & np.isfinite(inv), axis=-1)
        n_active = np.where(np.isfinite(inv[..., 0]), np.maximum(n_active, 1), 0)
        in_set = np.arange(n) < n_active[..., None]
        share = np.sum(np.where(in_set[..., None, :], gaps, 0.0), axis=-1)
        power = np.where(in_set, (total_power - share) / np.maximum(n_active, 1)[..., None], 0.0)
        power = np.clip(power, 0.0, None)
        rate = np.sum(np.log2(1.0 + np.where(in_set, power * gain, 0.0)), axis=-1)
    return np.where(n_active > 0, rate, 0.0)


class BasebandDesign(NamedTuple):
    w_bb: np.ndarray
    f_bb: np.ndarray
    rate: float
    allocation: PowerAllocation


def baseband_design(h_eff, noise_power: float, total_power: float, n_streams: int) -> BasebandDesign:
    """Top-``n_streams`` singular vectors of ``h_eff`` with waterfilled powers.

    ``rate`` is the maximum rate the effective channel supports under the
    budget; ``f_bb`` is not yet normalized against the analog precoder.
    """
    svd = svd_descending(h_eff)
    if n_streams > svd.s.size:
        raise ValueError(f"n_streams={n_streams} exceeds rank bound {svd.s.size}")
    alloc = waterfill(svd.s, noise_power, total_power, n_streams)
    w_bb = svd.u[:, :n_streams]
    f_bb = svd.v[:, :n_streams] * np.sqrt(alloc.levels)
    return BasebandDesign(w_bb, f_bb, rate_from_allocation(svd.s, alloc.levels, noise_power), alloc)


def normalize_precoder(f_rf, f_bb, total_power: float) -> np.ndarray:
    """Scale ``f_bb`` so that ``||f_rf f_bb||_F^2 == total_power``."""
    norm = np.linalg.norm(np.asarray(f_rf) @ np.asarray(f_bb))
    if norm == 0:
        raise ValueError("cannot normalize a zero precoder")
    return np.asarray(f_bb) * (np.sqrt(total_power) / norm)


def pad_candidates(candidates: np.ndarray, geom: UpaGeometry, n_required: int,
                   rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Append random-angle responses until there are ``n_required`` columns.

    Returns the (possibly unchanged) candidate matrix and the number of
    padded columns.
    """
    missing = n_required - candidates.shape[1]
    if missing <= 0:
        return candidates, 0
    az = 2 * np.pi * rng.random(missing)
    el = np.pi * rng.random(missing)
    return np.hstack([candidates, geom.response(az, el)]), missing


def _strongest(norms: np.ndarray, n: int) -> np.ndarray:
    # stable sort: equal norms keep the smaller candidate index first
    return np.argsort(-norms, kind="stable")[:n]


class AnalogSelection(NamedTuple):
    f_rf: np.ndarray
    w_rf: np.ndarray
    tx_index: np.ndarray
    rx_index: np.ndarray


def _check_rf(n_rf: int, candidates: np.ndarray, side: str):
    if not 1 <= n_rf <= candidates.shape[1]:
        raise ValueError(f"{side}: {n_rf} RF chains but {candidates.shape[1]} candidates "
                         f"(pad the candidate pool first)")


def analog_select_narrowband(h_tot, a_t, a_r, n_t_rf: int, n_r_rf: int) -> AnalogSelection:
    """Pick the candidate columns with the largest images under the channel.

    Transmit candidate ``c`` scores ``||H a_t[:, c]||``, receive candidate
    ``p`` scores ``||H^H a_r[:, p]||``. Columns are returned strongest first.
    """
    h = np.asarray(h_tot)
    _check_rf(n_t_rf, a_t, "TX")
    _check_rf(n_r_rf, a_r, "RX")
    tx = _strongest(np.linalg.norm(h @ a_t, axis=0), n_t_rf)
    rx = _strongest(np.linalg.norm(h.conj().T @ a_r, axis=0), n_r_rf)
    return AnalogSelection(a_t[:, tx], a_r[:, rx], tx, rx)


def plurality_vote(selections: np.ndarray, n_candidates: int, n_keep: int) -> np.ndarray:
    """Most frequently selected candidates across subcarriers.

    ``selections`` is (K, n_rf), one row of candidate indices per subcarrier.
    The kept set is ranked by vote count, ties broken by smaller index. The
    kept columns are then ordered by vote count and first appearance in the
    flattened selections, so a single subcarrier reproduces its own order.
    """
    flat = np.asarray(selections).ravel()
    counts = np.bincount(flat, minlength=n_candidates)
    first = np.full(n_candidates, flat.size)
    for pos in range(flat.size - 1, -1, -1):
        first[flat[pos]] = pos
    idx = np.arange(n_candidates)
    keep = np.lexsort((idx, -counts))[:n_keep]
    return keep[np.lexsort((first[keep], -counts[keep]))]


def analog_select_ofdm(h_tot_k, a_t, a_r, n_t_rf: int, n_r_rf: int) -> AnalogSelection:
    """Frequency-flat analog stages from per-subcarrier selections by vote."""
    per_k = [analog_select_narrowband(h, a_t, a_r, n_t_rf, n_r_rf) for h in h_tot_k]
    tx = plurality_vote(np.array([s.tx_index for s in per_k]), a_t.shape[1], n_t_rf)
    rx = plurality_vote(np.array([s.rx_index for s in per_k]), a_r.shape[1], n_r_rf)
    return AnalogSelection(a_t[:, tx], a_r[:, rx], tx, rx)


@dataclass(frozen=True)
class HybridBeamformer:
    """Analog stages shared by all subcarriers; baseband stages are 2-D for a
    narrowband design and (K, n_rf, n_s) for OFDM."""

    f_rf: np.ndarray
    w_rf: np.ndarray
    f_bb: np.ndarray
    w_bb: np.ndarray
    rate: float = float("nan")  # sum of max rates of the effective channels

    def precoder(self, k: Optional[int] = None) -> np.ndarray:
        f_bb = self.f_bb if k is None else self.f_bb[k]
        return self.f_rf @ f_bb


def hybrid_design(h_tot, a_t, a_r, n_t_rf: int, n_r_rf: int, n_streams: int,
                  noise_power: float, total_power: float) -> HybridBeamformer:
    """Analog selection, baseband SVD/waterfilling and power normalization."""
    sel = analog_select_narrowband(h_tot, a_t, a_r, n_t_rf, n_r_rf)
    h_eff = sel.w_rf.conj().T @ np.asarray(h_tot) @ sel.f_rf
    bb = baseband_design(h_eff, noise_power, total_power, n_streams)
    f_bb = normalize_precoder(sel.f_rf, bb.f_bb, total_power)
    return HybridBeamformer(sel.f_rf, sel.w_rf, f_bb, bb.w_bb, bb.rate)


def hybrid_design_ofdm(h_tot_k, a_t, a_r, n_t_rf: int, n_r_rf: int, n_streams: int,
                       noise_power: float, power_per_subcarrier: float) -> HybridBeamformer:
    """OFDM variant: voted analog stages, per-subcarrier baseband stages."""
    sel = analog_select_ofdm(h_tot_k, a_t, a_r, n_t_rf, n_r_rf)
    f_bbs, w_bbs, rate = [], [], 0.0
    for h in h_tot_k:
        h_eff = sel.w_rf.conj().T @ np.asarray(h) @ sel.f_rf
        bb = baseband_design(h_eff, noise_power, power_per_subcarrier, n_streams)
        f_bbs.append(normalize_precoder(sel.f_rf, bb.f_bb, power_per_subcarrier))
        w_bbs.append(bb.w_bb)
        rate += bb.rate
    return HybridBeamformer(sel.f_rf, sel.w_rf, np.stack(f_bbs), np.stack(w_bbs), rate)


class DigitalDesign(NamedTuple):
    precoder: np.ndarray
    combiner: np.ndarray
    rate: float


def fully_digital_design(h_tot, noise_power: float, total_power: float,
                         n_streams: int) -> DigitalDesign:
    """Unconstrained SVD precoder/combiner with waterfilling."""
    bb = baseband_design(h_tot, noise_power, total_power, n_streams)
    return DigitalDesign(bb.f_bb, bb.w_bb, bb.rate)
