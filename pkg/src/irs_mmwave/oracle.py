"""Brute-force certificates for the closed-form designs at small scale.

The searches here are deliberately naive (full enumeration, direct
eigen-decomposition) so that they stay independent of the designs they
check.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import beamformer as bf
from .channel import ArrayConfig, ChannelTriple, UpaGeometry, sample_link_geometry, sample_triple
from .irs import design_reflection_proposed, reflected_gain
from .metrics import LinkBudget, spectral_efficiency
from .numerics import DegenerateChannelError, as_matrix, hermitian_eig_descending

DEFAULT_CEILING = 10 ** 6


@dataclass
class OracleReport:
    kind: str
    proposed_value: float
    brute_force_value: float
    tolerance: float
    passed: bool
    instance: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.brute_force_value - self.proposed_value

    def to_json(self) -> str:
        d = asdict(self)
        d["gap"] = self.gap
        return json.dumps(d, sort_keys=True)


def quantized_phase_grid(n_elements: int, levels: int) -> np.ndarray:
    """All ``levels**n_elements`` vectors with phases in ``{2 pi l / levels}``."""
    idx = np.array(list(itertools.product(range(levels), repeat=n_elements)), dtype=float)
    return np.exp(2j * np.pi * idx / levels)


def _rates_for_reflections(h_tr, h_ti, h_ir, vs, link: LinkBudget, n_streams: int,
                           chunk: int = 4096) -> np.ndarray:
    out = []
    for start in range(0, len(vs), chunk):
        v = vs[start:start + chunk]
        h = h_tr[None] + np.einsum("rm,bm,mt->brt", h_ir, v, h_ti)
        s = np.linalg.svd(h, compute_uv=False)
        out.append(bf.max_rate_batch(s, link.noise, link.p_tx, n_streams))
    return np.concatenate(out)


def exhaustive_irs_search(triple: ChannelTriple, levels: int, link: LinkBudget, n_streams: int,
                          ceiling: int = DEFAULT_CEILING, proposed=None) -> OracleReport:
    """Best fully-digital rate over every quantized reflection vector.

    The proposed (unquantized) vector is evaluated as well and included in the
    search, so ``brute_force_value >= proposed_value`` holds exactly.
    ``instance`` also records the no-IRS rate.
    """
    m = triple.arrays.irs.size
    if levels ** m > ceiling:
        raise ValueError(f"{levels}^{m} reflection vectors exceed the ceiling of {ceiling}")
    if proposed is None:
        proposed = design_reflection_proposed(triple.paths_ti, triple.paths_ir, triple.arrays.irs)
    grid = np.vstack([quantized_phase_grid(m, levels), proposed[None]])
    rates = _rates_for_reflections(triple.h_tr, triple.h_ti, triple.h_ir, grid, link, n_streams)
    no_irs = bf.max_rate(np.linalg.svd(triple.h_tr, compute_uv=False), link.noise, link.p_tx, n_streams)
    best = int(np.argmax(rates))
    return OracleReport(
        kind="irs_search",
        proposed_value=float(rates[-1]),
        brute_force_value=float(rates[best]),
        tolerance=1e-9,
        passed=bool(rates[best] >= rates[-1] - 1e-9),
        instance={"n_elements": m, "levels": levels, "evaluations": int(len(grid)),
                  "no_irs_value": float(no_irs), "best_index": best},
    )


def lemma1_certificate(h_ir, v, a_in, rel_tol: float = 1e-9, abs_tol: Optional[float] = None) -> OracleReport:
    """Check ``||H_IR diag(v) a_in||^2 <= lambda_max(H_IR^H H_IR)``.

    The bound is checked against the full M x M Gram matrix. The slack is
    ``rel_tol * max(1, lambda)`` unless ``abs_tol`` is given, in which case it
    is ``rel_tol * lambda + abs_tol``.
    """
    h_ir = as_matrix(h_ir, "H_IR")
    lhs = reflected_gain(h_ir, v, a_in)
    lam = float(hermitian_eig_descending(h_ir.conj().T @ h_ir)[0][0])
    tol = rel_tol * max(1.0, lam) if abs_tol is None else rel_tol * lam + abs_tol
    return OracleReport("lemma1", lhs, lam, tol, bool(lhs <= lam + tol),
                        {"n_rx": h_ir.shape[0], "n_elements": h_ir.shape[1]})


def hybrid_rate(h, f_rf, w_rf, n_streams: int, link: LinkBudget) -> float:
    """Achieved rate of the SVD/waterfilling baseband for given analog stages."""
    h_eff = w_rf.conj().T @ h @ f_rf
    try:
        bb = bf.baseband_design(h_eff, link.noise, link.p_tx, n_streams)
        f_bb = bf.normalize_precoder(f_rf, bb.f_bb, link.p_tx)
        return spectral_efficiency(h, f_rf, f_bb, w_rf, bb.w_bb, link.noise)
    except DegenerateChannelError:
        return 0.0


def exhaustive_analog_search(h, a_t, a_r, n_t_rf: int, n_r_rf: int, n_streams: int,
                             link: LinkBudget, ceiling: int = DEFAULT_CEILING) -> OracleReport:
    """Rate of the norm-based column choice versus every pair of column subsets."""
    h = np.asarray(h)
    n_combos = math.comb(a_t.shape[1], n_t_rf) * math.comb(a_r.shape[1], n_r_rf)
    if n_combos > ceiling:
        raise ValueError(f"{n_combos} subset pairs exceed the ceiling of {ceiling}")
    sel = bf.analog_select_narrowband(h, a_t, a_r, n_t_rf, n_r_rf)
    proposed = hybrid_rate(h, sel.f_rf, sel.w_rf, n_streams, link)
    best = -np.inf
    best_pair = None
    for tx in itertools.combinations(range(a_t.shape[1]), n_t_rf):
        for rx in itertools.combinations(range(a_r.shape[1]), n_r_rf):
            r = hybrid_rate(h, a_t[:, tx], a_r[:, rx], n_streams, link)
            if r > best:
                best, best_pair = r, (list(tx), list(rx))
    tol = 1e-9 * max(1.0, abs(best))
    return OracleReport("analog_search", proposed, float(best), tol, bool(best >= proposed - tol),
                        {"evaluations": n_combos, "best_tx": best_pair[0], "best_rx": best_pair[1],
                         "proposed_tx": sel.tx_index.tolist(), "proposed_rx": sel.rx_index.tolist()})


def mean_cross_response(geom: UpaGeometry, draws: int, rng: np.random.Generator,
                        angle_range: float = 1.0) -> float:
    """Mean ``|a(w1)^H a(w2)|`` over independent uniformly drawn angle pairs."""
    scale = np.array([2 * np.pi, np.pi, 2 * np.pi, np.pi])[:, None] * angle_range
    az1, el1, az2, el2 = rng.random((4, draws)) * scale
    inner = np.sum(geom.response(az1, el1).conj() * geom.response(az2, el2), axis=0)
    return float(np.mean(np.abs(inner)))


def asymptotics_probe(sizes, trials: int, rng: np.random.Generator, n_path: int = 8,
                      n_rf: int = 4) -> list[dict]:
    """Finite-size statistics of the large-array approximations.

    For each ``(n_t, n_r, m)`` (square-ish UPAs) and ``trials`` random
    default-geometry channels, report:

    * ``mean_cross_response``: mean ``|a_t(TR,0)^H a_t(TI,0)|``;
    * ``median_reflection_ratio``: median ``||q_0||^2 / lambda_max(H_IR^H H_IR)``
      under the proposed reflection vector;
    * ``median_eigen_gap``: median relative gap between the Rayleigh quotient
      of ``H_tot H_tot^H`` at ``a_r(IR,0)`` and ``|alpha_TI,0|^2 |alpha_IR,0|^2``;
    * ``median_rf_residual``: median ``||F^H F - I||_F / sqrt(n_rf)`` for
      ``n_rf`` distinct transmit path responses.
    """
    rows = []
    for n_t, n_r, m in sizes:
        arrays = ArrayConfig(UpaGeometry.square(n_t), UpaGeometry.square(n_r), UpaGeometry.square(m))
        cross, ratio, gap, resid = [], [], [], []
        for _ in range(trials):
            tri = sample_triple(rng, arrays, sample_link_geometry(rng), n_path)
            a_tr = tri.paths_tr.tx_responses(arrays.tx)
            a_ti = tri.paths_ti.tx_responses(arrays.tx)
            cross.append(abs(np.vdot(a_tr[:, 0], a_ti[:, 0])))
            v = design_reflection_proposed(tri.paths_ti, tri.paths_ir, arrays.irs)
            a_in = arrays.irs.response(tri.paths_ti.aoa_az[0], tri.paths_ti.aoa_el[0])
            lam = float(np.linalg.svd(tri.h_ir, compute_uv=False)[0] ** 2)
            ratio.append(reflected_gain(tri.h_ir, v, a_in) / lam)
            h = tri.h_tr + (tri.h_ir * v) @ tri.h_ti
            a_out = arrays.rx.response(tri.paths_ir.aoa_az[0], tri.paths_ir.aoa_el[0])
            hv = h.conj().T @ a_out
            target = abs(tri.paths_ti.gains[0]) ** 2 * abs(tri.paths_ir.gains[0]) ** 2
            gap.append(abs(np.vdot(hv, hv).real - target) / target)
            f = np.hstack([a_tr, a_ti])[:, :n_rf]
            resid.append(np.linalg.norm(f.conj().T @ f - np.eye(f.shape[1])) / np.sqrt(f.shape[1]))
        rows.append({"n_t": n_t, "n_r": n_r, "n_elements": m,
                     "mean_cross_response": float(np.mean(cross)),
                     "median_reflection_ratio": float(np.median(ratio)),
                     "median_eigen_gap": float(np.median(gap)),
                     "median_rf_residual": float(np.median(resid))})
    return rows


def lemma1_batch(rng: np.random.Generator, n_instances: int, n_rx: int = 4, n_elements: int = 8,
                 n_path: int = 3) -> list[OracleReport]:
    """Random unit-gain IRS-RX channels, random reflection vectors and random
    incidence responses; one Lemma 1 certificate each (relative slack only)."""
    rx = UpaGeometry.square(n_rx)
    irs = UpaGeometry.square(n_elements)
    reports = []
    for _ in range(n_instances):
        gains = (rng.standard_normal(n_path) + 1j * rng.standard_normal(n_path)) / np.sqrt(2)
        ang = rng.random((6, n_path)) * np.array([2 * np.pi, np.pi] * 3)[:, None]
        h_ir = (rx.response(ang[0], ang[1]) * gains) @ irs.response(ang[2], ang[3]).conj().T
        v = np.exp(2j * np.pi * rng.random(n_elements))
        a_in = irs.response(ang[4, 0], ang[5, 0])
        reports.append(lemma1_certificate(h_ir, v, a_in, rel_tol=1e-9, abs_tol=0.0))
    return reports


def small_irs_triple(rng: np.random.Generator, n_t: int = 4, n_r: int = 4, n_elements: int = 4,
                     n_path: int = 3) -> ChannelTriple:
    """Default-geometry channel with tiny arrays, for enumeration oracles."""
    arrays = ArrayConfig(UpaGeometry.square(n_t), UpaGeometry.square(n_r), UpaGeometry.square(n_elements))
    return sample_triple(rng, arrays, sample_link_geometry(rng), n_path)


__all__ = [
    "OracleReport", "exhaustive_irs_search", "lemma1_certificate", "exhaustive_analog_search",
    "asymptotics_probe", "mean_cross_response", "lemma1_batch", "small_irs_triple", "quantized_phase_grid", "hybrid_rate",
]
