"""End-to-end designs: IRS reflection choice followed by beamformer design.

Designs are computed from the channel available at the transmitter (possibly
an estimate) and scored on the true channel.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from . import beamformer as bf
from .channel import ChannelTriple, Link
from .irs import compose_total, compose_total_ofdm, design_reflection_proposed, design_reflection_random
from .metrics import LinkBudget, spectral_efficiency, spectral_efficiency_ofdm

DESIGNS = ("proposed", "random", "none")
ARCHITECTURES = ("hybrid", "digital")


def candidate_pools(triple: ChannelTriple) -> tuple[np.ndarray, np.ndarray]:
    """Transmit candidates ``[A_t^TR | A_t^TI]`` and receive candidates ``[A_r^TR | A_r^IR]``."""
    arr = triple.arrays
    a_t = np.hstack([triple.paths_tr.tx_responses(arr.tx), triple.paths_ti.tx_responses(arr.tx)])
    a_r = np.hstack([triple.paths_tr.rx_responses(arr.rx), triple.paths_ir.rx_responses(arr.rx)])
    return a_t, a_r


def reflection_vector(design: str, triple: ChannelTriple,
                      rng: Optional[np.random.Generator] = None) -> Optional[np.ndarray]:
    """Reflection vector of ``design`` ('proposed', 'random' or 'none')."""
    if design == "proposed":
        return design_reflection_proposed(triple.paths(Link.TI), triple.paths(Link.IR),
                                          triple.arrays.irs)
    if design == "random":
        if rng is None:
            raise ValueError("random IRS design needs a generator")
        return design_reflection_random(rng, triple.arrays.irs.size)
    if design == "none":
        return None
    raise ValueError(f"unknown IRS design {design!r}")


def total_channel(triple: ChannelTriple, v) -> np.ndarray:
    if triple.is_ofdm:
        return compose_total_ofdm(triple.h_tr, triple.h_ti, triple.h_ir, v)
    return compose_total(triple.h_tr, triple.h_ti, triple.h_ir, v)


class Evaluation(NamedTuple):
    rate: float          # achieved on the true channel
    design_rate: float   # predicted from the design channel
    beamformer: object   # HybridBeamformer or list of DigitalDesign


def design_candidates(triple: ChannelTriple, n_t_rf: int, n_r_rf: int,
                      pad_rng: Optional[np.random.Generator] = None):
    a_t, a_r = candidate_pools(triple)
    if max(n_t_rf - a_t.shape[1], n_r_rf - a_r.shape[1]) > 0:
        if pad_rng is None:
            raise ValueError("too few path candidates for the RF chains and no generator to pad")
        a_t, _ = bf.pad_candidates(a_t, triple.arrays.tx, n_t_rf, pad_rng)
        a_r, _ = bf.pad_candidates(a_r, triple.arrays.rx, n_r_rf, pad_rng)
    return a_t, a_r


def evaluate(design_triple: ChannelTriple, true_triple: ChannelTriple, v, architecture: str,
             n_t_rf: int, n_r_rf: int, n_streams: int, link: LinkBudget,
             pad_rng: Optional[np.random.Generator] = None) -> Evaluation:
    """Design beamformers on ``design_triple`` with IRS vector ``v``; score on ``true_triple``.

    OFDM triples split ``link.p_tx`` equally over subcarriers.

    Raises
    ------
    DegenerateChannelError
        When the design channel is rank zero or the combiner is singular.
    """
    h_design = total_channel(design_triple, v)
    h_true = h_design if true_triple is design_triple else total_channel(true_triple, v)
    noise = link.noise

    if architecture == "hybrid":
        a_t, a_r = design_candidates(design_triple, n_t_rf, n_r_rf, pad_rng)
        if design_triple.is_ofdm:
            power = link.p_tx / design_triple.n_subcarriers
            hb = bf.hybrid_design_ofdm(h_design, a_t, a_r, n_t_rf, n_r_rf, n_streams, noise, power)
            rate = spectral_efficiency_ofdm(h_true, hb.f_rf, hb.f_bb, hb.w_rf, hb.w_bb, noise)
        else:
            hb = bf.hybrid_design(h_design, a_t, a_r, n_t_rf, n_r_rf, n_streams, noise, link.p_tx)
            rate = spectral_efficiency(h_true, hb.f_rf, hb.f_bb, hb.w_rf, hb.w_bb, noise)
        return Evaluation(rate, hb.rate, hb)

    if architecture == "digital":
        if design_triple.is_ofdm:
            power = link.p_tx / design_triple.n_subcarriers
            dds = [bf.fully_digital_design(h, noise, power, n_streams) for h in h_design]
            rate = spectral_efficiency_ofdm(h_true, None, [d.precoder for d in dds], None,
                                            [d.combiner for d in dds], noise)
            return Evaluation(rate, sum(d.rate for d in dds), dds)
        dd = bf.fully_digital_design(h_design, noise, link.p_tx, n_streams)
        rate = spectral_efficiency(h_true, None, dd.precoder, None, dd.combiner, noise)
        return Evaluation(rate, dd.rate, [dd])

    raise ValueError(f"unknown architecture {architecture!r}")


def proposed_joint_design(triple: ChannelTriple, n_t_rf: int, n_r_rf: int, n_streams: int,
                          link: LinkBudget):
    """Closed-form reflection vector plus hybrid beamformer for ``triple``.

    Returns ``(v, HybridBeamformer)``.
    """
    v = reflection_vector("proposed", triple)
    a_t, a_r = candidate_pools(triple)
    h = total_channel(triple, v)
    if triple.is_ofdm:
        hb = bf.hybrid_design_ofdm(h, a_t, a_r, n_t_rf, n_r_rf, n_streams, link.noise,
                                   link.p_tx / triple.n_subcarriers)
    else:
        hb = bf.hybrid_design(h, a_t, a_r, n_t_rf, n_r_rf, n_streams, link.noise, link.p_tx)
    return v, hb
