"""Achievable spectral efficiency of a hybrid precoder/combiner pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import DegenerateChannelError, log2det_eye_plus

MAX_NOISE_CONDITION = 1e12


def dbm_to_mw(x_dbm):
    return 10.0 ** (np.asarray(x_dbm, dtype=float) / 10.0)


def mw_to_dbm(x_mw):
    return 10.0 * np.log10(np.asarray(x_mw, dtype=float))


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power and noise power, both in linear mW."""

    p_tx: float
    noise: float

    def __post_init__(self):
        if not (self.p_tx > 0 and self.noise > 0):
            raise ValueError("transmit and noise power must be positive")

    @classmethod
    def from_dbm(cls, p_tx_dbm: float, noise_dbm: float = -91.0) -> "LinkBudget":
        return cls(float(dbm_to_mw(p_tx_dbm)), float(dbm_to_mw(noise_dbm)))


def _stage(x, n):
    return np.eye(n) if x is None else np.asarray(x)


def spectral_efficiency(h, f_rf, f_bb, w_rf, w_bb, noise_power: float) -> float:
    """Rate ``log2 det(I + Rn^-1 W^H H F F^H H^H W)`` in bits/s/Hz.

    ``F = f_rf @ f_bb`` and ``W = w_rf @ w_bb``; the noise covariance after
    combining is ``Rn = noise_power * W^H W`` and need not be white. Pass
    ``None`` for an RF stage to use the identity (fully-digital architecture).

    Raises
    ------
    DegenerateChannelError
        If ``Rn`` has condition number above ``1e12``.
    """
    h = np.asarray(h)
    f = _stage(f_rf, h.shape[1]) @ np.asarray(f_bb)
    w = _stage(w_rf, h.shape[0]) @ np.asarray(w_bb)
    gram = w.conj().T @ w
    eig = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    if eig[0] <= 0 or eig[-1] / eig[0] > MAX_NOISE_CONDITION:
        raise DegenerateChannelError("post-combining noise covariance is ill-conditioned")
    # Whiten with the Cholesky factor so the determinant argument stays Hermitian.
    chol = np.linalg.cholesky(noise_power * gram)
    a = np.linalg.solve(chol, w.conj().T @ h @ f)
    return log2det_eye_plus(a @ a.conj().T)


def spectral_efficiency_ofdm(h_k, f_rf, f_bb_k, w_rf, w_bb_k, noise_power: float) -> float:
    """Sum over subcarriers of :func:`spectral_efficiency`.

    Raises ``DegenerateChannelError`` naming every degenerate subcarrier
    instead of silently dropping it.
    """
    total = 0.0
    bad = []
    for k, (h, f_bb, w_bb) in enumerate(zip(h_k, f_bb_k, w_bb_k)):
        try:
            total += spectral_efficiency(h, f_rf, f_bb, w_rf, w_bb, noise_power)
        except DegenerateChannelError:
            bad.append(k)
    if bad:
        err = DegenerateChannelError(f"degenerate subcarriers {bad}")
        err.subcarriers = bad
        raise err
    return total
