"""IRS reflection vectors and the combined TX-RX channel.

A reflection vector ``v`` holds the M unit-modulus coefficients on the
diagonal of the IRS phase matrix. ``None`` stands for "no IRS".
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .channel import PathSet, UpaGeometry
from .numerics import largest_eigenvalue_gram


def design_reflection_proposed(paths_ti: PathSet, paths_ir: PathSet, irs_geom: UpaGeometry,
                               ti_path: int = 0) -> np.ndarray:
    """Closed-form reflection vector aligning two IRS paths.

    Returns ``v = M conj(a_ti) * a_ir`` where ``a_ti`` is the IRS response at
    the arrival angle of TX-IRS path ``ti_path`` and ``a_ir`` the IRS response
    at the departure angle of the strongest IRS-RX path. The IRS then maps
    ``a_ti`` exactly onto ``a_ir``.
    """
    if not 0 <= ti_path < len(paths_ti):
        raise IndexError(f"ti_path {ti_path} out of range for {len(paths_ti)} paths")
    a_in = irs_geom.response(paths_ti.aoa_az[ti_path], paths_ti.aoa_el[ti_path])
    a_out = irs_geom.response(paths_ir.aod_az[0], paths_ir.aod_el[0])
    return irs_geom.size * a_in.conj() * a_out


def design_reflection_random(rng: np.random.Generator, n_elements: int) -> np.ndarray:
    """Phases i.i.d. uniform on ``[0, 2 pi)``."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    return np.exp(2j * np.pi * rng.random(n_elements))


def check_reflection(v, n_elements: Optional[int] = None, atol: float = 1e-12) -> np.ndarray:
    """Validate a reflection vector and return it as a complex array."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError("reflection vector must be 1-D")
    if n_elements is not None and v.size != n_elements:
        raise ValueError(f"reflection vector has {v.size} entries, IRS has {n_elements}")
    if np.max(np.abs(np.abs(v) - 1.0)) > atol:
        raise ValueError("reflection coefficients must have unit modulus")
    return v


def compose_total(h_tr, h_ti, h_ir, v=None) -> np.ndarray:
    """``H_TR + H_IR diag(v) H_TI``, or ``H_TR`` when ``v`` is None."""
    h_tr = np.asarray(h_tr)
    if v is None:
        return h_tr
    h_ti = np.asarray(h_ti)
    h_ir = np.asarray(h_ir)
    v = np.asarray(v)
    if h_ir.shape[1] != v.size or h_ti.shape[0] != v.size:
        raise ValueError(f"IRS size mismatch: H_IR {h_ir.shape}, H_TI {h_ti.shape}, v {v.shape}")
    if (h_ir.shape[0], h_ti.shape[1]) != h_tr.shape:
        raise ValueError(f"cascaded channel {h_ir.shape[0]}x{h_ti.shape[1]} "
                         f"does not match direct channel {h_tr.shape}")
    return h_tr + (h_ir * v) @ h_ti


def compose_total_ofdm(h_tr, h_ti, h_ir, v=None) -> np.ndarray:
    """Per-subcarrier :func:`compose_total` with one reflection vector, shape (K, Nr, Nt)."""
    return np.stack([compose_total(a, b, c, v) for a, b, c in zip(h_tr, h_ti, h_ir)])


def reflected_gain(h_ir, v, a_in) -> float:
    """``||H_IR diag(v) a_in||^2``, the energy that reaches the RX through the IRS."""
    q = np.asarray(h_ir) @ (np.asarray(v) * np.asarray(a_in))
    return float(np.vdot(q, q).real)


def dominant_reflection_ratio(h_ir, v, a_in) -> float:
    """``||H_IR diag(v) a_in||^2 / lambda_max(H_IR^H H_IR)``; at most 1 for unit-norm ``a_in``."""
    lam = largest_eigenvalue_gram(h_ir)
    return reflected_gain(h_ir, v, a_in) / lam if lam > 0 else 0.0
