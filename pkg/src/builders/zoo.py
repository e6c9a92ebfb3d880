"""
NC-Chern - Model Zoo

Benchmark hopping models addressed by name, with Bloch convention
H(k) = sum_u t_u exp(-i k.u).
"""

import builtins
import itertools
import logging
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from src.algebra.clifford import build_clifford
from src.builders.lattice import HoppingModel
from src.errors import ArgumentError, ModelLookupError


logger = logging.getLogger(__name__)

TAU_1 = np.array([[0, 1], [1, 0]], dtype=complex)
TAU_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
TAU_3 = np.array([[1, 0], [0, -1]], dtype=complex)


def _unit(d: int, j: int, sign: int = 1):
    u = [0] * d
    u[j] = sign
    return tuple(u)


def _massive_dirac(d: int, gammas, mass_matrix: np.ndarray, m: float, name: str) -> HoppingModel:
    """sum_j sin k_j Gamma_j + (m + sum_j cos k_j) Gamma_0 as real-space hoppings."""
    hoppings = {(0,) * d: m * mass_matrix}
    for j, gamma in enumerate(gammas):
        forward = 0.5j * gamma + 0.5 * mass_matrix
        hoppings[_unit(d, j)] = forward
        hoppings[_unit(d, j, -1)] = forward.conj().T
    return HoppingModel(d=d, Q=mass_matrix.shape[0], hoppings=hoppings, range=2, name=name, params={"m": m})


def chern2d(m: float = 1.0) -> HoppingModel:
    """Two-band model sin k1 tau1 + sin k2 tau2 + (m + cos k1 + cos k2) tau3."""
    return _massive_dirac(2, (TAU_1, TAU_2), TAU_3, float(m), "chern2d")


def dirac4d(m: float = -3.0) -> HoppingModel:
    """Four-band lattice Dirac model on Z^4; gap closes at m in {0, +-2, +-4}."""
    rep = build_clifford(2)
    return _massive_dirac(4, rep.gammas, np.array(rep.gamma0), float(m), "dirac4d")


def hofstadter2d(t: float = 1.0) -> HoppingModel:
    """Single-band nearest-neighbour hopping -t; the field comes from B."""
    hoppings = {}
    for j in range(2):
        hoppings[_unit(2, j)] = np.array([[-t]], dtype=complex)
        hoppings[_unit(2, j, -1)] = np.array([[-t]], dtype=complex)
    return HoppingModel(d=2, Q=1, hoppings=hoppings, range=2, name="hofstadter2d", params={"t": float(t)})


def atomic(onsite: float = 0.0, d: int = 2, Q: int = 1, range: int = 1) -> HoppingModel:
    """On-site energy only; range > 1 adds zero-amplitude bonds with |u| < range that disorder can reach."""
    d, Q, range = int(d), int(Q), int(range)
    span = builtins.range(-range + 1, range)
    hoppings = {
        u: np.zeros((Q, Q), dtype=complex)
        for u in itertools.product(span, repeat=d)
        if any(u) and np.linalg.norm(u) < range
    }
    hoppings[(0,) * d] = float(onsite) * np.eye(Q, dtype=complex)
    return HoppingModel(
        d=d,
        Q=Q,
        hoppings=hoppings,
        range=range,
        name="atomic",
        params={"onsite": float(onsite), "d": d, "Q": Q, "range": range},
    )


MODELS: Dict[str, Callable[..., HoppingModel]] = {
    "chern2d": chern2d,
    "dirac4d": dirac4d,
    "hofstadter2d": hofstadter2d,
    "atomic": atomic,
}

MODEL_PARAMS: Dict[str, tuple] = {
    "chern2d": ("m",),
    "dirac4d": ("m",),
    "hofstadter2d": ("t",),
    "atomic": ("onsite", "d", "Q", "range"),
}


def model_zoo(name: str, params: Optional[Mapping[str, float]] = None) -> HoppingModel:
    """
    Look up a benchmark model.

    Args:
        name: One of chern2d, dirac4d, hofstadter2d, atomic
        params: Model parameters (see MODEL_PARAMS)

    Returns:
        HoppingModel

    Raises:
        ModelLookupError: Unknown name
        ArgumentError: Unknown parameter for the model
    """
    factory = MODELS.get(name)
    if factory is None:
        raise ModelLookupError(f"Unknown model '{name}' (available: {', '.join(MODELS)})", name=name)
    params = dict(params or {})
    unknown = sorted(set(params) - set(MODEL_PARAMS[name]))
    if unknown:
        raise ArgumentError(
            f"Model '{name}' does not take parameters {unknown} (accepted: {list(MODEL_PARAMS[name])})",
            model=name,
            unknown=unknown,
        )
    model = factory(**params)
    logger.debug(f"[OK] Model '{name}' with params {model.params}")
    return model
