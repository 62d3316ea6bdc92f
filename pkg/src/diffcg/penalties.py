"""Sparsity penalty values and subgradients: l1 (ZA) and log-sum (RZA).

The correction applied by the network step is w - rho * subgradient(w),
once per time instant. Complex entries use the phase as their sign,
with sign(0) = 0, so subgradients vanish exactly on zero entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "PenaltyKind",
    "PenaltyParams",
    "complex_sign",
    "za_subgradient",
    "rza_subgradient",
    "rza_subgradient_printed",
    "subgradient",
    "penalty_value",
    "shrink",
]


class PenaltyKind(str, Enum):
    NONE = "none"
    ZA = "za"
    RZA = "rza"


@dataclass(frozen=True)
class PenaltyParams:
    """Sparsity regularization knobs.

    kind selects the penalty; weight is the correction gain rho; shape
    is the RZA denominator offset epsilon. printed_form switches the RZA
    subgradient to a legacy variant, sign(w)/(1 + shape * ||w||_1), kept
    only for comparison runs; the default is the exact componentwise
    derivative of the log-sum penalty.
    """

    kind: PenaltyKind = PenaltyKind.NONE
    weight: float = 5e-4
    shape: float = 0.1
    printed_form: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", PenaltyKind(self.kind))
        if self.weight < 0.0:
            raise ValueError(f"penalty weight must be >= 0, got {self.weight:g}")
        if self.shape <= 0.0:
            raise ValueError(f"penalty shape must be > 0, got {self.shape:g}")

    @property
    def active(self) -> bool:
        return self.kind is not PenaltyKind.NONE and self.weight > 0.0


def complex_sign(w) -> np.ndarray:
    """Componentwise sign w_i/|w_i|, with sign(0) = 0.

    Entries below the smallest normal float are treated as zero; the
    reciprocal-multiply division path overflows on subnormals otherwise.
    """
    w = np.asarray(w, dtype=np.complex128)
    mag = np.abs(w)
    ok = mag >= np.finfo(np.float64).tiny
    return np.where(ok, w / np.where(ok, mag, 1.0), 0.0)


def za_subgradient(w) -> np.ndarray:
    """Subgradient of the l1 norm: componentwise sign."""
    return complex_sign(w)


def rza_subgradient(w, shape: float) -> np.ndarray:
    """Derivative of the log-sum penalty: sign(w_i)/(shape + |w_i|).

    Bounded by 1/shape in magnitude; large entries are shrunk less than
    small ones, which is the reweighting effect.
    """
    w = np.asarray(w, dtype=np.complex128)
    return complex_sign(w) / (shape + np.abs(w))


def rza_subgradient_printed(w, shape: float) -> np.ndarray:
    """Legacy printed variant: sign(w)/(1 + shape * ||w||_1).

    Not the derivative of the log-sum penalty; retained behind
    PenaltyParams.printed_form for comparison runs.
    """
    w = np.asarray(w, dtype=np.complex128)
    denom = 1.0 + shape * np.abs(w).sum(axis=-1, keepdims=True)
    return complex_sign(w) / denom


def subgradient(w, params: PenaltyParams) -> np.ndarray:
    """Penalty subgradient at w (without the rho factor)."""
    if params.kind is PenaltyKind.ZA:
        return za_subgradient(w)
    if params.kind is PenaltyKind.RZA:
        if params.printed_form:
            return rza_subgradient_printed(w, params.shape)
        return rza_subgradient(w, params.shape)
    return np.zeros_like(np.asarray(w, dtype=np.complex128))


def penalty_value(w, params: PenaltyParams) -> float:
    """Diagnostic penalty evaluation: weight * f(w), 0 when inactive."""
    if not params.active:
        return 0.0
    w = np.asarray(w, dtype=np.complex128)
    mag = np.abs(w)
    if params.kind is PenaltyKind.ZA:
        return float(params.weight * mag.sum())
    return float(params.weight * np.log1p(mag / params.shape).sum())


def shrink(w, params: PenaltyParams) -> np.ndarray:
    """Zero-attracting correction w - weight * subgradient(w).

    Returns w unchanged (same object) when the penalty is inactive, so
    weight = 0 is bit-identical to no penalty.
    """
    if not params.active:
        return w
    return w - params.weight * subgradient(w, params)
