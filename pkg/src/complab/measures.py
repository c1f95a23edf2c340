"""Predictability, l1 coherence and linear entropy, plus related relations.

All quantifiers accept a validated ``DensityMatrix`` or a raw array of shape
``(..., N, N)``. Raw arrays are not re-validated, which keeps the batched
Monte-Carlo paths cheap; pass them through ``validate_density`` (or build them
with ``random_density_batch``) first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InternalConsistencyError, PositivityBound
from .qmatrix import DensityMatrix, validate_density

CLAMP_TOL = 1e-12

_SIGMA_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]]).real.astype(np.complex128)


def _arr(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.data
    return np.asarray(rho, dtype=np.complex128)


def _clamp(x, name: str):
    x = np.asarray(x, dtype=float)
    if np.any(x < -CLAMP_TOL) or np.any(x > 1 + CLAMP_TOL):
        raise InternalConsistencyError(
            f"{name} = {x.min() if np.any(x < 0) else x.max():.3e} outside [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    return float(x) if x.ndim == 0 else x


def max_diagonal(rho):
    """Largest diagonal element and its (lowest on ties) index."""
    diag = np.real(np.diagonal(_arr(rho), axis1=-2, axis2=-1))
    k = np.argmax(diag, axis=-1)
    p1 = np.take_along_axis(diag, np.asarray(k)[..., None], axis=-1)[..., 0]
    return p1, k


def predictability(rho):
    """Normalized one-guess success probability ``(N p1 - 1)/(N - 1)``."""
    a = _arr(rho)
    n = a.shape[-1]
    p1, _ = max_diagonal(a)
    return _clamp((n * p1 - 1.0) / (n - 1), "predictability")


def predictability_with_index(rho) -> tuple[float, int]:
    _, k = max_diagonal(rho)
    return predictability(rho), int(k)


def offdiag_abs_sum(rho) -> np.ndarray:
    a = np.abs(_arr(rho))
    return a.sum(axis=(-2, -1)) - np.trace(a, axis1=-2, axis2=-1)


def coherence_l1(rho):
    n = _arr(rho).shape[-1]
    return _clamp(offdiag_abs_sum(rho) / (n - 1), "coherence")


def purity(rho):
    a = _arr(rho)
    return np.sum(a.real ** 2 + a.imag ** 2, axis=(-2, -1))


def linear_entropy(rho):
    """Normalized linear entropy ``N (1 - tr rho^2) / (N - 1)``."""
    n = _arr(rho).shape[-1]
    return _clamp(n * (1.0 - purity(rho)) / (n - 1), "linear entropy")


@dataclass(frozen=True)
class MeasureTriple:
    predictability: float
    coherence: float
    linear_entropy: float
    argmax: int = 0

    @property
    def duality_lhs(self) -> float:
        return self.predictability ** 2 + self.coherence ** 2

    @property
    def tcr_lhs(self) -> float:
        return self.duality_lhs + self.linear_entropy

    def as_dict(self) -> dict:
        return {
            "P": self.predictability,
            "C": self.coherence,
            "S_L": self.linear_entropy,
            "P_sq": self.predictability ** 2,
            "C_sq": self.coherence ** 2,
            "duality_lhs": self.duality_lhs,
            "tcr_lhs": self.tcr_lhs,
            "argmax": self.argmax,
        }


def tcr_triple(rho) -> MeasureTriple:
    p, k = predictability_with_index(rho)
    t = MeasureTriple(p, coherence_l1(rho), linear_entropy(rho), k)
    if t.tcr_lhs > 1 + 1e-10:
        raise InternalConsistencyError(f"P^2 + C^2 + S_L = {t.tcr_lhs!r} exceeds 1")
    return t


@dataclass(frozen=True)
class DurrPair:
    predictability: float
    visibility: float


def durr_measures(rho):
    """Dürr-style predictability and visibility (root-mean-square forms)."""
    a = _arr(rho)
    n = a.shape[-1]
    diag = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    pd = np.sqrt(n / (n - 1) * np.sum((diag - 1.0 / n) ** 2, axis=-1))
    off = purity(a) - np.sum(diag ** 2, axis=-1)
    vd = np.sqrt(n / (n - 1) * np.maximum(off, 0.0))
    if np.ndim(pd) == 0:
        return DurrPair(float(pd), float(vd))
    return DurrPair(pd, vd)


@dataclass(frozen=True)
class SaturationParams:
    """Parameters of the TCR-saturating family.

    ``phases`` lists one angle per strictly-lower-triangular entry in
    ``numpy.tril_indices(n, -1)`` order; entry ``(i, k)`` with ``i > k`` is
    ``a_mod * exp(1j * phi_ik)`` and its mirror is the conjugate.
    """

    n: int
    p1: float
    a_mod: float
    phases: Sequence[float] = field(default=())
    p1_position: int = 0

    @property
    def p2(self) -> float:
        return (1.0 - self.p1) / (self.n - 1)

    @property
    def a_bound(self) -> float:
        return saturation_bound(self.n, self.p1)


def saturation_bound(n: int, p1: float) -> float:
    p2 = (1.0 - p1) / (n - 1)
    return float(np.sqrt(max(p1 * p2, 0.0))) if n == 2 else p2


def saturating_state(params: SaturationParams) -> DensityMatrix:
    n = params.n
    if n < 2:
        raise DimensionMismatch("N must be >= 2")
    if not (1.0 / n - CLAMP_TOL <= params.p1 <= 1.0 + CLAMP_TOL):
        raise PositivityBound(f"p1 = {params.p1} outside [1/N, 1]", magnitude=params.p1)
    if not 0 <= params.p1_position < n:
        raise DimensionMismatch(f"p1_position {params.p1_position} out of range")
    excess = params.a_mod - params.a_bound
    if params.a_mod < 0 or excess > CLAMP_TOL:
        raise PositivityBound(
            f"|a| = {params.a_mod} exceeds bound {params.a_bound}", magnitude=float(excess))
    rows, cols = np.tril_indices(n, -1)
    phases = np.zeros(rows.size) if len(params.phases) == 0 else np.asarray(params.phases, float)
    if phases.shape != rows.shape:
        raise DimensionMismatch(f"expected {rows.size} phases, got {phases.size}")

    rho = np.full((n, n), 0, dtype=np.complex128)
    rho[rows, cols] = params.a_mod * np.exp(1j * phases)
    rho[cols, rows] = np.conj(rho[rows, cols])
    diag = np.full(n, params.p2)
    diag[params.p1_position] = params.p1
    rho[np.diag_indices(n)] = diag
    return validate_density(rho)


def concurrence_two_qubit(rho):
    """Wootters concurrence of a two-qubit state.

    The spin-flip spectrum is taken as the singular values of
    ``W^T (sy x sy) W`` with ``rho = W W^dag``; this avoids square roots of
    the near-zero eigenvalues of ``rho rho~`` that would otherwise cost
    half the digits on pure states.
    """
    a = _arr(rho)
    if a.shape[-2:] != (4, 4):
        raise DimensionMismatch(f"two-qubit concurrence needs 4x4 input, got {a.shape[-2:]}")
    h = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    w, v = np.linalg.eigh(h)
    root = v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]
    tau = np.swapaxes(root, -1, -2) @ _SIGMA_YY @ root
    s = np.linalg.svd(tau, compute_uv=False)
    c = np.maximum(0.0, s[..., 0] - s[..., 1] - s[..., 2] - s[..., 3])
    return float(c) if np.ndim(c) == 0 else c


def boundary_gap(rho):
    """``2 S_L - (1 - (P^2 - C^2)^2)``; nonnegative on the saturating family."""
    p = predictability(rho)
    c = coherence_l1(rho)
    s = linear_entropy(rho)
    return 2.0 * s - (1.0 - (p ** 2 - c ** 2) ** 2)
