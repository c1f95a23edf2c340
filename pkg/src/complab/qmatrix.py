"""Dense complex matrix helpers, density-matrix validation and random states.

Composite quanton-detector indices are always system-major: the row index of
``A ⊗ B`` is ``i * dim(B) + m`` for system index ``i`` and detector index
``m``. Every module relies on this single convention.

Random draws use numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=(stream_id,))``, so a given ``RngSpec`` always
reproduces the same stream and distinct stream ids are statistically
independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    BadDetectorState,
    BadTrace,
    DimensionMismatch,
    NotFinite,
    NotHermitian,
    NotPSD,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNIT_NORM_TOL = 1e-12

Ensemble = Literal["hilbert-schmidt", "pure-haar"]


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce ``m`` to a finite complex128 2-d array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotFinite("matrix has NaN/Inf entries")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace_detector(m, n: int, d: int) -> np.ndarray:
    """Trace out the detector factor of an ``(n*d) x (n*d)`` operator.

    Accepts a stack of operators with shape ``(..., n*d, n*d)``.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.shape[-2:] != (n * d, n * d):
        raise DimensionMismatch(f"shape {a.shape[-2:]} does not match N*D = {n}*{d}")
    a = a.reshape(a.shape[:-2] + (n, d, n, d))
    return np.einsum("...jmkm->...jk", a)


def partial_trace_system(m, n: int, d: int) -> np.ndarray:
    """Trace out the system (first) factor; returns ``d x d`` operators."""
    a = np.asarray(m, dtype=np.complex128)
    if a.shape[-2:] != (n * d, n * d):
        raise DimensionMismatch(f"shape {a.shape[-2:]} does not match N*D = {n}*{d}")
    a = a.reshape(a.shape[:-2] + (n, d, n, d))
    return np.einsum("...jmjl->...ml", a)


def hermitian_defect(a: np.ndarray) -> np.ndarray:
    """max |a_ik - conj(a_ki)| over the last two axes."""
    return np.abs(a - np.conj(np.swapaxes(a, -1, -2))).max(axis=(-2, -1))


def eigenvalues_hermitian(m, tol: float = 1e-10) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix (or stack of them)."""
    a = np.asarray(m, dtype=np.complex128)
    defect = hermitian_defect(a)
    if np.any(defect > tol):
        raise NotHermitian(f"Hermiticity defect {np.max(defect):.3e} > {tol:g}",
                           magnitude=float(np.max(defect)))
    # eigvalsh reads only one triangle; symmetrize so both contribute
    h = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    return np.linalg.eigvalsh(h)


def density_violations(m) -> dict[str, np.ndarray]:
    """Per-matrix Hermiticity defect, trace error and minimum eigenvalue."""
    a = np.asarray(m, dtype=np.complex128)
    h = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    return {
        "hermitian": hermitian_defect(a),
        "trace": np.abs(np.trace(a, axis1=-2, axis2=-1) - 1.0),
        "min_eigenvalue": np.linalg.eigvalsh(h)[..., 0],
    }


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated ``N x N`` density matrix. Construct via ``validate_density``."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.data.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def validate_density(
    m,
    tol_herm: float = HERMITIAN_TOL,
    tol_trace: float = TRACE_TOL,
    tol_psd: float = PSD_TOL,
) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity; raise on the first failure."""
    if isinstance(m, DensityMatrix):
        return m
    a = as_matrix(m, square=True)
    if a.shape[0] < 2:
        raise DimensionMismatch("density matrices need dimension >= 2")
    v = density_violations(a)
    herm = float(v["hermitian"])
    if herm > tol_herm:
        raise NotHermitian(f"max |rho_ik - conj(rho_ki)| = {herm:.3e}", magnitude=herm)
    tr = float(v["trace"])
    if tr > tol_trace:
        raise BadTrace(f"|tr rho - 1| = {tr:.3e}", magnitude=tr)
    lam = float(v["min_eigenvalue"])
    if lam < -tol_psd:
        raise NotPSD(f"minimum eigenvalue {lam:.6g}", magnitude=lam)
    # store the exactly Hermitian part; the defect is below tol_herm anyway
    return DensityMatrix(0.5 * (a + a.conj().T))


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return validate_density(np.outer(v, v.conj()))


def pure_state(amplitudes, *, normalize: bool = False) -> PureState:
    v = np.asarray(amplitudes, dtype=np.complex128).ravel()
    if not np.all(np.isfinite(v)):
        raise NotFinite("state vector has NaN/Inf entries")
    norm = np.linalg.norm(v)
    if normalize:
        if norm == 0:
            raise BadDetectorState("cannot normalize the zero vector", magnitude=0.0)
        v = v / norm
    elif abs(norm - 1.0) > UNIT_NORM_TOL:
        raise BadDetectorState(f"|norm - 1| = {abs(norm - 1.0):.3e}",
                               magnitude=float(abs(norm - 1.0)))
    return PureState(v)


@dataclass(frozen=True)
class RngSpec:
    seed: int = 0
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, k: int) -> "RngSpec":
        """A child spec; used to hand disjoint streams to workers or properties."""
        return RngSpec(self.seed, self.stream_id * 1_000_003 + k + 1)


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        return rng.generator()
    return RngSpec(int(rng or 0)).generator()


def ginibre(shape, rng) -> np.ndarray:
    g = _gen(rng)
    return g.standard_normal(shape) + 1j * g.standard_normal(shape)


def random_density_batch(n: int, count: int, rng, ensemble: Ensemble = "hilbert-schmidt") -> np.ndarray:
    """``count`` random ``n x n`` density matrices stacked along axis 0."""
    if n < 2:
        raise DimensionMismatch("N must be >= 2")
    g = _gen(rng)
    if ensemble == "hilbert-schmidt":
        z = ginibre((count, n, n), g)
        rho = z @ np.conj(np.swapaxes(z, -1, -2))
    elif ensemble == "pure-haar":
        v = ginibre((count, n), g)
        rho = v[:, :, None] * np.conj(v[:, None, :])
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    rho = rho / tr[:, None, None]
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def random_density(n: int, rng, ensemble: Ensemble = "hilbert-schmidt") -> DensityMatrix:
    return validate_density(random_density_batch(n, 1, rng, ensemble)[0])


def random_pure_state(n: int, rng) -> PureState:
    v = ginibre(n, rng)
    return PureState(v / np.linalg.norm(v))


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase fix."""
    z = ginibre((n, n), rng)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
