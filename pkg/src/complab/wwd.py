"""Quanton / which-way-detector coupling and POVM subensembles.

The coupling is the controlled unitary ``sum_k |k><k| (x) U_k``. Detector
POVM effects act on the detector factor only, i.e. as ``I_N (x) Pi_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import measures
from .errors import (
    BadDetectorState,
    DimensionMismatch,
    ExcessDroppedMass,
    IncompleteSum,
    InternalConsistencyError,
    NotHermitian,
    NotPSD,
    NotUnitary,
)
from .qmatrix import (
    UNIT_NORM_TOL,
    DensityMatrix,
    _gen,
    as_matrix,
    hermitian_defect,
    partial_trace_detector,
    partial_trace_system,
    random_density_batch,
    random_unitary,
    validate_density,
)

UNITARY_TOL = 1e-10
POVM_TOL = 1e-10
BRANCH_PROB_FLOOR = 1e-12
MAX_DROPPED_MASS = 1e-9


@dataclass(frozen=True, eq=False)
class WWDInteraction:
    unitaries: np.ndarray = field(repr=False)  # (N, D, D)
    rho_d: DensityMatrix
    detector_states: np.ndarray | None = field(default=None, repr=False)  # (N, D)

    @property
    def system_dim(self) -> int:
        return self.unitaries.shape[0]

    @property
    def detector_dim(self) -> int:
        return self.unitaries.shape[1]

    def operator(self) -> np.ndarray:
        """The full ``(N*D) x (N*D)`` block-diagonal coupling unitary."""
        n, d = self.system_dim, self.detector_dim
        u = np.zeros((n * d, n * d), dtype=np.complex128)
        for k in range(n):
            u[k * d:(k + 1) * d, k * d:(k + 1) * d] = self.unitaries[k]
        return u


def householder_completion(w) -> np.ndarray:
    """A unitary whose first column is the unit vector ``w``."""
    w = np.asarray(w, dtype=np.complex128)
    d = w.size
    phase = w[0] / abs(w[0]) if abs(w[0]) > 0 else 1.0
    e1 = np.zeros(d, dtype=np.complex128)
    e1[0] = 1.0
    u = e1 - w / phase
    nrm = np.vdot(u, u).real
    if nrm < 1e-30:
        return phase * np.eye(d, dtype=np.complex128)
    h = np.eye(d, dtype=np.complex128) - 2.0 * np.outer(u, u.conj()) / nrm
    return phase * h


def build_interaction(*, detector_states=None, unitaries=None, rho_d=None) -> WWDInteraction:
    """Build a coupling from detector states ``|d_k>`` or from ``U_k`` and ``rho_d``.

    With detector states the detector starts in ``|0>`` and each ``U_k`` is a
    Householder completion of ``|0> -> |d_k>``.
    """
    if (detector_states is None) == (unitaries is None):
        raise ValueError("give exactly one of detector_states or unitaries")
    if detector_states is not None:
        if rho_d is not None:
            raise ValueError("rho_d is implied by detector_states")
        states = np.array([np.asarray(s, dtype=np.complex128).ravel() for s in detector_states])
        if states.ndim != 2:
            raise DimensionMismatch("detector states must share one dimension")
        norms = np.linalg.norm(states, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if bad.size:
            k = int(bad[0])
            raise BadDetectorState(f"detector state {k} has norm {norms[k]!r}",
                                   magnitude=float(abs(norms[k] - 1)), index=k)
        us = np.array([householder_completion(s) for s in states])
        d = states.shape[1]
        r0 = np.zeros((d, d), dtype=np.complex128)
        r0[0, 0] = 1.0
        return WWDInteraction(us, validate_density(r0), states)

    us = np.asarray(unitaries, dtype=np.complex128)
    if us.ndim != 3 or us.shape[1] != us.shape[2]:
        raise DimensionMismatch(f"unitaries must have shape (N, D, D), got {us.shape}")
    d = us.shape[1]
    eye = np.eye(d)
    for k, u in enumerate(us):
        err = float(np.abs(u.conj().T @ u - eye).max())
        if err > UNITARY_TOL:
            raise NotUnitary(f"U_{k} fails unitarity by {err:.3e}", magnitude=err, index=k)
    if rho_d is None:
        raise ValueError("rho_d is required with explicit unitaries")
    rd = validate_density(rho_d)
    if rd.dim != d:
        raise DimensionMismatch(f"rho_d has dim {rd.dim}, unitaries act on dim {d}")
    return WWDInteraction(us, rd)


@dataclass(frozen=True, eq=False)
class JointState:
    n: int
    d: int
    rho: DensityMatrix

    @property
    def blocks(self) -> np.ndarray:
        """``rho_sd`` viewed as ``(N, D, N, D)``: system j, detector a, system k, detector b."""
        return self.rho.data.reshape(self.n, self.d, self.n, self.d)


def evolve(rho_s, w: WWDInteraction) -> JointState:
    rs = validate_density(rho_s)
    n, d = w.system_dim, w.detector_dim
    if rs.dim != n:
        raise DimensionMismatch(f"state dim {rs.dim} != interaction system dim {n}")
    u = w.unitaries
    # block (j, k) = rho_jk U_j rho_d U_k^dag
    t = np.einsum("jab,bc,kdc->jadk", u, w.rho_d.data, u.conj())
    r = rs.data[:, None, :, None] * np.transpose(t, (0, 1, 3, 2))
    return JointState(n, d, validate_density(r.reshape(n * d, n * d)))


def reduced_states(j: JointState) -> tuple[DensityMatrix, DensityMatrix]:
    rs1 = partial_trace_detector(j.rho.data, j.n, j.d)
    rd1 = partial_trace_system(j.rho.data, j.n, j.d)
    return validate_density(rs1), validate_density(rd1)


@dataclass(frozen=True, eq=False)
class POVMSet:
    effects: np.ndarray = field(repr=False)  # (M, D, D)

    @property
    def detector_dim(self) -> int:
        return self.effects.shape[1]

    def __len__(self):
        return self.effects.shape[0]


def validate_povm(effects, tol: float = POVM_TOL) -> POVMSet:
    mats = [as_matrix(e, square=True) for e in effects]
    if not mats:
        raise IncompleteSum("empty POVM", magnitude=1.0)
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionMismatch("POVM effects must share one dimension")
    arr = np.array(mats)
    herm = hermitian_defect(arr)
    for i, h in enumerate(herm):
        if h > tol:
            raise NotHermitian(f"effect {i} Hermiticity defect {h:.3e}", magnitude=float(h), index=i)
    arr = 0.5 * (arr + np.conj(np.swapaxes(arr, -1, -2)))
    lam = np.linalg.eigvalsh(arr)[:, 0]
    for i, v in enumerate(lam):
        if v < -tol:
            raise NotPSD(f"effect {i} has eigenvalue {v:.6g}", magnitude=float(v), index=i)
    err = float(np.abs(arr.sum(axis=0) - np.eye(d)).max())
    if err > tol:
        raise IncompleteSum(f"sum of effects deviates from I by {err:.3e}", magnitude=err)
    arr.setflags(write=False)
    return POVMSet(arr)


@dataclass(frozen=True, eq=False)
class Branch:
    index: int  # effect index in the POVM
    prob: float
    rho: DensityMatrix
    unnormalized: np.ndarray = field(repr=False)  # tr_d{Pi_i rho_sd}


@dataclass(frozen=True, eq=False)
class SubensembleDecomposition:
    branches: list[Branch]
    dropped_mass: float
    dropped: tuple[int, ...]
    rho_s1: DensityMatrix

    def recombined(self) -> np.ndarray:
        return sum(b.prob * b.rho.data for b in self.branches)

    @property
    def total_mass(self) -> float:
        return sum(b.prob for b in self.branches) + self.dropped_mass


def conditional_operators(j: JointState, p: POVMSet) -> np.ndarray:
    """Stack of ``tr_d{(I (x) Pi_i) rho_sd}``, shape ``(M, N, N)``."""
    if p.detector_dim != j.d:
        raise DimensionMismatch(f"POVM acts on dim {p.detector_dim}, detector has dim {j.d}")
    return np.einsum("iac,jcka->ijk", p.effects, j.blocks)


def decompose(j: JointState, p: POVMSet) -> SubensembleDecomposition:
    x = conditional_operators(j, p)
    probs = np.real(np.trace(x, axis1=-2, axis2=-1))
    branches, dropped, mass = [], [], 0.0
    for i, (xi, pi) in enumerate(zip(x, probs)):
        if pi < BRANCH_PROB_FLOOR:
            dropped.append(i)
            mass += max(float(pi), 0.0)
            continue
        xi = 0.5 * (xi + xi.conj().T)
        branches.append(Branch(i, float(pi), validate_density(xi / pi), xi))
    rs1 = validate_density(partial_trace_detector(j.rho.data, j.n, j.d))
    return SubensembleDecomposition(branches, mass, tuple(dropped), rs1)


@dataclass(frozen=True)
class AveragedTriple:
    p_bar: float
    c_bar: float
    s_bar: float
    s_bar_sqrt: float  # probability-weighted mean of sqrt(S_L)
    p_s1: float  # quantifiers of the unconditioned reduced state
    c_s1: float
    s_s1: float

    @property
    def tcr_lhs(self) -> float:
        return self.p_bar ** 2 + self.c_bar ** 2 + self.s_bar

    @property
    def tcr_lhs_sqrt(self) -> float:
        return self.p_bar ** 2 + self.c_bar ** 2 + self.s_bar_sqrt ** 2

    def as_dict(self) -> dict:
        return {
            "p_bar": self.p_bar,
            "c_bar": self.c_bar,
            "s_bar": self.s_bar,
            "s_bar_sqrt": self.s_bar_sqrt,
            "p_bar_sq": self.p_bar ** 2,
            "c_bar_sq": self.c_bar ** 2,
            "tcr_lhs": self.tcr_lhs,
            "tcr_lhs_sqrt": self.tcr_lhs_sqrt,
        }


def averages(dec: SubensembleDecomposition) -> AveragedTriple:
    if dec.dropped_mass >= MAX_DROPPED_MASS:
        raise ExcessDroppedMass(f"dropped probability {dec.dropped_mass:.3e}")
    p_bar = c_bar = s_bar = s_sqrt = 0.0
    for b in dec.branches:
        s = measures.linear_entropy(b.rho)
        p_bar += b.prob * measures.predictability(b.rho)
        c_bar += b.prob * measures.coherence_l1(b.rho)
        s_bar += b.prob * s
        s_sqrt += b.prob * np.sqrt(s)
    rs1 = dec.rho_s1
    return AveragedTriple(p_bar, c_bar, s_bar, float(s_sqrt),
                          measures.predictability(rs1), measures.coherence_l1(rs1),
                          measures.linear_entropy(rs1))


@dataclass(frozen=True)
class TCRReport:
    lhs: float
    lhs_sqrt: float
    duality_lhs: float  # p_bar^2 + C(rho_s1)^2

    @property
    def margin(self) -> float:
        return 1.0 - self.lhs

    @property
    def margin_sqrt(self) -> float:
        return 1.0 - self.lhs_sqrt

    @property
    def holds(self) -> bool:
        tol = 1e-10
        return self.margin >= -tol and self.margin_sqrt >= -tol and self.duality_lhs <= 1 + tol


def averaged_tcr(t: AveragedTriple, strict: bool = True) -> TCRReport:
    r = TCRReport(t.tcr_lhs, t.tcr_lhs_sqrt, t.p_bar ** 2 + t.c_s1 ** 2)
    if strict and not r.holds:
        raise InternalConsistencyError(f"averaged TCR violated: {r}")
    return r


def random_interaction(n: int, d: int, rng, pure_detector: bool = False) -> WWDInteraction:
    g = _gen(rng)
    us = np.array([random_unitary(d, g) for _ in range(n)])
    if pure_detector:
        rd = random_density_batch(d, 1, g, "pure-haar")[0]
    else:
        rd = random_density_batch(d, 1, g)[0]
    return build_interaction(unitaries=us, rho_d=rd)


def random_povm(d: int, m: int, rng) -> POVMSet:
    """``m`` random effects of random rank, normalized by ``S^{-1/2} A_i S^{-1/2}``."""
    g = _gen(rng)
    while True:
        raw = []
        for _ in range(m):
            r = int(g.integers(1, d + 1))
            z = g.standard_normal((d, r)) + 1j * g.standard_normal((d, r))
            raw.append(z @ z.conj().T)
        w, v = np.linalg.eigh(sum(raw))
        # an ill-conditioned sum costs digits in the normalization; redraw
        if w[0] > 1e-2 * w[-1]:
            break
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return validate_povm([s_inv_half @ a @ s_inv_half for a in raw])
