"""POVM families interpolated in theta, constancy certificates, named scenarios.

A family mixes two complete POVMs effect by effect,
``Pi_i(theta) = cos^2(theta) A_i + sin^2(theta) B_i``, which is again a POVM.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatibleEndpoints, UnknownScenario
from .qmatrix import PureState, pure_state
from .wwd import (
    BRANCH_PROB_FLOOR,
    JointState,
    POVMSet,
    WWDInteraction,
    build_interaction,
    conditional_operators,
    validate_povm,
)

PHASE_TOL = 1e-8
ZERO_MODULUS = 1e-12
ARGMAX_TOL = 1e-12
DEFAULT_STEPS = 181


@dataclass(frozen=True, eq=False)
class PovmFamily:
    endpoint_a: POVMSet
    endpoint_b: POVMSet

    def __post_init__(self):
        a, b = self.endpoint_a, self.endpoint_b
        if len(a) != len(b) or a.detector_dim != b.detector_dim:
            raise IncompatibleEndpoints(
                f"endpoints differ: {len(a)} vs {len(b)} effects, "
                f"dim {a.detector_dim} vs {b.detector_dim}")


def interpolate_povm(f: PovmFamily, theta: float) -> POVMSet:
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    if theta == 0:
        return f.endpoint_a
    if theta == np.pi / 2:
        return f.endpoint_b
    return validate_povm(c2 * f.endpoint_a.effects + s2 * f.endpoint_b.effects)


@dataclass(frozen=True)
class PCertificate:
    holds: bool
    k0: int | None = None
    failing_branch: int | None = None


@dataclass(frozen=True)
class CCertificate:
    holds: bool
    violation: tuple[int, int, int] | None = None  # (effect i, row j, col k)
    phase_spread: float = 0.0


def _live(x: np.ndarray) -> list[int]:
    probs = np.real(np.trace(x, axis1=-2, axis2=-1))
    return [i for i, p in enumerate(probs) if p >= BRANCH_PROB_FLOOR]


def check_constant_P(j: JointState, p: POVMSet) -> PCertificate:
    """Holds iff one path index maximizes the diagonal of every live branch."""
    x = conditional_operators(j, p)
    common = set(range(j.n))
    for i in _live(x):
        diag = np.real(np.diagonal(x[i]))
        top = set(np.flatnonzero(diag >= diag.max() - ARGMAX_TOL).tolist())
        common &= top
        if not common:
            return PCertificate(False, failing_branch=i)
    return PCertificate(True, k0=min(common))


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def check_constant_C(j: JointState, p: POVMSet) -> CCertificate:
    """Holds iff every off-diagonal entry keeps one phase across live branches."""
    x = conditional_operators(j, p)
    live = _live(x)
    worst = 0.0
    for r in range(j.n):
        for c in range(j.n):
            if r == c:
                continue
            ref = None
            for i in live:
                z = x[i, r, c]
                if abs(z) < ZERO_MODULUS:
                    continue
                if ref is None:
                    ref = np.angle(z)
                    continue
                dphi = abs(_wrap(np.angle(z) - ref))
                worst = max(worst, dphi)
                if dphi > PHASE_TOL:
                    return CCertificate(False, (i, r, c), float(dphi))
    return CCertificate(True, None, worst)


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    name: str
    psi_s: PureState
    detector_states: np.ndarray = field(repr=False)  # (N, D), unit rows
    family: PovmFamily = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    description: str = ""

    def interaction(self) -> WWDInteraction:
        return build_interaction(detector_states=self.detector_states)

    def with_grid(self, start: float, stop: float, steps: int) -> "ScenarioSpec":
        return ScenarioSpec(self.name, self.psi_s, self.detector_states, self.family,
                            theta_grid(start, stop, steps), self.description)


def theta_grid(start: float = 0.0, stop: float = np.pi / 2, steps: int = DEFAULT_STEPS) -> np.ndarray:
    if steps < 2:
        raise ValueError("theta grid needs at least 2 steps")
    g = np.linspace(start, stop, steps)
    return g


def _unit(v) -> np.ndarray:
    return pure_state(v, normalize=True).amplitudes


def _proj(v) -> np.ndarray:
    return np.outer(v, v.conj())


def _diag(*xs) -> np.ndarray:
    return np.diag(np.asarray(xs, dtype=np.complex128))


def _fig_common():
    psi = pure_state([1, 3, 2], normalize=True)
    d1, d2, d3 = _unit([1, 1, 0]), _unit([0, 1, 1]), _unit([1, 0, 1])
    psi123 = _unit(d1 + d2 + d3)
    psi12 = _unit(d2 - 0.5 * d1)
    return psi, np.array([d1, d2, d3]), psi123, psi12


def _build(name: str):
    psi, ds, psi123, psi12 = _fig_common()
    d1, _, d3 = ds
    eye = np.eye(3, dtype=np.complex128)
    zero = np.zeros((3, 3), dtype=np.complex128)
    p123, p12 = _proj(psi123), _proj(psi12)
    if name == "fig2a":
        a = [_proj(d3), zero, eye - _proj(d3)]
        b = [zero, p123, eye - p123]
        desc = "Pi1 = cos^2 |d3><d3|, Pi2 = sin^2 |psi123><psi123|, Pi3 = I - Pi1 - Pi2"
    elif name == "fig2b":
        a = [_diag(1, 0, 0), _diag(0, 0, 1), _diag(0, 1, 0)]
        b = [_proj(d1), p12, eye - _proj(d1) - p12]
        desc = ("Pi1 = diag(cos^2,0,0) + sin^2 |d1><d1|, "
                "Pi2 = diag(0,0,cos^2) + sin^2 |psi12><psi12|, Pi3 = I - Pi1 - Pi2")
    elif name == "fig2c":
        a = [eye, zero]
        b = [p123, eye - p123]
        desc = "Pi1 = cos^2 I + sin^2 |psi123><psi123|, Pi2 = I - Pi1"
    elif name == "figS1a":
        a = [_diag(1, 0, 0), _diag(0, 1, 0), _diag(0, 0, 1)]
        b = [_diag(1, 0, 0), _diag(0, 0, 1), _diag(0, 1, 0)]
        desc = "Pi1 = diag(1,0,0), Pi2 = diag(0,cos^2,sin^2), Pi3 = diag(0,sin^2,cos^2)"
    elif name == "figS1b":
        a = [zero, _diag(0.5, 0, 0.5), _diag(0.5, 1, 0.5)]
        b = [_diag(1, 0, 0), _diag(0, 0, 0.5), _diag(0, 1, 0.5)]
        desc = ("Pi1 = diag(sin^2,0,0), Pi2 = diag(cos^2/2,0,1/2), "
                "Pi3 = diag(cos^2/2,1,1/2)")
    elif name == "figS1c":
        a = [eye, zero, zero]
        b = [zero, p123, eye - p123]
        desc = ("Pi1 = cos^2 I, Pi2 = sin^2 |psi123><psi123|, "
                "Pi3 = sin^2 (I - |psi123><psi123|)")
    else:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    family = PovmFamily(validate_povm(a), validate_povm(b))
    return ScenarioSpec(name, psi, ds, family, theta_grid(), desc)


SCENARIOS = ("fig2a", "fig2b", "fig2c", "figS1a", "figS1b", "figS1c")


def scenario(name: str) -> ScenarioSpec:
    return _build(name)
