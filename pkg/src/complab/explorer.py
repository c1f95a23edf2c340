"""Monte-Carlo exploration of the saturating family, theta sweeps and the
property-verification suite.

Sampling is split into fixed-size chunks; chunk ``c`` always draws from
``rng.substream(c)``. Results therefore do not depend on how many worker
threads process the chunks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import measures
from .povm_design import (
    SCENARIOS,
    CCertificate,
    PCertificate,
    ScenarioSpec,
    check_constant_C,
    check_constant_P,
    interpolate_povm,
    scenario,
)
from .qmatrix import PSD_TOL, RngSpec, density_violations, partial_trace_detector, random_density_batch
from .wwd import (
    AveragedTriple,
    TCRReport,
    averaged_tcr,
    averages,
    decompose,
    evolve,
    random_interaction,
    random_povm,
)

CHUNK = 4096
TOL = 1e-10


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("COMPLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _map(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class TrianglePoint:
    p: float
    c: float
    s_l: float
    params: measures.SaturationParams

    @property
    def boundary_gap(self) -> float:
        return 2 * self.s_l - (1 - (self.p ** 2 - self.c ** 2) ** 2)


@dataclass(frozen=True, eq=False)
class RegionSample:
    """Column-oriented sample of the saturating family; indexes to TrianglePoint."""

    n: int
    p: np.ndarray
    c: np.ndarray
    s_l: np.ndarray
    p1: np.ndarray
    a_mod: np.ndarray
    phases: np.ndarray = field(repr=False)
    rejected: int = 0

    def __len__(self):
        return self.p.size

    def __getitem__(self, i) -> TrianglePoint:
        prm = measures.SaturationParams(self.n, float(self.p1[i]), float(self.a_mod[i]),
                                        tuple(self.phases[i].tolist()))
        return TrianglePoint(float(self.p[i]), float(self.c[i]), float(self.s_l[i]), prm)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def boundary_gap(self) -> np.ndarray:
        return 2 * self.s_l - (1 - (self.p ** 2 - self.c ** 2) ** 2)

    @property
    def tcr_lhs(self) -> np.ndarray:
        return self.p ** 2 + self.c ** 2 + self.s_l


def saturating_batch(n: int, p1, a_mod, phases) -> np.ndarray:
    """Vectorized saturating-family matrices with the maximum at index 0."""
    p1 = np.asarray(p1, float)
    k = p1.size
    p2 = (1 - p1) / (n - 1)
    rows, cols = np.tril_indices(n, -1)
    rho = np.zeros((k, n, n), dtype=np.complex128)
    rho[:, rows, cols] = a_mod[:, None] * np.exp(1j * phases)
    rho[:, cols, rows] = np.conj(rho[:, rows, cols])
    idx = np.arange(n)
    rho[:, idx, idx] = p2[:, None]
    rho[:, 0, 0] = p1
    return rho


def _sample_chunk(n: int, size: int, rng: RngSpec):
    g = rng.generator()
    npairs = n * (n - 1) // 2
    out, rejected, have = [], 0, 0
    while have < size:
        want = size - have
        p1 = g.uniform(1.0 / n, 1.0, want)
        bound = np.array([measures.saturation_bound(n, x) for x in p1])
        a = g.uniform(0.0, 1.0, want) * bound
        ph = g.uniform(0.0, 2 * np.pi, (want, npairs))
        rho = saturating_batch(n, p1, a, ph)
        ok = density_violations(rho)["min_eigenvalue"] >= -PSD_TOL
        rejected += int((~ok).sum())
        out.append((p1[ok], a[ok], ph[ok], rho[ok]))
        have += int(ok.sum())
    p1, a, ph, rho = (np.concatenate(z)[:size] for z in zip(*out))
    return p1, a, ph, rho, rejected


def sample_region(count: int, n: int, rng: RngSpec | int = 0, workers: int | None = None) -> RegionSample:
    """Uniformly drawn saturating-family states, with non-PSD draws rejected.

    ``p1 ~ U[1/N, 1]``, ``|a| ~ U[0, bound(p1)]`` and every phase
    ``~ U[0, 2 pi)``. For ``N > 2`` the modulus bound alone does not make
    every phase pattern positive, so failing draws are redrawn.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    if not isinstance(rng, RngSpec):
        rng = RngSpec(int(rng))
    sizes = [min(CHUNK, count - s) for s in range(0, count, CHUNK)]
    parts = _map(lambda cs: _sample_chunk(n, cs[1], rng.substream(cs[0])),
                 enumerate(sizes), worker_count(workers))
    if not parts:
        e = np.zeros(0)
        return RegionSample(n, e, e, e, e, e, np.zeros((0, n * (n - 1) // 2)))
    p1, a, ph, rho, rej = zip(*parts)
    rho = np.concatenate(rho)
    return RegionSample(
        n,
        p=measures.predictability(rho),
        c=measures.coherence_l1(rho),
        s_l=measures.linear_entropy(rho),
        p1=np.concatenate(p1),
        a_mod=np.concatenate(a),
        phases=np.concatenate(ph),
        rejected=sum(rej),
    )


def boundary_family(n: int, steps: int = 201) -> RegionSample:
    """Deterministic states with ``|a| = p2`` and zero phases; these sit on the
    reachable-region boundary."""
    p1 = np.linspace(1.0 / n, 1.0, steps)
    a = (1 - p1) / (n - 1)
    ph = np.zeros((steps, n * (n - 1) // 2))
    rho = saturating_batch(n, p1, a, ph)
    return RegionSample(n, measures.predictability(rho), measures.coherence_l1(rho),
                        measures.linear_entropy(rho), p1, a, ph)


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    triple: AveragedTriple
    tcr: TCRReport
    const_p: PCertificate
    const_c: CCertificate
    total_mass: float
    dropped_mass: float

    def row(self) -> dict:
        t = self.triple
        return {
            "theta": self.theta,
            "p_bar": t.p_bar,
            "c_bar": t.c_bar,
            "s_bar": t.s_bar,
            "s_bar_sqrt": t.s_bar_sqrt,
            "p_bar_sq": t.p_bar ** 2,
            "c_bar_sq": t.c_bar ** 2,
            "tcr_lhs": t.tcr_lhs,
            "const_P": self.const_p.holds,
            "const_C": self.const_c.holds,
        }


@dataclass(frozen=True, eq=False)
class SweepResult:
    name: str
    thetas: np.ndarray
    points: list[SweepPoint]

    def column(self, key: str) -> np.ndarray:
        return np.array([p.row()[key] for p in self.points])

    def rows(self) -> list[dict]:
        return [p.row() for p in self.points]

    def certificates_over_grid(self) -> dict[str, bool]:
        """Which constancy certificate holds at every theta of the grid."""
        return {
            "const_P": all(p.const_p.holds for p in self.points),
            "const_C": all(p.const_c.holds for p in self.points),
        }


def sweep(s: ScenarioSpec, workers: int | None = None) -> SweepResult:
    joint = evolve(s.psi_s.density(), s.interaction())

    def one(theta):
        povm = interpolate_povm(s.family, float(theta))
        dec = decompose(joint, povm)
        t = averages(dec)
        return SweepPoint(float(theta), t, averaged_tcr(t, strict=False),
                          check_constant_P(joint, povm), check_constant_C(joint, povm),
                          dec.total_mass, dec.dropped_mass)

    return SweepResult(s.name, np.asarray(s.thetas, float), _map(one, s.thetas, worker_count(workers)))


# ---------------------------------------------------------------- verification


@dataclass
class PropertyResult:
    name: str
    samples: int
    worst_margin: float
    tolerance: float
    passed: bool
    failure: dict | None = None

    def as_dict(self) -> dict:
        return {
            "property": self.name,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "failure": self.failure,
        }


@dataclass
class VerificationReport:
    results: list[PropertyResult]
    config: "VerifyConfig"

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> PropertyResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "seed": self.config.seed,
            "mutate": self.config.mutate,
            "properties": [r.as_dict() for r in self.results],
        }


@dataclass(frozen=True)
class VerifyConfig:
    n_min: int = 2
    n_max: int = 6
    samples: int = 20_000
    wwd_samples: int = 2_000
    seed: int = 0
    mutate: str | None = None

    def __post_init__(self):
        if self.n_min < 2 or self.n_max < self.n_min:
            raise ValueError("need 2 <= n_min <= n_max")
        if self.samples < 1 or self.wwd_samples < 1:
            raise ValueError("sample counts must be >= 1")
        if self.mutate not in (None, *MUTATIONS):
            raise ValueError(f"unknown mutation {self.mutate!r}")


def _unnormalized_coherence(rho):
    return measures.offdiag_abs_sum(rho)


MUTATIONS: dict[str, Callable] = {"drop-normalization": _unnormalized_coherence}


class _Tracker:
    """Accumulates the worst margin of one property over sample batches.

    A property passes when every margin is ``>= -tol``; for equalities the
    margin is ``tol - |error|`` shifted back so ``>= -tol`` still applies.
    """

    def __init__(self, name, tol, seed):
        self.name, self.tol, self.seed = name, tol, seed
        self.samples, self.worst, self.failure = 0, np.inf, None

    def add(self, margins, stream_id, label=""):
        margins = np.atleast_1d(np.asarray(margins, float))
        if margins.size == 0:
            return
        i = int(np.argmin(margins))
        if margins[i] < self.worst:
            self.worst = float(margins[i])
            if self.worst < -self.tol:
                self.failure = {"seed": self.seed, "stream_id": stream_id, "index": i, "batch": label}
        self.samples += margins.size

    def equality(self, errors, stream_id, label=""):
        self.add(-np.abs(np.asarray(errors, float)), stream_id, label)

    def result(self) -> PropertyResult:
        worst = self.worst if np.isfinite(self.worst) else 0.0
        passed = self.samples > 0 and worst >= -self.tol
        return PropertyResult(self.name, self.samples, worst, self.tol, passed,
                              None if passed else self.failure)


def verify_properties(config: VerifyConfig | None = None) -> VerificationReport:
    cfg = config or VerifyConfig()
    coh = MUTATIONS[cfg.mutate] if cfg.mutate else measures.coherence_l1
    seed = cfg.seed
    T = lambda name, tol: _Tracker(name, tol, seed)  # noqa: E731

    tcr, tcr2, duality = T("tcr", TOL), T("tcr-equality-n2", TOL), T("duality", TOL)
    lemma1, lemma2 = T("lemma-diagonal", 1e-12), T("lemma-offdiagonal", TOL)
    lemma_eq = T("lemma-equality-cases", 1e-12)
    s_concave, e_concave = T("concavity-linear-entropy", TOL), T("concavity-sqrt-linear-entropy", TOL)
    p_convex, c_convex = T("convexity-predictability", TOL), T("convexity-coherence", TOL)
    durr = T("durr-identity", TOL)
    sat = T("saturation-family", TOL)
    bound, attained = T("boundary-region", TOL), T("boundary-attained", TOL)
    avg, avg_sqrt = T("averaged-tcr", TOL), T("averaged-tcr-sqrt", TOL)
    avg_dual = T("averaged-duality", TOL)
    mono_s, mono_p, mono_c = T("monotone-entropy", TOL), T("monotone-predictability", TOL), T("monotone-coherence", TOL)
    recomb, mass = T("recombination", 1e-9), T("mass-conservation", TOL)
    cq_pure, cq_mixed = T("two-qubit-pure-equality", TOL), T("two-qubit-mixed-bound", TOL)
    scen_tcr, scen_const = T("scenario-averaged-tcr", TOL), T("scenario-constancy", TOL)

    base = RngSpec(seed)
    stream = 0
    for n in range(cfg.n_min, cfg.n_max + 1):
        for ens in ("hilbert-schmidt", "pure-haar"):
            stream += 1
            spec = base.substream(stream)
            rho = random_density_batch(n, cfg.samples, spec, ens)
            p, c, s = measures.predictability(rho), coh(rho), measures.linear_entropy(rho)
            lhs = p ** 2 + c ** 2 + s
            tcr.add(1 - lhs, spec.stream_id, f"N={n} {ens}")
            duality.add(1 - p ** 2 - c ** 2, spec.stream_id, f"N={n} {ens}")
            if n == 2:
                tcr2.equality(lhs - 1, spec.stream_id, ens)
            pd = measures.durr_measures(rho)
            durr.equality(pd.predictability ** 2 + pd.visibility ** 2 + s - 1, spec.stream_id)

            diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
            p1 = diag.max(axis=-1)
            lemma1.add((diag ** 2).sum(-1) - p1 ** 2 - (1 - p1) ** 2 / (n - 1), spec.stream_id)
            off = np.abs(rho)
            off[:, np.arange(n), np.arange(n)] = 0
            lemma2.add(n * (n - 1) * (off ** 2).sum((-2, -1)) - off.sum((-2, -1)) ** 2, spec.stream_id)

        stream += 1
        spec = base.substream(stream)
        g = spec.generator()
        r1 = random_density_batch(n, cfg.samples, g)
        r2 = random_density_batch(n, cfg.samples, g, "pure-haar" if n % 2 else "hilbert-schmidt")
        a = g.uniform(0, 1, cfg.samples)
        mix = a[:, None, None] * r1 + (1 - a)[:, None, None] * r2
        for tr, fn, sign in ((s_concave, measures.linear_entropy, 1),
                             (e_concave, lambda r: np.sqrt(measures.linear_entropy(r)), 1),
                             (p_convex, measures.predictability, -1),
                             (c_convex, measures.coherence_l1, -1)):
            tr.add(sign * (fn(mix) - a * fn(r1) - (1 - a) * fn(r2)), spec.stream_id, f"N={n}")

        stream += 1
        spec = base.substream(stream)
        g = spec.generator()
        # equality cases: uniform non-max diagonals, uniform off-diagonal moduli
        for _ in range(20):
            q1 = g.uniform(1 / n, 1)
            amp = g.uniform(0, measures.saturation_bound(n, q1))
            mat = saturating_batch(n, np.array([q1]), np.array([amp]),
                                   np.zeros((1, n * (n - 1) // 2)))[0]
            d = np.real(np.diag(mat))
            lemma_eq.equality([(d ** 2).sum() - q1 ** 2 - (1 - q1) ** 2 / (n - 1)], spec.stream_id)
            offm = np.abs(mat)
            np.fill_diagonal(offm, 0)
            lemma_eq.equality([n * (n - 1) * (offm ** 2).sum() - offm.sum() ** 2], spec.stream_id)

        rs = sample_region(cfg.samples, n, base.substream(1000 + n))
        sat.equality(rs.tcr_lhs - 1, base.substream(1000 + n).stream_id, f"N={n}")
        if n >= 3:
            bound.add(rs.boundary_gap, base.substream(1000 + n).stream_id, f"N={n}")
            bf = boundary_family(n)
            attained.equality(bf.boundary_gap, -1, f"N={n} constructed")

    # two-qubit relations
    stream += 1
    spec = base.substream(stream)
    g = spec.generator()
    pure = random_density_batch(4, cfg.samples, g, "pure-haar")
    mixed = random_density_batch(4, cfg.samples, g)
    for tr, batch in ((cq_pure, pure), (cq_mixed, mixed)):
        conc = measures.concurrence_two_qubit(batch)
        sl = measures.linear_entropy(partial_trace_detector(batch, 2, 2))
        if tr is cq_pure:
            tr.equality(sl - conc ** 2, spec.stream_id, "pure")
        else:
            tr.add(sl - conc ** 2, spec.stream_id, "mixed")

    # averaged relations over random (state, interaction, POVM) triples
    stream += 1
    spec = base.substream(stream)
    g = spec.generator()
    n_hi = min(cfg.n_max, 5)
    for i in range(cfg.wwd_samples):
        n = int(g.integers(2, max(n_hi, 2) + 1))
        d = int(g.integers(2, 6))
        m = int(g.integers(1, 7))
        ens = "pure-haar" if g.uniform() < 0.3 else "hilbert-schmidt"
        rho_s = random_density_batch(n, 1, g, ens)[0]
        w = random_interaction(n, d, g, pure_detector=bool(g.uniform() < 0.5))
        j = evolve(rho_s, w)
        dec = decompose(j, random_povm(d, m, g))
        t = averages(dec)
        sid = spec.stream_id
        avg.add([1 - t.tcr_lhs], sid, f"draw {i}")
        avg_sqrt.add([1 - t.tcr_lhs_sqrt], sid, f"draw {i}")
        avg_dual.add([1 - t.p_bar ** 2 - t.c_s1 ** 2], sid, f"draw {i}")
        mono_s.add([t.s_s1 - t.s_bar], sid, f"draw {i}")
        mono_p.add([t.p_bar - t.p_s1], sid, f"draw {i}")
        mono_c.add([t.c_bar - t.c_s1], sid, f"draw {i}")
        recomb.equality([np.abs(dec.recombined() - dec.rho_s1.data).max()], sid, f"draw {i}")
        mass.equality([dec.total_mass - 1], sid, f"draw {i}")

    for name in SCENARIOS:
        res = sweep(scenario(name))
        scen_tcr.add([min(p.tcr.margin, p.tcr.margin_sqrt) for p in res.points], -1, name)
        mass.equality([p.total_mass - 1 for p in res.points], -1, name)
        grid = res.certificates_over_grid()
        if grid["const_P"]:
            scen_const.equality(np.ptp(res.column("p_bar")) + abs(res.points[0].triple.p_bar
                                                                  - res.points[0].triple.p_s1), -1, name)
        if grid["const_C"]:
            scen_const.equality(np.ptp(res.column("c_bar")) + abs(res.points[0].triple.c_bar
                                                                  - res.points[0].triple.c_s1), -1, name)

    trackers = [tcr, tcr2, duality, lemma1, lemma2, lemma_eq, s_concave, e_concave, p_convex,
                c_convex, durr, sat, bound, attained, avg, avg_sqrt, avg_dual, mono_s, mono_p,
                mono_c, recomb, mass, cq_pure, cq_mixed, scen_tcr, scen_const]
    return VerificationReport([t.result() for t in trackers], cfg)
