import numpy as np
import pytest

from complab import explorer, measures
from complab.errors import NotPSD
from complab.explorer import VerifyConfig, boundary_family, sample_region, saturating_batch, verify_properties
from complab.povm_design import scenario
from complab.qmatrix import RngSpec


def test_saturating_batch_matches_scalar_constructor():
    g = RngSpec(2).generator()
    for n in (2, 3, 5):
        p1 = g.uniform(1 / n, 1, 10)
        a = g.uniform(0, 1, 10) * (1 - p1) / (n - 1) * 0.5
        ph = g.uniform(0, 2 * np.pi, (10, n * (n - 1) // 2))
        batch = saturating_batch(n, p1, a, ph)
        for i in range(10):
            if np.linalg.eigvalsh(batch[i])[0] < -1e-10:
                continue
            rho = measures.saturating_state(measures.SaturationParams(n, p1[i], a[i], tuple(ph[i])))
            assert np.abs(batch[i] - rho.data).max() < 1e-15


def test_batch_and_scalar_agree_on_rejection():
    n = 3
    phases = np.array([[np.pi, np.pi, np.pi]])
    rho = saturating_batch(n, np.array([1 / 3]), np.array([1 / 3]), phases)[0]
    assert np.linalg.eigvalsh(rho)[0] < 0
    with pytest.raises(NotPSD):
        measures.saturating_state(measures.SaturationParams(n, 1 / 3, 1 / 3, tuple(phases[0])))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sample_region_saturates(n):
    rs = sample_region(5000, n, RngSpec(n))
    assert len(rs) == 5000
    assert np.abs(rs.tcr_lhs - 1).max() < 1e-10
    assert rs.p.min() >= -1e-12 and rs.p.max() <= 1 + 1e-12
    if n == 2:
        assert rs.rejected == 0
    pt = rs[0]
    assert pt.p == rs.p[0] and pt.params.p1 == rs.p1[0]
    assert pt.boundary_gap == pytest.approx(rs.boundary_gap[0])


def test_sample_region_boundary_n3():
    rs = sample_region(20000, 3, RngSpec(9))
    assert rs.boundary_gap.min() >= -1e-10
    assert rs.rejected > 0


def test_sample_region_worker_independent(monkeypatch):
    a = sample_region(10000, 3, RngSpec(1), workers=1)
    b = sample_region(10000, 3, RngSpec(1), workers=4)
    monkeypatch.setenv("COMPLAB_THREADS", "3")
    c = sample_region(10000, 3, RngSpec(1))
    for x in (b, c):
        assert np.array_equal(a.p, x.p) and np.array_equal(a.phases, x.phases)


def test_sample_region_seed_matters():
    a = sample_region(100, 3, RngSpec(1))
    b = sample_region(100, 3, RngSpec(2))
    assert not np.array_equal(a.p, b.p)


def test_boundary_family_on_boundary():
    for n in (3, 4, 6):
        bf = boundary_family(n)
        assert np.abs(bf.boundary_gap).max() < 1e-10
        assert np.abs(bf.tcr_lhs - 1).max() < 1e-10
        assert bf.p[0] == pytest.approx(0, abs=1e-15) and bf.p[-1] == pytest.approx(1)


def test_worker_count(monkeypatch):
    monkeypatch.delenv("COMPLAB_THREADS", raising=False)
    assert explorer.worker_count() == 1
    monkeypatch.setenv("COMPLAB_THREADS", "6")
    assert explorer.worker_count() == 6
    assert explorer.worker_count(2) == 2
    monkeypatch.setenv("COMPLAB_THREADS", "bogus")
    assert explorer.worker_count() == 1


def test_sweep_worker_independent():
    s = scenario("fig2a").with_grid(0, np.pi / 2, 31)
    a = explorer.sweep(s, workers=1).rows()
    b = explorer.sweep(s, workers=4).rows()
    assert a == b and len(a) == 31


def test_sweep_custom_grid():
    s = scenario("fig2b").with_grid(0.1, 0.2, 5)
    res = explorer.sweep(s)
    assert np.allclose(res.thetas, np.linspace(0.1, 0.2, 5))
    assert set(res.rows()[0]) == {"theta", "p_bar", "c_bar", "s_bar", "s_bar_sqrt", "p_bar_sq",
                                  "c_bar_sq", "tcr_lhs", "const_P", "const_C"}


def test_verify_small_passes():
    rep = verify_properties(VerifyConfig(n_min=2, n_max=4, samples=2000, wwd_samples=200, seed=3))
    assert rep.passed, [r for r in rep.results if not r.passed]
    assert len(rep.results) == 26
    assert rep["durr-identity"].worst_margin >= -1e-10
    d = rep.as_dict()
    assert d["passed"] and d["seed"] == 3


def test_verify_detects_mutation():
    rep = verify_properties(VerifyConfig(n_min=2, n_max=4, samples=2000, wwd_samples=50,
                                         mutate="drop-normalization"))
    assert not rep.passed
    assert not rep["tcr"].passed
    f = rep["tcr"].failure
    assert f["seed"] == 0 and "stream_id" in f


def test_verify_config_errors():
    with pytest.raises(ValueError):
        VerifyConfig(n_min=1)
    with pytest.raises(ValueError):
        VerifyConfig(mutate="nope")
