import math

import pytest

import gammix


def test_shifted_gamma_basics():
    g = gammix.ShiftedGamma(alpha=2.0, shift=-0.5, rate=4.0)
    assert g.mean() == pytest.approx(-0.5 + 2.0 / 4.0)
    assert g.variance() == pytest.approx(2.0 / 16.0)
    assert g.log_pdf(-0.6) == -math.inf
    assert g.cdf(-0.5) == 0.0
    assert g.sf(-0.5) == 1.0
    draws = g.sample(1000, seed=7)
    assert len(draws) == 1000
    assert draws == g.sample(1000, seed=7)
    assert min(draws) > -0.5


def test_mixture_and_pvalue():
    m = gammix.GammaMixture(
        components=[
            gammix.ShiftedGamma(3.0, -0.3, 10.0),
            gammix.ShiftedGamma(5.0, -0.1, 20.0),
        ],
        weights=[0.4, 0.6],
    )
    assert m.n_states == 2
    assert m.cdf(1.0) + m.sf(1.0) == pytest.approx(1.0, abs=1e-12)
    # Right-tail p-value decreases with similarity.
    assert gammix.p_value(m, 0.1) > gammix.p_value(m, 0.4)
    assert gammix.p_value(m, -1.0) == pytest.approx(1.0)


def test_fit_recovers_rough_shape():
    true = gammix.ShiftedGamma(6.0, -0.2, 30.0)
    values = true.sample(20000, seed=3)
    cfg = gammix.FitConfig()
    cfg.n_states = 1
    cfg.max_iters = 2000  # shift-parameter fits approach the optimum slowly
    report = gammix.fit(values, cfg)
    assert report.converged
    fitted = report.model.components[0]
    assert fitted.alpha == pytest.approx(6.0, rel=0.2)
    assert report.model.mean() == pytest.approx(true.mean(), abs=0.01)
    # Per-iteration log-likelihood never decreases within a data regime.
    ll = report.per_iter_ll
    switch = report.warm_switch_iter
    for seg in (ll[:switch], ll[switch:]):
        assert all(b >= a - 1e-9 for a, b in zip(seg, seg[1:]))


def test_simulate_and_histogram():
    cfg = gammix.HierarchyConfig()
    cfg.depth_m = 6
    cfg.ratio_eta = 0.9
    cfg.degree_k = 2
    cfg.dim_n = 16
    cfg.seed = 1
    labeled = gammix.simulate(cfg)
    assert len(labeled.sims) == 2**6
    assert labeled.sims[0] == pytest.approx(1.0, abs=1e-12)
    assert labeled.levels[0] == 6
    hist = gammix.level_histogram(labeled, 20)
    assert sum(sum(row) for row in hist) == len(labeled.sims)


def test_match_pipeline():
    null = gammix.GammaMixture(gammix.ShiftedGamma(4.0, -0.4, 12.0))
    sims = [[0.1, 0.9, 0.2], [0.8, 0.15, 0.05]]
    result = gammix.best_matches(sims, [null, null], one_to_one=True)
    chosen = {m.query: m.candidate for m in result.per_query}
    assert chosen == {0: 1, 1: 0}
    assert 0.0 <= result.combined_p <= 1.0

    stat, combined, clamped = gammix.combine_p_values([0.05])
    assert combined == pytest.approx(0.05)
    assert not clamped


def test_cosine_similarities():
    sims = gammix.cosine_similarities([1.0, 0.0], [[1.0, 0.0], [0.0, 2.0]])
    assert sims == pytest.approx([1.0, 0.0])
    with pytest.raises(ValueError):
        gammix.cosine_similarities([0.0, 0.0], [[1.0, 0.0]])


def test_special_functions():
    assert gammix.sf.log_gamma(5.0) == pytest.approx(math.log(24.0))
    assert gammix.sf.digamma(2.0) - gammix.sf.digamma(1.0) == pytest.approx(1.0)
    assert gammix.sf.trigamma(3.0) > 1.0 / 3.0
    p = gammix.sf.reg_lower_inc_gamma(1.0, 1.0)
    assert p == pytest.approx(1.0 - math.exp(-1.0))
    assert gammix.sf.inv_reg_lower_inc_gamma(1.0, p) == pytest.approx(1.0)
