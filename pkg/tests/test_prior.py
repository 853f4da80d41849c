import json

import numpy as np
import pytest

from uwdepth.depth import DepthMap
from uwdepth.prior import (
    FitReport,
    PriorCoefficients,
    domain_loss,
    domain_loss_grad,
    fit_prior,
    pool_samples,
    predict_prior,
)
from uwdepth.rmi import RmiPlanes


def planted_samples(rng, n, tau=(0.1, 0.5, 0.3), noise=0.0):
    r = rng.random(n)
    m = rng.random(n)
    d = tau[0] + tau[1] * r + tau[2] * m
    if noise:
        d = d + noise * rng.standard_normal(n)
    return np.column_stack([r, m, np.maximum(d, 0.0)])


class TestFitPrior:
    def test_recovers_planted_model(self):
        rng = np.random.default_rng(0)
        rep = fit_prior(planted_samples(rng, 100))
        assert rep.coefficients.as_tuple() == pytest.approx((0.1, 0.5, 0.3), abs=1e-5)
        assert rep.residual_rms < 1e-6
        assert rep.n_pixels == 100
        assert not rep.ridge_used

    def test_recovery_across_seeds(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            tau = tuple(rng.uniform(0.05, 0.8, 3))
            rep = fit_prior(planted_samples(rng, 60, tau=tau))
            assert rep.coefficients.as_tuple() == pytest.approx(tau, abs=1e-5)

    def test_constant_target(self):
        rng = np.random.default_rng(1)
        s = planted_samples(rng, 50)
        s[:, 2] = 0.7
        rep = fit_prior(s)
        assert rep.coefficients.as_tuple() == pytest.approx((0.7, 0.0, 0.0), abs=1e-5)

    def test_rank_deficient_design_survives(self):
        s = np.column_stack([
            np.full(20, 0.4),
            np.full(20, 0.6),
            np.linspace(0.1, 0.9, 20),
        ])
        rep = fit_prior(s)
        assert all(np.isfinite(rep.coefficients.as_tuple()))
        assert rep.ridge_used

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            fit_prior([(0.1, 0.2, 0.3), (0.4, 0.5, 0.6)])

    def test_matches_lstsq(self):
        rng = np.random.default_rng(2)
        s = planted_samples(rng, 200, noise=0.05)
        rep = fit_prior(s)
        design = np.column_stack([np.ones(len(s)), s[:, 0], s[:, 1]])
        expect, *_ = np.linalg.lstsq(design, s[:, 2], rcond=None)
        assert rep.coefficients.as_tuple() == pytest.approx(tuple(expect), abs=1e-6)

    def test_order_invariant(self):
        rng = np.random.default_rng(3)
        s = planted_samples(rng, 80, noise=0.02)
        a = fit_prior(s).coefficients.as_tuple()
        b = fit_prior(s[::-1]).coefficients.as_tuple()
        assert a == pytest.approx(b, abs=1e-9)

    def test_appending_exact_sample_keeps_residual(self):
        rng = np.random.default_rng(4)
        s = planted_samples(rng, 100)
        rep = fit_prior(s)
        c = rep.coefficients
        extra_r, extra_m = 0.42, 0.58
        extra = (extra_r, extra_m, c.tau0 + c.tau1 * extra_r + c.tau2 * extra_m)
        rep2 = fit_prior(np.vstack([s, extra]))
        assert rep2.residual_rms <= rep.residual_rms + 1e-9

    def test_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        rep = fit_prior(planted_samples(rng, 40))
        out = tmp_path / "coeffs.json"
        rep.save(out)
        doc = json.loads(out.read_text())
        assert set(doc) == {"tau0", "tau1", "tau2", "residual_rms", "n_pixels"}
        assert doc["tau0"] == rep.coefficients.tau0
        assert doc["n_pixels"] == 40


class TestPredictPrior:
    def test_constant_model(self):
        rmi = RmiPlanes(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 3)))
        d = predict_prior(rmi, PriorCoefficients(0.5, 0.0, 0.0))
        assert np.array_equal(d.values, np.full((2, 3), 0.5))

    def test_projection_onto_red(self):
        rng = np.random.default_rng(6)
        r = rng.random((4, 5))
        rmi = RmiPlanes(r, rng.random((4, 5)), rng.random((4, 5)))
        d = predict_prior(rmi, PriorCoefficients(0.0, 1.0, 0.0))
        assert np.array_equal(d.values, r)

    def test_hand_computed(self):
        rmi = RmiPlanes(np.full((1, 1), 0.2), np.full((1, 1), 0.8), np.zeros((1, 1)))
        d = predict_prior(rmi, PriorCoefficients(0.1, 0.5, 0.3))
        assert d.values[0, 0] == pytest.approx(0.44, abs=1e-12)

    def test_floored_at_zero(self):
        rmi = RmiPlanes(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)))
        d = predict_prior(rmi, PriorCoefficients(-5.0, 1.0, 1.0))
        assert d.values[0, 0] == 0.0


class TestPoolSamples:
    def test_respects_stride_and_mask(self):
        vals = np.arange(16, dtype=np.float64).reshape(4, 4) / 16.0
        mask = np.ones((4, 4), dtype=bool)
        mask[0, 0] = False
        rmi = RmiPlanes(vals, vals, vals)
        s = pool_samples(rmi, DepthMap(vals, mask), stride=2)
        # strided grid is (0,0),(0,2),(2,0),(2,2); (0,0) masked out
        assert s.shape == (3, 3)

    def test_stride_one_collects_all_valid(self):
        rng = np.random.default_rng(7)
        vals = rng.random((6, 6))
        mask = rng.random((6, 6)) > 0.3
        rmi = RmiPlanes(vals, vals, vals)
        s = pool_samples(rmi, DepthMap(vals, mask), stride=1)
        assert s.shape == (int(mask.sum()), 3)


class TestDomainLoss:
    def test_zero_on_equal_maps(self):
        rng = np.random.default_rng(8)
        d = DepthMap(rng.random((5, 5)))
        assert domain_loss(d, DepthMap(d.values.copy())) == 0.0

    def test_unit_difference(self):
        a = DepthMap(np.ones((3, 3)))
        b = DepthMap(np.zeros((3, 3)))
        assert domain_loss(a, b) == 1.0

    def test_direct_mean(self):
        prior = DepthMap(np.array([[1.0, 2.0]]))
        pred = DepthMap(np.array([[0.5, 2.5]]))
        assert domain_loss(prior, pred) == pytest.approx(0.25, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            domain_loss(DepthMap(np.ones((2, 2))), DepthMap(np.ones((3, 2))))

    def test_nonnegative_and_zero_iff_equal(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = DepthMap(rng.random((4, 4)))
            b = DepthMap(rng.random((4, 4)))
            loss = domain_loss(a, b)
            assert loss >= 0.0
            assert (loss == 0.0) == bool(np.array_equal(a.values, b.values))

    def test_grad_zero_on_masked_pixels(self):
        rng = np.random.default_rng(10)
        mask = rng.random((4, 4)) > 0.4
        mask[0, 0] = True
        prior = DepthMap(rng.random((4, 4)), mask)
        pred = DepthMap(rng.random((4, 4)))
        g = domain_loss_grad(prior, pred)
        assert np.all(g[~mask] == 0.0)


def test_fit_report_fields():
    rng = np.random.default_rng(11)
    rep = fit_prior(planted_samples(rng, 10))
    assert isinstance(rep, FitReport)
    assert rep.residual_rms >= 0.0
    assert rep.n_pixels >= 3
