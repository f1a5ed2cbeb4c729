import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from hdrkit import copulas as C

RHO = math.sin(math.pi / 4.0)

TAU_FAMILIES = {
    "gaussian": C.gaussian(RHO),
    "student_t": C.student_t_copula(RHO, 6.0),
    "frank": C.frank(5.75),
    "clayton": C.clayton(2.0),
}
ALL_FAMILIES = dict(TAU_FAMILIES, independence=C.independence(), dirichlet11a=C.dirichlet11a(2.0))

# finite-difference steps balance truncation error against CDF evaluation
# noise (the Student-t CDF carries ~1e-8 quadrature error)
_FD_STEP = {"gaussian": 2e-3, "student_t": 5e-3, "frank": 2e-3, "clayton": 2e-3,
            "independence": 2e-3, "dirichlet11a": 2e-3}


def _family_cases():
    return [pytest.param(c, id=name) for name, c in ALL_FAMILIES.items()]


class TestTauCalibration:
    def test_gaussian(self):
        assert_allclose(C.tau_to_param("gaussian", 0.5).rho, RHO, rtol=1e-12)

    def test_clayton(self):
        assert_allclose(C.tau_to_param("clayton", 0.5).theta, 2.0, rtol=1e-12)

    def test_frank_debye_root(self):
        theta = C.tau_to_param("frank", 0.5).theta
        # the exact Debye-function root; the simulation grid rounds it to 5.75
        assert_allclose(theta, 5.7362827, atol=1e-5)
        assert abs(theta - 5.75) < 0.02

    def test_clayton_rejects_negative_tau(self):
        with pytest.raises(ValueError):
            C.tau_to_param("clayton", -0.2)

    @pytest.mark.parametrize("family,tau", [("gaussian", 0.5), ("gaussian", -0.3), ("clayton", 0.5),
                                            ("clayton", 0.2), ("frank", 0.5), ("frank", -0.4)])
    def test_round_trip(self, family, tau):
        model = C.tau_to_param(family, tau)
        assert_allclose(C.kendall_tau(model), tau, atol=1e-8)


class TestCdf:
    def test_clayton_closed_form(self):
        assert_allclose(C.copula_cdf(C.clayton(2.0), 0.5, 0.5), 7.0 ** -0.5, rtol=1e-12)

    def test_frank_value(self):
        # cross-checked against 2-D quadrature of the Frank density
        val = C.copula_cdf(C.frank(5.75), 0.5, 0.5)
        assert_allclose(val, 0.3890, atol=1e-4)
        ref, _ = integrate.dblquad(
            lambda v, u: C.copula_pdf(C.frank(5.75), u, v), 1e-9, 0.5, 1e-9, 0.5, epsabs=1e-8
        )
        assert_allclose(val, ref, atol=1e-6)

    @pytest.mark.parametrize("c", _family_cases())
    def test_uniform_margins(self, c):
        u = np.linspace(0.0, 1.0, 31)
        assert_allclose(C.copula_cdf(c, u, np.ones_like(u)), u, atol=1e-9)
        assert_allclose(C.copula_cdf(c, np.ones_like(u), u), u, atol=1e-9)
        assert_allclose(C.copula_cdf(c, u, np.zeros_like(u)), 0.0, atol=1e-12)

    @pytest.mark.parametrize("c", _family_cases())
    def test_two_increasing(self, c):
        rng = np.random.default_rng(33)
        lo = rng.uniform(0.0, 1.0, size=(1000, 2))
        hi = lo + rng.uniform(0.0, 1.0, size=(1000, 2)) * (1.0 - lo)
        val = (
            C.copula_cdf(c, hi[:, 0], hi[:, 1])
            - C.copula_cdf(c, lo[:, 0], hi[:, 1])
            - C.copula_cdf(c, hi[:, 0], lo[:, 1])
            + C.copula_cdf(c, lo[:, 0], lo[:, 1])
        )
        assert np.all(val >= -1e-12)


class TestPdf:
    def test_independence_is_one(self):
        assert C.copula_pdf(C.independence(), 0.37, 0.81) == 1.0

    def test_gaussian_median_point(self):
        assert_allclose(C.copula_pdf(C.gaussian(RHO), 0.5, 0.5), 1.0 / math.sqrt(1.0 - RHO ** 2), rtol=1e-6)
        assert_allclose(C.copula_pdf(C.gaussian(RHO), 0.5, 0.5), math.sqrt(2.0), rtol=1e-6)

    def test_dirichlet_origin_limit(self):
        # c(0+, 0+) = a/(a+1), matching the direct density ratio f/(f1 f2)
        # at the simplex origin: a(a+1) / (a+1)^2
        val = C.copula_pdf(C.dirichlet11a(2.0), 1e-12, 1e-12)
        assert_allclose(val, 2.0 / 3.0, rtol=1e-6)

    def test_dirichlet_outside_support_zero(self):
        assert C.copula_pdf(C.dirichlet11a(2.0), 0.95, 0.95) == 0.0

    def test_boundary_errors(self):
        with pytest.raises(ValueError, match="boundary"):
            C.copula_pdf(C.gaussian(0.5), 0.0, 0.5)

    @pytest.mark.parametrize("c", _family_cases())
    def test_density_normalization_against_clipped_mass(self, c):
        # Gauss-Legendre 200x200 on the square clipped 1e-4 from the
        # boundary; uniform margins bound the clipped-out mass exactly via
        # the copula CDF, so quadrature must match it to 1e-3
        delta = 1e-4
        xg, wg = np.polynomial.legendre.leggauss(200)
        u = delta + (1.0 - 2.0 * delta) * (xg + 1.0) / 2.0
        w = (1.0 - 2.0 * delta) * wg / 2.0
        U, V = np.meshgrid(u, u, indexing="ij")
        quad = float(np.sum(np.outer(w, w) * C.copula_pdf(c, U, V)))
        mass = (
            C.copula_cdf(c, 1 - delta, 1 - delta)
            - C.copula_cdf(c, delta, 1 - delta)
            - C.copula_cdf(c, 1 - delta, delta)
            + C.copula_cdf(c, delta, delta)
        )
        assert mass >= 1.0 - 4.0 * delta
        assert abs(quad - mass) < 1e-3
        assert abs(quad + (1.0 - mass) - 1.0) < 1e-3

    @pytest.mark.parametrize("c", _family_cases())
    def test_cdf_pdf_finite_difference(self, c):
        rng = np.random.default_rng(44)
        uv = rng.uniform(0.06, 0.94, size=(100, 2))
        if c.family == "dirichlet11a":
            ok = (1 - uv[:, 0]) ** (1 / 3) + (1 - uv[:, 1]) ** (1 / 3) - 1 > 0.05
            uv = uv[ok]
        h = _FD_STEP[c.family]
        fd = (
            C.copula_cdf(c, uv[:, 0] + h, uv[:, 1] + h)
            - C.copula_cdf(c, uv[:, 0] - h, uv[:, 1] + h)
            - C.copula_cdf(c, uv[:, 0] + h, uv[:, 1] - h)
            + C.copula_cdf(c, uv[:, 0] - h, uv[:, 1] - h)
        ) / (4.0 * h * h)
        pdf = C.copula_pdf(c, uv[:, 0], uv[:, 1])
        assert np.max(np.abs(fd - pdf) / np.abs(pdf)) < 1e-3


class TestSampling:
    def _tau(self, c, n=10 ** 5, seed=77):
        u = C.copula_sample(c, n, np.random.default_rng(seed)).u
        return stats.kendalltau(u[:, 0], u[:, 1]).statistic

    @pytest.mark.parametrize("name", list(TAU_FAMILIES))
    def test_tau_half_families(self, name):
        c = TAU_FAMILIES[name]
        target = C.kendall_tau(c)
        assert abs(self._tau(c) - target) < 0.01

    def test_independence_tau_zero(self):
        assert abs(self._tau(C.independence())) < 0.01

    def test_dirichlet_tau(self):
        # reference tau from 2-D quadrature of 4 E[C(U,V)] - 1
        c = C.dirichlet11a(2.0)
        xg, wg = np.polynomial.legendre.leggauss(400)
        u = (xg + 1.0) / 2.0
        w = wg / 2.0
        U, V = np.meshgrid(u, u, indexing="ij")
        W = np.outer(w, w)
        tau_ref = 4.0 * float(np.sum(W * C.copula_cdf(c, U, V) * C.copula_pdf(c, U, V))) - 1.0
        assert_allclose(tau_ref, -0.2, atol=1e-4)
        assert abs(self._tau(c) - tau_ref) < 0.01

    def test_gaussian_spearman(self):
        # closed form rho_S = (6/pi) asin(rho/2)
        u = C.copula_sample(C.gaussian(RHO), 10 ** 5, np.random.default_rng(5)).u
        rho_s = stats.spearmanr(u[:, 0], u[:, 1]).statistic
        assert abs(rho_s - 6.0 / math.pi * math.asin(RHO / 2.0)) < 0.01

    def test_zero_draws_errors(self):
        with pytest.raises(ValueError):
            C.copula_sample(C.independence(), 0, np.random.default_rng(0))


class TestFitting:
    def test_clayton_recovery(self):
        u = C.copula_sample(C.clayton(2.0), 10 ** 4, np.random.default_rng(8))
        model, ll = C.fit_copula_mle(u, "clayton")
        assert abs(model.theta - 2.0) < 0.15
        assert ll > 0

    def test_independence_as_frank(self):
        u = C.copula_sample(C.independence(), 10 ** 4, np.random.default_rng(9))
        model, _ = C.fit_copula_mle(u, "frank")
        assert abs(model.theta) < 0.15

    def test_gaussian_recovery(self):
        u = C.copula_sample(C.gaussian(RHO), 10 ** 4, np.random.default_rng(10))
        model, _ = C.fit_copula_mle(u, "gaussian")
        assert abs(model.rho - RHO) < 0.02

    def test_aic_selects_clayton(self):
        u = C.copula_sample(C.clayton(2.0), 10 ** 4, np.random.default_rng(11))
        model, table = C.select_copula_aic(u)
        assert model.family == "clayton"
        assert set(table) == set(C.DEFAULT_CANDIDATES)

    def test_aic_gaussian_parameter(self):
        u = C.copula_sample(C.gaussian(RHO), 10 ** 4, np.random.default_rng(12))
        model, _ = C.select_copula_aic(u)
        assert model.family in ("gaussian", "student_t")
        assert abs(model.rho - RHO) < 0.02

    def test_independence_only_candidate(self):
        u = C.copula_sample(C.clayton(2.0), 500, np.random.default_rng(13))
        model, table = C.select_copula_aic(u, candidates=("independence",))
        assert model.family == "independence"
        assert table["independence"][0] == 0.0


class TestNpCopula:
    def test_bandwidths_near_reference(self):
        u = C.copula_sample(C.independence(), 10 ** 4, np.random.default_rng(14))
        fit = C.npcop_fit(u)
        ref = (10 ** 4) ** (-1.0 / 6.0)  # sigma of Phi^-1(U) is 1
        assert abs(fit.h1 - ref) < 0.02
        assert abs(fit.h2 - ref) < 0.02

    def test_minimal_input(self):
        u = C.copula_sample(C.independence(), 20, np.random.default_rng(15))
        fit = C.npcop_fit(u)
        assert np.isfinite([fit.h1, fit.h2]).all()

    def test_boundary_pseudo_obs_rejected(self):
        with pytest.raises(ValueError):
            C.PseudoObservations(np.array([[0.0, 0.5]]), "ecdf_rescaled")

    def test_pdf_single_kernel_identity(self):
        fit = C.NpCopulaFit(np.zeros((1, 2)), 1.0, 1.0)
        assert_allclose(C.npcop_pdf(fit, 0.5, 0.5), 1.0, rtol=1e-12)

    def test_pdf_consistency_independence(self):
        u = C.copula_sample(C.independence(), 10 ** 5, np.random.default_rng(16))
        fit = C.npcop_fit(u)
        assert abs(C.npcop_pdf(fit, 0.5, 0.5) - 1.0) < 0.05

    def test_clayton_lower_tail_ordering(self):
        u = C.copula_sample(C.clayton(2.0), 10 ** 5, np.random.default_rng(17))
        fit = C.npcop_fit(u)
        assert C.npcop_pdf(fit, 0.05, 0.05) > C.npcop_pdf(fit, 0.05, 0.95)

    def test_rect_full_square(self):
        u = C.copula_sample(C.gaussian(0.5), 200, np.random.default_rng(18))
        fit = C.npcop_fit(u)
        assert_allclose(C.npcop_rect_prob(fit, 0.0, 1.0, 0.0, 1.0), 1.0, rtol=1e-12)

    def test_rect_empty_interval(self):
        u = C.copula_sample(C.gaussian(0.5), 200, np.random.default_rng(19))
        fit = C.npcop_fit(u)
        assert C.npcop_rect_prob(fit, 0.3, 0.3, 0.1, 0.9) == 0.0

    def test_rect_inverted_errors(self):
        u = C.copula_sample(C.gaussian(0.5), 200, np.random.default_rng(20))
        fit = C.npcop_fit(u)
        with pytest.raises(ValueError, match="inverted"):
            C.npcop_rect_prob(fit, 0.5, 0.4, 0.1, 0.9)

    def test_rect_product_measure(self):
        u = C.copula_sample(C.independence(), 10 ** 5, np.random.default_rng(21))
        fit = C.npcop_fit(u)
        assert abs(C.npcop_rect_prob(fit, 0.2, 0.4, 0.2, 0.4) - 0.04) < 0.005

    def test_rect_matches_pdf_quadrature(self):
        # 50 random rectangles, n=500 fit: closed form vs tensor quadrature
        # of npcop_pdf in u-space
        u = C.copula_sample(C.gaussian(RHO), 500, np.random.default_rng(22))
        fit = C.npcop_fit(u)
        rng = np.random.default_rng(23)
        xg, wg = np.polynomial.legendre.leggauss(120)
        for _ in range(50):
            a1, a2 = rng.uniform(0.05, 0.80, size=2)
            b1 = a1 + rng.uniform(0.02, 0.95 - a1)
            b2 = a2 + rng.uniform(0.02, 0.95 - a2)
            uu = a1 + (b1 - a1) * (xg + 1.0) / 2.0
            vv = a2 + (b2 - a2) * (xg + 1.0) / 2.0
            wu = (b1 - a1) * wg / 2.0
            wv = (b2 - a2) * wg / 2.0
            U, V = np.meshgrid(uu, vv, indexing="ij")
            quad = float(np.sum(np.outer(wu, wv) * C.npcop_pdf(fit, U, V)))
            assert abs(quad - C.npcop_rect_prob(fit, a1, b1, a2, b2)) < 1e-4
