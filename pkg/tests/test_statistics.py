"""Statistics: norms, trace formulas against frozen high-precision oracles,
quadrature cross-checks, residual trends and Monte Carlo summaries.

The frozen cumulant and alpha values were produced once with an independent
50-digit computation (radial moments of the basis functions evaluated in
closed form) and are not recomputed here.
"""
import numpy as np
import pytest
from scipy import stats

from invdpp.geometry import Isometry, SpaceKind
from invdpp.kernels import KernelSpec
from invdpp.numerics import RngStream, complex_gaussian, rng_stream
from invdpp.sampler import PointSample, sample_many
from invdpp.statistics import (
    alpha,
    anderson_darling_pvalue,
    anderson_darling_statistic,
    asymptotic_variance,
    centered_statistic,
    co_residual,
    covariance_trace,
    cumulant_coefficients,
    cumulant_trace,
    empirical_report,
    expected_statistic,
    h1_norm_sq,
    k_statistics,
    l1_norm_invariant,
    linear_statistic,
    llap_residual,
    matrix_elements,
    mean_trace,
    moment_report,
    normality_test,
    variance_quadrature,
    variance_trace,
)
from invdpp.testfunctions import angular, builtin_test_functions, bump, constant

CUMULANT_ORACLES = {
    ("sphere", 2, 1.0): (0.30524711083016686, 0.11231067250903073, 0.03333050452550495,
                         -0.0031646940293175599),
    ("sphere", 16, 1.0): (2.441976886641335, 0.23781288704125633, 0.0037025770941700914,
                          -0.0014173640398764565),
    ("plane", 16, 1.0): (3.2, 0.24825975737306986, 0.003822944506611598, -0.0011088449939980982),
    ("hyperbolic", 16, 0.6): (1.3163914364258328, 0.2066109577443096, 0.01628233719282942,
                              -0.005778774900365267),
}
ALPHA_ORACLES = {
    ("hyperbolic", 2): 0.18807750480893857,
    ("sphere", 2): 0.13536936818214778,
    ("sphere", 64): 0.15832860720030555,
}
WINDOWS = {"sphere": 1.5, "plane": 1.0, "hyperbolic": 0.6}


def fake_sample(points, spec):
    return PointSample(np.asarray(points, dtype=complex), spec)


class TestBasics:
    def test_linear_statistic(self):
        spec = KernelSpec("sphere", 3)
        s = fake_sample([0, 0.5, 5.0], spec)
        f, g = bump(1.0), angular(1.0, 1)
        assert linear_statistic(s, f) == pytest.approx(1 + 0.75**4)
        assert linear_statistic(s, f.scaled(2) + g) == pytest.approx(2 * linear_statistic(s, f) + linear_statistic(s, g))
        assert linear_statistic(fake_sample([3, 4j], spec), f) == 0.0
        assert linear_statistic(fake_sample([], spec), f) == 0.0

    def test_constant_on_sphere(self):
        spec = KernelSpec("sphere", 7)
        s = fake_sample(complex_gaussian(rng_stream(1), 7), spec)
        assert linear_statistic(s, constant(1)) == 7
        assert centered_statistic(s, constant(1)) == pytest.approx(0, abs=1e-12)

    @pytest.mark.parametrize("space", list(SpaceKind))
    def test_mean_identity(self, space):
        f = bump(WINDOWS[space.value])
        spec = KernelSpec(space, 16)
        assert mean_trace(spec, f) == pytest.approx(expected_statistic(spec, f), rel=1e-6)


class TestNorms:
    def test_bump_h1(self):
        assert h1_norm_sq(bump(1.0)) == pytest.approx(8 * np.pi / 7, rel=1e-10)
        assert asymptotic_variance(bump(1.0)) == pytest.approx(2 / 7, rel=1e-10)

    @pytest.mark.parametrize("space", list(SpaceKind))
    @pytest.mark.parametrize("f", builtin_test_functions(0.7), ids=lambda f: f.label)
    def test_routes_agree(self, space, f):
        a = h1_norm_sq(f, space, "planar")
        b = h1_norm_sq(f, space, "intrinsic")
        assert a == pytest.approx(b, rel=1e-8)

    def test_scaling_and_zero(self):
        f = angular(1.2, 2)
        assert h1_norm_sq(f.scaled(3)) == pytest.approx(9 * h1_norm_sq(f), rel=1e-10)
        assert asymptotic_variance(bump(1).scaled(0.0)) == 0.0
        with pytest.raises(ValueError):
            h1_norm_sq(f, route="other")

    def test_l1(self):
        # int_0^1 2 pi r (1-r^2)^4 dr = pi/5 on the plane
        assert l1_norm_invariant(bump(1.0), "plane") == pytest.approx(np.pi / 5, rel=1e-10)
        assert l1_norm_invariant(angular(1.0, 1), "sphere") > 0


class TestMatrixElements:
    def test_identity_on_sphere(self):
        spec = KernelSpec("sphere", 20)
        G = matrix_elements(spec, lambda z: np.ones(z.shape))
        np.testing.assert_allclose(G, np.eye(20), atol=1e-8)

    @pytest.mark.parametrize("space", list(SpaceKind))
    def test_radial_is_diagonal(self, space):
        spec = KernelSpec(space, 10, None if space is SpaceKind.SPHERE else 15)
        G = matrix_elements(spec, lambda z: bump(0.6)(z), radius=0.6, breakpoints=(0.6,))
        assert np.abs(G - np.diag(np.diag(G))).max() < 1e-8
        assert np.all(np.diag(G).real > 0)

    @pytest.mark.parametrize("space", list(SpaceKind))
    def test_re_z_selection_rule(self, space):
        spec = KernelSpec(space, 10, None if space is SpaceKind.SPHERE else 15)
        G = matrix_elements(spec, lambda z: z.real * bump(0.6)(z), radius=0.6, breakpoints=(0.6,))
        a, b = np.indices(G.shape)
        assert np.abs(G[np.abs(a - b) != 1]).max() < 1e-8
        assert np.abs(G[np.abs(a - b) == 1]).max() > 1e-3
        np.testing.assert_allclose(G, G.conj().T, atol=0)

    def test_needs_rank(self):
        with pytest.raises(ValueError):
            matrix_elements(KernelSpec("plane", 3), lambda z: z.real)


class TestTraceFormulas:
    @pytest.mark.parametrize("key", list(CUMULANT_ORACLES), ids=str)
    def test_frozen_oracles(self, key):
        space, rho, R = key
        spec, f = KernelSpec(space, rho), bump(R)
        got = [cumulant_trace(spec, f, k) for k in range(1, 5)]
        np.testing.assert_allclose(got, CUMULANT_ORACLES[key], rtol=1e-10, atol=1e-14)

    @pytest.mark.parametrize("space", list(SpaceKind))
    def test_cum2_is_variance(self, space):
        spec, f = KernelSpec(space, 16), angular(WINDOWS[space.value], 1)
        assert cumulant_trace(spec, f, 2) == pytest.approx(variance_trace(spec, f), abs=1e-10)

    def test_constant_on_sphere_has_zero_variance(self):
        assert abs(variance_trace(KernelSpec("sphere", 12), constant(1.0))) < 1e-12

    def test_coefficients(self):
        # k=2: (2,) -> 1, (1,1) -> -1
        assert dict(cumulant_coefficients(2)) == {(2,): 1, (1, 1): -1}
        assert sum(c for _, c in cumulant_coefficients(3)) == 0
        with pytest.raises(ValueError):
            cumulant_trace(KernelSpec("sphere", 4), bump(1), 5)

    def test_cum3_decays_on_plane(self):
        f = bump(1.0)
        c16, c256 = (abs(cumulant_trace(KernelSpec("plane", r), f, 3)) for r in (16, 256))
        assert c256 < c16

    def test_plane_variance_approaches_limit(self):
        gaps = [abs(variance_trace(KernelSpec("plane", r), bump(1.0)) / (2 / 7) - 1) for r in (16, 64, 256)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.01

    def test_covariance_symmetric_and_bilinear(self):
        spec = KernelSpec("sphere", 16)
        f, g = bump(1.0), angular(1.0, 1)
        a = covariance_trace(spec, f, g, 1.0)
        b = covariance_trace(spec, g, f, 1.0)
        assert a == pytest.approx(b, abs=1e-12)
        ff = covariance_trace(spec, f, f, 1.0)
        assert ff == pytest.approx(variance_trace(spec, f), rel=1e-10)


class TestQuadratureVariance:
    @pytest.mark.parametrize("space", list(SpaceKind))
    @pytest.mark.parametrize("rho", [16, 64])
    def test_matches_trace(self, space, rho):
        f = bump(WINDOWS[space.value] if space is not SpaceKind.SPHERE else 1.0)
        spec = KernelSpec(space, rho)
        q = variance_quadrature(spec, f)
        t = variance_trace(spec, f)
        assert q.converged
        assert abs(q.value - t) <= max(q.error, 1e-9) + 1e-8 * t

    def test_constant_is_zero(self):
        assert variance_quadrature(KernelSpec("sphere", 8), constant(2.0)).value == 0.0


class TestResiduals:
    def test_llap_sphere_decreasing(self):
        for p in (0, 1, 2):
            vals = [llap_residual(KernelSpec("sphere", r), p, 2.0, 1.0) for r in (16, 64)]
            assert vals[1] < vals[0], (p, vals)

    def test_llap_plane_p0_is_outside_mass(self):
        # for p = 0 the residual at x = z = 0 is the mass of |K(0, y)|^2 outside |y| <= B
        rho, B = 4, 1.25
        val = llap_residual(KernelSpec("plane", rho), 0, B, 1e-9, grid=(2, 1))
        assert val == pytest.approx(rho / np.pi * np.exp(-rho * B * B), rel=1e-6)

    def test_llap_conjugate_and_errors(self):
        spec = KernelSpec("sphere", 16)
        assert llap_residual(spec, 1, 2.0, 1.0, conjugate=True) > 0
        with pytest.raises(ValueError):
            llap_residual(spec, 3, 2.0, 1.0)
        with pytest.raises(ValueError):
            llap_residual(spec, 0, 1.0, 2.0)

    def test_co_zero_function(self):
        assert co_residual(KernelSpec("sphere", 16), bump(1.0).scaled(0.0), 1.5) == 0.0
        with pytest.raises(ValueError):
            co_residual(KernelSpec("sphere", 16), bump(2.0), 1.5)

    def test_co_matches_monte_carlo(self, sphere64):
        spec, samples = sphere64
        F, B = bump(1.0), 1.5
        pred = covariance_trace(spec, F.dzdzbar, lambda z: np.abs(z) ** 2, B, (1.0,))
        a = np.array([np.sum(F.dzdzbar(s.points)) for s in samples])
        b = np.array([np.sum(np.where(np.abs(s.points) <= B, np.abs(s.points) ** 2, 0)) for s in samples])
        prod = (a - a.mean()) * (b - b.mean())
        se = prod.std(ddof=1) / np.sqrt(prod.size)
        assert abs(prod.mean() - pred) < 4 * se
        assert abs(pred) == pytest.approx(co_residual(spec, F, B), rel=1e-12)


class TestAlpha:
    @pytest.mark.parametrize("rho", [1, 2, 16, 512])
    def test_plane_constant(self, rho):
        assert alpha(KernelSpec("plane", rho)) == pytest.approx(1 / (2 * np.pi), abs=1e-10)

    @pytest.mark.parametrize("key", list(ALPHA_ORACLES), ids=str)
    def test_frozen(self, key):
        assert alpha(KernelSpec(*key)) == pytest.approx(ALPHA_ORACLES[key], rel=1e-8)

    def test_sphere_hyperbolic_converge(self):
        for space in ("sphere", "hyperbolic"):
            a256, a512 = alpha(KernelSpec(space, 256)), alpha(KernelSpec(space, 512))
            assert abs(a512 - a256) <= 0.05 * a256


class TestMoments:
    def test_k_statistics_match_scipy(self):
        x = rng_stream(4).standard_normal(50) ** 3
        got = k_statistics(x)
        for n, g in zip(range(1, 5), got):
            assert g == pytest.approx(stats.kstat(x, n), rel=1e-10)

    def test_single_value_flagged(self):
        rep = moment_report([1.3])
        assert rep.flags and np.isnan(rep.mean.se) and rep.count == 1

    def test_constant_values(self):
        rep = moment_report(np.full(40, 2.5))
        assert rep.variance.value == 0.0 and rep.mean.value == 2.5

    def test_bootstrap_se_positive_and_reproducible(self):
        x = rng_stream(5).standard_normal(300)
        a, b = moment_report(x, seed=3), moment_report(x, seed=3)
        assert a.mean.se > 0 and a.mean.se == b.mean.se
        assert a.mean.se == pytest.approx(1 / np.sqrt(300), rel=0.2)
        assert a.within("mean", 0.0)


class TestNormality:
    def test_critical_values(self):
        assert anderson_darling_pvalue(2.492) == pytest.approx(0.05, abs=1e-3)
        assert anderson_darling_pvalue(3.857) == pytest.approx(0.01, abs=5e-4)
        assert anderson_darling_pvalue(0.0) == 1.0

    def test_statistic_matches_scipy_formula(self):
        z = rng_stream(6).standard_normal(200)
        zs = np.sort(z)
        i = np.arange(1, 201)
        cdf = stats.norm.cdf(zs)
        ref = -200 - np.mean((2 * i - 1) * (np.log(cdf) + np.log1p(-cdf[::-1])))
        assert anderson_darling_statistic(z) == pytest.approx(ref, rel=1e-10)

    def test_calibration(self):
        rep = normality_test(rng_stream(7).standard_normal(4000), 1.0)
        assert rep.passes(0.01) and rep.n == 4000

    def test_calibration_rate(self):
        rejections = sum(
            anderson_darling_pvalue(anderson_darling_statistic(rng_stream(100, i).standard_normal(200))) < 0.05
            for i in range(400)
        )
        assert 8 <= rejections <= 36  # 20 expected, roughly 3 binomial SDs either side

    def test_power(self):
        rep = normality_test(rng_stream(8).standard_normal(4000) + 1.0, 1.0)
        assert rep.ks_pvalue < 1e-6 and rep.ad_pvalue < 1e-6

    def test_rejects_bad_variance(self):
        with pytest.raises(ValueError):
            normality_test([0.0, 1.0], 0.0)


class TestMonteCarlo:
    @pytest.mark.parametrize("model", ["sphere", "plane", "hyperbolic"])
    def test_empirical_vs_trace(self, model, request):
        spec, samples = request.getfixturevalue(f"{model}64")
        for f in builtin_test_functions(WINDOWS[model]):
            rep = empirical_report(samples, f, spec, n_boot=400, seed=1)
            assert rep.within("mean", rep.predictions["mean"][0]), (f.label, rep.mean)
            assert rep.within("variance", rep.predictions["variance"][0]), (f.label, rep.variance)
            assert rep.count == len(samples) and rep.mean.se > 0

    def test_isometry_invariance_of_law(self):
        # a dedicated pair of independent ensembles, so this check does not share
        # a random fluctuation with the other tests built on the session fixture
        spec, f, m = KernelSpec("sphere", 64), bump(1.0), 2000
        T = Isometry.random("sphere", rng_stream(31))
        plain = [linear_statistic(s, f) for s in sample_many(spec, 5150, m)]
        moved = [float(np.sum(f(T(s.points)))) for s in sample_many(spec, 5151, m)]
        assert stats.ks_2samp(plain, moved).pvalue > 0.01

    def test_variance_bound(self, sphere64):
        spec, samples = sphere64
        bound = max(alpha(KernelSpec("sphere", r)) for r in (2, 4, 8, 16, 32, 64, 128, 256, 512))
        for f in builtin_test_functions(1.5):
            rep = moment_report([linear_statistic(s, f) for s in samples], n_boot=300)
            h1 = h1_norm_sq(f)
            assert rep.variance.value / h1 <= bound + 4 * rep.variance.se / h1
