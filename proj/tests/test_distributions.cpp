#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tailrisk/distributions.hpp"
#include "tailrisk/math/special.hpp"
#include "tailrisk/rng.hpp"

using namespace tailrisk;

TEST_CASE("normal VaR/ES closed form") {
    auto a = var_es_normal(0.0, 1.0, 0.05);
    CHECK(a.var == doctest::Approx(-1.644853626951).epsilon(1e-9));
    CHECK(a.es == doctest::Approx(-2.062712807507).epsilon(1e-9));
    auto b = var_es_normal(0.1, 2.0, 0.01);
    CHECK(b.var == doctest::Approx(-4.552695748082).epsilon(1e-9));
    CHECK(b.es == doctest::Approx(-5.230428440692).epsilon(1e-9));
    CHECK(a.es < a.var);
}

TEST_CASE("standardized-t VaR/ES closed form") {
    auto a = var_es_student_t(0.0, 1.0, 5.0, 0.05);
    CHECK(a.var == doctest::Approx(-1.560849758344).epsilon(1e-9));
    CHECK(a.es == doctest::Approx(-2.238684255462).epsilon(1e-9));
    auto b = var_es_student_t(0.2, 1.5, 8.0, 0.01);
    CHECK(b.var == doctest::Approx(-3.562611194122).epsilon(1e-9));
    CHECK(b.es == doctest::Approx(-4.464703035869).epsilon(1e-9));
}

// Piecewise quadrature: keeps the adaptive rule honest near the peak and
// picks up enough of the polynomial tails.
template <typename F>
static double chunked_integral(const F& f, double lo, double hi) {
    double cuts[] = {lo, -8.0, -2.0, 0.0, 2.0, 8.0, hi};
    double s = 0;
    for (int i = 0; i + 1 < 7; ++i)
        s += tailrisk::math::integrate(f, cuts[i], cuts[i + 1], 1e-11);
    return s;
}

TEST_CASE("standardized t has unit variance and nests the CDF round trip") {
    for (double nu : {4.0, 7.0, 30.0}) {
        double var = chunked_integral(
            [&](double z) { return z * z * std_t_pdf(z, nu); }, -800.0, 800.0);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
        for (double p : {0.01, 0.1, 0.5, 0.9}) {
            CHECK(std_t_cdf(std_t_inv(p, nu), nu) == doctest::Approx(p).epsilon(1e-8));
        }
    }
}

TEST_CASE("skew-t density normalizes, centers and standardizes") {
    for (auto [nu, lam] : {std::pair{6.0, -0.3}, std::pair{8.0, 0.5}}) {
        double mass = math::integrate(
            [&](double z) { return skt_pdf(z, nu, lam); }, -80.0, 80.0, 1e-10);
        double mean = math::integrate(
            [&](double z) { return z * skt_pdf(z, nu, lam); }, -80.0, 80.0, 1e-10);
        double var = math::integrate(
            [&](double z) { return z * z * skt_pdf(z, nu, lam); }, -80.0, 80.0, 1e-10);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(mean == doctest::Approx(0.0).scale(1).epsilon(1e-6));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("skew-t VaR/ES against independent numeric values") {
    auto a = var_es_skew_t(0.0, 1.0, 6.0, -0.3, 0.05);
    CHECK(a.var == doctest::Approx(-1.755454528993).epsilon(1e-7));
    CHECK(a.es == doctest::Approx(-2.557960153596).epsilon(1e-7));
    auto b = var_es_skew_t(0.0, 1.0, 8.0, 0.5, 0.05);
    CHECK(b.var == doctest::Approx(-1.270073563211).epsilon(1e-7));
    CHECK(b.es == doctest::Approx(-1.535788894777).epsilon(1e-7));
}

TEST_CASE("skew-t with zero skewness reduces to the standardized t") {
    for (double z : {-2.5, -0.7, 0.0, 1.3}) {
        CHECK(skt_pdf(z, 7.0, 0.0) == doctest::Approx(std_t_pdf(z, 7.0)).epsilon(1e-10));
        CHECK(skt_cdf(z, 7.0, 0.0) == doctest::Approx(std_t_cdf(z, 7.0)).epsilon(1e-9));
    }
    auto s = var_es_skew_t(0.1, 2.0, 9.0, 0.0, 0.01);
    auto t = var_es_student_t(0.1, 2.0, 9.0, 0.01);
    CHECK(s.var == doctest::Approx(t.var).epsilon(1e-7));
    CHECK(s.es == doctest::Approx(t.es).epsilon(1e-7));
}

TEST_CASE("skew-t ES formula holds above the density knot too") {
    // Strong negative skew pushes the 5% quantile above -a/b.
    double nu = 5.0, lam = -0.9, alpha = 0.35;
    auto e = var_es_skew_t(0.0, 1.0, nu, lam, alpha);
    double tail = math::integrate([&](double z) { return z * skt_pdf(z, nu, lam); },
                                  -200.0, -8.0, 1e-11) +
                  math::integrate([&](double z) { return z * skt_pdf(z, nu, lam); },
                                  -8.0, e.var, 1e-11);
    CHECK(e.es == doctest::Approx(tail / skt_cdf(e.var, nu, lam)).epsilon(1e-5));
}

TEST_CASE("var_es dispatch and domain errors") {
    DistributionSpec spec;
    spec.kind = DistKind::StudentT;
    spec.nu = 5.0;
    auto a = var_es(spec, 0.0, 1.0, 0.05);
    CHECK(a.var == doctest::Approx(-1.560849758344).epsilon(1e-9));
    CHECK_THROWS_AS(var_es_normal(0.0, -1.0, 0.05), DomainError);
    CHECK_THROWS_AS(var_es_normal(0.0, 1.0, 0.7), DomainError);
    CHECK_THROWS_AS(var_es_student_t(0.0, 1.0, 1.5, 0.05), DomainError);
    spec.kind = DistKind::Laplace;
    CHECK_THROWS_AS(var_es(spec, 0.0, 1.0, 0.05), DomainError);
}

TEST_CASE("MLE recovers Student-t shape from simulated data") {
    Rng rng(314);
    std::vector<double> x;
    double nu = 6.0, scale = std::sqrt((nu - 2.0) / nu);
    for (int i = 0; i < 6000; ++i) x.push_back(1.5 * rng.student_t(nu) * scale + 0.3);
    auto fit = fit_distribution_full(x, DistKind::StudentT);
    CHECK(fit.mu == doctest::Approx(0.3).scale(1).epsilon(0.1));
    CHECK(fit.sigma == doctest::Approx(1.5).epsilon(0.1));
    CHECK(fit.spec.nu == doctest::Approx(6.0).epsilon(0.5));
}

TEST_CASE("MLE recovers skew-t shape from simulated data") {
    // Inverse-CDF sampling through skt_inv.
    Rng rng(2718);
    std::vector<double> x;
    for (int i = 0; i < 6000; ++i) x.push_back(skt_inv(rng.u01(), 7.0, -0.4));
    auto fit = fit_distribution_full(x, DistKind::SkewT);
    CHECK(fit.spec.lambda == doctest::Approx(-0.4).epsilon(0.25));
    CHECK(fit.mu == doctest::Approx(0.0).scale(1).epsilon(0.08));
    CHECK(fit.sigma == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("nominal ES levels reproduce the published table cells") {
    CHECK(nominal_es_level(DistKind::Normal, 0.01) == 0.0038);
    CHECK(nominal_es_level(DistKind::Normal, 0.05) == 0.0196);
    CHECK(nominal_es_level(DistKind::AsymmetricLaplace, 0.01) == 0.0037);
    CHECK(nominal_es_level(DistKind::AsymmetricLaplace, 0.05) == 0.0184);
    CHECK(nominal_es_level(DistKind::StudentT, 0.01, 10.0) == 0.0036);
    CHECK(nominal_es_level(DistKind::StudentT, 0.05, 10.0) == 0.0184);
    CHECK(nominal_es_level(DistKind::StudentT, 0.01, 6.0) == 0.0034);
    CHECK(nominal_es_level(DistKind::StudentT, 0.05, 6.0) == 0.0175);
    CHECK(nominal_es_level(DistKind::StudentT, 0.01, 4.0) == 0.0032);
    CHECK(nominal_es_level(DistKind::StudentT, 0.05, 4.0) == 0.0164);
    CHECK(nominal_es_level(DistKind::SkewT, 0.05, 4.0) == 0.0164);
    CHECK(nominal_es_level(DistKind::SkewT, 0.05, 6.0) == 0.0175);
    CHECK(nominal_es_level_semiparametric(0.01) == 0.0036);
    CHECK(nominal_es_level_semiparametric(0.05) == 0.018);
    CHECK_THROWS_AS(nominal_es_level(DistKind::Normal, 0.025), DomainError);
    CHECK_THROWS_AS(nominal_es_level(DistKind::StudentT, 0.05), DomainError);
}
