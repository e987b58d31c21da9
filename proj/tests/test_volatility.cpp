#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tailrisk/rng.hpp"
#include "tailrisk/volatility.hpp"

using namespace tailrisk;

namespace {

std::vector<double> simulate_garch(double omega, double alpha, double beta, std::size_t n,
                                   std::uint64_t seed, double mu = 0.0) {
    Rng rng(seed);
    double sigma2 = omega / (1.0 - alpha - beta);
    std::vector<double> r;
    r.reserve(n);
    double eps = 0;
    for (std::size_t i = 0; i < n + 200; ++i) {
        if (i > 0) sigma2 = omega + alpha * eps * eps + beta * sigma2;
        eps = std::sqrt(sigma2) * rng.normal();
        if (i >= 200) r.push_back(mu + eps);
    }
    return r;
}

}  // namespace

TEST_CASE("ewma step arithmetic and domain checks") {
    CHECK(ewma_step(2.0, 1.0, 0.94) == doctest::Approx(0.94 + 0.06 * 4.0).epsilon(1e-12));
    CHECK(ewma_step(0.0, 1.0, 0.94) == doctest::Approx(0.94).epsilon(1e-12));
    CHECK_THROWS_AS(ewma_step(1.0, -1.0, 0.94), DomainError);
    CHECK_THROWS_AS(ewma_step(1.0, 1.0, 1.5), DomainError);
}

TEST_CASE("variance step matches each recursion by hand") {
    VolModelSpec spec;
    VolState st{2.0, -1.5, -1.4};

    spec.family = VolFamily::GARCH11;
    spec.params = {0.1, 0.1, 0.8, 0.0};
    CHECK(variance_step(spec, st) ==
          doctest::Approx(0.1 + 0.1 * 2.25 + 0.8 * 2.0).epsilon(1e-12));

    spec.family = VolFamily::GJRGARCH11;
    spec.params = {0.1, 0.05, 0.8, 0.1};
    CHECK(variance_step(spec, st) ==
          doctest::Approx(0.1 + (0.05 + 0.1) * 2.25 + 0.8 * 2.0).epsilon(1e-12));
    VolState pos{2.0, 1.5, 1.6};  // no leverage on positive shocks
    CHECK(variance_step(spec, pos) ==
          doctest::Approx(0.1 + 0.05 * 2.25 + 0.8 * 2.0).epsilon(1e-12));

    spec.family = VolFamily::EGARCH11;
    spec.params = {0.02, 0.15, 0.9, -0.07};
    double z = -1.5 / std::sqrt(2.0);
    double expect = std::exp(0.02 + 0.15 * std::fabs(z) - 0.07 * z + 0.9 * std::log(2.0));
    CHECK(variance_step(spec, st) == doctest::Approx(expect).epsilon(1e-12));

    spec.family = VolFamily::EWMA;
    spec.params.theta = 0.94;
    CHECK(variance_step(spec, st) ==
          doctest::Approx(0.06 * 1.4 * 1.4 + 0.94 * 2.0).epsilon(1e-12));
}

TEST_CASE("EWMA fit filters the window with theta fixed at 0.94") {
    std::vector<double> w;
    Rng rng(5);
    for (int i = 0; i < 300; ++i) w.push_back(rng.normal());
    auto spec = fit_garch_family(w, VolFamily::EWMA, DistKind::Normal);
    CHECK(spec.params.theta == 0.94);
    CHECK(spec.mean == 0.0);
    // replicate the filter by hand: forecast applies the final step to r_T
    double mean = 0, var = 0;
    for (double x : w) mean += x;
    mean /= 300.0;
    for (double x : w) var += (x - mean) * (x - mean);
    var /= 300.0;
    double s2 = var;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) s2 = 0.06 * w[i] * w[i] + 0.94 * s2;
    CHECK(spec.state.sigma2 == doctest::Approx(s2).epsilon(1e-12));
    double next = 0.06 * w.back() * w.back() + 0.94 * s2;
    auto f = forecast_var_es(spec, 0.05);
    CHECK(f.var == doctest::Approx(-1.644853626951 * std::sqrt(next)).epsilon(1e-9));
}

TEST_CASE("GARCH(1,1) MLE recovers simulated parameters") {
    auto r = simulate_garch(0.05, 0.10, 0.85, 5000, 99);
    auto spec = fit_garch_family(r, VolFamily::GARCH11, DistKind::Normal);
    CHECK(spec.params.omega == doctest::Approx(0.05).scale(1).epsilon(0.1));
    CHECK(spec.params.alpha == doctest::Approx(0.10).scale(1).epsilon(0.1));
    CHECK(spec.params.beta == doctest::Approx(0.85).scale(1).epsilon(0.1));
    CHECK(std::fabs(spec.mean) < 0.05);
    CHECK_FALSE(spec.boundary_projected);
}

TEST_CASE("fit is deterministic and warm starts reproduce the optimum") {
    auto r = simulate_garch(0.1, 0.08, 0.88, 1200, 3);
    auto a = fit_garch_family(r, VolFamily::GARCH11, DistKind::Normal);
    auto b = fit_garch_family(r, VolFamily::GARCH11, DistKind::Normal);
    CHECK(a.log_likelihood == b.log_likelihood);
    CHECK(a.params.alpha == b.params.alpha);

    FitOptions warm;
    warm.warm_start = raw_params(a);
    warm.multi_starts = 1;
    auto c = fit_garch_family(r, VolFamily::GARCH11, DistKind::Normal, warm);
    CHECK(c.log_likelihood >= a.log_likelihood - 1e-6);
}

TEST_CASE("GJR fit detects an injected leverage effect") {
    // simulate GJR by hand
    Rng rng(17);
    double omega = 0.05, alpha = 0.03, gamma = 0.12, beta = 0.85;
    double sigma2 = omega / (1.0 - alpha - gamma / 2.0 - beta);
    std::vector<double> r;
    double eps = 0;
    for (std::size_t i = 0; i < 6200; ++i) {
        if (i > 0)
            sigma2 = omega + (alpha + (eps < 0 ? gamma : 0.0)) * eps * eps + beta * sigma2;
        eps = std::sqrt(sigma2) * rng.normal();
        if (i >= 200) r.push_back(eps);
    }
    auto spec = fit_garch_family(r, VolFamily::GJRGARCH11, DistKind::Normal);
    CHECK(spec.params.gamma > 0.03);  // leverage picked up
    CHECK(spec.params.beta == doctest::Approx(beta).scale(1).epsilon(0.12));
}

TEST_CASE("Student-t GARCH recovers a heavy tail") {
    Rng rng(23);
    double nu = 5.0, scale = std::sqrt((nu - 2.0) / nu);
    double omega = 0.05, alpha = 0.1, beta = 0.85;
    double sigma2 = omega / (1.0 - alpha - beta);
    std::vector<double> r;
    double eps = 0;
    for (std::size_t i = 0; i < 5200; ++i) {
        if (i > 0) sigma2 = omega + alpha * eps * eps + beta * sigma2;
        eps = std::sqrt(sigma2) * rng.student_t(nu) * scale;
        if (i >= 200) r.push_back(eps);
    }
    auto spec = fit_garch_family(r, VolFamily::GARCH11, DistKind::StudentT);
    CHECK(spec.dist.nu > 3.0);
    CHECK(spec.dist.nu < 9.0);
    CHECK(spec.params.beta == doctest::Approx(beta).scale(1).epsilon(0.1));
}

TEST_CASE("forecast delegates to the closed-form tail estimators") {
    auto r = simulate_garch(0.05, 0.1, 0.85, 1500, 8, 0.02);
    auto spec = fit_garch_family(r, VolFamily::GARCH11, DistKind::Normal);
    double s2 = variance_step(spec, spec.state);
    auto direct = var_es(spec.dist, spec.mean, std::sqrt(s2), 0.01);
    auto f = forecast_var_es(spec, 0.01);
    CHECK(f.var == doctest::Approx(direct.var).epsilon(1e-12));
    CHECK(f.es == doctest::Approx(direct.es).epsilon(1e-12));
    CHECK(f.es < f.var);
}

TEST_CASE("input validation") {
    std::vector<double> tiny(100, 0.1);
    CHECK_THROWS_AS(fit_garch_family(tiny, VolFamily::GARCH11, DistKind::Normal),
                    InsufficientDataError);
    std::vector<double> flat(300, 0.1);
    CHECK_THROWS_AS(fit_garch_family(flat, VolFamily::GARCH11, DistKind::Normal),
                    DegenerateSeriesError);
    CHECK_THROWS_AS(fit_garch_family(std::vector<double>(1, 0.1), VolFamily::EWMA,
                                     DistKind::Normal),
                    InsufficientDataError);
}
