#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tailrisk/combination.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/series.hpp"

using namespace tailrisk;

namespace {

double al_mean(const std::vector<std::vector<double>>& pv,
               const std::vector<std::vector<double>>& pe,
               const std::vector<double>& r, const std::vector<double>& b,
               const std::vector<double>& g, double alpha) {
    double s = 0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        double v = 0, e = 0;
        for (std::size_t i = 0; i < b.size(); ++i) v += b[i] * pv[t][i];
        for (std::size_t i = 0; i < g.size(); ++i) e += g[i] * pe[t][i];
        double hit = r[t] <= v ? 1.0 : 0.0;
        s += -std::log((alpha - 1.0) / e) - (r[t] - v) * (alpha - hit) / (alpha * e);
    }
    return s / static_cast<double>(r.size());
}

}  // namespace

TEST_CASE("simple average and median") {
    CHECK(combine_simple_average({1.0, 2.0, 6.0}) == doctest::Approx(3.0));
    CHECK(combine_median({5.0, 1.0, 2.0}) == doctest::Approx(2.0));
    CHECK(combine_median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));  // midpoint rule
    CHECK_THROWS_AS(combine_simple_average({}), InputError);
    CHECK_THROWS_AS(combine_median({}), InputError);
}

TEST_CASE("joint combination leans on the well-calibrated model") {
    const double alpha = 0.05;
    Rng rng(101);
    const std::size_t T = 400;
    std::vector<double> r(T);
    std::vector<std::vector<double>> pv(T), pe(T);
    for (std::size_t t = 0; t < T; ++t) {
        r[t] = rng.normal();
        // model 0: the exact normal tail; model 1: badly too shallow
        pv[t] = {-1.644853626951, -0.40};
        pe[t] = {-2.062712807507, -0.50};
    }
    auto w = fit_joint_combination(pv, pe, r, alpha);

    double sb = 0, sg = 0;
    for (double b : w.beta) {
        CHECK(b >= 0.0);
        sb += b;
    }
    for (double g : w.gamma) {
        CHECK(g >= 0.0);
        sg += g;
    }
    CHECK(sb == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sg == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w.beta[0] > 0.9);
    CHECK_FALSE(w.fallback_equal);

    // dominance over equal weights and every one-hot pair
    CHECK(w.al_score <= al_mean(pv, pe, r, {0.5, 0.5}, {0.5, 0.5}, alpha) + 1e-9);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            std::vector<double> b{i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0};
            std::vector<double> g{j == 0 ? 1.0 : 0.0, j == 1 ? 1.0 : 0.0};
            CHECK(w.al_score <= al_mean(pv, pe, r, b, g, alpha) + 1e-9);
        }
    CHECK(w.al_score ==
          doctest::Approx(al_mean(pv, pe, r, w.beta, w.gamma, alpha)).epsilon(1e-9));
}

TEST_CASE("joint combination keeps the combined ES below the combined VaR") {
    const double alpha = 0.05;
    Rng rng(55);
    const std::size_t T = 300;
    std::vector<double> r(T);
    std::vector<std::vector<double>> pv(T), pe(T);
    for (std::size_t t = 0; t < T; ++t) {
        double s = 1.0 + 0.5 * std::sin(0.05 * static_cast<double>(t));
        r[t] = s * rng.normal();
        pv[t] = {-1.644853626951 * s, -1.2 * s};
        pe[t] = {-2.062712807507 * s, -1.3 * s};
    }
    auto w = fit_joint_combination(pv, pe, r, alpha);
    for (std::size_t t = 0; t < T; ++t) {
        auto f = combined_forecast(w, pv[t], pe[t], alpha);
        CHECK(f.es < f.var);
    }
}

TEST_CASE("warm started refit does not lose ground") {
    const double alpha = 0.05;
    Rng rng(8);
    const std::size_t T = 250;
    std::vector<double> r(T);
    std::vector<std::vector<double>> pv(T), pe(T);
    for (std::size_t t = 0; t < T; ++t) {
        r[t] = rng.normal();
        pv[t] = {-1.64, -1.30, -2.0};
        pe[t] = {-2.06, -1.45, -2.5};
    }
    auto a = fit_joint_combination(pv, pe, r, alpha);
    ComboFitOptions opts;
    opts.warm_start = raw_params(a);
    opts.random_starts = 0;
    auto b = fit_joint_combination(pv, pe, r, alpha, opts);
    CHECK(b.al_score <= a.al_score + 1e-9);
}

TEST_CASE("combined forecast mechanics") {
    CombinationWeights w;
    w.beta = {1.0, 0.0};
    w.gamma = {0.0, 1.0};
    auto f = combined_forecast(w, {-1.5, -1.0}, {-2.5, -2.0}, 0.05);
    CHECK(f.var == doctest::Approx(-1.5));
    CHECK(f.es == doctest::Approx(-2.0));
    CHECK_FALSE(f.crossing_clamped);

    w.gamma = {1.0, 0.0};
    auto g = combined_forecast(w, {-3.0, -1.0}, {-2.5, -2.0}, 0.05);
    CHECK(g.crossing_clamped);  // weighted ES landed above the weighted VaR
    CHECK(g.es == doctest::Approx(g.var - 1e-8));

    CHECK_THROWS_AS(combined_forecast(w, {-1.5}, {-2.5, -2.0}, 0.05), InputError);
}

TEST_CASE("joint combination input validation") {
    std::vector<std::vector<double>> pv{{-1.0}}, pe{{-2.0}};
    std::vector<double> r{0.1, 0.2};
    CHECK_THROWS_AS(fit_joint_combination(pv, pe, r, 0.05), InputError);
    std::vector<double> r1{0.1};
    std::vector<std::vector<double>> bad_es{{2.0}};
    CHECK_THROWS_AS(fit_joint_combination(pv, bad_es, r1, 0.05), InputError);
    std::vector<std::vector<double>> empty{{}};
    CHECK_THROWS_AS(fit_joint_combination(empty, pe, r1, 0.05), InputError);
}

TEST_CASE("unpenalized quantile regression recovers an exact linear relation") {
    Rng rng(3);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int t = 0; t < 60; ++t) {
        double v = rng.uniform(-2.0, 2.0);
        x.push_back({v});
        y.push_back(2.0 * v - 1.0);
    }
    auto s = fit_quantile_lasso(x, y, 0.3, 0.0);
    CHECK(s.intercept == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(s.coefficients[0] == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(lasso_predict(s, {0.5}) == doctest::Approx(0.0).scale(1).epsilon(1e-3));
}

TEST_CASE("a huge penalty shrinks every slope to zero") {
    Rng rng(9);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int t = 0; t < 200; ++t) {
        double v = rng.normal();
        x.push_back({v, rng.normal()});
        y.push_back(1.5 * v + rng.normal());
    }
    auto s = fit_quantile_lasso(x, y, 0.25, 1e6);
    CHECK(s.coefficients[0] == 0.0);
    CHECK(s.coefficients[1] == 0.0);
    CHECK(s.intercept ==
          doctest::Approx(sample_quantile(y, 0.25)).scale(1).epsilon(0.05));
}

TEST_CASE("cross-validated lambda keeps the informative predictor") {
    Rng rng(21);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int t = 0; t < 300; ++t) {
        double v = rng.normal();
        x.push_back({v, rng.normal()});
        y.push_back(2.0 * v + 0.1 * rng.normal());
    }
    auto s = fit_quantile_lasso_cv(x, y, 0.5);
    CHECK(s.coefficients[0] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::fabs(s.coefficients[1]) < 0.1);
}

TEST_CASE("quantile regression input validation") {
    std::vector<std::vector<double>> x(30, std::vector<double>(1, 0.5));
    std::vector<double> y(30, 1.0);
    CHECK_THROWS_AS(fit_quantile_lasso(x, y, 1.5, 0.0), DomainError);
    CHECK_THROWS_AS(fit_quantile_lasso(x, y, 0.5, -1.0), DomainError);
    std::vector<std::vector<double>> wide(30, std::vector<double>(16, 0.1));
    CHECK_THROWS_AS(fit_quantile_lasso(wide, y, 0.5, 0.0), InputError);
    std::vector<std::vector<double>> few(5, std::vector<double>(1, 0.1));
    std::vector<double> y5(5, 1.0);
    CHECK_THROWS_AS(fit_quantile_lasso(few, y5, 0.5, 0.0), InsufficientDataError);
    CHECK_THROWS_AS(fit_quantile_lasso(x, y5, 0.5, 0.0), InputError);
}
