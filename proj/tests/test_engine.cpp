#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tailrisk/engine.hpp"
#include "tailrisk/errors.hpp"

using namespace tailrisk;

TEST_CASE("simulated path is deterministic in the seed") {
    auto a = simulate_dgp(500, 7);
    auto b = simulate_dgp(500, 7);
    auto c = simulate_dgp(500, 8);
    REQUIRE(a.size() == 500);
    CHECK(a.returns() == b.returns());
    CHECK(a.returns() != c.returns());
    CHECK(a.timestamps().front() == 1);
    CHECK(a.timestamps().back() == 500);
    CHECK_THROWS_AS(simulate_dgp(50, 7), InputError);
}

TEST_CASE("simulated returns are heavy tailed around a small positive drift") {
    auto s = simulate_dgp(20000, 123);
    auto d = describe(s);
    CHECK(d.mean == doctest::Approx(0.025).scale(1).epsilon(0.05));
    CHECK(d.kurtosis > 4.0);  // Laplace shocks through stochastic volatility
    CHECK(d.std > 0.5);
    CHECK(d.std < 3.0);
}

TEST_CASE("rolling panel alignment and coherence") {
    auto s = simulate_dgp(600, 42);
    RollingPlan plan;
    plan.initial_window = 500;
    plan.hs_window = 100;
    plan.refit_interval = 10;
    plan.model_list = {"EWMA", "HS", "GARCH-N"};
    auto panel = run_rolling(s, plan, 0.05);

    REQUIRE(panel.model_ids.size() == 3);
    REQUIRE(panel.realized.size() == 100);
    REQUIRE(panel.var_matrix.size() == 100);
    REQUIRE(panel.timestamps.size() == 100);
    CHECK(panel.alpha == 0.05);
    CHECK(panel.dropped_models.empty());
    for (std::size_t t = 0; t < 100; ++t) {
        CHECK(panel.timestamps[t] == s.timestamps()[500 + t]);
        CHECK(panel.realized[t] == s.returns()[500 + t]);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(panel.var_matrix[t][j] < 0.0);
            CHECK(panel.es_matrix[t][j] < panel.var_matrix[t][j]);
        }
    }
}

TEST_CASE("forecasts never peek past the forecast origin") {
    auto s = simulate_dgp(620, 11);
    auto rets = s.returns();
    auto poked = rets;
    for (std::size_t i = 570; i < poked.size(); ++i) poked[i] = (i % 2 ? 25.0 : -25.0);
    ReturnSeries tampered(std::vector<std::int64_t>(s.timestamps()), std::move(poked));

    RollingPlan plan;
    plan.initial_window = 500;
    plan.hs_window = 100;
    plan.refit_interval = 5;
    plan.model_list = {"EWMA", "HS", "CAVIAR-SAV"};
    auto a = run_rolling(s, plan, 0.05);
    auto b = run_rolling(tampered, plan, 0.05);
    // origins 500..569 only see data through index 569; identical histories
    // must give identical forecasts
    for (std::size_t t = 0; t < 70; ++t)
        for (std::size_t j = 0; j < a.model_ids.size(); ++j) {
            CHECK(a.var_matrix[t][j] == b.var_matrix[t][j]);
            CHECK(a.es_matrix[t][j] == b.es_matrix[t][j]);
        }
}

TEST_CASE("a model that cannot fit its first window is dropped") {
    std::vector<double> r(520, 0.1);
    std::vector<std::int64_t> ts(520);
    for (std::size_t i = 0; i < 520; ++i) ts[i] = static_cast<std::int64_t>(i);
    ReturnSeries flat(std::move(ts), std::move(r));
    RollingPlan plan;
    plan.initial_window = 500;
    plan.hs_window = 100;
    plan.model_list = {"GARCH-N", "HS"};
    auto panel = run_rolling(flat, plan, 0.05);
    CHECK(panel.dropped_models == std::vector<std::string>{"GARCH-N"});
    CHECK(panel.model_ids == std::vector<std::string>{"HS"});
    CHECK(panel.var_matrix[0].size() == 1);
}

TEST_CASE("rolling input validation") {
    auto s = simulate_dgp(300, 5);
    RollingPlan plan;
    plan.initial_window = 500;
    CHECK_THROWS_AS(run_rolling(s, plan, 0.05), InsufficientDataError);
    plan.initial_window = 250;
    plan.model_list = {"NOPE"};
    CHECK_THROWS_AS(run_rolling(s, plan, 0.05), InputError);
    plan.model_list = {"CAVIARES-SAV"};
    CHECK_THROWS_AS(run_rolling(s, plan, 0.05), InputError);
    plan.model_list = {"GARCH-X"};
    CHECK_THROWS_AS(run_rolling(s, plan, 0.05), InputError);
}

TEST_CASE("default model zoo parses end to end") {
    auto ids = default_model_list();
    CHECK(ids.size() == 19);
    auto s = simulate_dgp(300, 5);
    RollingPlan plan;
    plan.initial_window = 500;
    plan.model_list = ids;
    // ids are validated before the data-length check fires elsewhere; here we
    // only confirm none of the default ids is rejected by the parser
    CHECK_THROWS_AS(run_rolling(s, plan, 0.05), InsufficientDataError);
}

TEST_CASE("per-alpha overload emits one panel per level") {
    auto s = simulate_dgp(560, 9);
    RollingPlan plan;
    plan.initial_window = 500;
    plan.hs_window = 120;
    plan.model_list = {"EWMA", "HS"};
    plan.alphas = {0.01, 0.05};
    auto panels = run_rolling(s, plan);
    REQUIRE(panels.size() == 2);
    CHECK(panels[0].alpha == 0.01);
    CHECK(panels[1].alpha == 0.05);
    // the 1% VaR sits deeper in the tail than the 5% VaR
    for (std::size_t t = 0; t < panels[0].realized.size(); ++t)
        CHECK(panels[0].var_matrix[t][0] < panels[1].var_matrix[t][0]);
}

TEST_CASE("combination columns extend the panel coherently") {
    auto s = simulate_dgp(800, 17);
    RollingPlan plan;
    plan.initial_window = 500;
    plan.hs_window = 100;
    plan.refit_interval = 25;
    plan.combo_window = 200;
    plan.combo_refit_interval = 20;
    plan.model_list = {"EWMA", "GARCH-N"};
    auto panel = run_rolling(s, plan, 0.05);
    auto combined = run_combination(panel, plan);

    REQUIRE(combined.model_ids.size() == 5);
    CHECK(combined.model_ids[2] == "COMB-AVG");
    CHECK(combined.model_ids[3] == "COMB-MED");
    CHECK(combined.model_ids[4] == "COMB-JOINT");
    REQUIRE(combined.realized.size() == 100);  // 300 panel rows - 200 window
    for (std::size_t t = 0; t < combined.realized.size(); ++t) {
        CHECK(combined.timestamps[t] == panel.timestamps[200 + t]);
        CHECK(combined.realized[t] == panel.realized[200 + t]);
        // passthrough of the individual columns
        CHECK(combined.var_matrix[t][0] == panel.var_matrix[200 + t][0]);
        CHECK(combined.es_matrix[t][1] == panel.es_matrix[200 + t][1]);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(combined.var_matrix[t][j] < 0.0);
            CHECK(combined.es_matrix[t][j] < combined.var_matrix[t][j]);
        }
        // the average column is the arithmetic mean of the model VaRs
        double avg = 0.5 * (panel.var_matrix[200 + t][0] + panel.var_matrix[200 + t][1]);
        CHECK(combined.var_matrix[t][2] == doctest::Approx(avg).epsilon(1e-12));
    }
    CHECK(combined.combo_fallbacks == 0);

    RollingPlan too_long = plan;
    too_long.combo_window = 400;
    CHECK_THROWS_AS(run_combination(panel, too_long), InsufficientDataError);
}
