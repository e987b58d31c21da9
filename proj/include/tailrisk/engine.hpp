#pragma once

// Rolling-window orchestration over the model zoo, combination driver, and
// the EGARCH-Laplace simulation study.

#include <cstdint>
#include <string>
#include <vector>

#include "tailrisk/backtest.hpp"
#include "tailrisk/series.hpp"

namespace tailrisk {

struct RollingPlan {
    std::size_t initial_window = 2000;
    std::size_t hs_window = 168;
    std::size_t combo_window = 1251;
    std::size_t eval_tail = 1200;
    std::vector<double> alphas{0.01, 0.05};
    std::vector<std::string> model_list;  // empty = default_model_list()
    std::uint64_t seed = 7;
    // Refit cadence in forecast origins; between refits the fitted recursion
    // is advanced with the newly observed returns.
    std::size_t refit_interval = 1;
    std::size_t combo_refit_interval = 1;
    bool care_fixed_tau = false;  // CARE at tau = alpha instead of calibrated tau
};

struct ForecastPanel {
    std::vector<std::string> model_ids;
    std::vector<std::int64_t> timestamps;
    std::vector<std::vector<double>> var_matrix;  // [time][model]
    std::vector<std::vector<double>> es_matrix;   // [time][model]
    std::vector<double> realized;
    double alpha = 0;
    std::vector<std::string> dropped_models;  // failed on their first window
    std::size_t combo_fallbacks = 0;          // joint fits that fell back to equal weights
};

// Model identifiers understood by run_rolling.
std::vector<std::string> default_model_list();

// One-step-ahead rolling forecasts for every model at one alpha.
ForecastPanel run_rolling(const ReturnSeries& series, const RollingPlan& plan, double alpha);

// All alphas in the plan.
std::vector<ForecastPanel> run_rolling(const ReturnSeries& series, const RollingPlan& plan);

// Appends COMB-AVG / COMB-MED / COMB-JOINT columns, re-estimated on each
// trailing combo_window; output rows = panel rows - combo_window.
ForecastPanel run_combination(const ForecastPanel& panel, const RollingPlan& plan);

// EGARCH(1,1) path with standard Laplace innovations; 500-sample burn-in.
ReturnSeries simulate_dgp(std::size_t n, std::uint64_t seed);

struct SimulationStudyResult {
    std::vector<BacktestReport> reports;  // 9 models + QLASSO + 4 QLASSO-ES rows
    ForecastPanel panel;                  // individual-model forecasts
};

SimulationStudyResult run_simulation_study(std::uint64_t seed);

}  // namespace tailrisk
