#pragma once

// Forecast combination: simple average, median, the joint AL-score convex
// combination, and quantile-LASSO regression combination.

#include <cstdint>
#include <optional>
#include <vector>

#include "tailrisk/forecast.hpp"

namespace tailrisk {

struct CombinationWeights {
    std::vector<double> beta;   // VaR weights, simplex
    std::vector<double> gamma;  // ES weights, simplex
    int window_id = 0;
    double al_score = 0;         // attained mean AL log score on the window
    bool fallback_equal = false; // set when infeasibility forced equal weights
};

struct LassoComboSpec {
    double intercept = 0;
    std::vector<double> coefficients;
    double lambda = 0;
    double tau = 0;
};

double combine_simple_average(const std::vector<double>& forecasts);
double combine_median(const std::vector<double>& forecasts);

struct ComboFitOptions {
    int random_starts = 5;
    int max_evals = 4000;
    std::optional<std::vector<double>> warm_start;  // raw softmax coordinates
    std::uint64_t seed = 7;
};

// (beta, gamma) minimizing the mean AL log score of the combined pair over
// the window, on their simplexes, with the combined-ES-below-combined-VaR
// constraint enforced pointwise via an exterior penalty. Starts include
// equal weights and the best one-hot pair, which makes the optimum dominate
// both by construction.
CombinationWeights fit_joint_combination(const std::vector<std::vector<double>>& panel_var,
                                         const std::vector<std::vector<double>>& panel_es,
                                         const std::vector<double>& realized, double alpha,
                                         const ComboFitOptions& opts = {});

// Raw coordinates of fitted weights, usable as ComboFitOptions::warm_start.
std::vector<double> raw_params(const CombinationWeights& w);

RiskForecast combined_forecast(const CombinationWeights& weights,
                               const std::vector<double>& var_row,
                               const std::vector<double>& es_row, double alpha);

// Quantile regression at level tau with an L1 penalty on the slopes
// (intercept unpenalized), solved by iterative reweighting.
LassoComboSpec fit_quantile_lasso(const std::vector<std::vector<double>>& predictors,
                                  const std::vector<double>& response, double tau,
                                  double lambda);

// Grid-search lambda over {0, 0.01, 0.1, 1, 10} by quantile loss on the last
// 25% of the window, then refit on the full window.
LassoComboSpec fit_quantile_lasso_cv(const std::vector<std::vector<double>>& predictors,
                                     const std::vector<double>& response, double tau);

double lasso_predict(const LassoComboSpec& spec, const std::vector<double>& x);

}  // namespace tailrisk
