#pragma once

// Parametric conditional-variance models: EWMA filtering, GARCH-family MLE
// and one-step-ahead VaR/ES forecasts through the distribution estimators.

#include <optional>
#include <vector>

#include "tailrisk/distributions.hpp"
#include "tailrisk/forecast.hpp"
#include "tailrisk/series.hpp"

namespace tailrisk {

enum class VolFamily { EWMA, GARCH11, EGARCH11, GJRGARCH11 };

struct GarchParams {
    double omega = 0, alpha = 0, beta = 0, gamma = 0;  // gamma: GJR leverage / EGARCH asymmetry
    double theta = 0.94;                               // EWMA decay
};

// End-of-window state needed to roll the recursion one step.
struct VolState {
    double sigma2 = 0;  // sigma^2_T
    double eps = 0;     // epsilon_T = r_T - mu
    double r = 0;       // r_T
};

struct VolModelSpec {
    VolFamily family = VolFamily::GARCH11;
    DistributionSpec dist;
    GarchParams params;
    double mean = 0;  // constant conditional mean
    VolState state;   // final in-sample state after fitting
    double log_likelihood = 0;
    bool boundary_projected = false;  // optimum hit a constraint boundary
};

// sigma^2_{t+1} = (1 - theta) r_t^2 + theta sigma^2_t
double ewma_step(double r_t, double sigma2_t, double theta);

// One family step of the variance recursion.
double variance_step(const VolModelSpec& spec, const VolState& state);

struct FitOptions {
    int multi_starts = 3;
    std::optional<std::vector<double>> warm_start;  // raw parameter vector
    std::uint64_t seed = 7;
};

// MLE fit with constant conditional mean under dist_kind. Returns the fitted
// spec plus the end-of-window state. Window must hold >= 250 observations
// (EWMA does no fitting and only filters).
VolModelSpec fit_garch_family(const std::vector<double>& window, VolFamily family,
                              DistKind dist_kind, const FitOptions& opts = {});

// Raw optimizer coordinates of a fitted spec, usable as warm_start.
std::vector<double> raw_params(const VolModelSpec& spec);

RiskForecast forecast_var_es(const VolModelSpec& spec, const VolState& state, double alpha);
inline RiskForecast forecast_var_es(const VolModelSpec& spec, double alpha) {
    return forecast_var_es(spec, spec.state, alpha);
}

}  // namespace tailrisk
