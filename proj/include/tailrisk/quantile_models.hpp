#pragma once

// Direct tail models: historical simulation, CAViaR quantile recursions,
// CAViaR-ES joint models, and CARE expectile models.

#include <cstdint>
#include <optional>
#include <vector>

#include "tailrisk/forecast.hpp"
#include "tailrisk/series.hpp"

namespace tailrisk {

enum class CaviarForm { SAV, AS, IG, ADA };
enum class EsConnection { EXP, AR };
enum class CareForm { SAV, AS, IG };

struct CaviarSpec {
    CaviarForm form = CaviarForm::SAV;
    std::vector<double> betas;  // length 3 (SAV), 4 (AS), 3 (IG, all > 0), 1 (ADA)
    double smoothing_g = 10.0;  // ADA logistic sharpness
    double v0 = 0;              // recursion start used at fit time
    double objective = 0;       // attained mean tick loss
};

struct CaviarEsSpec {
    CaviarSpec caviar;
    EsConnection connection = EsConnection::EXP;
    std::vector<double> gammas;  // 1 (EXP, free) or 3 (AR, nonnegative)
    double x0 = 0;               // AR exceedance-state start
    double objective = 0;        // attained mean AL log score
};

struct CareSpec {
    CareForm form = CareForm::SAV;
    std::vector<double> betas;  // 3 (SAV), 4 (AS), 3 (IG, all > 0)
    double tau = 0;             // expectile level in (0, 0.5)
    double mu0 = 0;             // recursion start used at fit time
    double objective = 0;       // attained asymmetric sum of squares
};

struct QFitOptions {
    int multi_starts = 5;
    int max_evals = 10000;  // objective-evaluation cap per start
    std::optional<std::vector<double>> warm_start;  // raw optimizer coordinates
    std::uint64_t seed = 7;
};

// Empirical VaR/ES from the raw window. Window length must be >= 1/alpha.
RiskForecast hs_forecast(const std::vector<double>& window, double alpha);

// VaR path of length returns.size()+1; path[0] = v0, path[t] steps on
// (path[t-1], returns[t-1]); the last entry is the one-step-ahead forecast.
// alpha enters the ADA recursion only.
std::vector<double> caviar_path(const CaviarSpec& spec, const std::vector<double>& returns,
                                double v0, double alpha);

// (VaR, ES) paths, both length returns.size()+1, aligned as caviar_path.
struct JointPaths {
    std::vector<double> var;
    std::vector<double> es;
};
JointPaths caviar_es_paths(const CaviarEsSpec& spec, const std::vector<double>& returns,
                           double v0, double x0, double alpha);

// Expectile path, aligned as caviar_path.
std::vector<double> care_path(const CareSpec& spec, const std::vector<double>& returns,
                              double mu0);

// Tick-loss fit; v0 = empirical alpha-quantile of the first 300 observations.
CaviarSpec fit_caviar(const std::vector<double>& window, CaviarForm form, double alpha,
                      const QFitOptions& opts = {});

// Joint (beta, gamma) fit by mean AL log score.
CaviarEsSpec fit_caviar_es(const std::vector<double>& window, CaviarForm form,
                           EsConnection connection, double alpha,
                           const QFitOptions& opts = {});

// Asymmetric-least-squares fit at a fixed expectile level.
CareSpec fit_care_fixed_tau(const std::vector<double>& window, CareForm form, double tau,
                            const QFitOptions& opts = {});

// Same, with tau calibrated by bisection so the in-sample coverage of the
// fitted expectile path equals alpha.
CareSpec fit_care(const std::vector<double>& window, CareForm form, double alpha,
                  const QFitOptions& opts = {});

// var = mu_tau, es = (1 + tau/((1-2 tau) alpha)) mu_tau.
RiskForecast care_var_es(const CareSpec& spec, double mu_tau, double alpha);

// Constant tau-level expectile of a sample (iteratively reweighted mean).
double sample_expectile(const std::vector<double>& sample, double tau);

// Raw optimizer coordinates, usable as QFitOptions::warm_start.
std::vector<double> raw_params(const CaviarSpec& spec);
std::vector<double> raw_params(const CaviarEsSpec& spec);
std::vector<double> raw_params(const CareSpec& spec);

}  // namespace tailrisk
