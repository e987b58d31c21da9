#pragma once

// Residual distributions: densities, CDFs, quantiles, maximum-likelihood
// fitting, and closed-form lower-tail VaR/ES estimators.

#include <cstdint>
#include <vector>

#include "tailrisk/errors.hpp"

namespace tailrisk {

enum class DistKind { Normal, StudentT, SkewT, Laplace, AsymmetricLaplace };

struct DistributionSpec {
    DistKind kind = DistKind::Normal;
    double nu = 0;      // StudentT / SkewT only, in (2.05, 100]
    double lambda = 0;  // SkewT only, in (-0.99, 0.99)
};

struct TailEstimate {
    double var = 0;  // negative for lower-tail alpha < 0.5
    double es = 0;   // strictly below var
    double alpha = 0;
};

// --- Unit-variance ("standardized") densities and CDFs -------------------

double std_t_pdf(double z, double nu);
double std_t_cdf(double z, double nu);
double std_t_inv(double p, double nu);

// Hansen skew-t with unit variance; lambda in (-1, 1), nu > 2.
double skt_pdf(double z, double nu, double lambda);
double skt_cdf(double z, double nu, double lambda);
double skt_inv(double p, double nu, double lambda);  // bisection on the CDF

double laplace_pdf(double z, double scale = 1.0);

// --- Closed-form tail estimators ------------------------------------------

TailEstimate var_es_normal(double mu, double sigma, double alpha);
TailEstimate var_es_student_t(double mu, double sigma, double nu, double alpha);
TailEstimate var_es_skew_t(double mu, double sigma, double nu, double lambda, double alpha);

// Dispatch on spec.kind (Normal/StudentT/SkewT only).
TailEstimate var_es(const DistributionSpec& spec, double mu, double sigma, double alpha);

// --- Fitting ---------------------------------------------------------------

// MLE over location, scale and the shape parameters of `kind`; only the
// shape parameters are reported. Requires at least 100 observations.
DistributionSpec fit_distribution(const std::vector<double>& residuals, DistKind kind);

// Same, but also reports the fitted location/scale.
struct FittedDistribution {
    DistributionSpec spec;
    double mu = 0;
    double sigma = 1;
    double log_likelihood = 0;
};
FittedDistribution fit_distribution_full(const std::vector<double>& residuals, DistKind kind);

// --- Nominal ES backtesting levels -----------------------------------------

// Quantile level delta_alpha at which an ES series from a parametric model
// with residual law `kind` is backtested as if it were a VaR series.
// alpha must be 0.01 or 0.05. nu selects the nearest tabulated column for
// StudentT / SkewT.
double nominal_es_level(DistKind kind, double alpha, double nu = 0.0);

// Nonparametric / semiparametric models: 0.0036 (alpha=0.01), 0.018 (0.05).
double nominal_es_level_semiparametric(double alpha);

}  // namespace tailrisk
