#pragma once

// Forecast evaluation: violation ratios, coverage tests (UC/CC/DQ), loss
// functions, and the bootstrap Model Confidence Set.

#include <cstdint>
#include <string>
#include <vector>

namespace tailrisk {

struct HitSequence {
    std::vector<int> hits;  // 1 when r_t < VaR_t
    double alpha = 0;
    std::vector<double> demeaned;  // hits - alpha
};

HitSequence make_hits(const std::vector<double>& returns,
                      const std::vector<double>& forecasts, double alpha);

struct TestResult {
    double stat = 0;
    double p = 1;
    bool pinv_fallback = false;  // DQ only: rank-deficient regressor moment matrix
};

struct BacktestReport {
    std::string model_id;
    double vrate = 0, vratio = 0;
    double uc_stat = 0, uc_p = 1;
    double cc_stat = 0, cc_p = 1;
    double dq1_stat = 0, dq1_p = 1;
    double dq4_stat = 0, dq4_p = 1;
    double qlf = 0;
    double al_score = 0;
};

struct VRatePair {
    double vrate = 0;
    double vratio = 0;
};

// vrate = #{r_t < f_t} / m; vratio = vrate / level. Pass the nominal ES
// level as `level` when backtesting an ES series.
VRatePair violation_ratio(const std::vector<double>& returns,
                          const std::vector<double>& forecasts, double level);

// Kupiec unconditional-coverage likelihood ratio, chi2(1).
TestResult uc_test(const HitSequence& hits);

// Christoffersen conditional-coverage likelihood ratio, chi2(2).
TestResult cc_test(const HitSequence& hits);

// Dynamic quantile regression test with k in {1, 4} hit lags, chi2(k+2).
TestResult dq_test(const HitSequence& hits, const std::vector<double>& forecasts, int k);

// Sum_t (r_t - VaR_t)(alpha - I(r_t < VaR_t)); lower is better.
double quantile_loss(const std::vector<double>& returns,
                     const std::vector<double>& var_forecasts, double alpha);

// Mean AL log score of a (VaR, ES) forecast path; requires every ES < 0.
double al_log_score(const std::vector<double>& returns,
                    const std::vector<double>& var_forecasts,
                    const std::vector<double>& es_forecasts, double alpha);

// Full per-model report against a realized path.
BacktestReport backtest_model(const std::string& model_id,
                              const std::vector<double>& returns,
                              const std::vector<double>& var_forecasts,
                              const std::vector<double>& es_forecasts, double alpha);

struct McsResult {
    std::vector<int> included;      // indices of surviving models
    std::vector<double> p_values;   // per-model elimination p-values
    bool degenerate = false;        // constant differentials; everything kept
};

// Hansen et al. model confidence set with the range statistic and a
// stationary bootstrap over loss differentials.
McsResult model_confidence_set(const std::vector<std::vector<double>>& losses,
                               double confidence, int bootstrap_reps = 1000,
                               double block_length_mean = 10.0,
                               std::uint64_t seed = 7);

// Structured key/value rendering, one block per report.
std::string reports_to_document(const std::vector<BacktestReport>& reports);

// Flat delimiter-separated table with a header row; one row per report.
std::string reports_to_table(const std::vector<BacktestReport>& reports, double alpha,
                             char delimiter = ',');

}  // namespace tailrisk
