#include "tailrisk/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tailrisk/errors.hpp"
#include "tailrisk/math/linalg.hpp"
#include "tailrisk/math/special.hpp"
#include "tailrisk/rng.hpp"

namespace tailrisk {

namespace {

// 0 * ln 0 = 0 convention used throughout the likelihood ratios.
double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

void check_aligned(const std::vector<double>& a, const std::vector<double>& b,
                   const char* who) {
    if (a.empty() || a.size() != b.size())
        throw InputError(std::string(who) + ": sequences empty or misaligned");
}

}  // namespace

HitSequence make_hits(const std::vector<double>& returns,
                      const std::vector<double>& forecasts, double alpha) {
    check_aligned(returns, forecasts, "make_hits");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("make_hits: alpha must be in (0,1)");
    HitSequence h;
    h.alpha = alpha;
    h.hits.reserve(returns.size());
    h.demeaned.reserve(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        int hit = returns[t] < forecasts[t] ? 1 : 0;
        h.hits.push_back(hit);
        h.demeaned.push_back(hit - alpha);
    }
    return h;
}

VRatePair violation_ratio(const std::vector<double>& returns,
                          const std::vector<double>& forecasts, double level) {
    check_aligned(returns, forecasts, "violation_ratio");
    if (!(level > 0.0 && level < 1.0))
        throw DomainError("violation_ratio: level must be in (0,1)");
    std::size_t n = 0;
    for (std::size_t t = 0; t < returns.size(); ++t)
        if (returns[t] < forecasts[t]) ++n;
    VRatePair out;
    out.vrate = static_cast<double>(n) / static_cast<double>(returns.size());
    out.vratio = out.vrate / level;
    return out;
}

TestResult uc_test(const HitSequence& h) {
    const double m = static_cast<double>(h.hits.size());
    if (m < 1) throw InputError("uc_test: empty hit sequence");
    double N = 0;
    for (int x : h.hits) N += x;
    const double a = h.alpha, pi = N / m;
    double ll0 = xlogy(m - N, 1.0 - a) + xlogy(N, a);
    double ll1 = xlogy(m - N, 1.0 - pi) + xlogy(N, pi);
    TestResult r;
    r.stat = std::max(0.0, -2.0 * (ll0 - ll1));
    r.p = math::chi2_sf(r.stat, 1);
    return r;
}

TestResult cc_test(const HitSequence& h) {
    const std::size_t m = h.hits.size();
    if (m < 2) throw InputError("cc_test: need at least 2 observations");
    double n00 = 0, n01 = 0, n10 = 0, n11 = 0;  // first observation has no predecessor
    for (std::size_t t = 1; t < m; ++t) {
        int a = h.hits[t - 1], b = h.hits[t];
        if (a == 0 && b == 0) ++n00;
        else if (a == 0 && b == 1) ++n01;
        else if (a == 1 && b == 0) ++n10;
        else ++n11;
    }
    double pi01 = n00 + n01 > 0 ? n01 / (n00 + n01) : 0.0;
    double pi11 = n10 + n11 > 0 ? n11 / (n10 + n11) : 0.0;
    double pi = (n01 + n11) / (n00 + n01 + n10 + n11);
    double ll0 = xlogy(n00 + n10, 1.0 - pi) + xlogy(n01 + n11, pi);
    double ll1 = xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) +
                 xlogy(n11, pi11);
    double lr_ind = std::max(0.0, -2.0 * (ll0 - ll1));
    TestResult r;
    r.stat = uc_test(h).stat + lr_ind;
    r.p = math::chi2_sf(r.stat, 2);
    return r;
}

TestResult dq_test(const HitSequence& h, const std::vector<double>& forecasts, int k) {
    if (k != 1 && k != 4) throw DomainError("dq_test: k must be 1 or 4");
    const std::size_t m = h.hits.size();
    if (forecasts.size() != m) throw InputError("dq_test: forecasts misaligned");
    if (m < static_cast<std::size_t>(k + 10))
        throw InsufficientDataError("dq_test: sequence too short for the lag order");

    const std::size_t d = static_cast<std::size_t>(k) + 2;  // 1, k hit lags, VaR
    const double a = h.alpha;
    // W't row builder; pre-sample hit lags padded with 0.
    auto wrow = [&](std::size_t t, double* x) {
        x[0] = 1.0;
        for (int j = 1; j <= k; ++j)
            x[j] = t >= static_cast<std::size_t>(j) ? h.demeaned[t - j] : 0.0;
        x[d - 1] = forecasts[t];
    };

    math::Matrix WtW(d);
    std::vector<double> WtH(d, 0.0);
    double x[8];
    for (std::size_t t = 0; t < m; ++t) {
        wrow(t, x);
        for (std::size_t i = 0; i < d; ++i) {
            WtH[i] += x[i] * h.demeaned[t];
            for (std::size_t j = 0; j < d; ++j) WtW(i, j) += x[i] * x[j];
        }
    }
    TestResult r;
    std::vector<double> sol;
    if (!math::solve(WtW, WtH, sol)) {
        sol = math::pinv_solve_sym(WtW, WtH);
        r.pinv_fallback = true;
    }
    double quad = 0;
    for (std::size_t i = 0; i < d; ++i) quad += WtH[i] * sol[i];
    r.stat = std::max(0.0, quad / (a * (1.0 - a)));
    r.p = math::chi2_sf(r.stat, static_cast<double>(d));
    return r;
}

double quantile_loss(const std::vector<double>& returns,
                     const std::vector<double>& var_forecasts, double alpha) {
    check_aligned(returns, var_forecasts, "quantile_loss");
    double s = 0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        double hit = returns[t] < var_forecasts[t] ? 1.0 : 0.0;
        s += (returns[t] - var_forecasts[t]) * (alpha - hit);
    }
    return s;
}

double al_log_score(const std::vector<double>& returns,
                    const std::vector<double>& var_forecasts,
                    const std::vector<double>& es_forecasts, double alpha) {
    check_aligned(returns, var_forecasts, "al_log_score");
    check_aligned(returns, es_forecasts, "al_log_score");
    double s = 0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        double es = es_forecasts[t];
        if (!(es < 0.0))
            throw DomainError("al_log_score: nonnegative ES at index " + std::to_string(t));
        double hit = returns[t] <= var_forecasts[t] ? 1.0 : 0.0;
        s += -std::log((alpha - 1.0) / es) -
             (returns[t] - var_forecasts[t]) * (alpha - hit) / (alpha * es);
    }
    return s / static_cast<double>(returns.size());
}

BacktestReport backtest_model(const std::string& model_id,
                              const std::vector<double>& returns,
                              const std::vector<double>& var_forecasts,
                              const std::vector<double>& es_forecasts, double alpha) {
    BacktestReport r;
    r.model_id = model_id;
    auto vr = violation_ratio(returns, var_forecasts, alpha);
    r.vrate = vr.vrate;
    r.vratio = vr.vratio;
    auto hits = make_hits(returns, var_forecasts, alpha);
    auto uc = uc_test(hits);
    r.uc_stat = uc.stat;
    r.uc_p = uc.p;
    auto cc = cc_test(hits);
    r.cc_stat = cc.stat;
    r.cc_p = cc.p;
    auto d1 = dq_test(hits, var_forecasts, 1);
    r.dq1_stat = d1.stat;
    r.dq1_p = d1.p;
    auto d4 = dq_test(hits, var_forecasts, 4);
    r.dq4_stat = d4.stat;
    r.dq4_p = d4.p;
    r.qlf = quantile_loss(returns, var_forecasts, alpha);
    r.al_score = al_log_score(returns, var_forecasts, es_forecasts, alpha);
    return r;
}

McsResult model_confidence_set(const std::vector<std::vector<double>>& losses,
                               double confidence, int bootstrap_reps,
                               double block_length_mean, std::uint64_t seed) {
    const std::size_t T = losses.size();
    if (T < 100) throw InsufficientDataError("model_confidence_set: need time >= 100");
    const std::size_t M = losses[0].size();
    if (M < 2) throw InputError("model_confidence_set: need at least 2 models");
    for (const auto& row : losses)
        if (row.size() != M) throw InputError("model_confidence_set: ragged loss matrix");
    if (confidence != 0.75 && confidence != 0.90)
        throw DomainError("model_confidence_set: confidence must be 0.75 or 0.90");

    // Per-model sample means and stationary-bootstrap replicate means,
    // generated once and reused across elimination rounds.
    std::vector<double> mean(M, 0.0);
    for (const auto& row : losses)
        for (std::size_t i = 0; i < M; ++i) mean[i] += row[i];
    for (auto& v : mean) v /= static_cast<double>(T);

    const int B = bootstrap_reps;
    std::vector<std::vector<double>> bmean(static_cast<std::size_t>(B),
                                           std::vector<double>(M, 0.0));
    const double p_new = 1.0 / block_length_mean;
    for (int b = 0; b < B; ++b) {
        Rng rng(Rng::derive_seed(seed, 0x6d6373, static_cast<std::uint64_t>(b)));
        std::size_t idx = static_cast<std::size_t>(rng.uniform(0.0, 1.0) * T) % T;
        auto& acc = bmean[static_cast<std::size_t>(b)];
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < M; ++i) acc[i] += losses[idx][i];
            if (rng.uniform(0.0, 1.0) < p_new)
                idx = static_cast<std::size_t>(rng.uniform(0.0, 1.0) * T) % T;
            else
                idx = (idx + 1) % T;
        }
        for (auto& v : acc) v /= static_cast<double>(T);
    }

    McsResult out;
    out.p_values.assign(M, 1.0);
    std::vector<int> active(M);
    for (std::size_t i = 0; i < M; ++i) active[i] = static_cast<int>(i);

    double running_p = 0.0;
    while (active.size() > 1) {
        const std::size_t k = active.size();
        // Pairwise differential variances from the bootstrap.
        math::Matrix var_ij(k);
        bool any_signal = false;
        for (std::size_t ii = 0; ii < k; ++ii)
            for (std::size_t jj = ii + 1; jj < k; ++jj) {
                int i = active[ii], j = active[jj];
                double d = mean[i] - mean[j];
                double v = 0;
                for (int b = 0; b < B; ++b) {
                    double db = bmean[b][i] - bmean[b][j];
                    v += (db - d) * (db - d);
                }
                v /= static_cast<double>(B);
                var_ij(ii, jj) = var_ij(jj, ii) = v;
                if (v > 1e-20) any_signal = true;
            }
        if (!any_signal) {
            // Remaining differentials are constant: nothing separates the
            // surviving models. Flag full degeneracy only when no model has
            // been eliminated yet.
            out.degenerate = active.size() == M;
            break;
        }

        // Observed range statistic and its bootstrap distribution.
        double t_range = 0;
        for (std::size_t ii = 0; ii < k; ++ii)
            for (std::size_t jj = ii + 1; jj < k; ++jj) {
                double v = var_ij(ii, jj);
                if (v <= 1e-20) continue;
                double t = std::fabs(mean[active[ii]] - mean[active[jj]]) / std::sqrt(v);
                t_range = std::max(t_range, t);
            }
        int exceed = 0;
        for (int b = 0; b < B; ++b) {
            double tb = 0;
            for (std::size_t ii = 0; ii < k; ++ii)
                for (std::size_t jj = ii + 1; jj < k; ++jj) {
                    double v = var_ij(ii, jj);
                    if (v <= 1e-20) continue;
                    int i = active[ii], j = active[jj];
                    double centered = (bmean[b][i] - bmean[b][j]) - (mean[i] - mean[j]);
                    tb = std::max(tb, std::fabs(centered) / std::sqrt(v));
                }
            if (tb >= t_range) ++exceed;
        }
        double p_round = static_cast<double>(exceed) / static_cast<double>(B);
        running_p = std::max(running_p, p_round);  // monotonized elimination p-values

        // Worst model: largest standardized mean loss differential vs. the rest.
        std::size_t worst = 0;
        double worst_t = -1e300;
        for (std::size_t ii = 0; ii < k; ++ii) {
            double d = 0;
            for (std::size_t jj = 0; jj < k; ++jj) d += mean[active[ii]] - mean[active[jj]];
            d /= static_cast<double>(k);
            double v = 0;
            for (int b = 0; b < B; ++b) {
                double db = 0;
                for (std::size_t jj = 0; jj < k; ++jj)
                    db += bmean[b][active[ii]] - bmean[b][active[jj]];
                db /= static_cast<double>(k);
                v += (db - d) * (db - d);
            }
            v /= static_cast<double>(B);
            double t = v > 1e-20 ? d / std::sqrt(v) : 0.0;
            if (t > worst_t) {
                worst_t = t;
                worst = ii;
            }
        }
        out.p_values[static_cast<std::size_t>(active[worst])] = running_p;
        if (running_p > 1.0 - confidence) break;  // stop: remaining set is the MCS
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    for (int i : active) out.included.push_back(i);
    std::sort(out.included.begin(), out.included.end());
    if (out.degenerate) std::fill(out.p_values.begin(), out.p_values.end(), 1.0);
    return out;
}

std::string reports_to_document(const std::vector<BacktestReport>& reports) {
    std::ostringstream os;
    os.precision(10);
    for (const auto& r : reports) {
        os << "model " << r.model_id << "\n"
           << "  vrate " << r.vrate << "\n  vratio " << r.vratio << "\n"
           << "  uc_stat " << r.uc_stat << "\n  uc_p " << r.uc_p << "\n"
           << "  cc_stat " << r.cc_stat << "\n  cc_p " << r.cc_p << "\n"
           << "  dq1_stat " << r.dq1_stat << "\n  dq1_p " << r.dq1_p << "\n"
           << "  dq4_stat " << r.dq4_stat << "\n  dq4_p " << r.dq4_p << "\n"
           << "  qlf " << r.qlf << "\n  al_score " << r.al_score << "\n";
    }
    return os.str();
}

std::string reports_to_table(const std::vector<BacktestReport>& reports, double alpha,
                             char d) {
    std::ostringstream os;
    os.precision(10);
    os << "model" << d << "alpha" << d << "vrate" << d << "vratio" << d << "uc_stat" << d
       << "uc_p" << d << "cc_stat" << d << "cc_p" << d << "dq1_stat" << d << "dq1_p" << d
       << "dq4_stat" << d << "dq4_p" << d << "qlf" << d << "al_score\n";
    for (const auto& r : reports)
        os << r.model_id << d << alpha << d << r.vrate << d << r.vratio << d << r.uc_stat << d
           << r.uc_p << d << r.cc_stat << d << r.cc_p << d << r.dq1_stat << d << r.dq1_p << d
           << r.dq4_stat << d << r.dq4_p << d << r.qlf << d << r.al_score << "\n";
    return os.str();
}

}  // namespace tailrisk
