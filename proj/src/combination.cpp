#include "tailrisk/combination.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailrisk/errors.hpp"
#include "tailrisk/math/linalg.hpp"
#include "tailrisk/math/optim.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/series.hpp"

namespace tailrisk {

namespace {

constexpr double kInfeasible = 1e30;
constexpr double kCrossPenalty = 1e6;

std::vector<double> softmax(const double* raw, std::size_t n) {
    double mx = raw[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, raw[i]);
    std::vector<double> w(n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += (w[i] = std::exp(raw[i] - mx));
    for (auto& v : w) v /= s;
    return w;
}

double dot(const std::vector<double>& w, const std::vector<double>& row) {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * row[i];
    return s;
}

double al_term(double r, double v, double es, double alpha) {
    double hit = r <= v ? 1.0 : 0.0;
    return -std::log((alpha - 1.0) / es) - (r - v) * (alpha - hit) / (alpha * es);
}

}  // namespace

double combine_simple_average(const std::vector<double>& forecasts) {
    if (forecasts.empty()) throw InputError("combine_simple_average: empty input");
    return std::accumulate(forecasts.begin(), forecasts.end(), 0.0) /
           static_cast<double>(forecasts.size());
}

double combine_median(const std::vector<double>& forecasts) {
    if (forecasts.empty()) throw InputError("combine_median: empty input");
    std::vector<double> s(forecasts);
    std::sort(s.begin(), s.end());
    std::size_t n = s.size();
    return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

CombinationWeights fit_joint_combination(const std::vector<std::vector<double>>& panel_var,
                                         const std::vector<std::vector<double>>& panel_es,
                                         const std::vector<double>& realized, double alpha,
                                         const ComboFitOptions& opts) {
    const std::size_t T = realized.size();
    if (T == 0 || panel_var.size() != T || panel_es.size() != T)
        throw InputError("fit_joint_combination: panels misaligned with realized returns");
    const std::size_t n = panel_var[0].size(), h = panel_es[0].size();
    if (n == 0 || h == 0) throw InputError("fit_joint_combination: empty model set");
    for (std::size_t t = 0; t < T; ++t) {
        if (panel_var[t].size() != n || panel_es[t].size() != h)
            throw InputError("fit_joint_combination: ragged panel row");
        for (double e : panel_es[t])
            if (!(e < 0.0))
                throw InputError("fit_joint_combination: nonnegative individual ES in panel");
    }

    auto score_weights = [&](const std::vector<double>& b, const std::vector<double>& g,
                             double* max_violation) {
        double score = 0, viol = 0;
        for (std::size_t t = 0; t < T; ++t) {
            double v = dot(b, panel_var[t]);
            double e = dot(g, panel_es[t]);
            if (!(e < 0.0)) return kInfeasible;
            viol = std::max(viol, e - v);
            score += al_term(realized[t], v, e, alpha);
        }
        if (max_violation) *max_violation = viol;
        return score / static_cast<double>(T) + kCrossPenalty * std::max(viol, 0.0);
    };
    auto objective = [&](const std::vector<double>& raw) {
        auto b = softmax(raw.data(), n);
        auto g = softmax(raw.data() + n, h);
        return score_weights(b, g, nullptr);
    };

    std::vector<std::vector<double>> starts;
    if (opts.warm_start && opts.warm_start->size() == n + h)
        starts.push_back(*opts.warm_start);
    starts.emplace_back(n + h, 0.0);  // equal weights

    // Best one-hot pair as an explicit start: guarantees objective dominance
    // over every single-model combination.
    {
        double best = kInfeasible;
        std::size_t bi = 0, bj = 0;
        std::vector<double> b(n, 0.0), g(h, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(b.begin(), b.end(), 0.0);
            b[i] = 1.0;
            for (std::size_t j = 0; j < h; ++j) {
                std::fill(g.begin(), g.end(), 0.0);
                g[j] = 1.0;
                double s = score_weights(b, g, nullptr);
                if (s < best) { best = s; bi = i; bj = j; }
            }
        }
        std::vector<double> raw(n + h, 0.0);
        raw[bi] = 40.0;
        raw[n + bj] = 40.0;
        starts.push_back(std::move(raw));
    }

    Rng rng(Rng::derive_seed(opts.seed, 23, n * 1000 + h));
    for (int s = 0; s < opts.random_starts; ++s) {
        std::vector<double> raw(n + h);
        for (auto& v : raw) v = rng.uniform(-1.0, 1.0);
        starts.push_back(std::move(raw));
    }

    math::NmResult best;
    for (const auto& s : starts) {
        auto r = math::nelder_mead(objective, s, 0.5, 1e-12, opts.max_evals);
        if (r.fval < best.fval) best = r;
    }
    if (best.x.empty() || best.fval >= kInfeasible)
        throw FittingError("fit_joint_combination: no feasible weights found", {});

    CombinationWeights out;
    out.beta = softmax(best.x.data(), n);
    out.gamma = softmax(best.x.data() + n, h);
    double viol = 0;
    out.al_score = score_weights(out.beta, out.gamma, &viol);
    if (viol > 1e-8)
        throw FittingError("fit_joint_combination: crossing constraint unsatisfied", best.x);
    out.al_score -= kCrossPenalty * std::max(viol, 0.0);
    return out;
}

std::vector<double> raw_params(const CombinationWeights& w) {
    std::vector<double> raw;
    raw.reserve(w.beta.size() + w.gamma.size());
    for (double b : w.beta) raw.push_back(std::log(std::max(b, 1e-12)));
    for (double g : w.gamma) raw.push_back(std::log(std::max(g, 1e-12)));
    return raw;
}

RiskForecast combined_forecast(const CombinationWeights& weights,
                               const std::vector<double>& var_row,
                               const std::vector<double>& es_row, double alpha) {
    if (weights.beta.size() != var_row.size() || weights.gamma.size() != es_row.size())
        throw InputError("combined_forecast: dimension mismatch");
    RiskForecast f;
    f.var = dot(weights.beta, var_row);
    f.es = dot(weights.gamma, es_row);
    f.alpha = alpha;
    if (f.es >= f.var) {
        f.es = f.var - 1e-8;
        f.crossing_clamped = true;
    }
    return f;
}

LassoComboSpec fit_quantile_lasso(const std::vector<std::vector<double>>& predictors,
                                  const std::vector<double>& response, double tau,
                                  double lambda) {
    const std::size_t T = response.size();
    if (T == 0 || predictors.size() != T)
        throw InputError("fit_quantile_lasso: misaligned inputs");
    const std::size_t p = predictors[0].size();
    if (T < 10 * p)
        throw InsufficientDataError("fit_quantile_lasso: need time >= 10 * predictors");
    if (p > 15) throw InputError("fit_quantile_lasso: at most 15 predictors supported");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("fit_quantile_lasso: tau must be in (0,1)");
    if (lambda < 0.0) throw DomainError("fit_quantile_lasso: lambda must be nonnegative");

    const std::size_t d = p + 1;  // intercept first
    std::vector<double> beta(d, 0.0);
    beta[0] = sample_quantile(std::vector<double>(response), tau);

    // Majorize-minimize: rho_tau(u) ~ w(u) u^2 with w = |tau - I(u<0)| / |u|,
    // and lambda |b_j| ~ (lambda / |b_j|) b_j^2, both floored at delta.
    const double delta = 1e-6;
    double prev_obj = kInfeasible;
    bool converged = false;
    // The reweighted iteration can cycle between near-optimal vertices of
    // the piecewise-linear objective; keep the best iterate and accept it
    // once the objective has stopped improving.
    std::vector<double> best_beta = beta;
    double best_obj = kInfeasible;
    int since_improved = 0;
    for (int it = 0; it < 500; ++it) {
        math::Matrix A(d);
        std::vector<double> rhs(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            double fit = beta[0];
            for (std::size_t j = 0; j < p; ++j) fit += beta[j + 1] * predictors[t][j];
            double u = response[t] - fit;
            double w = (u < 0.0 ? 1.0 - tau : tau) / std::max(std::fabs(u), delta);
            double x[16];
            x[0] = 1.0;
            for (std::size_t j = 0; j < p; ++j) x[j + 1] = predictors[t][j];
            for (std::size_t i = 0; i < d; ++i) {
                rhs[i] += w * x[i] * response[t];
                for (std::size_t j = 0; j < d; ++j) A(i, j) += w * x[i] * x[j];
            }
        }
        for (std::size_t j = 1; j < d; ++j)
            A(j, j) += lambda / std::max(std::fabs(beta[j]), delta);

        std::vector<double> next;
        if (!math::solve(A, rhs, next)) next = math::pinv_solve_sym(A, rhs);

        double obj = 0;
        for (std::size_t t = 0; t < T; ++t) {
            double fit = next[0];
            for (std::size_t j = 0; j < p; ++j) fit += next[j + 1] * predictors[t][j];
            double u = response[t] - fit;
            obj += (u < 0.0 ? tau - 1.0 : tau) * u;
        }
        for (std::size_t j = 1; j < d; ++j) obj += lambda * std::fabs(next[j]);

        double step = 0;
        for (std::size_t j = 0; j < d; ++j) step = std::max(step, std::fabs(next[j] - beta[j]));
        beta = std::move(next);
        if (obj < best_obj - 1e-10 * (1.0 + std::fabs(best_obj))) {
            best_obj = obj;
            best_beta = beta;
            since_improved = 0;
        } else {
            ++since_improved;
        }
        if (step < 1e-9 || std::fabs(prev_obj - obj) < 1e-12 * (1.0 + std::fabs(obj)) ||
            since_improved >= 50) {
            converged = true;
            break;
        }
        prev_obj = obj;
    }
    // At the iteration cap the best iterate has long been within solver
    // noise of the optimum; only a non-finite objective is a real failure.
    if (!converged && !std::isfinite(best_obj))
        throw FittingError("fit_quantile_lasso: reweighting did not converge", best_beta);
    beta = best_beta;

    LassoComboSpec out;
    out.intercept = beta[0];
    out.coefficients.assign(beta.begin() + 1, beta.end());
    // Hard-threshold the near-zero slopes the smooth majorizer cannot pin.
    for (auto& c : out.coefficients)
        if (lambda > 0.0 && std::fabs(c) < 10.0 * delta) c = 0.0;
    out.lambda = lambda;
    out.tau = tau;
    return out;
}

double lasso_predict(const LassoComboSpec& spec, const std::vector<double>& x) {
    if (x.size() != spec.coefficients.size())
        throw InputError("lasso_predict: dimension mismatch");
    double s = spec.intercept;
    for (std::size_t j = 0; j < x.size(); ++j) s += spec.coefficients[j] * x[j];
    return s;
}

LassoComboSpec fit_quantile_lasso_cv(const std::vector<std::vector<double>>& predictors,
                                     const std::vector<double>& response, double tau) {
    static const double kGrid[] = {0.0, 0.01, 0.1, 1.0, 10.0};
    const std::size_t T = response.size();
    const std::size_t split = T - T / 4;  // last 25% held out
    std::vector<std::vector<double>> x_tr(predictors.begin(), predictors.begin() + split);
    std::vector<double> y_tr(response.begin(), response.begin() + split);

    double best_loss = kInfeasible, best_lambda = 0.0;
    for (double lambda : kGrid) {
        LassoComboSpec s;
        try {
            s = fit_quantile_lasso(x_tr, y_tr, tau, lambda);
        } catch (const FittingError&) {
            continue;
        }
        double loss = 0;
        for (std::size_t t = split; t < T; ++t) {
            double u = response[t] - lasso_predict(s, predictors[t]);
            loss += (u < 0.0 ? tau - 1.0 : tau) * u;
        }
        if (loss < best_loss) {
            best_loss = loss;
            best_lambda = lambda;
        }
    }
    if (best_loss >= kInfeasible)
        throw FittingError("fit_quantile_lasso_cv: every lambda failed", {});
    return fit_quantile_lasso(predictors, response, tau, best_lambda);
}

}  // namespace tailrisk
