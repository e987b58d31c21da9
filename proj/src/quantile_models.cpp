#include "tailrisk/quantile_models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tailrisk/errors.hpp"
#include "tailrisk/math/optim.hpp"
#include "tailrisk/rng.hpp"

namespace tailrisk {

namespace {

constexpr double kInfeasible = 1e30;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0,1)");
}

std::size_t caviar_beta_count(CaviarForm f) {
    switch (f) {
        case CaviarForm::SAV: return 3;
        case CaviarForm::AS: return 4;
        case CaviarForm::IG: return 3;
        case CaviarForm::ADA: return 1;
    }
    throw InternalError("caviar_beta_count: unknown form");
}

std::size_t care_beta_count(CareForm f) { return f == CareForm::AS ? 4 : 3; }

// One CAViaR step from (v_prev, r_prev). Throws on an IG negative root.
double caviar_step(const CaviarSpec& s, double v_prev, double r_prev, double alpha) {
    const auto& b = s.betas;
    switch (s.form) {
        case CaviarForm::SAV:
            return b[0] + b[1] * v_prev + b[2] * std::fabs(r_prev);
        case CaviarForm::AS:
            return b[0] + b[1] * v_prev + b[2] * std::max(r_prev, 0.0) -
                   b[3] * std::min(r_prev, 0.0);
        case CaviarForm::IG: {
            double u = b[0] + b[1] * v_prev * v_prev + b[2] * r_prev * r_prev;
            if (!(u >= 0.0))
                throw DomainError("caviar_step: IG recursion negative under the root");
            return -std::sqrt(u);
        }
        case CaviarForm::ADA: {
            double g = 1.0 / (1.0 + std::exp(std::clamp(
                                s.smoothing_g * (r_prev - v_prev), -500.0, 500.0)));
            return v_prev + b[0] * (g - alpha);
        }
    }
    throw InternalError("caviar_step: unknown form");
}

double care_step(const CareSpec& s, double m_prev, double r_prev) {
    const auto& b = s.betas;
    switch (s.form) {
        case CareForm::SAV:
            return b[0] + b[1] * m_prev + b[2] * std::fabs(r_prev);
        case CareForm::AS:
            return b[0] + b[1] * m_prev +
                   (r_prev > 0.0 ? b[2] : r_prev < 0.0 ? b[3] : 0.0) * std::fabs(r_prev);
        case CareForm::IG: {
            double u = b[0] + b[1] * m_prev * m_prev + b[2] * r_prev * r_prev;
            if (!(u >= 0.0))
                throw DomainError("care_step: IG recursion negative under the root");
            return -std::sqrt(u);
        }
    }
    throw InternalError("care_step: unknown form");
}

// Raw -> constrained betas. IG betas live in log space; everything else is
// the identity.
std::vector<double> caviar_betas_from_raw(CaviarForm form, const double* raw) {
    std::size_t n = caviar_beta_count(form);
    std::vector<double> b(raw, raw + n);
    if (form == CaviarForm::IG)
        for (auto& v : b) v = std::exp(std::clamp(v, -60.0, 60.0));
    return b;
}

std::vector<double> care_betas_from_raw(CareForm form, const double* raw) {
    std::size_t n = care_beta_count(form);
    std::vector<double> b(raw, raw + n);
    if (form == CareForm::IG)
        for (auto& v : b) v = std::exp(std::clamp(v, -60.0, 60.0));
    return b;
}

std::vector<double> to_raw_betas(bool log_space, const std::vector<double>& betas) {
    auto r = betas;
    if (log_space)
        for (auto& v : r) v = std::log(std::max(v, 1e-300));
    return r;
}

double tick_loss_mean(const std::vector<double>& r, const std::vector<double>& path,
                      double alpha) {
    double s = 0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        double hit = r[t] < path[t] ? 1.0 : 0.0;
        s += (alpha - hit) * (r[t] - path[t]);
    }
    return s / static_cast<double>(r.size());
}

double al_score_term(double r, double v, double es, double alpha) {
    double hit = r <= v ? 1.0 : 0.0;
    return -std::log((alpha - 1.0) / es) - (r - v) * (alpha - hit) / (alpha * es);
}

std::vector<double> caviar_start_draw(CaviarForm form, Rng& rng) {
    switch (form) {
        case CaviarForm::SAV:
            return {rng.uniform(-0.2, 0.0), rng.uniform(0.7, 0.95), rng.uniform(-0.4, 0.0)};
        case CaviarForm::AS:
            return {rng.uniform(-0.2, 0.0), rng.uniform(0.7, 0.95), rng.uniform(-0.3, 0.0),
                    rng.uniform(-0.5, 0.0)};
        case CaviarForm::IG:  // log space
            return {std::log(rng.uniform(0.01, 0.3)), std::log(rng.uniform(0.6, 0.95)),
                    std::log(rng.uniform(0.05, 0.6))};
        case CaviarForm::ADA:
            return {rng.uniform(-1.0, 0.0)};
    }
    throw InternalError("caviar_start_draw: unknown form");
}

std::vector<double> care_start_draw(CareForm form, Rng& rng) {
    switch (form) {
        case CareForm::SAV:
            return {rng.uniform(-0.2, 0.0), rng.uniform(0.7, 0.95), rng.uniform(-0.4, 0.0)};
        case CareForm::AS:
            return {rng.uniform(-0.2, 0.0), rng.uniform(0.7, 0.95), rng.uniform(-0.3, 0.0),
                    rng.uniform(-0.5, 0.0)};
        case CareForm::IG:
            return {std::log(rng.uniform(0.01, 0.3)), std::log(rng.uniform(0.6, 0.95)),
                    std::log(rng.uniform(0.05, 0.6))};
    }
    throw InternalError("care_start_draw: unknown form");
}

void check_fit_window(const std::vector<double>& window) {
    if (window.size() < 300)
        throw InsufficientDataError("quantile-model fit needs >= 300 observations");
}

double initial_quantile(const std::vector<double>& window, double alpha) {
    std::vector<double> head(window.begin(), window.begin() + 300);
    return sample_quantile(std::move(head), alpha);
}

math::NmResult multistart_minimize(const std::function<double(const std::vector<double>&)>& f,
                                   const std::vector<std::vector<double>>& starts,
                                   int max_evals) {
    math::NmResult best;
    for (const auto& s : starts) {
        if (f(s) >= kInfeasible) continue;
        auto r = math::nelder_mead(f, s, 0.2, 1e-11, max_evals);
        if (r.fval < best.fval) best = r;
    }
    if (best.x.empty() || best.fval >= kInfeasible)
        throw FittingError("quantile-model fit: no feasible start converged", {});
    return best;
}

}  // namespace

RiskForecast hs_forecast(const std::vector<double>& window, double alpha) {
    check_alpha(alpha);
    std::size_t n = window.size();
    if (static_cast<double>(n) < 1.0 / alpha)
        throw InsufficientDataError("hs_forecast: window shorter than 1/alpha");
    std::vector<double> sorted(window);
    std::sort(sorted.begin(), sorted.end());
    std::size_t k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    double var = sorted[k - 1];
    double sum = 0;
    std::size_t cnt = 0;
    for (double x : sorted) {
        if (x >= var) break;
        sum += x;
        ++cnt;
    }
    double es;
    if (cnt > 0) {
        es = sum / static_cast<double>(cnt);
    } else {
        sum = 0;
        for (double x : sorted)
            if (x <= var) { sum += x; ++cnt; }
        es = sum / static_cast<double>(cnt);
    }
    RiskForecast f;
    f.var = var;
    f.es = es;
    f.alpha = alpha;
    return f;
}

std::vector<double> caviar_path(const CaviarSpec& spec, const std::vector<double>& returns,
                                double v0, double alpha) {
    if (!(v0 < 0.0)) throw DomainError("caviar_path: v0 must be negative");
    std::vector<double> path(returns.size() + 1);
    path[0] = v0;
    for (std::size_t t = 0; t < returns.size(); ++t)
        path[t + 1] = caviar_step(spec, path[t], returns[t], alpha);
    return path;
}

JointPaths caviar_es_paths(const CaviarEsSpec& spec, const std::vector<double>& returns,
                           double v0, double x0, double alpha) {
    JointPaths out;
    out.var = caviar_path(spec.caviar, returns, v0, alpha);
    out.es.resize(out.var.size());
    if (spec.connection == EsConnection::EXP) {
        double mult = 1.0 + std::exp(std::clamp(spec.gammas[0], -500.0, 500.0));
        for (std::size_t t = 0; t < out.var.size(); ++t) out.es[t] = mult * out.var[t];
        return out;
    }
    const auto& g = spec.gammas;
    double x = x0;
    out.es[0] = out.var[0] - x;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        if (returns[t] <= out.var[t])
            x = g[0] + g[1] * (out.var[t] - returns[t]) + g[2] * x;
        out.es[t + 1] = out.var[t + 1] - x;
    }
    return out;
}

std::vector<double> care_path(const CareSpec& spec, const std::vector<double>& returns,
                              double mu0) {
    std::vector<double> path(returns.size() + 1);
    path[0] = mu0;
    for (std::size_t t = 0; t < returns.size(); ++t)
        path[t + 1] = care_step(spec, path[t], returns[t]);
    return path;
}

CaviarSpec fit_caviar(const std::vector<double>& window, CaviarForm form, double alpha,
                      const QFitOptions& opts) {
    check_alpha(alpha);
    check_fit_window(window);
    double v0 = initial_quantile(window, alpha);
    if (!(v0 < 0.0)) v0 = std::min(v0, -1e-6);

    auto objective = [&](const std::vector<double>& raw) {
        CaviarSpec s;
        s.form = form;
        s.betas = caviar_betas_from_raw(form, raw.data());
        std::vector<double> path(window.size());
        double v = v0;
        for (std::size_t t = 0; t < window.size(); ++t) {
            path[t] = v;
            double u;
            try {
                u = caviar_step(s, v, window[t], alpha);
            } catch (const DomainError&) {
                return kInfeasible;
            }
            if (!std::isfinite(u) || std::fabs(u) > 1e6) return kInfeasible;
            v = u;
        }
        return tick_loss_mean(window, path, alpha);
    };

    Rng rng(Rng::derive_seed(opts.seed, 11, static_cast<std::uint64_t>(form)));
    std::vector<std::vector<double>> starts;
    if (opts.warm_start) starts.push_back(*opts.warm_start);
    for (int s = 0; s < opts.multi_starts; ++s) starts.push_back(caviar_start_draw(form, rng));

    auto best = multistart_minimize(objective, starts, opts.max_evals);
    CaviarSpec out;
    out.form = form;
    out.betas = caviar_betas_from_raw(form, best.x.data());
    out.v0 = v0;
    out.objective = best.fval;
    return out;
}

CaviarEsSpec fit_caviar_es(const std::vector<double>& window, CaviarForm form,
                           EsConnection connection, double alpha, const QFitOptions& opts) {
    check_alpha(alpha);
    check_fit_window(window);
    double v0 = initial_quantile(window, alpha);
    if (!(v0 < 0.0)) v0 = std::min(v0, -1e-6);

    // AR state start: mean in-window exceedance magnitude below the initial VaR.
    double x0 = 0;
    {
        double sum = 0;
        std::size_t cnt = 0;
        for (double r : window)
            if (r < v0) { sum += v0 - r; ++cnt; }
        x0 = cnt > 0 ? sum / static_cast<double>(cnt) : 0.1 * std::fabs(v0);
    }

    const std::size_t nb = caviar_beta_count(form);
    const std::size_t ng = connection == EsConnection::EXP ? 1 : 3;
    const bool ar = connection == EsConnection::AR;

    auto objective = [&](const std::vector<double>& raw) {
        CaviarEsSpec s;
        s.caviar.form = form;
        s.caviar.betas = caviar_betas_from_raw(form, raw.data());
        s.connection = connection;
        s.gammas.assign(raw.begin() + nb, raw.begin() + nb + ng);
        if (ar)
            for (auto& g : s.gammas) g = std::exp(std::clamp(g, -60.0, 60.0));
        JointPaths p;
        try {
            p = caviar_es_paths(s, window, v0, x0, alpha);
        } catch (const DomainError&) {
            return kInfeasible;
        }
        double score = 0;
        for (std::size_t t = 0; t < window.size(); ++t) {
            if (!(p.es[t] < 0.0) || !std::isfinite(p.es[t]) || std::fabs(p.var[t]) > 1e6)
                return kInfeasible;
            score += al_score_term(window[t], p.var[t], p.es[t], alpha);
        }
        return score / static_cast<double>(window.size());
    };

    Rng rng(Rng::derive_seed(opts.seed, 13, static_cast<std::uint64_t>(form) * 2 +
                                                static_cast<std::uint64_t>(connection)));
    std::vector<std::vector<double>> starts;
    if (opts.warm_start) starts.push_back(*opts.warm_start);
    for (int s = 0; s < opts.multi_starts; ++s) {
        auto b = caviar_start_draw(form, rng);
        if (connection == EsConnection::EXP) {
            b.push_back(rng.uniform(-2.0, 0.0));  // gamma0: multiplier in (1, 2)
        } else {
            b.push_back(std::log(rng.uniform(0.01, 0.3)));
            b.push_back(std::log(rng.uniform(0.05, 0.5)));
            b.push_back(std::log(rng.uniform(0.3, 0.9)));
        }
        starts.push_back(std::move(b));
    }

    auto best = multistart_minimize(objective, starts, opts.max_evals);
    CaviarEsSpec out;
    out.caviar.form = form;
    out.caviar.betas = caviar_betas_from_raw(form, best.x.data());
    out.caviar.v0 = v0;
    out.connection = connection;
    out.gammas.assign(best.x.begin() + nb, best.x.begin() + nb + ng);
    if (ar)
        for (auto& g : out.gammas) g = std::exp(std::clamp(g, -60.0, 60.0));
    out.x0 = x0;
    out.objective = best.fval;
    return out;
}

double sample_expectile(const std::vector<double>& sample, double tau) {
    if (sample.empty()) throw InsufficientDataError("sample_expectile: empty sample");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("sample_expectile: tau must be in (0,1)");
    double mu = std::accumulate(sample.begin(), sample.end(), 0.0) /
                static_cast<double>(sample.size());
    for (int it = 0; it < 200; ++it) {
        double num = 0, den = 0;
        for (double x : sample) {
            double w = x < mu ? 1.0 - tau : tau;  // |tau - I(x < mu)|
            num += w * x;
            den += w;
        }
        double next = num / den;
        if (std::fabs(next - mu) < 1e-12) return next;
        mu = next;
    }
    return mu;
}

CareSpec fit_care_fixed_tau(const std::vector<double>& window, CareForm form, double tau,
                            const QFitOptions& opts) {
    if (!(tau > 0.0 && tau < 0.5))
        throw DomainError("fit_care_fixed_tau: tau must be in (0, 0.5)");
    check_fit_window(window);
    std::vector<double> head(window.begin(), window.begin() + 300);
    double mu0 = sample_expectile(head, tau);
    if (!(mu0 < 0.0)) mu0 = std::min(mu0, -1e-6);

    auto objective = [&](const std::vector<double>& raw) {
        CareSpec s;
        s.form = form;
        s.betas = care_betas_from_raw(form, raw.data());
        double obj = 0;
        double m = mu0;
        for (std::size_t t = 0; t < window.size(); ++t) {
            double w = window[t] < m ? 1.0 - tau : tau;
            obj += w * (window[t] - m) * (window[t] - m);
            double u;
            try {
                u = care_step(s, m, window[t]);
            } catch (const DomainError&) {
                return kInfeasible;
            }
            if (!std::isfinite(u) || std::fabs(u) > 1e6) return kInfeasible;
            m = u;
        }
        return obj;
    };

    Rng rng(Rng::derive_seed(opts.seed, 17, static_cast<std::uint64_t>(form)));
    std::vector<std::vector<double>> starts;
    if (opts.warm_start) starts.push_back(*opts.warm_start);
    for (int s = 0; s < opts.multi_starts; ++s) starts.push_back(care_start_draw(form, rng));

    auto best = multistart_minimize(objective, starts, opts.max_evals);
    CareSpec out;
    out.form = form;
    out.betas = care_betas_from_raw(form, best.x.data());
    out.tau = tau;
    out.mu0 = mu0;
    out.objective = best.fval;
    return out;
}

CareSpec fit_care(const std::vector<double>& window, CareForm form, double alpha,
                  const QFitOptions& opts) {
    check_alpha(alpha);
    check_fit_window(window);

    auto coverage = [&](const CareSpec& s) {
        auto path = care_path(s, window, s.mu0);
        std::size_t hits = 0;
        for (std::size_t t = 0; t < window.size(); ++t)
            if (window[t] < path[t]) ++hits;
        return static_cast<double>(hits) / static_cast<double>(window.size());
    };

    // Coverage of the fitted path is increasing in tau; bisect on tau.
    double lo = 1e-5, hi = 0.5 - 1e-5;
    CareSpec best;
    bool have = false;
    QFitOptions probe_opts = opts;
    for (int it = 0; it < 30 && hi - lo > 1e-6; ++it) {
        double tau = 0.5 * (lo + hi);
        CareSpec s = fit_care_fixed_tau(window, form, tau, probe_opts);
        probe_opts.warm_start = raw_params(s);  // warm-start the next probe
        double c = coverage(s);
        if (!have || std::fabs(c - alpha) < std::fabs(coverage(best) - alpha)) {
            best = s;
            have = true;
        }
        (c < alpha ? lo : hi) = tau;
    }
    if (!have)
        throw FittingError("fit_care: tau calibration found no feasible fit", {});
    return best;
}

RiskForecast care_var_es(const CareSpec& spec, double mu_tau, double alpha) {
    check_alpha(alpha);
    if (!(spec.tau > 0.0 && spec.tau < 0.5))
        throw DomainError("care_var_es: tau must be in (0, 0.5)");
    if (!(mu_tau < 0.0)) throw DomainError("care_var_es: expectile must be negative");
    RiskForecast f;
    f.var = mu_tau;
    f.es = (1.0 + spec.tau / ((1.0 - 2.0 * spec.tau) * alpha)) * mu_tau;
    f.alpha = alpha;
    return f;
}

std::vector<double> raw_params(const CaviarSpec& spec) {
    return to_raw_betas(spec.form == CaviarForm::IG, spec.betas);
}

std::vector<double> raw_params(const CaviarEsSpec& spec) {
    auto r = raw_params(spec.caviar);
    auto g = to_raw_betas(spec.connection == EsConnection::AR, spec.gammas);
    r.insert(r.end(), g.begin(), g.end());
    return r;
}

std::vector<double> raw_params(const CareSpec& spec) {
    return to_raw_betas(spec.form == CareForm::IG, spec.betas);
}

}  // namespace tailrisk
