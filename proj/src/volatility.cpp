#include "tailrisk/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailrisk/math/optim.hpp"
#include "tailrisk/math/special.hpp"
#include "tailrisk/rng.hpp"

namespace tailrisk {

namespace {

constexpr double kPersCap = 0.9999;  // strict stationarity margin
constexpr double kNuLo = 2.05, kNuHi = 100.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Decoded {
    double mu;
    GarchParams g;
    DistributionSpec dist;
};

std::size_t family_param_count(VolFamily f) {
    switch (f) {
        case VolFamily::GARCH11: return 4;     // mu, log omega, pers, ratio
        case VolFamily::GJRGARCH11: return 5;  // mu, log omega, pers, w1, w2
        case VolFamily::EGARCH11: return 5;    // mu, omega, alpha, beta, gamma
        default: return 0;
    }
}

std::size_t dist_param_count(DistKind k) {
    if (k == DistKind::StudentT) return 1;
    if (k == DistKind::SkewT) return 2;
    return 0;
}

Decoded decode(VolFamily family, DistKind kind, const std::vector<double>& p) {
    Decoded d;
    d.mu = p[0];
    std::size_t i = 1;
    switch (family) {
        case VolFamily::GARCH11: {
            d.g.omega = std::exp(p[i]);
            double pers = kPersCap * sigmoid(p[i + 1]);
            double ratio = sigmoid(p[i + 2]);
            d.g.alpha = pers * ratio;
            d.g.beta = pers * (1.0 - ratio);
            i += 3;
            break;
        }
        case VolFamily::GJRGARCH11: {
            d.g.omega = std::exp(p[i]);
            double pers = kPersCap * sigmoid(p[i + 1]);
            double e1 = std::exp(p[i + 2]), e2 = std::exp(p[i + 3]);
            double s = e1 + e2 + 1.0;
            d.g.alpha = pers * e1 / s;
            d.g.gamma = 2.0 * pers * e2 / s;  // alpha + gamma/2 + beta = pers
            d.g.beta = pers / s;
            i += 4;
            break;
        }
        case VolFamily::EGARCH11: {
            d.g.omega = p[i];
            d.g.alpha = p[i + 1];
            d.g.beta = 0.999 * std::tanh(p[i + 2]);
            d.g.gamma = p[i + 3];
            i += 4;
            break;
        }
        default:
            throw DomainError("decode: EWMA has no fitted parameters");
    }
    d.dist.kind = kind;
    if (kind == DistKind::StudentT || kind == DistKind::SkewT)
        d.dist.nu = kNuLo + (kNuHi - kNuLo) * sigmoid(p[i++]);
    if (kind == DistKind::SkewT) d.dist.lambda = 0.99 * std::tanh(p[i++]);
    return d;
}

// Per-likelihood-evaluation density with the normalizing constants hoisted
// out of the observation loop.
struct LogDensity {
    DistKind kind;
    double nu = 0, lambda = 0;
    double c0 = 0, s = 1;  // constant term, standardization scale

    explicit LogDensity(const DistributionSpec& d) : kind(d.kind), nu(d.nu), lambda(d.lambda) {
        if (kind == DistKind::Normal) {
            c0 = -0.5 * std::log(2.0 * math::kPi);
        } else if (kind == DistKind::StudentT) {
            s = std::sqrt(nu / (nu - 2.0));
            c0 = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                 0.5 * std::log(nu * math::kPi) + std::log(s);
        } else if (kind != DistKind::SkewT) {
            throw DomainError("log_density: unsupported residual distribution");
        }
    }

    double operator()(double z) const {
        switch (kind) {
            case DistKind::Normal: return c0 - 0.5 * z * z;
            case DistKind::StudentT: {
                double u = z * s;
                return c0 - 0.5 * (nu + 1.0) * std::log1p(u * u / nu);
            }
            default: {
                double f = skt_pdf(z, nu, lambda);
                return f > 0 ? std::log(f) : -1e30;
            }
        }
    }
};

// Negative log-likelihood of the filtered recursion.
double garch_negll(VolFamily family, const Decoded& d, const std::vector<double>& r,
                   double sigma2_init, VolState* final_state = nullptr) {
    const LogDensity logf(d.dist);
    double sigma2 = sigma2_init;
    double ll = 0;
    double eps_prev = 0.0;
    bool first = true;
    for (double rt : r) {
        if (!first) {
            switch (family) {
                case VolFamily::GARCH11:
                    sigma2 = d.g.omega + d.g.alpha * eps_prev * eps_prev + d.g.beta * sigma2;
                    break;
                case VolFamily::GJRGARCH11: {
                    double lev = eps_prev < 0.0 ? d.g.gamma : 0.0;
                    sigma2 = d.g.omega + (d.g.alpha + lev) * eps_prev * eps_prev + d.g.beta * sigma2;
                    break;
                }
                case VolFamily::EGARCH11: {
                    double z = eps_prev / std::sqrt(sigma2);
                    double ln = d.g.omega + d.g.alpha * std::fabs(z) + d.g.gamma * z +
                                d.g.beta * std::log(sigma2);
                    sigma2 = std::exp(std::clamp(ln, -50.0, 50.0));
                    break;
                }
                default: break;
            }
        }
        first = false;
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return 1e30;
        double eps = rt - d.mu;
        double z = eps / std::sqrt(sigma2);
        ll += logf(z) - 0.5 * std::log(sigma2);
        eps_prev = eps;
    }
    if (final_state) {
        final_state->sigma2 = sigma2;
        final_state->eps = eps_prev;
        final_state->r = r.back();
    }
    return -ll;
}

std::vector<double> default_start(VolFamily family, DistKind kind, double mean, double var) {
    std::vector<double> p{mean};
    switch (family) {
        case VolFamily::GARCH11:
            p.push_back(std::log(std::max(var * 0.05, 1e-8)));
            p.push_back(logit(0.95 / kPersCap));
            p.push_back(logit(0.10));
            break;
        case VolFamily::GJRGARCH11:
            p.push_back(std::log(std::max(var * 0.05, 1e-8)));
            p.push_back(logit(0.95 / kPersCap));
            p.push_back(std::log(0.05 / 0.90));  // alpha share vs beta share
            p.push_back(std::log(0.05 / 0.90));  // gamma/2 share vs beta share
            break;
        case VolFamily::EGARCH11:
            p.push_back(0.05 * std::log(std::max(var, 1e-8)));  // omega
            p.push_back(0.1);                                    // alpha
            p.push_back(std::atanh(0.95 / 0.999));               // beta
            p.push_back(-0.05);                                  // gamma
            break;
        default: break;
    }
    if (kind == DistKind::StudentT || kind == DistKind::SkewT)
        p.push_back(logit((8.0 - kNuLo) / (kNuHi - kNuLo)));  // nu ~ 8
    if (kind == DistKind::SkewT) p.push_back(0.0);
    return p;
}

}  // namespace

double ewma_step(double r_t, double sigma2_t, double theta) {
    if (!(sigma2_t > 0.0)) throw DomainError("ewma_step: sigma2 must be positive");
    if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("ewma_step: theta must be in (0,1]");
    return (1.0 - theta) * r_t * r_t + theta * sigma2_t;
}

double variance_step(const VolModelSpec& spec, const VolState& state) {
    if (!(state.sigma2 > 0.0))
        throw InternalError("variance_step: nonpositive sigma2 state");
    switch (spec.family) {
        case VolFamily::EWMA:
            return ewma_step(state.r, state.sigma2, spec.params.theta);
        case VolFamily::GARCH11:
            return spec.params.omega + spec.params.alpha * state.eps * state.eps +
                   spec.params.beta * state.sigma2;
        case VolFamily::GJRGARCH11: {
            double lev = state.eps < 0.0 ? spec.params.gamma : 0.0;
            return spec.params.omega + (spec.params.alpha + lev) * state.eps * state.eps +
                   spec.params.beta * state.sigma2;
        }
        case VolFamily::EGARCH11: {
            double z = state.eps / std::sqrt(state.sigma2);
            double ln = spec.params.omega + spec.params.alpha * std::fabs(z) +
                        spec.params.gamma * z + spec.params.beta * std::log(state.sigma2);
            return std::exp(std::clamp(ln, -50.0, 50.0));
        }
    }
    throw InternalError("variance_step: unknown family");
}

VolModelSpec fit_garch_family(const std::vector<double>& window, VolFamily family,
                              DistKind dist_kind, const FitOptions& opts) {
    double n = static_cast<double>(window.size());
    if (family == VolFamily::EWMA) {
        if (window.size() < 2)
            throw InsufficientDataError("fit_garch_family: EWMA needs >= 2 observations");
    } else if (window.size() < 250) {
        throw InsufficientDataError("fit_garch_family: window must hold >= 250 observations");
    }
    double mean = std::accumulate(window.begin(), window.end(), 0.0) / n;
    double var = 0;
    for (double x : window) var += (x - mean) * (x - mean);
    var /= n;
    auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    if (!(var > 0.0) || *lo == *hi)
        throw DegenerateSeriesError("fit_garch_family: constant-return window");

    VolModelSpec spec;
    spec.family = family;

    if (family == VolFamily::EWMA) {
        spec.dist.kind = DistKind::Normal;
        spec.mean = 0.0;
        spec.params.theta = 0.94;
        double sigma2 = var;
        for (double r : window) sigma2 = ewma_step(r, sigma2, spec.params.theta);
        // state holds sigma^2_{T+1} pre-rolled through r_T; store the last
        // pre-update value so forecast_var_es applies exactly one step.
        sigma2 = var;
        for (std::size_t i = 0; i + 1 < window.size(); ++i)
            sigma2 = ewma_step(window[i], sigma2, spec.params.theta);
        spec.state = {sigma2, window.back(), window.back()};
        return spec;
    }

    auto negll = [&](const std::vector<double>& p) {
        Decoded d = decode(family, dist_kind, p);
        return garch_negll(family, d, window, var);
    };

    std::vector<std::vector<double>> starts;
    if (opts.warm_start) starts.push_back(*opts.warm_start);
    starts.push_back(default_start(family, dist_kind, mean, var));
    Rng rng(Rng::derive_seed(opts.seed, static_cast<std::uint64_t>(family),
                             static_cast<std::uint64_t>(dist_kind)));
    for (int s = 1; s < opts.multi_starts; ++s) {
        auto p = starts.back();
        for (auto& v : p) v += rng.uniform(-0.8, 0.8);
        starts.push_back(std::move(p));
    }

    math::NmResult best;
    for (const auto& s : starts) {
        auto r = math::nelder_mead(negll, s, 0.25, 1e-11, 5000);
        if (r.fval < best.fval) best = r;
    }
    if (best.x.empty() || best.fval >= 1e29)
        throw FittingError("fit_garch_family: optimizer failed to find a feasible point",
                           best.x);

    Decoded d = decode(family, dist_kind, best.x);
    spec.mean = d.mu;
    spec.params = d.g;
    spec.dist = d.dist;
    spec.log_likelihood = -garch_negll(family, d, window, var, &spec.state);
    double pers = d.g.alpha + d.g.beta +
                  (family == VolFamily::GJRGARCH11 ? 0.5 * d.g.gamma : 0.0);
    spec.boundary_projected = family != VolFamily::EGARCH11 && pers > kPersCap - 1e-4;
    return spec;
}

std::vector<double> raw_params(const VolModelSpec& spec) {
    std::vector<double> p{spec.mean};
    const auto& g = spec.params;
    auto safe_logit = [](double x) { return logit(std::clamp(x, 1e-9, 1.0 - 1e-9)); };
    switch (spec.family) {
        case VolFamily::GARCH11: {
            double pers = std::min(g.alpha + g.beta, kPersCap - 1e-9);
            p.push_back(std::log(std::max(g.omega, 1e-300)));
            p.push_back(safe_logit(pers / kPersCap));
            p.push_back(safe_logit(pers > 0 ? g.alpha / pers : 0.5));
            break;
        }
        case VolFamily::GJRGARCH11: {
            double pers = std::min(g.alpha + 0.5 * g.gamma + g.beta, kPersCap - 1e-9);
            p.push_back(std::log(std::max(g.omega, 1e-300)));
            p.push_back(safe_logit(pers / kPersCap));
            double f3 = pers > 0 ? std::max(g.beta / pers, 1e-9) : 1.0 / 3.0;
            double f1 = pers > 0 ? std::max(g.alpha / pers, 1e-9) : 1.0 / 3.0;
            double f2 = pers > 0 ? std::max(0.5 * g.gamma / pers, 1e-9) : 1.0 / 3.0;
            p.push_back(std::log(f1 / f3));
            p.push_back(std::log(f2 / f3));
            break;
        }
        case VolFamily::EGARCH11:
            p.push_back(g.omega);
            p.push_back(g.alpha);
            p.push_back(std::atanh(std::clamp(g.beta / 0.999, -1.0 + 1e-12, 1.0 - 1e-12)));
            p.push_back(g.gamma);
            break;
        default:
            throw DomainError("raw_params: EWMA has no fitted parameters");
    }
    if (spec.dist.kind == DistKind::StudentT || spec.dist.kind == DistKind::SkewT)
        p.push_back(safe_logit((spec.dist.nu - kNuLo) / (kNuHi - kNuLo)));
    if (spec.dist.kind == DistKind::SkewT)
        p.push_back(std::atanh(std::clamp(spec.dist.lambda / 0.99, -1.0 + 1e-12, 1.0 - 1e-12)));
    return p;
}

RiskForecast forecast_var_es(const VolModelSpec& spec, const VolState& state, double alpha) {
    double sigma2_next = variance_step(spec, state);
    if (!(sigma2_next > 0.0) || !std::isfinite(sigma2_next))
        throw InternalError("forecast_var_es: variance recursion left the positive domain");
    TailEstimate te = var_es(spec.dist, spec.mean, std::sqrt(sigma2_next), alpha);
    RiskForecast f;
    f.var = te.var;
    f.es = te.es;
    f.alpha = alpha;
    return f;
}

}  // namespace tailrisk
