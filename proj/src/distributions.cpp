#include "tailrisk/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailrisk/math/optim.hpp"
#include "tailrisk/math/special.hpp"
#include "tailrisk/rng.hpp"

namespace tailrisk {

namespace {

constexpr double kNuLo = 2.05, kNuHi = 100.0;
constexpr double kLambdaCap = 0.99;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw DomainError("alpha must be in (0, 0.5)");
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
}

struct HansenConsts {
    double a, b, c, knot;  // knot = -a/b
};

HansenConsts hansen_consts(double nu, double lambda) {
    if (!(nu > 2.0)) throw DomainError("skew-t: nu must exceed 2");
    if (!(std::fabs(lambda) < 1.0)) throw DomainError("skew-t: |lambda| must be below 1");
    double c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
               std::sqrt(math::kPi * (nu - 2.0));
    double a = 4.0 * lambda * c * (nu - 2.0) / (nu - 1.0);
    double b = std::sqrt(1.0 + 3.0 * lambda * lambda - a * a);
    return {a, b, c, -a / b};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double nu_from_raw(double x) { return kNuLo + (kNuHi - kNuLo) * sigmoid(x); }
double lambda_from_raw(double x) { return kLambdaCap * std::tanh(x); }

}  // namespace

double std_t_pdf(double z, double nu) {
    if (!(nu > 2.0)) throw DomainError("std_t_pdf: nu must exceed 2");
    double s = std::sqrt(nu / (nu - 2.0));
    return s * math::t_pdf(z * s, nu);
}

double std_t_cdf(double z, double nu) {
    if (!(nu > 2.0)) throw DomainError("std_t_cdf: nu must exceed 2");
    return math::t_cdf(z * std::sqrt(nu / (nu - 2.0)), nu);
}

double std_t_inv(double p, double nu) {
    if (!(nu > 2.0)) throw DomainError("std_t_inv: nu must exceed 2");
    return math::t_inv(p, nu) * std::sqrt((nu - 2.0) / nu);
}

double skt_pdf(double z, double nu, double lambda) {
    auto h = hansen_consts(nu, lambda);
    double side = z < h.knot ? (1.0 - lambda) : (1.0 + lambda);
    double u = (h.b * z + h.a) / side;
    return h.b * h.c * std::pow(1.0 + u * u / (nu - 2.0), -0.5 * (nu + 1.0));
}

double skt_cdf(double z, double nu, double lambda) {
    auto h = hansen_consts(nu, lambda);
    double s = std::sqrt(nu / (nu - 2.0));
    if (z < h.knot) {
        double u = s * (h.b * z + h.a) / (1.0 - lambda);
        return (1.0 - lambda) * math::t_cdf(u, nu);
    }
    double u = s * (h.b * z + h.a) / (1.0 + lambda);
    return 0.5 * (1.0 - lambda) + (1.0 + lambda) * (math::t_cdf(u, nu) - 0.5);
}

double skt_inv(double p, double nu, double lambda) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("skt_inv: p must be in (0,1)");
    double lo = -50.0, hi = 50.0;
    if (skt_cdf(lo, nu, lambda) > p || skt_cdf(hi, nu, lambda) < p)
        throw ConvergenceError("skt_inv: quantile outside bracket [-50, 50]", lo, hi);
    for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
        double mid = 0.5 * (lo + hi);
        (skt_cdf(mid, nu, lambda) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double laplace_pdf(double z, double scale) {
    return 0.5 / scale * std::exp(-std::fabs(z) / scale);
}

TailEstimate var_es_normal(double mu, double sigma, double alpha) {
    check_alpha(alpha);
    check_sigma(sigma);
    double z = math::norm_inv(alpha);
    TailEstimate out;
    out.alpha = alpha;
    out.var = mu + sigma * z;
    out.es = mu - sigma * math::norm_pdf(z) / alpha;
    return out;
}

TailEstimate var_es_student_t(double mu, double sigma, double nu, double alpha) {
    check_alpha(alpha);
    check_sigma(sigma);
    if (!(nu > 2.0)) throw DomainError("var_es_student_t: nu must exceed 2");
    double q = math::t_inv(alpha, nu);  // standard-t quantile
    double scale = std::sqrt((nu - 2.0) / nu);
    TailEstimate out;
    out.alpha = alpha;
    out.var = mu + sigma * q * scale;
    out.es = mu - sigma * (math::t_pdf(q, nu) / alpha) * ((nu + q * q) / (nu - 1.0)) * scale;
    return out;
}

TailEstimate var_es_skew_t(double mu, double sigma, double nu, double lambda, double alpha) {
    check_alpha(alpha);
    check_sigma(sigma);
    auto h = hansen_consts(nu, lambda);
    double q = skt_inv(alpha, nu, lambda);

    // E[z | z < q] assembled from the antiderivative of u * density piece.
    auto piece = [&](double side_sign) {
        // side_sign -1 for the (1-lambda) branch, +1 for (1+lambda)
        double side = 1.0 + side_sign * lambda;
        return h.c * side * side / h.b * (nu - 2.0) / (1.0 - nu);
    };
    double tail_mean_numer;
    double Fq = skt_cdf(q, nu, lambda);
    if (q <= h.knot) {
        double u = (h.b * q + h.a) / (1.0 - lambda);
        tail_mean_numer = piece(-1.0) * std::pow(1.0 + u * u / (nu - 2.0), 0.5 * (1.0 - nu)) -
                          (h.a / h.b) * Fq;
    } else {
        double left = piece(-1.0) - (h.a / h.b) * 0.5 * (1.0 - lambda);
        double v = (h.b * q + h.a) / (1.0 + lambda);
        double right = piece(1.0) * (std::pow(1.0 + v * v / (nu - 2.0), 0.5 * (1.0 - nu)) - 1.0) -
                       (h.a / h.b) * (Fq - 0.5 * (1.0 - lambda));
        tail_mean_numer = left + right;
    }
    double es_z = tail_mean_numer / Fq;
    TailEstimate out;
    out.alpha = alpha;
    out.var = mu + sigma * q;
    out.es = mu + sigma * std::min(es_z, q - 1e-12);
    return out;
}

TailEstimate var_es(const DistributionSpec& spec, double mu, double sigma, double alpha) {
    switch (spec.kind) {
        case DistKind::Normal: return var_es_normal(mu, sigma, alpha);
        case DistKind::StudentT: return var_es_student_t(mu, sigma, spec.nu, alpha);
        case DistKind::SkewT: return var_es_skew_t(mu, sigma, spec.nu, spec.lambda, alpha);
        default:
            throw DomainError("var_es: no closed-form estimator for this distribution");
    }
}

FittedDistribution fit_distribution_full(const std::vector<double>& residuals, DistKind kind) {
    if (residuals.size() < 100)
        throw InsufficientDataError("fit_distribution: need at least 100 observations");
    double n = static_cast<double>(residuals.size());
    double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / n;
    double var = 0;
    for (double x : residuals) var += (x - mean) * (x - mean);
    var /= n;
    if (var <= 0.0) throw DegenerateSeriesError("fit_distribution: zero-variance sample");
    double sd = std::sqrt(var);

    FittedDistribution out;
    out.spec.kind = kind;
    if (kind == DistKind::Normal) {
        out.mu = mean;
        out.sigma = sd;
        out.log_likelihood = 0;
        for (double x : residuals) {
            double z = (x - mean) / sd;
            out.log_likelihood += std::log(math::norm_pdf(z) / sd);
        }
        return out;
    }
    if (kind != DistKind::StudentT && kind != DistKind::SkewT)
        throw DomainError("fit_distribution: fitting implemented for Normal/StudentT/SkewT");

    const bool skew = kind == DistKind::SkewT;
    // raw params: mu, log sigma, nu (bounded sigmoid), [lambda (tanh)]
    auto negll = [&](const std::vector<double>& p) {
        double mu = p[0], sigma = std::exp(p[1]);
        double nu = nu_from_raw(p[2]);
        double lambda = skew ? lambda_from_raw(p[3]) : 0.0;
        double ll = 0;
        for (double x : residuals) {
            double z = (x - mu) / sigma;
            double f = skew ? skt_pdf(z, nu, lambda) : std_t_pdf(z, nu);
            if (!(f > 0.0)) return 1e30;
            ll += std::log(f) - p[1];
        }
        return -ll;
    };

    std::vector<double> start{mean, std::log(sd), 0.0};
    if (skew) start.push_back(0.0);
    Rng rng(20240915);
    math::NmResult best;
    for (int s = 0; s < 3; ++s) {
        auto x0 = start;
        if (s > 0)
            for (auto& v : x0) v += rng.uniform(-0.5, 0.5);
        auto r = math::nelder_mead(negll, x0, 0.3, 1e-10, 4000);
        if (r.fval < best.fval) best = r;
    }
    if (best.x.empty())
        throw FittingError("fit_distribution: optimizer failed", start);
    out.mu = best.x[0];
    out.sigma = std::exp(best.x[1]);
    out.spec.nu = std::clamp(nu_from_raw(best.x[2]), kNuLo + 1e-9, kNuHi);
    out.spec.lambda = skew ? std::clamp(lambda_from_raw(best.x[3]), -kLambdaCap, kLambdaCap) : 0.0;
    out.log_likelihood = -best.fval;
    return out;
}

DistributionSpec fit_distribution(const std::vector<double>& residuals, DistKind kind) {
    return fit_distribution_full(residuals, kind).spec;
}

namespace {

// Nominal ES backtesting levels, bit-exact to the published table.
struct NominalRow { double a01, a05; };
constexpr NominalRow kNormalRow{0.0038, 0.0196};
constexpr NominalRow kAlRow{0.0037, 0.0184};
constexpr NominalRow kT10Row{0.0036, 0.0184};
constexpr NominalRow kT6Row{0.0034, 0.0175};
constexpr NominalRow kT4Row{0.0032, 0.0164};
constexpr NominalRow kSemiparametricRow{0.0036, 0.018};

double pick(const NominalRow& row, double alpha) {
    if (alpha == 0.01) return row.a01;
    if (alpha == 0.05) return row.a05;
    throw DomainError("nominal_es_level: alpha must be 0.01 or 0.05");
}

}  // namespace

double nominal_es_level(DistKind kind, double alpha, double nu) {
    switch (kind) {
        case DistKind::Normal:
            return pick(kNormalRow, alpha);
        case DistKind::AsymmetricLaplace:
            return pick(kAlRow, alpha);
        case DistKind::StudentT: {
            if (!(nu > 2.0)) throw DomainError("nominal_es_level: StudentT requires nu");
            if (nu <= 5.0) return pick(kT4Row, alpha);
            if (nu <= 8.0) return pick(kT6Row, alpha);
            return pick(kT10Row, alpha);
        }
        case DistKind::SkewT: {
            if (!(nu > 2.0)) throw DomainError("nominal_es_level: SkewT requires nu");
            // Table lists skew-t columns for DOF 4 and 6 only.
            return nu <= 5.0 ? pick(kT4Row, alpha) : pick(kT6Row, alpha);
        }
        default:
            throw DomainError("nominal_es_level: unsupported distribution kind");
    }
}

double nominal_es_level_semiparametric(double alpha) {
    return pick(kSemiparametricRow, alpha);
}

}  // namespace tailrisk
