#pragma once

// Derivative-free minimization (Nelder-Mead simplex) and scalar root
// bracketing/bisection. All fitting in the library runs through these.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "tailrisk/errors.hpp"

namespace tailrisk::math {

struct NmResult {
    std::vector<double> x;
    double fval = std::numeric_limits<double>::infinity();
    int evals = 0;
    bool converged = false;
};

// Standard Nelder-Mead on R^n. `scale` sets the initial simplex spread.
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            std::vector<double> x0, double scale = 0.25,
                            double ftol = 1e-10, int max_evals = 10000) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        double v = f(x);
        return std::isfinite(v) ? v : 1e30;
    };

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        pts[i + 1][i] += (x0[i] != 0.0 ? scale * std::fabs(x0[i]) + scale : scale);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    NmResult res;
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        std::size_t best = order[0], worst = order[n], second = order[n - 1];
        if (std::fabs(fv[worst] - fv[best]) <= ftol * (std::fabs(fv[best]) + ftol)) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[k][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coef * (centroid[j] - pts[worst][j]);
            return p;
        };
        auto xr = blend(alpha);
        double fr = eval(xr);
        if (fr < fv[order[0]]) {
            auto xe = blend(gamma);
            double fe = eval(xe);
            if (fe < fr) { pts[worst] = std::move(xe); fv[worst] = fe; }
            else { pts[worst] = std::move(xr); fv[worst] = fr; }
        } else if (fr < fv[second]) {
            pts[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            auto xc = blend(fr < fv[worst] ? rho : -rho);
            double fc = eval(xc);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        pts[k][j] = pts[best][j] + sigma * (pts[k][j] - pts[best][j]);
                    fv[k] = eval(pts[k]);
                }
            }
        }
    }
    std::size_t argmin = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[argmin]) argmin = i;
    res.x = pts[argmin];
    res.fval = fv[argmin];
    res.evals = evals;
    return res;
}

// Bisection on a monotone function; caller guarantees f(lo) and f(hi) bracket 0.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double xtol = 1e-10, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw ConvergenceError("bisect: endpoints do not bracket a root", lo, hi);
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) { hi = mid; }
        else { lo = mid; flo = fm; }
    }
    return 0.5 * (lo + hi);
}

}  // namespace tailrisk::math
