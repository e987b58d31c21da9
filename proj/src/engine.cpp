#include "tailrisk/engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "tailrisk/combination.hpp"
#include "tailrisk/distributions.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/quantile_models.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/volatility.hpp"

namespace tailrisk {

namespace {

enum class ModelClass { Ewma, Garch, Hs, Caviar, CaviarEs, Care };

struct ModelId {
    ModelClass cls;
    VolFamily family = VolFamily::EWMA;
    DistKind dist = DistKind::Normal;
    CaviarForm cform = CaviarForm::SAV;
    CareForm careform = CareForm::SAV;
    EsConnection conn = EsConnection::EXP;
};

ModelId parse_model_id(const std::string& id) {
    auto dist_of = [&](const std::string& s) {
        if (s == "N") return DistKind::Normal;
        if (s == "T") return DistKind::StudentT;
        if (s == "SKT") return DistKind::SkewT;
        throw InputError("unknown residual distribution in model id: " + s);
    };
    ModelId m;
    if (id == "EWMA") {
        m.cls = ModelClass::Ewma;
        return m;
    }
    if (id == "HS") {
        m.cls = ModelClass::Hs;
        return m;
    }
    auto dash = id.find('-');
    std::string head = id.substr(0, dash);
    std::string rest = dash == std::string::npos ? "" : id.substr(dash + 1);
    if (head == "GARCH" || head == "EGARCH" || head == "GJRGARCH") {
        m.cls = ModelClass::Garch;
        m.family = head == "GARCH" ? VolFamily::GARCH11
                   : head == "EGARCH" ? VolFamily::EGARCH11 : VolFamily::GJRGARCH11;
        m.dist = dist_of(rest);
        return m;
    }
    auto form_of = [&](const std::string& s) {
        if (s == "SAV") return CaviarForm::SAV;
        if (s == "AS") return CaviarForm::AS;
        if (s == "IG") return CaviarForm::IG;
        if (s == "ADA") return CaviarForm::ADA;
        throw InputError("unknown recursion form in model id: " + s);
    };
    if (head == "CAVIAR") {
        m.cls = ModelClass::Caviar;
        m.cform = form_of(rest);
        return m;
    }
    if (head == "CAVIARES") {
        m.cls = ModelClass::CaviarEs;
        auto dash2 = rest.find('-');
        if (dash2 == std::string::npos)
            throw InputError("CAVIARES model id needs FORM-CONNECTION: " + id);
        m.cform = form_of(rest.substr(0, dash2));
        std::string conn = rest.substr(dash2 + 1);
        if (conn == "EXP") m.conn = EsConnection::EXP;
        else if (conn == "AR") m.conn = EsConnection::AR;
        else throw InputError("unknown ES connection in model id: " + conn);
        return m;
    }
    if (head == "CARE") {
        m.cls = ModelClass::Care;
        if (rest == "SAV") m.careform = CareForm::SAV;
        else if (rest == "AS") m.careform = CareForm::AS;
        else if (rest == "IG") m.careform = CareForm::IG;
        else throw InputError("unknown CARE form in model id: " + rest);
        return m;
    }
    throw InputError("unknown model id: " + id);
}

struct Column {
    std::vector<double> var, es;
    bool ok = true;
};

// Empirical tail mean of the window below `var`; ES stand-in for VaR-only
// quantile recursions.
double empirical_tail_mean(const std::vector<double>& window, double var) {
    double sum = 0;
    std::size_t cnt = 0;
    for (double r : window)
        if (r < var) { sum += r; ++cnt; }
    return cnt > 0 ? sum / static_cast<double>(cnt) : var - 1e-8;
}

Column roll_one_model(const ReturnSeries& series, const RollingPlan& plan, double alpha,
                      const std::string& id, std::size_t model_idx) {
    const ModelId m = parse_model_id(id);
    const auto& r = series.returns();
    const std::size_t T = plan.initial_window;
    const std::size_t len = series.size();
    const std::size_t horizon = len - T;
    Column col;
    col.var.reserve(horizon);
    col.es.reserve(horizon);

    auto clamp_pair = [&](double v, double e) {
        if (!(e < v)) e = v - 1e-8;
        col.var.push_back(v);
        col.es.push_back(e);
    };

    switch (m.cls) {
        case ModelClass::Hs: {
            for (std::size_t t = T; t < len; ++t) {
                auto f = hs_forecast(series.window(t, plan.hs_window), alpha);
                col.var.push_back(f.var);
                col.es.push_back(f.es);
            }
            return col;
        }
        case ModelClass::Ewma:
        case ModelClass::Garch: {
            VolFamily fam = m.cls == ModelClass::Ewma ? VolFamily::EWMA : m.family;
            VolModelSpec spec;
            bool have = false;
            std::vector<double> warm;
            for (std::size_t t = T; t < len; ++t) {
                bool due = !have || (t - T) % plan.refit_interval == 0;
                if (due) {
                    FitOptions o;
                    o.seed = Rng::derive_seed(plan.seed, model_idx, t);
                    if (have && fam != VolFamily::EWMA) {
                        o.warm_start = warm;
                        o.multi_starts = 1;
                    }
                    try {
                        spec = fit_garch_family(series.window(t, T), fam, m.dist, o);
                        if (fam != VolFamily::EWMA) warm = raw_params(spec);
                        have = true;
                        auto f = forecast_var_es(spec, alpha);
                        clamp_pair(f.var, f.es);
                        continue;
                    } catch (const std::exception&) {
                        if (!have) {
                            col.ok = false;
                            return col;
                        }
                        // fall through: advance the last good fit
                    }
                }
                VolState s;
                s.sigma2 = variance_step(spec, spec.state);
                s.r = r[t - 1];
                s.eps = r[t - 1] - spec.mean;
                spec.state = s;
                auto f = forecast_var_es(spec, alpha);
                clamp_pair(f.var, f.es);
            }
            return col;
        }
        case ModelClass::Caviar: {
            CaviarSpec spec;
            bool have = false;
            double v_cur = 0;
            for (std::size_t t = T; t < len; ++t) {
                bool due = !have || (t - T) % plan.refit_interval == 0;
                auto window = series.window(t, T);
                if (due) {
                    QFitOptions o;
                    o.seed = Rng::derive_seed(plan.seed, model_idx, t);
                    if (have) {
                        o.warm_start = raw_params(spec);
                        o.multi_starts = 2;
                    }
                    try {
                        spec = fit_caviar(window, m.cform, alpha, o);
                        v_cur = std::min(caviar_path(spec, window, spec.v0, alpha).back(),
                                         -1e-8);
                        have = true;
                        clamp_pair(v_cur, empirical_tail_mean(window, v_cur));
                        continue;
                    } catch (const std::exception&) {
                        if (!have) {
                            col.ok = false;
                            return col;
                        }
                    }
                }
                v_cur = std::min(caviar_path(spec, {r[t - 1]}, v_cur, alpha).back(), -1e-8);
                clamp_pair(v_cur, empirical_tail_mean(window, v_cur));
            }
            return col;
        }
        case ModelClass::CaviarEs: {
            CaviarEsSpec spec;
            bool have = false;
            double v_cur = 0, x_cur = 0;
            for (std::size_t t = T; t < len; ++t) {
                bool due = !have || (t - T) % plan.refit_interval == 0;
                if (due) {
                    QFitOptions o;
                    o.seed = Rng::derive_seed(plan.seed, model_idx, t);
                    if (have) {
                        o.warm_start = raw_params(spec);
                        o.multi_starts = 2;
                    }
                    try {
                        auto window = series.window(t, T);
                        spec = fit_caviar_es(window, m.cform, m.conn, alpha, o);
                        auto p = caviar_es_paths(spec, window, spec.caviar.v0, spec.x0, alpha);
                        v_cur = std::min(p.var.back(), -1e-8);
                        x_cur = p.var.back() - p.es.back();
                        have = true;
                        clamp_pair(p.var.back(), p.es.back());
                        continue;
                    } catch (const std::exception&) {
                        if (!have) {
                            col.ok = false;
                            return col;
                        }
                    }
                }
                auto p = caviar_es_paths(spec, {r[t - 1]}, v_cur, x_cur, alpha);
                v_cur = std::min(p.var.back(), -1e-8);
                x_cur = p.var.back() - p.es.back();
                clamp_pair(p.var.back(), p.es.back());
            }
            return col;
        }
        case ModelClass::Care: {
            CareSpec spec;
            bool have = false;
            double m_cur = 0;
            for (std::size_t t = T; t < len; ++t) {
                bool due = !have || (t - T) % plan.refit_interval == 0;
                if (due) {
                    QFitOptions o;
                    o.seed = Rng::derive_seed(plan.seed, model_idx, t);
                    if (have) {
                        o.warm_start = raw_params(spec);
                        o.multi_starts = 2;
                    }
                    try {
                        auto window = series.window(t, T);
                        spec = plan.care_fixed_tau
                                   ? fit_care_fixed_tau(window, m.careform, alpha, o)
                                   : fit_care(window, m.careform, alpha, o);
                        m_cur = care_path(spec, window, spec.mu0).back();
                        have = true;
                        auto f = care_var_es(spec, std::min(m_cur, -1e-8), alpha);
                        clamp_pair(f.var, f.es);
                        continue;
                    } catch (const std::exception&) {
                        if (!have) {
                            col.ok = false;
                            return col;
                        }
                    }
                }
                m_cur = care_path(spec, {r[t - 1]}, m_cur).back();
                auto f = care_var_es(spec, std::min(m_cur, -1e-8), alpha);
                clamp_pair(f.var, f.es);
            }
            return col;
        }
    }
    throw InternalError("roll_one_model: unhandled model class");
}

}  // namespace

std::vector<std::string> default_model_list() {
    return {"EWMA",        "GARCH-N",    "GARCH-T",    "GARCH-SKT",      "EGARCH-N",
            "EGARCH-T",    "EGARCH-SKT", "GJRGARCH-N", "GJRGARCH-T",     "GJRGARCH-SKT",
            "HS",          "CAVIAR-SAV", "CAVIAR-AS",  "CAVIAR-IG",      "CAVIAR-ADA",
            "CAVIARES-SAV-AR", "CAVIARES-AS-EXP", "CARE-SAV", "CARE-AS"};
}

ForecastPanel run_rolling(const ReturnSeries& series, const RollingPlan& plan, double alpha) {
    if (series.size() < plan.initial_window + 1)
        throw InsufficientDataError(
            "run_rolling: series shorter than initial_window + 1 observations");
    auto models = plan.model_list.empty() ? default_model_list() : plan.model_list;
    for (const auto& id : models) parse_model_id(id);  // fail fast on bad ids

    const std::size_t T = plan.initial_window;
    const std::size_t horizon = series.size() - T;

    std::vector<std::future<Column>> futs;
    futs.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i)
        futs.push_back(std::async(std::launch::async, [&, i] {
            return roll_one_model(series, plan, alpha, models[i], i);
        }));

    ForecastPanel panel;
    panel.alpha = alpha;
    std::vector<Column> cols;
    for (std::size_t i = 0; i < models.size(); ++i) {
        Column c = futs[i].get();
        if (!c.ok) {
            panel.dropped_models.push_back(models[i]);
            cols.emplace_back();
            continue;
        }
        panel.model_ids.push_back(models[i]);
        cols.push_back(std::move(c));
    }
    if (panel.model_ids.empty())
        throw FittingError("run_rolling: every model failed on its first window", {});

    panel.timestamps.assign(series.timestamps().begin() +
                                static_cast<std::ptrdiff_t>(T),
                            series.timestamps().end());
    panel.realized.assign(series.returns().begin() + static_cast<std::ptrdiff_t>(T),
                          series.returns().end());
    panel.var_matrix.assign(horizon, std::vector<double>(panel.model_ids.size()));
    panel.es_matrix.assign(horizon, std::vector<double>(panel.model_ids.size()));
    std::size_t k = 0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (cols[i].var.empty()) continue;
        for (std::size_t t = 0; t < horizon; ++t) {
            panel.var_matrix[t][k] = cols[i].var[t];
            panel.es_matrix[t][k] = cols[i].es[t];
        }
        ++k;
    }
    return panel;
}

std::vector<ForecastPanel> run_rolling(const ReturnSeries& series, const RollingPlan& plan) {
    std::vector<ForecastPanel> out;
    for (double a : plan.alphas) out.push_back(run_rolling(series, plan, a));
    return out;
}

ForecastPanel run_combination(const ForecastPanel& panel, const RollingPlan& plan) {
    const std::size_t time = panel.realized.size();
    const std::size_t n = plan.combo_window;
    if (time < n + 1)
        throw InsufficientDataError("run_combination: panel shorter than combo_window + 1");
    const std::size_t M = panel.model_ids.size();
    const std::size_t out_len = time - n;

    ForecastPanel out;
    out.alpha = panel.alpha;
    out.model_ids = panel.model_ids;
    out.model_ids.insert(out.model_ids.end(), {"COMB-AVG", "COMB-MED", "COMB-JOINT"});
    out.timestamps.assign(panel.timestamps.end() - static_cast<std::ptrdiff_t>(out_len),
                          panel.timestamps.end());
    out.realized.assign(panel.realized.end() - static_cast<std::ptrdiff_t>(out_len),
                        panel.realized.end());
    out.var_matrix.assign(out_len, std::vector<double>(M + 3));
    out.es_matrix.assign(out_len, std::vector<double>(M + 3));

    CombinationWeights weights;
    bool have = false;
    ComboFitOptions opts;
    opts.seed = plan.seed;
    for (std::size_t u = n; u < time; ++u) {
        bool due = !have || (u - n) % plan.combo_refit_interval == 0;
        if (due) {
            std::vector<std::vector<double>> wv(panel.var_matrix.begin() + (u - n),
                                                panel.var_matrix.begin() + u);
            std::vector<std::vector<double>> we(panel.es_matrix.begin() + (u - n),
                                                panel.es_matrix.begin() + u);
            std::vector<double> wr(panel.realized.begin() + (u - n),
                                   panel.realized.begin() + u);
            try {
                weights = fit_joint_combination(wv, we, wr, panel.alpha, opts);
                opts.warm_start = raw_params(weights);
                opts.random_starts = 2;
                opts.max_evals = 1500;
                have = true;
            } catch (const FittingError&) {
                weights.beta.assign(M, 1.0 / static_cast<double>(M));
                weights.gamma.assign(M, 1.0 / static_cast<double>(M));
                weights.fallback_equal = true;
                ++out.combo_fallbacks;
                have = true;
            }
        }
        const auto& vrow = panel.var_matrix[u];
        const auto& erow = panel.es_matrix[u];
        auto& ov = out.var_matrix[u - n];
        auto& oe = out.es_matrix[u - n];
        for (std::size_t i = 0; i < M; ++i) {
            ov[i] = vrow[i];
            oe[i] = erow[i];
        }
        ov[M] = combine_simple_average(vrow);
        oe[M] = std::min(combine_simple_average(erow), ov[M] - 1e-8);
        ov[M + 1] = combine_median(vrow);
        oe[M + 1] = std::min(combine_median(erow), ov[M + 1] - 1e-8);
        auto joint = combined_forecast(weights, vrow, erow, panel.alpha);
        ov[M + 2] = joint.var;
        oe[M + 2] = joint.es;
    }
    return out;
}

ReturnSeries simulate_dgp(std::size_t n, std::uint64_t seed) {
    if (n < 100) throw InputError("simulate_dgp: n must be at least 100");
    constexpr std::size_t kBurnIn = 500;
    Rng rng(seed);
    double ln_s2 = 0.025 / (1.0 - 0.065);  // recursion fixed point sans shocks
    double eps = 0;
    std::vector<double> returns;
    returns.reserve(n);
    std::vector<std::int64_t> stamps;
    stamps.reserve(n);
    for (std::size_t i = 0; i < n + kBurnIn; ++i) {
        if (i > 0) {
            double sigma_prev = std::exp(0.5 * ln_s2);
            ln_s2 = 0.025 + 0.25 * (std::fabs(eps) + 0.035 * eps) / sigma_prev +
                    0.065 * ln_s2;
        }
        double sigma = std::exp(0.5 * ln_s2);
        eps = 0.85 * sigma * rng.laplace();
        if (i >= kBurnIn) {
            returns.push_back(0.025 + eps);
            stamps.push_back(static_cast<std::int64_t>(i - kBurnIn + 1));
        }
    }
    return ReturnSeries(std::move(stamps), std::move(returns));
}

SimulationStudyResult run_simulation_study(std::uint64_t seed) {
    RollingPlan plan;
    plan.initial_window = 1000;
    plan.refit_interval = 25;
    plan.seed = seed;
    plan.care_fixed_tau = true;
    plan.model_list = {"EWMA",     "GARCH-N",         "GARCH-T",
                       "GJRGARCH-N", "GJRGARCH-T",    "CARE-AS",
                       "CARE-SAV", "CAVIARES-SAV-AR", "CAVIARES-AS-EXP"};
    const double alpha = 0.05;

    ReturnSeries series = simulate_dgp(3500, seed);
    SimulationStudyResult out;
    out.panel = run_rolling(series, plan, alpha);
    const auto& panel = out.panel;
    const std::size_t time = panel.realized.size();
    const std::size_t M = panel.model_ids.size();

    auto column = [&](const std::vector<std::vector<double>>& mat, std::size_t j) {
        std::vector<double> c(time);
        for (std::size_t t = 0; t < time; ++t) c[t] = mat[t][j];
        return c;
    };
    auto var_only_report = [&](const std::string& id, const std::vector<double>& fc,
                               double level) {
        BacktestReport r;
        r.model_id = id;
        auto vr = violation_ratio(panel.realized, fc, level);
        r.vrate = vr.vrate;
        r.vratio = vr.vratio;
        auto hits = make_hits(panel.realized, fc, level);
        auto uc = uc_test(hits);
        r.uc_stat = uc.stat;
        r.uc_p = uc.p;
        auto cc = cc_test(hits);
        r.cc_stat = cc.stat;
        r.cc_p = cc.p;
        auto d1 = dq_test(hits, fc, 1);
        r.dq1_stat = d1.stat;
        r.dq1_p = d1.p;
        auto d4 = dq_test(hits, fc, 4);
        r.dq4_stat = d4.stat;
        r.dq4_p = d4.p;
        r.qlf = quantile_loss(panel.realized, fc, level);
        return r;
    };

    for (std::size_t j = 0; j < M; ++j)
        out.reports.push_back(backtest_model(panel.model_ids[j], panel.realized,
                                             column(panel.var_matrix, j),
                                             column(panel.es_matrix, j), alpha));

    // Quantile-LASSO VaR combination at tau = alpha, fitted in sample over
    // the full forecast panel.
    {
        auto spec = fit_quantile_lasso_cv(panel.var_matrix, panel.realized, alpha);
        std::vector<double> fc(time);
        for (std::size_t t = 0; t < time; ++t) fc[t] = lasso_predict(spec, panel.var_matrix[t]);
        out.reports.push_back(var_only_report("QLASSO", fc, alpha));
    }

    // ES combinations at the nominal backtesting levels.
    const std::pair<const char*, double> kEsVariants[] = {
        {"QLASSO-N", 0.0196}, {"QLASSO-T4", 0.0164}, {"QLASSO-T6", 0.0175},
        {"QLASSO-AL", 0.0184}};
    for (const auto& [name, tau] : kEsVariants) {
        auto spec = fit_quantile_lasso_cv(panel.es_matrix, panel.realized, tau);
        std::vector<double> fc(time);
        for (std::size_t t = 0; t < time; ++t) fc[t] = lasso_predict(spec, panel.es_matrix[t]);
        out.reports.push_back(var_only_report(name, fc, tau));
    }
    return out;
}

}  // namespace tailrisk
