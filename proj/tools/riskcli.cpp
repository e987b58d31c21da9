// Command-line front end for the tail-risk forecasting library.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "tailrisk/backtest.hpp"
#include "tailrisk/combination.hpp"
#include "tailrisk/distributions.hpp"
#include "tailrisk/engine.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/io.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/series.hpp"

namespace fs = std::filesystem;
using namespace tailrisk;

namespace {

struct Cli {
    std::string command;
    std::string input;
    std::string output = ".";
    RollingPlan plan;
    int reps = 1;
    bool emit_plot_data = false;
};

// Tracks files written by the current command so a failure can remove
// partial outputs.
struct OutputTracker {
    std::vector<std::string> files;
    std::string path(const Cli& cli, const std::string& name) {
        fs::create_directories(cli.output);
        std::string p = (fs::path(cli.output) / name).string();
        files.push_back(p);
        return p;
    }
    void discard_all() {
        for (const auto& f : files) {
            std::error_code ec;
            fs::remove(f, ec);
        }
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write output file: " + path);
    out << text;
}

std::string alpha_tag(double a) {
    std::ostringstream os;
    os << a;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

void emit_model_series(const Cli& cli, OutputTracker& out, const ForecastPanel& panel,
                       const std::string& prefix) {
    for (std::size_t j = 0; j < panel.model_ids.size(); ++j) {
        std::ostringstream os;
        os.precision(17);
        os << "timestamp,realized,var,es\n";
        for (std::size_t t = 0; t < panel.realized.size(); ++t)
            os << panel.timestamps[t] << "," << panel.realized[t] << ","
               << panel.var_matrix[t][j] << "," << panel.es_matrix[t][j] << "\n";
        write_text(out.path(cli, prefix + "_" + panel.model_ids[j] + "_a" +
                                     alpha_tag(panel.alpha) + ".csv"),
                   os.str());
    }
}

int cmd_ingest(const Cli& cli, OutputTracker& out) {
    ReturnSeries series = read_series_csv(cli.input);
    write_series_csv(out.path(cli, "returns.csv"), series);
    auto stats = describe(series);
    auto adf = adf_test(series, 20);
    std::ostringstream os;
    os.precision(10);
    os << "count " << stats.count << "\nmean " << stats.mean << "\nstd " << stats.std
       << "\nmin " << stats.min << "\nq25 " << stats.q25 << "\nmedian " << stats.median
       << "\nq75 " << stats.q75 << "\nmax " << stats.max << "\nskewness " << stats.skewness
       << "\nkurtosis " << stats.kurtosis << "\nadf_stat " << adf.statistic << "\nadf_p "
       << adf.p_value << "\nadf_lag " << adf.lag << "\nadf_reject_unit_root "
       << (adf.reject ? "yes" : "no") << "\n";
    write_text(out.path(cli, "series_stats.txt"), os.str());
    write_manifest(out.path(cli, "manifest_ingest.json"), "ingest", cli.input, cli.plan);
    std::cout << os.str();
    return 0;
}

int cmd_forecast(const Cli& cli, OutputTracker& out) {
    ReturnSeries series = read_series_csv(cli.input);
    for (double a : cli.plan.alphas) {
        ForecastPanel panel = run_rolling(series, cli.plan, a);
        write_panel_csv(out.path(cli, "panel_a" + alpha_tag(a) + ".csv"), panel);
        for (const auto& d : panel.dropped_models)
            std::cerr << "note: model " << d << " failed its first window and was dropped\n";
    }
    write_manifest(out.path(cli, "manifest_forecast.json"), "forecast", cli.input, cli.plan);
    return 0;
}

int cmd_combine(const Cli& cli, OutputTracker& out) {
    ForecastPanel panel = read_panel_csv(cli.input);
    ForecastPanel combined = run_combination(panel, cli.plan);
    write_panel_csv(out.path(cli, "combined_a" + alpha_tag(combined.alpha) + ".csv"),
                    combined);
    if (combined.combo_fallbacks > 0)
        std::cerr << "note: " << combined.combo_fallbacks
                  << " joint-combination windows fell back to equal weights\n";
    if (cli.emit_plot_data) {
        // Weight trajectory of the joint combiner, re-estimated per window.
        std::ostringstream os;
        os.precision(17);
        os << "window_end_timestamp";
        for (const auto& m : panel.model_ids) os << ",beta_" << m;
        for (const auto& m : panel.model_ids) os << ",gamma_" << m;
        os << "\n";
        const std::size_t n = cli.plan.combo_window;
        ComboFitOptions opts;
        opts.seed = cli.plan.seed;
        for (std::size_t u = n; u < panel.realized.size();
             u += std::max<std::size_t>(cli.plan.combo_refit_interval, 1)) {
            std::vector<std::vector<double>> wv(panel.var_matrix.begin() + (u - n),
                                                panel.var_matrix.begin() + u);
            std::vector<std::vector<double>> we(panel.es_matrix.begin() + (u - n),
                                                panel.es_matrix.begin() + u);
            std::vector<double> wr(panel.realized.begin() + (u - n),
                                   panel.realized.begin() + u);
            CombinationWeights w;
            try {
                w = fit_joint_combination(wv, we, wr, panel.alpha, opts);
                opts.warm_start = raw_params(w);
                opts.random_starts = 2;
                opts.max_evals = 1500;
            } catch (const FittingError&) {
                std::size_t M = panel.model_ids.size();
                w.beta.assign(M, 1.0 / static_cast<double>(M));
                w.gamma.assign(M, 1.0 / static_cast<double>(M));
            }
            os << panel.timestamps[u - 1];
            for (double b : w.beta) os << "," << b;
            for (double g : w.gamma) os << "," << g;
            os << "\n";
        }
        write_text(out.path(cli, "weights_joint_a" + alpha_tag(panel.alpha) + ".csv"),
                   os.str());
    }
    write_manifest(out.path(cli, "manifest_combine.json"), "combine", cli.input, cli.plan);
    return 0;
}

int cmd_backtest(const Cli& cli, OutputTracker& out) {
    ForecastPanel panel = read_panel_csv(cli.input);
    const std::size_t time = panel.realized.size();
    if (cli.plan.eval_tail > time)
        throw InputError("eval_tail exceeds the panel length");
    const std::size_t start = time - cli.plan.eval_tail;

    ForecastPanel tail;
    tail.alpha = panel.alpha;
    tail.model_ids = panel.model_ids;
    tail.timestamps.assign(panel.timestamps.begin() + start, panel.timestamps.end());
    tail.realized.assign(panel.realized.begin() + start, panel.realized.end());
    tail.var_matrix.assign(panel.var_matrix.begin() + start, panel.var_matrix.end());
    tail.es_matrix.assign(panel.es_matrix.begin() + start, panel.es_matrix.end());

    const std::size_t M = tail.model_ids.size();
    const std::size_t T = tail.realized.size();
    std::vector<BacktestReport> reports;
    std::vector<std::vector<double>> qlf_losses(T, std::vector<double>(M));
    double es_level = nominal_es_level_semiparametric(panel.alpha);
    std::ostringstream es_os;
    es_os.precision(10);
    es_os << "model,es_level,es_vrate,es_vratio\n";
    for (std::size_t j = 0; j < M; ++j) {
        std::vector<double> v(T), e(T);
        for (std::size_t t = 0; t < T; ++t) {
            v[t] = tail.var_matrix[t][j];
            e[t] = tail.es_matrix[t][j];
            double hit = tail.realized[t] < v[t] ? 1.0 : 0.0;
            qlf_losses[t][j] = (tail.realized[t] - v[t]) * (panel.alpha - hit);
        }
        reports.push_back(backtest_model(tail.model_ids[j], tail.realized, v, e, panel.alpha));
        auto evr = violation_ratio(tail.realized, e, es_level);
        es_os << tail.model_ids[j] << "," << es_level << "," << evr.vrate << ","
              << evr.vratio << "\n";
    }

    std::string mcs_note;
    std::ostringstream table;
    table << reports_to_table(reports, panel.alpha);
    if (M >= 2) {
        auto mcs75 = model_confidence_set(qlf_losses, 0.75, 1000, 10.0, cli.plan.seed);
        auto mcs90 = model_confidence_set(qlf_losses, 0.90, 1000, 10.0, cli.plan.seed);
        std::ostringstream os;
        os.precision(10);
        os << "model,mcs_p,mcs75,mcs90\n";
        for (std::size_t j = 0; j < M; ++j) {
            bool in75 = std::find(mcs75.included.begin(), mcs75.included.end(),
                                  static_cast<int>(j)) != mcs75.included.end();
            bool in90 = std::find(mcs90.included.begin(), mcs90.included.end(),
                                  static_cast<int>(j)) != mcs90.included.end();
            os << tail.model_ids[j] << "," << mcs75.p_values[j] << "," << (in75 ? 1 : 0)
               << "," << (in90 ? 1 : 0) << "\n";
        }
        mcs_note = os.str();
    }
    write_text(out.path(cli, "backtest_a" + alpha_tag(panel.alpha) + ".csv"), table.str());
    write_text(out.path(cli, "backtest_a" + alpha_tag(panel.alpha) + ".txt"),
               reports_to_document(reports));
    write_text(out.path(cli, "es_backtest_a" + alpha_tag(panel.alpha) + ".csv"),
               es_os.str());
    if (!mcs_note.empty())
        write_text(out.path(cli, "mcs_a" + alpha_tag(panel.alpha) + ".csv"), mcs_note);
    if (cli.emit_plot_data) emit_model_series(cli, out, tail, "plot");
    write_manifest(out.path(cli, "manifest_backtest.json"), "backtest", cli.input, cli.plan);
    std::cout << table.str();
    return 0;
}

std::string simulation_table(const SimulationStudyResult& res) {
    const auto& r = res.reports;
    // QLF ranks within the VaR section (first 10 rows) and the ES section.
    std::vector<int> rank(r.size(), 0);
    auto rank_section = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            int rk = 1;
            for (std::size_t j = lo; j < hi; ++j)
                if (r[j].qlf < r[i].qlf) ++rk;
            rank[i] = rk;
        }
    };
    std::size_t es_start = r.size() - 4;
    rank_section(0, es_start);
    rank_section(es_start, r.size());
    std::ostringstream os;
    os.precision(10);
    os << "model,section,vrate,vratio,dq4_stat,dq4_p,dq4_result,qlf,qlf_rank\n";
    for (std::size_t i = 0; i < r.size(); ++i)
        os << r[i].model_id << "," << (i < es_start ? "VaR" : "ES") << "," << r[i].vrate
           << "," << r[i].vratio << "," << r[i].dq4_stat << "," << r[i].dq4_p << ","
           << (r[i].dq4_p >= 0.05 ? "ACCEPT" : "REJECT") << "," << r[i].qlf << ","
           << rank[i] << "\n";
    return os.str();
}

int cmd_simulate(const Cli& cli, OutputTracker& out) {
    for (int rep = 0; rep < cli.reps; ++rep) {
        std::uint64_t seed = cli.reps == 1
                                 ? cli.plan.seed
                                 : Rng::derive_seed(cli.plan.seed, 0x73696d,
                                                    static_cast<std::uint64_t>(rep));
        auto res = run_simulation_study(seed);
        std::string table = simulation_table(res);
        std::string name = "simulation_rep" + std::to_string(rep);
        write_text(out.path(cli, name + ".csv"), table);
        RollingPlan p = cli.plan;
        p.seed = seed;
        write_manifest(out.path(cli, "manifest_" + name + ".json"), "simulate", "", p);
        if (rep == 0) std::cout << table;
    }
    return 0;
}

int cmd_report(const Cli& cli, OutputTracker& out) {
    ForecastPanel panel = read_panel_csv(cli.input);
    const std::size_t M = panel.model_ids.size();
    const std::size_t T = panel.realized.size();
    std::vector<BacktestReport> reports;
    for (std::size_t j = 0; j < M; ++j) {
        std::vector<double> v(T), e(T);
        for (std::size_t t = 0; t < T; ++t) {
            v[t] = panel.var_matrix[t][j];
            e[t] = panel.es_matrix[t][j];
        }
        reports.push_back(
            backtest_model(panel.model_ids[j], panel.realized, v, e, panel.alpha));
    }
    std::string doc = reports_to_document(reports);
    write_text(out.path(cli, "report_a" + alpha_tag(panel.alpha) + ".txt"), doc);
    emit_model_series(cli, out, panel, "plot");
    write_manifest(out.path(cli, "manifest_report.json"), "report", cli.input, cli.plan);
    std::cout << doc;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Cli cli;
    CLI::App app{"Tail-risk forecasting: rolling VaR/ES models, combination and backtesting"};
    app.set_config("--config", "", "Plain-text config file (key=value); flags win");
    app.add_option("command", cli.command, "One of: ingest forecast combine backtest simulate report")
        ->required();
    app.add_option("--input", cli.input, "Input file (series or panel CSV)");
    app.add_option("--output", cli.output, "Output directory");
    std::vector<double> alphas;
    app.add_option("--alpha", alphas, "Tail level, repeatable (default 0.01 0.05)");
    app.add_option("--initial-window", cli.plan.initial_window, "Rolling fit window");
    app.add_option("--hs-window", cli.plan.hs_window, "Historical-simulation window");
    app.add_option("--combo-window", cli.plan.combo_window, "Combination window");
    app.add_option("--eval-tail", cli.plan.eval_tail, "Evaluation tail length");
    std::string models;
    app.add_option("--models", models, "Comma-separated model ids");
    app.add_option("--seed", cli.plan.seed, "Base RNG seed");
    app.add_option("--reps", cli.reps, "Simulation repetitions");
    app.add_option("--refit-interval", cli.plan.refit_interval, "Origins between refits");
    app.add_option("--combo-refit-interval", cli.plan.combo_refit_interval,
                   "Windows between joint-weight refits");
    app.add_flag("--emit-plot-data", cli.emit_plot_data, "Write plain plot-data files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (!alphas.empty()) cli.plan.alphas = alphas;
    if (cli.plan.alphas.empty()) {
        std::cerr << "error: at least one --alpha is required\n";
        return 1;
    }
    if (!models.empty()) {
        cli.plan.model_list.clear();
        std::stringstream ss(models);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) cli.plan.model_list.push_back(tok);
    }

    OutputTracker out;
    try {
        if (cli.command == "ingest") return cmd_ingest(cli, out);
        if (cli.command == "forecast") return cmd_forecast(cli, out);
        if (cli.command == "combine") return cmd_combine(cli, out);
        if (cli.command == "backtest") return cmd_backtest(cli, out);
        if (cli.command == "simulate") return cmd_simulate(cli, out);
        if (cli.command == "report") return cmd_report(cli, out);
        std::cerr << "error: unknown command '" << cli.command << "'\n";
        return 1;
    } catch (const InternalError& e) {
        out.discard_all();
        std::cerr << "internal error [" << cli.command << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        out.discard_all();
        std::cerr << "error [" << cli.command << "]: " << e.what() << "\n";
        return 1;
    }
}
