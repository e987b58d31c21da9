#include "tailrisk/io.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "tailrisk/errors.hpp"

#include <nlohmann/json.hpp>

namespace tailrisk {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::int64_t parse_timestamp(const std::string& s, std::size_t lineno) {
    if (s.empty()) throw InputError("empty timestamp at line " + std::to_string(lineno));
    if (s.find('-') == std::string::npos) {
        try {
            return std::stoll(s);
        } catch (const std::exception&) {
            throw InputError("bad timestamp '" + s + "' at line " + std::to_string(lineno));
        }
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &sec);
    if (n < 3)
        n = std::sscanf(s.c_str(), "%4d-%2d-%2d %2d:%2d:%2d", &y, &mo, &d, &h, &mi, &sec);
    if (n < 3)
        throw InputError("bad timestamp '" + s + "' at line " + std::to_string(lineno));
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = sec;
    time_t t = timegm(&tm);
    if (t == static_cast<time_t>(-1))
        throw InputError("unrepresentable timestamp '" + s + "' at line " +
                         std::to_string(lineno));
    return static_cast<std::int64_t>(t);
}

double parse_double(const std::string& s, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("bad numeric field '" + s + "' at line " + std::to_string(lineno));
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ReturnSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open series file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty series file: " + path);
    auto header = split_csv_line(line);
    if (header.size() != 2)
        throw InputError("series header must have two columns, got: " + line);
    std::string kind = lower(header[1]);
    bool is_price = kind == "price";
    if (!is_price && kind != "return")
        throw InputError("series second column must be 'price' or 'return', got: " +
                         header[1]);

    std::vector<std::int64_t> stamps;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2)
            throw InputError("expected two fields at line " + std::to_string(lineno));
        stamps.push_back(parse_timestamp(f[0], lineno));
        values.push_back(parse_double(f[1], lineno));
    }
    if (is_price) return log_returns(values, stamps);
    return ReturnSeries(std::move(stamps), std::move(values));
}

void write_series_csv(const std::string& path, const ReturnSeries& series) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write series file: " + path);
    out << "timestamp,return\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << series.timestamps()[i] << "," << fmt(series.returns()[i]) << "\n";
}

void write_panel_csv(const std::string& path, const ForecastPanel& panel) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write panel file: " + path);
    out << "timestamp,model,alpha,var,es,realized\n";
    for (std::size_t t = 0; t < panel.realized.size(); ++t)
        for (std::size_t j = 0; j < panel.model_ids.size(); ++j)
            out << panel.timestamps[t] << "," << panel.model_ids[j] << ","
                << fmt(panel.alpha) << "," << fmt(panel.var_matrix[t][j]) << ","
                << fmt(panel.es_matrix[t][j]) << "," << fmt(panel.realized[t]) << "\n";
}

ForecastPanel read_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open panel file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) !=
            std::vector<std::string>{"timestamp", "model", "alpha", "var", "es", "realized"})
        throw InputError("panel header mismatch in " + path);

    ForecastPanel panel;
    std::vector<std::int64_t> stamps;
    std::vector<std::string> models;
    struct Cell { std::int64_t ts; std::size_t model; double var, es, realized; };
    std::vector<Cell> cells;
    std::size_t lineno = 1;
    bool have_alpha = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 6)
            throw InputError("expected six fields at line " + std::to_string(lineno) +
                             " of " + path);
        Cell c;
        c.ts = parse_timestamp(f[0], lineno);
        auto it = std::find(models.begin(), models.end(), f[1]);
        if (it == models.end()) {
            models.push_back(f[1]);
            c.model = models.size() - 1;
        } else {
            c.model = static_cast<std::size_t>(it - models.begin());
        }
        double a = parse_double(f[2], lineno);
        if (!have_alpha) {
            panel.alpha = a;
            have_alpha = true;
        } else if (a != panel.alpha) {
            throw InputError("mixed alpha values at line " + std::to_string(lineno) +
                             " of " + path);
        }
        c.var = parse_double(f[3], lineno);
        c.es = parse_double(f[4], lineno);
        c.realized = parse_double(f[5], lineno);
        if (stamps.empty() || stamps.back() != c.ts) stamps.push_back(c.ts);
        cells.push_back(c);
    }
    if (cells.empty()) throw InputError("panel file has no rows: " + path);
    const std::size_t T = stamps.size(), M = models.size();
    if (cells.size() != T * M)
        throw InputError("panel is not rectangular: " + std::to_string(cells.size()) +
                         " cells for " + std::to_string(T) + " times x " +
                         std::to_string(M) + " models");
    panel.model_ids = models;
    panel.timestamps = stamps;
    panel.realized.assign(T, 0.0);
    panel.var_matrix.assign(T, std::vector<double>(M));
    panel.es_matrix.assign(T, std::vector<double>(M));
    std::size_t row = 0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t j = 0; j < M; ++j, ++row) {
            const Cell& c = cells[row];
            if (c.ts != stamps[t] || c.model != j)
                throw InputError("panel rows out of order near timestamp " +
                                 std::to_string(c.ts));
            panel.var_matrix[t][j] = c.var;
            panel.es_matrix[t][j] = c.es;
            panel.realized[t] = c.realized;
        }
    return panel;
}

std::string config_hash(const std::string& command, const std::string& input,
                        const RollingPlan& plan) {
    std::ostringstream os;
    os << command << '|' << input << '|' << plan.initial_window << '|' << plan.hs_window
       << '|' << plan.combo_window << '|' << plan.eval_tail << '|' << plan.seed << '|'
       << plan.refit_interval << '|' << plan.combo_refit_interval << '|'
       << plan.care_fixed_tau;
    for (double a : plan.alphas) os << '|' << a;
    for (const auto& m : plan.model_list) os << '|' << m;
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& input, const RollingPlan& plan) {
    nlohmann::json j;
    j["command"] = command;
    j["input"] = input;
    j["seed"] = plan.seed;
    j["config_hash"] = config_hash(command, input, plan);
    j["plan"] = {{"initial_window", plan.initial_window},
                 {"hs_window", plan.hs_window},
                 {"combo_window", plan.combo_window},
                 {"eval_tail", plan.eval_tail},
                 {"alphas", plan.alphas},
                 {"models", plan.model_list},
                 {"refit_interval", plan.refit_interval},
                 {"combo_refit_interval", plan.combo_refit_interval},
                 {"care_fixed_tau", plan.care_fixed_tau}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace tailrisk
