#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tailrisk/engine.hpp"

namespace fs = std::filesystem;
using namespace tailrisk;

namespace {

const char* kCliPath = RISKCLI_PATH;

int run_cli(const std::string& args) {
    std::string cmd = std::string(kCliPath) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("riskcli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_returns_csv(const fs::path& file, const ReturnSeries& s) {
    std::ofstream out(file);
    out.precision(17);
    out << "timestamp,return\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << s.timestamps()[i] << "," << s.returns()[i] << "\n";
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("ingest computes summary statistics from a price file") {
    auto dir = fresh_dir("ingest");
    auto s = simulate_dgp(900, 3);
    {
        std::ofstream out(dir / "prices.csv");
        out.precision(17);
        out << "timestamp,price\n";
        double p = 100.0;
        out << 0 << "," << p << "\n";
        for (std::size_t i = 0; i < s.size(); ++i) {
            p *= std::exp(s.returns()[i] / 100.0);
            out << s.timestamps()[i] << "," << p << "\n";
        }
    }
    int rc = run_cli("ingest --input " + (dir / "prices.csv").string() + " --output " +
                     (dir / "out").string());
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "out" / "returns.csv"));
    CHECK(fs::exists(dir / "out" / "manifest_ingest.json"));
    auto stats = slurp(dir / "out" / "series_stats.txt");
    CHECK(stats.find("count 900") != std::string::npos);
    CHECK(stats.find("adf_stat") != std::string::npos);
}

TEST_CASE("ingest on an insufficient series fails cleanly and removes outputs") {
    auto dir = fresh_dir("tiny");
    {
        std::ofstream out(dir / "prices.csv");
        out << "timestamp,price\n1,100\n2,101\n3,99\n";
    }
    int rc = run_cli("ingest --input " + (dir / "prices.csv").string() + " --output " +
                     (dir / "out").string());
    CHECK(rc == 1);
    CHECK_FALSE(fs::exists(dir / "out" / "series_stats.txt"));
    CHECK_FALSE(fs::exists(dir / "out" / "manifest_ingest.json"));
}

TEST_CASE("forecast then backtest round trip") {
    auto dir = fresh_dir("pipeline");
    write_returns_csv(dir / "returns.csv", simulate_dgp(800, 21));
    int rc = run_cli("forecast --input " + (dir / "returns.csv").string() + " --output " +
                     (dir / "fc").string() +
                     " --models EWMA,HS,GARCH-N --initial-window 500 --hs-window 100"
                     " --refit-interval 10 --alpha 0.05 --seed 5");
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(dir / "fc" / "panel_a0p05.csv"));

    rc = run_cli("backtest --input " + (dir / "fc" / "panel_a0p05.csv").string() +
                 " --output " + (dir / "bt").string() +
                 " --eval-tail 250 --seed 5 --emit-plot-data");
    REQUIRE(rc == 0);
    auto table = slurp(dir / "bt" / "backtest_a0p05.csv");
    CHECK(table.find("model,alpha,vrate") == 0);
    CHECK(table.find("EWMA,") != std::string::npos);
    CHECK(table.find("GARCH-N,") != std::string::npos);
    CHECK(fs::exists(dir / "bt" / "backtest_a0p05.txt"));
    CHECK(fs::exists(dir / "bt" / "es_backtest_a0p05.csv"));
    CHECK(fs::exists(dir / "bt" / "mcs_a0p05.csv"));
    CHECK(fs::exists(dir / "bt" / "plot_HS_a0p05.csv"));
    auto mcs = slurp(dir / "bt" / "mcs_a0p05.csv");
    CHECK(mcs.find("model,mcs_p,mcs75,mcs90") == 0);
}

TEST_CASE("combine appends combination columns to a panel") {
    auto dir = fresh_dir("combine");
    write_returns_csv(dir / "returns.csv", simulate_dgp(800, 33));
    int rc = run_cli("forecast --input " + (dir / "returns.csv").string() + " --output " +
                     (dir / "fc").string() +
                     " --models EWMA,GARCH-N --initial-window 500"
                     " --refit-interval 25 --alpha 0.05 --seed 2");
    REQUIRE(rc == 0);
    rc = run_cli("combine --input " + (dir / "fc" / "panel_a0p05.csv").string() +
                 " --output " + (dir / "cb").string() +
                 " --combo-window 200 --combo-refit-interval 20 --seed 2 --emit-plot-data");
    REQUIRE(rc == 0);
    auto combined = slurp(dir / "cb" / "combined_a0p05.csv");
    CHECK(combined.find("COMB-AVG") != std::string::npos);
    CHECK(combined.find("COMB-JOINT") != std::string::npos);
    auto weights = slurp(dir / "cb" / "weights_joint_a0p05.csv");
    CHECK(weights.find("window_end_timestamp,beta_EWMA,beta_GARCH-N,gamma_EWMA") == 0);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    auto dir = fresh_dir("determinism");
    write_returns_csv(dir / "returns.csv", simulate_dgp(700, 99));
    std::string base = "forecast --input " + (dir / "returns.csv").string() +
                       " --models EWMA,HS,CAVIAR-SAV --initial-window 500 --hs-window 100"
                       " --refit-interval 20 --alpha 0.05 --seed 11 --output ";
    REQUIRE(run_cli(base + (dir / "a").string()) == 0);
    REQUIRE(run_cli(base + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "panel_a0p05.csv") == slurp(dir / "b" / "panel_a0p05.csv"));
}

TEST_CASE("oversized evaluation tail is rejected with exit code 1") {
    auto dir = fresh_dir("evaltail");
    write_returns_csv(dir / "returns.csv", simulate_dgp(700, 4));
    REQUIRE(run_cli("forecast --input " + (dir / "returns.csv").string() + " --output " +
                    (dir / "fc").string() +
                    " --models EWMA,HS --initial-window 500 --hs-window 100 --alpha 0.05") ==
            0);
    int rc = run_cli("backtest --input " + (dir / "fc" / "panel_a0p05.csv").string() +
                     " --output " + (dir / "bt").string() + " --eval-tail 5000");
    CHECK(rc == 1);
    CHECK_FALSE(fs::exists(dir / "bt" / "backtest_a0p05.csv"));
}

TEST_CASE("bad invocations exit with code 1") {
    auto dir = fresh_dir("bad");
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("forecast --input /nonexistent.csv --output " + (dir / "x").string()) == 1);
    write_returns_csv(dir / "returns.csv", simulate_dgp(700, 4));
    CHECK(run_cli("forecast --input " + (dir / "returns.csv").string() + " --output " +
                  (dir / "y").string() + " --models NOT-A-MODEL --initial-window 500") == 1);
}
