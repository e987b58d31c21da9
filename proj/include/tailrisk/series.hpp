#pragma once

// Return-series data model: construction from prices, descriptive statistics
// and ADF stationarity screening.

#include <cstdint>
#include <vector>

namespace tailrisk {

// Percentage log returns with strictly increasing integer sort keys
// (epoch seconds for ingested data, plain indices for simulated data).
class ReturnSeries {
public:
    ReturnSeries() = default;
    ReturnSeries(std::vector<std::int64_t> timestamps, std::vector<double> returns);

    const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
    const std::vector<double>& returns() const { return returns_; }
    std::size_t size() const { return returns_.size(); }

    // Trailing window [end - len, end) as a plain vector.
    std::vector<double> window(std::size_t end, std::size_t len) const;

private:
    std::vector<std::int64_t> timestamps_;
    std::vector<double> returns_;
};

struct DescriptiveStats {
    std::size_t count = 0;
    double mean = 0, std = 0, min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
    double skewness = 0, kurtosis = 0;
};

struct AdfResult {
    double statistic = 0;
    double p_value = 1;
    bool reject = false;
    int lag = 0;
};

// returns[i] = 100 * ln(prices[i+1] / prices[i]); timestamps, when given,
// must have the same length as prices and the first one is dropped.
ReturnSeries log_returns(const std::vector<double>& prices,
                         const std::vector<std::int64_t>& timestamps = {});

DescriptiveStats describe(const ReturnSeries& series);

// Augmented Dickey-Fuller test with constant, lag order chosen by AIC up to
// max_lag. reject is true iff p_value < 0.05.
AdfResult adf_test(const ReturnSeries& series, int max_lag);

// Linear-interpolation sample quantile of an unsorted copy of the data.
double sample_quantile(std::vector<double> data, double p);

}  // namespace tailrisk
