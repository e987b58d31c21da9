#pragma once

#include <cstdint>
#include <string>

namespace tailrisk {

// One (VaR, ES) pair. Both tail values are negative for lower-tail alpha.
struct RiskForecast {
    double var = 0;
    double es = 0;
    double alpha = 0;
    std::int64_t timestamp = 0;
    std::string model_id;
    bool crossing_clamped = false;  // set when ES had to be clamped below VaR
};

}  // namespace tailrisk
