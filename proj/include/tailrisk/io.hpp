#pragma once

// File formats: series ingestion (price or return CSV), forecast-panel
// export/import, and run manifests.

#include <string>

#include "tailrisk/engine.hpp"
#include "tailrisk/series.hpp"

namespace tailrisk {

// CSV with a header of either `timestamp,price` or `timestamp,return`.
// Timestamps are epoch seconds or ISO-8601 (YYYY-MM-DD[THH:MM:SS[Z]]).
// Price files are converted to percentage log returns.
ReturnSeries read_series_csv(const std::string& path);

// `timestamp,return` rows, full double precision.
void write_series_csv(const std::string& path, const ReturnSeries& series);

// Long format `timestamp,model,alpha,var,es,realized`, one row per cell.
void write_panel_csv(const std::string& path, const ForecastPanel& panel);
ForecastPanel read_panel_csv(const std::string& path);

// Stable 64-bit hash of the plan + inputs that went into a run.
std::string config_hash(const std::string& command, const std::string& input,
                        const RollingPlan& plan);

// JSON manifest next to an output artifact: command, input, seed, plan and
// the config hash. Rerunning with the same manifest reproduces the output.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& input, const RollingPlan& plan);

}  // namespace tailrisk
