#pragma once

// Command implementations behind the CLI subcommands. Every command works
// inside config.output_dir and is a pure function of (config, input files,
// seed): reruns produce byte-identical outputs.

#include "priceopt/config.hpp"

namespace priceopt {

// Writes purchase_history.csv, conjoint.csv, ground_truth.csv,
// population.json and manifest.json.
int cmd_simulate(const RunConfig& config);

// Reads the datasets, fits config.variant, writes draws<suffix>.csv,
// summary<suffix>.json, diagnostics<suffix>.json. Returns 3 when any
// reported R-hat is >= 1.05 and allow_nonconverged is off.
int cmd_fit(const RunConfig& config, const std::string& suffix = "");

// Reads draws<suffix>.csv plus the datasets, writes profit_curve<suffix>.csv
// and optimal_price<suffix>.json.
int cmd_optimize(const RunConfig& config, const std::string& suffix = "");

// Fit + optimize for the three misspecification variants on the same data.
int cmd_scenario(const RunConfig& config);

// Prints diagnostics for draws.csv in the output directory.
int cmd_diagnose(const RunConfig& config);

}  // namespace priceopt
