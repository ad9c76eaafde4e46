#pragma once

// MCMC convergence diagnostics: rank-normalized split R-hat, bulk and tail
// effective sample sizes (Geyer initial monotone sequence), and posterior
// summary tables.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "priceopt/nuts.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

// Chains of draws for a single parameter. All functions return NaN as the
// "undefined" marker (constant draws, too few draws).
using ChainDraws = std::vector<std::vector<double>>;

// First-half/second-half split of every chain.
ChainDraws split_chains(const ChainDraws& chains);

// Pooled average ranks mapped through the normal quantile function.
ChainDraws rank_normalize(const ChainDraws& chains);

// Classic potential scale reduction factor, no splitting or normalization.
double rhat_basic(const ChainDraws& chains);

// Effective sample size from chain autocorrelations, no splitting or
// normalization.
double ess_basic(const ChainDraws& chains);

// Rank-normalized split R-hat: max of the bulk statistic and the statistic
// of the median-folded draws.
double split_rhat(const ChainDraws& chains);

double ess_bulk(const ChainDraws& chains);

// Minimum ESS of the 5% and 95% quantile indicator sequences.
double ess_tail(const ChainDraws& chains);

// Monte Carlo standard error of the posterior mean.
double mcse_mean(const ChainDraws& chains);

struct ParameterSummary {
    std::string name;
    bool pinned = false;  // baseline category, no statistics
    std::optional<double> true_value;
    double mean = 0.0, sd = 0.0, q025 = 0.0, q975 = 0.0;
    double rhat = 0.0, ess_bulk = 0.0, ess_tail = 0.0;
};

struct ChainStats {
    int chain = 0;  // 1-based
    int divergences = 0;
    double mean_accept = 0.0;
};

struct DiagnosticsReport {
    std::vector<ParameterSummary> parameters;
    std::vector<ChainStats> chains;
    int retained_per_chain = 0;
    int total_retained = 0;
    double max_rhat = 0.0;  // over parameters with a defined R-hat
    int total_divergences = 0;
};

// ESS values reported in summaries are capped at this multiple of the total
// retained draws.
inline constexpr double kEssReportCap = 1.5;

// Summaries for every stored column; names starting "u[" or "z[" are
// excluded unless include_individual is set.
std::vector<ParameterSummary> summarize(
    const PosteriorDraws& draws,
    const std::map<std::string, double>* true_values = nullptr,
    bool include_individual = false);

// Summary rows in the reporting order of the fitted variant, with pinned
// baseline rows interleaved (statistics left undefined).
std::vector<ParameterSummary> summary_table(
    const PosteriorDraws& draws, ModelVariant variant,
    const std::map<std::string, double>* true_values = nullptr);

DiagnosticsReport diagnose(const PosteriorDraws& draws,
                           const std::map<std::string, double>* true_values = nullptr);

// Table-2-style true-value map for a parameter vector under a variant.
std::map<std::string, double> true_value_map(const ParameterVector& params,
                                             ModelVariant variant);

}  // namespace priceopt
