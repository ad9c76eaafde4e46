#pragma once

// Run configuration: one JSON document with population, market, conjoint,
// prior, sampler and decision sections. Every simulation constant is a named
// key; the paper-scale values are the defaults and a desk-scale preset keeps
// end-to-end runs fast.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "priceopt/model.hpp"
#include "priceopt/nuts.hpp"
#include "priceopt/population.hpp"
#include "priceopt/simulator.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

struct DecisionConfig {
    int n0 = 1000;
    double variable_cost = 5.0;
    double grid_lo = 14.0;
    double grid_hi = 18.0;
    double grid_step = 0.25;
    int ground_truth_replications = 100;
    // "estimated": subscribers keep their posterior u draws;
    // "fresh": every u is regenerated from N(0, tau^2).
    std::string subscriber_u = "estimated";

    std::vector<double> price_grid() const {
        return make_price_grid(grid_lo, grid_hi, grid_step);
    }
};

enum class Preset { paper, desk };

struct RunConfig {
    std::uint64_t seed = 1;
    ModelVariant variant = ModelVariant::full;
    std::string output_dir = "out";

    PopulationSpec population;  // seed field is derived from the master seed
    ParameterVector true_params;
    MarketConfig market;
    ConjointConfig conjoint;
    PriorConfig priors;
    SamplerConfig sampler;
    DecisionConfig decision;

    bool no_conjoint = false;
    bool allow_nonconverged = false;

    void validate() const;
};

// Defaults for a preset; `desk` shrinks the market, conjoint and sampler
// sizes (n0=100, m=50, 4 chains x 3000, warmup 1000, thinning 10).
RunConfig default_config(Preset preset = Preset::paper);

// Preset defaults overlaid with the keys present in a JSON config file.
RunConfig load_config(const std::string& path, Preset preset = Preset::paper);
RunConfig config_from_json(const nlohmann::json& doc, Preset preset = Preset::paper);

// Full resolved configuration, suitable for manifests and exact reruns.
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace priceopt
