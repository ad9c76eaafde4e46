#pragma once

// Generative market process: two-year purchase-history simulation, conjoint
// studies at the end of the horizon, and the exact (Rao-Blackwellized)
// ground truth for the decision grid.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "priceopt/population.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

struct MarketConfig {
    double launch_price = 16.0;
    std::map<int, double> price_changes = {{7, 0.5}, {19, 0.5}};  // period -> increment
    int horizon = 24;  // T
    int n0 = 1000;     // new potential customers per period

    void validate() const;
};

struct ConjointConfig {
    double kappa = 0.75;             // level shift active in conjoint tasks
    int participants_per_group = 200;  // m
    int tasks_per_participant = 10;    // k
    std::vector<double> price_grid;    // defaults to 12.0 .. 22.0 step 0.5

    ConjointConfig();
    void validate() const;
};

struct MarketState {
    int period = 0;    // last simulated period
    double price = 0.0;
    // S_{i, period+1}; only customers with S > 0 are stored.
    std::unordered_map<std::int64_t, int> s_counter;
    std::vector<std::int64_t> subscribers;  // D1, ascending
    std::vector<std::int64_t> last_d0;      // final-period potential pool, in sampled order
    std::vector<Observation> history;
};

MarketState simulate_purchase_history(const Population& pop, const MarketConfig& market,
                                      const ParameterVector& params, std::uint64_t seed);

inline constexpr const char* kConjointGroupLabels[3] = {"C0", "C1", "C2"};

struct ConjointRow {
    std::int64_t customer_id = 0;
    int group = 0;       // 0: final D0, 1: current subscribers, 2: never offered
    int task_index = 0;  // 1..k
    double price = 0.0;
    int s_periods = 0;
    bool choice = false;
};

struct ConjointStudy {
    std::vector<ConjointRow> rows;
};

ConjointStudy simulate_conjoint(const Population& pop, const MarketState& state,
                                const ConjointConfig& cfg, const ParameterVector& params,
                                std::uint64_t seed);

struct GroundTruthRow {
    double price = 0.0;
    double mu0 = 0.0;    // acquisition probability, averaged over fresh pools
    double mu1 = 0.0;    // retention probability over the final subscribers
    double profit = 0.0;
};

// Expected gross profit per grid price using exact purchase probabilities
// instead of Bernoulli draws, averaged over `replications` fresh draws of the
// potential pool.
std::vector<GroundTruthRow> compute_ground_truth(const Population& pop,
                                                 const MarketState& state,
                                                 const std::vector<double>& grid,
                                                 const ParameterVector& params, int n0,
                                                 double variable_cost, int replications,
                                                 std::uint64_t seed);

// Dataset views used by estimation and persistence.
ObservationSet history_observations(const Population& pop, const MarketState& state);
ObservationSet conjoint_observations(const Population& pop, const ConjointStudy& study);

// n distinct ids drawn uniformly from the population minus `excluded`.
std::vector<std::int64_t> sample_from_population(const Population& pop, int n,
                                                 const std::vector<std::int64_t>& excluded,
                                                 std::uint64_t seed,
                                                 std::uint64_t stream_tag);

std::vector<double> make_price_grid(double lo, double hi, double step);

}  // namespace priceopt
