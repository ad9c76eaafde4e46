#pragma once

// Lazy synthetic population. Customers are derived on demand from
// (seed, id): the joint demographic table drives a categorical draw and the
// individual deviation u comes from N(0, tau^2). Repeated access to the same
// id always yields the same customer, and the population is never
// materialized in memory.

#include <array>
#include <cstdint>

#include "priceopt/rng.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

struct PopulationSpec {
    std::int64_t size = 3956294;
    // Joint probability over (age, gender, location), age-major cell order.
    std::array<double, kDemographicCells> table{};
    std::uint64_t seed = 0;

    void validate() const;
};

// A 16-cell table with independent margins loosely matching the 2020 Finnish
// 18-75 population (age 21/26/26/27, gender 49.5/50.5, urban 72/28).
PopulationSpec default_population_spec();

class Population {
public:
    Population(PopulationSpec spec, double tau_true);

    Customer customer(std::int64_t id) const;
    std::int64_t size() const { return spec_.size; }
    double tau() const { return tau_; }
    const PopulationSpec& spec() const { return spec_; }

private:
    PopulationSpec spec_;
    double tau_;
    std::array<double, kDemographicCells> cdf_{};
};

inline Population synthesize_population(const PopulationSpec& spec, double tau_true) {
    return Population(spec, tau_true);
}

}  // namespace priceopt
