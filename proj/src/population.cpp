#include "priceopt/population.hpp"

#include <cmath>
#include <stdexcept>

namespace priceopt {

void PopulationSpec::validate() const {
    if (size < 1) throw std::invalid_argument("PopulationSpec: size must be >= 1");
    double sum = 0.0;
    for (double p : table) {
        if (!(p >= 0.0)) throw std::invalid_argument("PopulationSpec: negative cell probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("PopulationSpec: cell probabilities must sum to 1");
}

PopulationSpec default_population_spec() {
    PopulationSpec spec;
    const double age[kAgeGroups] = {0.21, 0.26, 0.26, 0.27};
    const double gender[kGenders] = {0.495, 0.505};
    const double location[kLocations] = {0.72, 0.28};
    for (int a = 0; a < kAgeGroups; ++a)
        for (int g = 0; g < kGenders; ++g)
            for (int l = 0; l < kLocations; ++l)
                spec.table[(a * kGenders + g) * kLocations + l] =
                    age[a] * gender[g] * location[l];
    return spec;
}

Population::Population(PopulationSpec spec, double tau_true)
    : spec_(std::move(spec)), tau_(tau_true) {
    spec_.validate();
    if (!(tau_ >= 0.0)) throw std::invalid_argument("Population: tau_true must be >= 0");
    double acc = 0.0;
    for (int c = 0; c < kDemographicCells; ++c) {
        acc += spec_.table[c];
        cdf_[c] = acc;
    }
    cdf_[kDemographicCells - 1] = 1.0;  // guard against rounding at the top
}

Customer Population::customer(std::int64_t id) const {
    if (id < 0 || id >= spec_.size)
        throw std::out_of_range("Population: customer id out of range");
    RngStream rng(spec_.seed, kStreamCustomer, static_cast<std::uint64_t>(id));
    const double v = rng.uniform();
    int cell = 0;
    while (cell < kDemographicCells - 1 && v >= cdf_[cell]) ++cell;
    Customer c;
    c.id = id;
    c.demographics = demographics_from_cell(cell);
    c.u = tau_ * rng.normal();
    return c;
}

}  // namespace priceopt
