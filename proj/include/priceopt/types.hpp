#pragma once

// Core domain types shared by the model, simulator, inference and decision
// layers.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace priceopt {

// ---------------------------------------------------------------------------
// Demographics

inline constexpr int kAgeGroups = 4;
inline constexpr int kGenders = 2;
inline constexpr int kLocations = 2;
inline constexpr int kDemographicCells = kAgeGroups * kGenders * kLocations;

inline constexpr const char* kAgeLabels[kAgeGroups] = {"18-30", "31-45",
                                                       "46-60", "61-75"};
inline constexpr const char* kGenderLabels[kGenders] = {"male", "female"};
inline constexpr const char* kLocationLabels[kLocations] = {"urban", "rural"};

struct Demographics {
    int age = 0;       // index into kAgeLabels
    int gender = 0;    // index into kGenderLabels
    int location = 0;  // index into kLocationLabels

    bool operator==(const Demographics&) const = default;
};

// Index of a demographic cell in age-major order.
inline int demographic_cell(const Demographics& d) {
    return (d.age * kGenders + d.gender) * kLocations + d.location;
}

inline Demographics demographics_from_cell(int cell) {
    Demographics d;
    d.location = cell % kLocations;
    d.gender = (cell / kLocations) % kGenders;
    d.age = cell / (kLocations * kGenders);
    return d;
}

int age_index(const std::string& label);
int gender_index(const std::string& label);
int location_index(const std::string& label);

// ---------------------------------------------------------------------------
// Customer

struct Customer {
    std::int64_t id = 0;
    Demographics demographics;
    double u = 0.0;  // individual deviation on the log reference-price scale
};

// ---------------------------------------------------------------------------
// Model variants

// full                 : reference price with demographics, additive conjoint
//                        shift, subscription-history terms
// no_demographics      : reference price reduced to exp(beta0 + u)
// multiplicative_kappa : conjoint effect scales the price instead of
//                        shifting the reference price
// no_history           : subscription-history terms dropped from the choice
enum class ModelVariant { full, no_demographics, multiplicative_kappa, no_history };

std::string to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& name);

inline bool variant_has_demographics(ModelVariant v) {
    return v != ModelVariant::no_demographics;
}
inline bool variant_has_history(ModelVariant v) {
    return v != ModelVariant::no_history;
}

// ---------------------------------------------------------------------------
// Parameters

// All global model parameters on the constrained scale. The first category
// of each demographic coefficient block is pinned to 0 for identification.
struct ParameterVector {
    double beta0 = 0.0;
    std::array<double, kAgeGroups> beta1{};  // beta1[0] pinned to 0
    std::array<double, kGenders> beta2{};    // beta2[0] pinned to 0
    std::array<double, kLocations> beta3{};  // beta3[0] pinned to 0
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;
    double kappa = 0.0;  // euros
    double tau = 1.0;    // sd of the individual deviations, > 0

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("ParameterVector: tau must be > 0");
        if (beta1[0] != 0.0 || beta2[0] != 0.0 || beta3[0] != 0.0)
            throw std::invalid_argument("ParameterVector: baseline categories must be 0");
    }
};

// Table 2 true values; also the simulation defaults.
ParameterVector default_true_parameters();

// ---------------------------------------------------------------------------
// Observations

// One purchase decision, either from the market (conjoint_flag = 0) or from
// a conjoint task (conjoint_flag = 1). domain_flag marks the subscriber
// domain (S > 0 at decision time).
struct Observation {
    std::int64_t customer_id = 0;
    int time = 0;  // period index for history rows, task index for conjoint rows
    double price = 0.0;
    int s_periods = 0;
    bool conjoint_flag = false;
    bool domain_flag = false;
    bool outcome = false;
};

// A set of observations plus the demographics of every customer appearing in
// it (the reference-price equation needs them).
struct ObservationSet {
    std::vector<Observation> records;
    std::unordered_map<std::int64_t, Demographics> demographics;

    void append(const ObservationSet& other) {
        records.insert(records.end(), other.records.begin(), other.records.end());
        for (const auto& [id, demo] : other.demographics) demographics.emplace(id, demo);
    }
};

}  // namespace priceopt
