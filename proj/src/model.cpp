#include "priceopt/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace priceopt {

int age_index(const std::string& label) {
    for (int i = 0; i < kAgeGroups; ++i)
        if (label == kAgeLabels[i]) return i;
    throw std::invalid_argument("unknown age group: " + label);
}

int gender_index(const std::string& label) {
    for (int i = 0; i < kGenders; ++i)
        if (label == kGenderLabels[i]) return i;
    throw std::invalid_argument("unknown gender: " + label);
}

int location_index(const std::string& label) {
    for (int i = 0; i < kLocations; ++i)
        if (label == kLocationLabels[i]) return i;
    throw std::invalid_argument("unknown location: " + label);
}

std::string to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::full: return "full";
        case ModelVariant::no_demographics: return "no_demographics";
        case ModelVariant::multiplicative_kappa: return "multiplicative_kappa";
        case ModelVariant::no_history: return "no_history";
    }
    throw std::logic_error("bad ModelVariant");
}

ModelVariant variant_from_string(const std::string& name) {
    if (name == "full") return ModelVariant::full;
    if (name == "no_demographics") return ModelVariant::no_demographics;
    if (name == "multiplicative_kappa") return ModelVariant::multiplicative_kappa;
    if (name == "no_history") return ModelVariant::no_history;
    throw std::invalid_argument("unknown model variant: " + name);
}

ParameterVector default_true_parameters() {
    ParameterVector p;
    p.beta0 = 2.8;
    p.beta1 = {0.0, -0.015, -0.030, -0.045};
    p.beta2 = {0.0, 0.010};
    p.beta3 = {0.0, -0.020};
    p.alpha1 = 0.35;
    p.alpha2 = 0.45;
    p.alpha3 = -0.30;
    p.kappa = 0.75;
    p.tau = 0.1;
    return p;
}

double reference_price(const ParameterVector& params, const Demographics& demo,
                       double u, ModelVariant variant) {
    double lin = params.beta0 + u;
    if (variant_has_demographics(variant)) {
        lin += params.beta1[demo.age] + params.beta2[demo.gender] +
               params.beta3[demo.location];
    }
    return std::exp(lin);
}

double linear_predictor(const ParameterVector& params, double q, double price,
                        int s_periods, bool conjoint, ModelVariant variant) {
    double gap;
    if (variant == ModelVariant::multiplicative_kappa) {
        gap = q - (conjoint ? params.kappa : 1.0) * price;
    } else {
        gap = (q + (conjoint ? params.kappa : 0.0)) - price;
    }
    double eta = params.alpha1 * gap;
    if (variant_has_history(variant)) {
        eta += params.alpha2 * std::log(static_cast<double>(s_periods) + 1.0);
        if (s_periods == 0) eta += params.alpha3;
    }
    return eta;
}

double log_likelihood(const ParameterVector& params,
                      const std::unordered_map<std::int64_t, double>& u_map,
                      const ObservationSet& obs, ModelVariant variant) {
    double ll = 0.0;
    for (const Observation& rec : obs.records) {
        const auto u_it = u_map.find(rec.customer_id);
        if (u_it == u_map.end())
            throw std::out_of_range("log_likelihood: no u entry for customer " +
                                    std::to_string(rec.customer_id));
        const auto demo_it = obs.demographics.find(rec.customer_id);
        if (demo_it == obs.demographics.end())
            throw std::out_of_range("log_likelihood: no demographics for customer " +
                                    std::to_string(rec.customer_id));
        const double q = reference_price(params, demo_it->second, u_it->second, variant);
        const double eta = linear_predictor(params, q, rec.price, rec.s_periods,
                                            rec.conjoint_flag, variant);
        ll += rec.outcome ? log_sigmoid(eta) : log_sigmoid(-eta);
    }
    return ll;
}

double log_prior(const ParameterVector& params,
                 const std::unordered_map<std::int64_t, double>& u_map,
                 const PriorConfig& priors, ModelVariant variant) {
    if (!(params.tau > 0.0)) throw std::invalid_argument("log_prior: tau must be > 0");

    double lp = normal_lpdf(params.beta0, 0.0, priors.coef_sd);
    if (variant_has_demographics(variant)) {
        for (int a = 1; a < kAgeGroups; ++a)
            lp += normal_lpdf(params.beta1[a], 0.0, priors.coef_sd);
        for (int g = 1; g < kGenders; ++g)
            lp += normal_lpdf(params.beta2[g], 0.0, priors.coef_sd);
        for (int l = 1; l < kLocations; ++l)
            lp += normal_lpdf(params.beta3[l], 0.0, priors.coef_sd);
    }
    lp += normal_lpdf(params.alpha1, 0.0, priors.coef_sd);
    if (variant_has_history(variant)) {
        lp += normal_lpdf(params.alpha2, 0.0, priors.coef_sd);
        lp += normal_lpdf(params.alpha3, 0.0, priors.coef_sd);
    }
    lp += normal_lpdf(params.kappa, 0.0, priors.coef_sd);
    lp += gamma_lpdf(params.tau, priors.tau_shape, priors.tau_scale);
    for (const auto& [id, u] : u_map) lp += normal_lpdf(u, 0.0, params.tau);
    return lp;
}

}  // namespace priceopt
