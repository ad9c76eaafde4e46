#pragma once

// The causal/statistical model of the purchase process.
//
// A customer carries a latent log-normal reference price
//     Q_i = exp(beta0 + beta1[age] + beta2[gender] + beta3[location] + u_i)
// and makes Bernoulli choices through a logit link whose predictor compares
// the (possibly conjoint-shifted) reference price against the offered price
// and accounts for accumulated subscription periods.

#include <span>
#include <unordered_map>
#include <vector>

#include "priceopt/stats.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

struct PriorConfig {
    double coef_sd = 0.5;     // N(0, coef_sd) on every free regression coefficient
    double tau_shape = 2.0;   // Gamma(shape, scale) on tau
    double tau_scale = 0.2;
};

// Latent reference price Q, always positive.
double reference_price(const ParameterVector& params, const Demographics& demo,
                       double u, ModelVariant variant = ModelVariant::full);

// Logit-scale predictor of the purchase probability. `conjoint` activates the
// kappa shift (additive on q, or multiplicative on the price under the
// multiplicative_kappa variant).
double linear_predictor(const ParameterVector& params, double q, double price,
                        int s_periods, bool conjoint,
                        ModelVariant variant = ModelVariant::full);

// Inverse logit; stable for |predictor| up to at least 700.
inline double purchase_probability(double predictor) { return logistic(predictor); }

// Bernoulli log-likelihood over the records, summed in record order. Every
// customer_id must have an entry in u_map.
double log_likelihood(const ParameterVector& params,
                      const std::unordered_map<std::int64_t, double>& u_map,
                      const ObservationSet& obs,
                      ModelVariant variant = ModelVariant::full);

// Joint log-prior of the free global parameters and the individual
// deviations: N(0, coef_sd) on free coefficients, Gamma on tau, N(0, tau)
// on every u.
double log_prior(const ParameterVector& params,
                 const std::unordered_map<std::int64_t, double>& u_map,
                 const PriorConfig& priors = {},
                 ModelVariant variant = ModelVariant::full);

}  // namespace priceopt
