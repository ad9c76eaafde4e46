#include "priceopt/reference.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace priceopt {
namespace reference {

namespace {

std::unordered_map<std::int64_t, int> customer_index(const ParameterLayout& layout) {
    std::unordered_map<std::int64_t, int> index;
    index.reserve(layout.customer_ids.size());
    for (std::size_t i = 0; i < layout.customer_ids.size(); ++i)
        index.emplace(layout.customer_ids[i], static_cast<int>(i));
    return index;
}

}  // namespace

double log_posterior(std::span<const double> x, const ObservationSet& data,
                     const ParameterLayout& layout, const PriorConfig& priors) {
    const ParameterVector params = decode_parameters(x, layout);
    const double log_tau = x[layout.idx_tau];

    std::unordered_map<std::int64_t, double> u_map;
    u_map.reserve(layout.customer_ids.size());
    for (std::size_t i = 0; i < layout.customer_ids.size(); ++i)
        u_map[layout.customer_ids[i]] = params.tau * x[layout.n_globals + i];

    // log_prior evaluates u on the constrained scale; moving to (z, log_tau)
    // adds log(tau) per deviation plus the Jacobian of tau = exp(log_tau).
    const double n_u = static_cast<double>(layout.customer_ids.size());
    return log_likelihood(params, u_map, data, layout.variant) +
           log_prior(params, u_map, priors, layout.variant) + (n_u + 1.0) * log_tau;
}

std::vector<double> log_posterior_gradient(std::span<const double> x,
                                           const ObservationSet& data,
                                           const ParameterLayout& layout,
                                           const PriorConfig& priors) {
    const ParameterVector params = decode_parameters(x, layout);
    const double tau = params.tau;
    const auto index = customer_index(layout);
    const bool multiplicative = layout.variant == ModelVariant::multiplicative_kappa;

    std::vector<double> grad(layout.dim(), 0.0);
    for (const Observation& rec : data.records) {
        const int i = index.at(rec.customer_id);
        const double z_i = x[layout.n_globals + i];
        const Demographics& demo = data.demographics.at(rec.customer_id);
        const double q =
            reference_price(params, demo, tau * z_i, layout.variant);
        const double eta = linear_predictor(params, q, rec.price, rec.s_periods,
                                            rec.conjoint_flag, layout.variant);
        const double g = (rec.outcome ? 1.0 : 0.0) - logistic(eta);

        const double dq = g * params.alpha1 * q;  // dLL/d(log q) for this record
        grad[layout.idx_beta0] += dq;
        if (layout.has_demographics) {
            if (demo.age > 0) grad[layout.idx_beta1[demo.age]] += dq;
            if (demo.gender > 0) grad[layout.idx_beta2[demo.gender]] += dq;
            if (demo.location > 0) grad[layout.idx_beta3[demo.location]] += dq;
        }
        grad[layout.n_globals + i] += dq * tau;
        grad[layout.idx_tau] += dq * tau * z_i;

        double gap;
        if (multiplicative) {
            gap = q - (rec.conjoint_flag ? params.kappa : 1.0) * rec.price;
            if (rec.conjoint_flag)
                grad[layout.idx_kappa] -= g * params.alpha1 * rec.price;
        } else {
            gap = (q + (rec.conjoint_flag ? params.kappa : 0.0)) - rec.price;
            if (rec.conjoint_flag) grad[layout.idx_kappa] += g * params.alpha1;
        }
        grad[layout.idx_alpha1] += g * gap;
        if (layout.has_history) {
            grad[layout.idx_alpha2] +=
                g * std::log(static_cast<double>(rec.s_periods) + 1.0);
            if (rec.s_periods == 0) grad[layout.idx_alpha3] += g;
        }
    }

    // Prior scores.
    const double inv_var = 1.0 / (priors.coef_sd * priors.coef_sd);
    auto coef_score = [&](int slot) { grad[slot] -= x[slot] * inv_var; };
    coef_score(layout.idx_beta0);
    if (layout.has_demographics) {
        for (int a = 1; a < kAgeGroups; ++a) coef_score(layout.idx_beta1[a]);
        for (int g = 1; g < kGenders; ++g) coef_score(layout.idx_beta2[g]);
        for (int l = 1; l < kLocations; ++l) coef_score(layout.idx_beta3[l]);
    }
    coef_score(layout.idx_alpha1);
    if (layout.has_history) {
        coef_score(layout.idx_alpha2);
        coef_score(layout.idx_alpha3);
    }
    coef_score(layout.idx_kappa);
    grad[layout.idx_tau] += priors.tau_shape - tau / priors.tau_scale;
    for (std::size_t i = 0; i < layout.customer_ids.size(); ++i)
        grad[layout.n_globals + i] -= x[layout.n_globals + i];
    return grad;
}

}  // namespace reference
}  // namespace priceopt
