#pragma once

// Unconstrained-space log posterior and analytic gradient for gradient-based
// sampling.
//
// Parameterization: free global coefficients on their natural scale, tau as
// log(tau) with the Jacobian correction, and individual deviations in the
// non-centered form u = tau * z with z ~ N(0,1).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "priceopt/model.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

// Maps model parameters onto a flat unconstrained vector:
//   [free globals in Table-layout order | z_1 ... z_M]
// where the globals order is beta0, free beta1/beta2/beta3 categories,
// log(tau), alpha1, alpha2, alpha3, kappa (variant-dependent subsets) and
// customers are sorted by id.
struct ParameterLayout {
    ModelVariant variant = ModelVariant::full;
    bool has_demographics = true;
    bool has_history = true;

    int idx_beta0 = -1;
    int idx_beta1[kAgeGroups] = {-1, -1, -1, -1};
    int idx_beta2[kGenders] = {-1, -1};
    int idx_beta3[kLocations] = {-1, -1};
    int idx_tau = -1;  // slot holds log(tau)
    int idx_alpha1 = -1;
    int idx_alpha2 = -1;
    int idx_alpha3 = -1;
    int idx_kappa = -1;

    int n_globals = 0;
    std::vector<std::string> global_names;  // constrained-scale names
    std::vector<std::int64_t> customer_ids;  // sorted ascending

    int dim() const { return n_globals + static_cast<int>(customer_ids.size()); }
};

ParameterLayout make_layout(ModelVariant variant, const ObservationSet& data);

// Constrained globals from an unconstrained vector (tau = exp(slot)).
ParameterVector decode_parameters(std::span<const double> x, const ParameterLayout& layout);

// Unconstrained vector from constrained globals and z-scores (pinned
// baselines ignored; z defaults to zero when shorter than the layout).
std::vector<double> encode_parameters(const ParameterVector& params,
                                      std::span<const double> z,
                                      const ParameterLayout& layout);

// Evaluates log posterior + gradient over a fixed observation set. All
// evaluation state is per-call; a const instance is safe to use from many
// threads at once.
class PosteriorModel {
public:
    PosteriorModel(const ObservationSet& data, ModelVariant variant,
                   PriorConfig priors = {});

    const ParameterLayout& layout() const { return layout_; }
    int dim() const { return layout_.dim(); }
    std::size_t record_count() const { return price_.size(); }
    const PriorConfig& priors() const { return priors_; }

    // Log posterior density (including the log-tau Jacobian) and its exact
    // gradient. Returns -inf with a zeroed gradient when the point is beyond
    // the numeric range of the likelihood. Throws on non-finite input.
    //
    // The observation reduction uses fixed customer blocks combined in
    // ascending order, so the result is bit-identical for any thread count;
    // the blocks run under OpenMP when threads are available.
    double logp_grad(std::span<const double> x, std::span<double> grad) const;

    // Same reduction with the block loop forced serial; used by the
    // benchmark. Bit-identical to logp_grad by construction.
    double logp_grad_serial(std::span<const double> x, std::span<double> grad) const;

private:
    double eval(std::span<const double> x, std::span<double> grad, bool parallel) const;

    ParameterLayout layout_;
    PriorConfig priors_;

    // Per-customer data, index-aligned with layout_.customer_ids.
    std::vector<std::uint8_t> age_, gender_, location_;
    std::vector<std::int32_t> rec_offset_;  // CSR offsets, size M+1

    // Per-record data grouped by customer, record order preserved within a
    // customer.
    std::vector<double> price_;
    std::vector<double> log_s1_;
    std::vector<std::uint8_t> s_zero_;
    std::vector<std::uint8_t> conjoint_;
    std::vector<std::uint8_t> outcome_;

    std::vector<std::int32_t> block_start_;  // fixed customer blocks
};

}  // namespace priceopt
