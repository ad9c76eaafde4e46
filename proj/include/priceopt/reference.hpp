#pragma once

// Plain serial reference implementations, kept for testing and benchmarking
// the OpenMP engine against. These favor clarity over speed: one pass over
// the records in their original order, composing the public model-core
// functions.

#include <span>
#include <vector>

#include "priceopt/posterior.hpp"

namespace priceopt {
namespace reference {

// Log posterior (unconstrained space, with Jacobian) by direct composition
// of log_likelihood + log_prior + the reparameterization terms.
double log_posterior(std::span<const double> x, const ObservationSet& data,
                     const ParameterLayout& layout, const PriorConfig& priors);

// Analytic gradient accumulated record by record in record order.
std::vector<double> log_posterior_gradient(std::span<const double> x,
                                           const ObservationSet& data,
                                           const ParameterLayout& layout,
                                           const PriorConfig& priors);

}  // namespace reference
}  // namespace priceopt
