#pragma once

// Joint Bayesian estimation of the choice model from purchase history and
// conjoint data: builds the unconstrained parameter space and runs NUTS on
// the model posterior.

#include <string>

#include "priceopt/nuts.hpp"
#include "priceopt/posterior.hpp"

namespace priceopt {

struct FitResult {
    PosteriorDraws draws;  // constrained scale: tau back-transformed
    ParameterLayout layout;
    bool identifiability_warning = false;
    std::string warning;
};

// Fits the model variant to the pooled datasets. Draws are stored for the
// global parameters; with store_individual the per-customer deviations u are
// stored as well, and store_u_ids selects a subset of customers whose u
// columns are retained (the decision stage needs them for the current
// subscribers). An empty conjoint set triggers an identifiability warning
// (the fit proceeds regardless).
FitResult fit_model(const ObservationSet& history, const ObservationSet& conjoint,
                    ModelVariant variant, const PriorConfig& priors,
                    const SamplerConfig& cfg, bool store_individual = false,
                    const std::vector<std::int64_t>* store_u_ids = nullptr);

// Reconstructs the constrained global parameters from one stored draw;
// columns absent from the draw matrix keep their pinned/zero defaults.
ParameterVector parameters_from_draw(const PosteriorDraws& draws, int chain, int draw);

// The variant structure implied by the stored columns (demographics and
// history terms present or not).
ModelVariant variant_from_columns(const PosteriorDraws& draws);

}  // namespace priceopt
