#pragma once

// Posterior-predictive price optimization: expected purchase probabilities
// for the potential and subscriber pools, expected gross profit per grid
// price, credible bands, and the optimal-price probability distribution.

#include <cstdint>
#include <span>
#include <vector>

#include "priceopt/nuts.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

// A decision-time customer: demographics and subscription counter. Potential
// customers get a fresh u ~ N(0, tau^2) per posterior draw; subscribers use
// their own posterior u draw when the draw matrix carries a u[id] column for
// them (see DecisionInput::use_estimated_u), falling back to a fresh draw.
struct DecisionCustomer {
    Demographics demographics;
    int s_periods = 0;
    std::int64_t id = -1;  // links subscribers to their u[id] column
};

struct DecisionInput {
    std::vector<DecisionCustomer> d0;  // potential customers, S = 0
    std::vector<DecisionCustomer> d1;  // current subscribers, S > 0
    int n0 = 0;  // N0(t); must equal |d0|
    int n1 = 0;  // N1(t); must equal |d1|
    double variable_cost = 5.0;
    std::vector<double> price_grid;
    std::uint64_t seed = 0;
    ModelVariant variant = ModelVariant::full;
    // Posterior u draws for subscribers keep the selection effect their
    // histories imply; switching this off regenerates every u from
    // N(0, tau^2), which systematically understates retention.
    bool use_estimated_u = true;

    void validate() const;
};

// Mean purchase probability over the customers for one posterior draw,
// generating each customer's u ~ N(0, tau^2) from the supplied stream.
double posterior_mu(const ParameterVector& draw,
                    std::span<const DecisionCustomer> customers, double price,
                    RngStream& rng, ModelVariant variant = ModelVariant::full);

// Same with externally supplied deviations (reused across prices so the
// within-draw price comparison is not contaminated by u noise).
double posterior_mu_given_u(const ParameterVector& draw,
                            std::span<const DecisionCustomer> customers,
                            std::span<const double> u, double price,
                            ModelVariant variant = ModelVariant::full);

// Expected gross profit at one price.
inline double gross_profit(double price, double mu0, double mu1, double n0,
                           double n1, double variable_cost) {
    return n0 * mu0 * (price - variable_cost) + n1 * mu1 * (price - variable_cost);
}

struct ProfitPoint {
    double price = 0.0;
    double mean_profit = 0.0;
    double lo95 = 0.0;
    double hi95 = 0.0;
    double p_optimal = 0.0;
};

struct ProfitCurve {
    std::vector<ProfitPoint> points;
    std::vector<double> draw_profits;  // [draw][price], the retained samples
    int n_draws = 0;

    double profit(int draw, int price_index) const {
        return draw_profits[static_cast<std::size_t>(draw) * points.size() +
                            price_index];
    }
    int modal_index() const;  // argmax of p_optimal, ties toward lowest price
};

// Per-draw profit evaluation over the grid. Draw k uses the RNG stream
// derived from (seed, k), so the curve is identical for any thread count;
// the loop over draws runs under OpenMP when parallel is set.
ProfitCurve profit_curve(const PosteriorDraws& draws, const DecisionInput& input,
                         bool parallel = true);

}  // namespace priceopt
