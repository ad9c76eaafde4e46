#include "priceopt/decision.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "priceopt/inference.hpp"
#include "priceopt/model.hpp"
#include "priceopt/population.hpp"
#include "priceopt/stats.hpp"

namespace priceopt {

void DecisionInput::validate() const {
    if (static_cast<int>(d0.size()) != n0 || static_cast<int>(d1.size()) != n1)
        throw std::invalid_argument("DecisionInput: |d0| must equal n0 and |d1| must equal n1");
    if (price_grid.empty()) throw std::invalid_argument("DecisionInput: empty price grid");
    for (const DecisionCustomer& c : d0)
        if (c.s_periods != 0)
            throw std::invalid_argument("DecisionInput: d0 customers must have S = 0");
    for (const DecisionCustomer& c : d1)
        if (c.s_periods <= 0)
            throw std::invalid_argument("DecisionInput: d1 customers must have S > 0");
}

double posterior_mu_given_u(const ParameterVector& draw,
                            std::span<const DecisionCustomer> customers,
                            std::span<const double> u, double price,
                            ModelVariant variant) {
    double sum = 0.0;
    for (std::size_t i = 0; i < customers.size(); ++i) {
        const double q =
            reference_price(draw, customers[i].demographics, u[i], variant);
        sum += purchase_probability(
            linear_predictor(draw, q, price, customers[i].s_periods, false, variant));
    }
    return sum / static_cast<double>(customers.size());
}

double posterior_mu(const ParameterVector& draw,
                    std::span<const DecisionCustomer> customers, double price,
                    RngStream& rng, ModelVariant variant) {
    if (customers.empty()) throw std::invalid_argument("posterior_mu: no customers");
    std::vector<double> u(customers.size());
    for (double& v : u) v = rng.normal(0.0, draw.tau);
    return posterior_mu_given_u(draw, customers, u, price, variant);
}

int ProfitCurve::modal_index() const {
    int best = 0;
    for (int j = 1; j < static_cast<int>(points.size()); ++j)
        if (points[j].p_optimal > points[best].p_optimal) best = j;
    return best;
}

ProfitCurve profit_curve(const PosteriorDraws& draws, const DecisionInput& input,
                         bool parallel) {
    input.validate();
    if (draws.total_retained() < 1)
        throw std::invalid_argument("profit_curve: no posterior draws");

    const int n_prices = static_cast<int>(input.price_grid.size());
    const int n_draws = draws.total_retained();
    ProfitCurve curve;
    curve.n_draws = n_draws;
    curve.points.resize(n_prices);
    for (int j = 0; j < n_prices; ++j) curve.points[j].price = input.price_grid[j];
    curve.draw_profits.resize(static_cast<std::size_t>(n_draws) * n_prices);

    const int retained = draws.retained;
    const int n0 = input.n0, n1 = input.n1;

    // Column of each subscriber's posterior u draw, -1 when absent.
    std::vector<int> u_column(input.d1.size(), -1);
    if (input.use_estimated_u)
        for (std::size_t i = 0; i < input.d1.size(); ++i) {
            if (input.d1[i].id < 0) continue;
            const std::string name = "u[" + std::to_string(input.d1[i].id) + "]";
            if (draws.has_column(name)) u_column[i] = draws.column(name);
        }

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int k = 0; k < n_draws; ++k) {
        const int chain = k / retained;
        const int draw = k % retained;
        const ParameterVector params = parameters_from_draw(draws, chain, draw);

        // One u per customer per posterior draw, d0 first then d1, reused
        // across all grid prices.
        RngStream rng(input.seed, kStreamDecisionDraw, static_cast<std::uint64_t>(k));
        std::vector<double> u0(input.d0.size()), u1(input.d1.size());
        for (double& v : u0) v = rng.normal(0.0, params.tau);
        for (std::size_t i = 0; i < u1.size(); ++i)
            u1[i] = u_column[i] >= 0 ? draws.value(chain, draw, u_column[i])
                                     : rng.normal(0.0, params.tau);

        for (int j = 0; j < n_prices; ++j) {
            const double price = input.price_grid[j];
            const double mu0 =
                posterior_mu_given_u(params, input.d0, u0, price, input.variant);
            const double mu1 =
                posterior_mu_given_u(params, input.d1, u1, price, input.variant);
            curve.draw_profits[static_cast<std::size_t>(k) * n_prices + j] =
                gross_profit(price, mu0, mu1, n0, n1, input.variable_cost);
        }
    }

    // Fixed-order aggregation.
    std::vector<double> column(n_draws);
    for (int j = 0; j < n_prices; ++j) {
        double sum = 0.0;
        for (int k = 0; k < n_draws; ++k) {
            column[k] = curve.profit(k, j);
            sum += column[k];
        }
        curve.points[j].mean_profit = sum / n_draws;
        curve.points[j].lo95 = quantile_type7(column, 0.025);
        curve.points[j].hi95 = quantile_type7(column, 0.975);
    }
    for (int k = 0; k < n_draws; ++k) {
        int best = 0;
        for (int j = 1; j < n_prices; ++j)
            if (curve.profit(k, j) > curve.profit(k, best)) best = j;  // ties: lowest price
        curve.points[best].p_optimal += 1.0;
    }
    for (int j = 0; j < n_prices; ++j) curve.points[j].p_optimal /= n_draws;
    return curve;
}

}  // namespace priceopt
