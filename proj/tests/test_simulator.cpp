#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "priceopt/model.hpp"
#include "priceopt/population.hpp"
#include "priceopt/simulator.hpp"

using namespace priceopt;

namespace {

Population small_population(std::uint64_t seed = 11, double tau = 0.1) {
    PopulationSpec spec = default_population_spec();
    spec.seed = seed;
    return Population(spec, tau);
}

MarketConfig small_market(int n0 = 50, int horizon = 8) {
    MarketConfig market;
    market.n0 = n0;
    market.horizon = horizon;
    return market;
}

}  // namespace

TEST_CASE("population: deterministic lazy derivation") {
    const Population pop = small_population();
    const Customer a = pop.customer(7);
    const Customer b = pop.customer(7);
    CHECK(a.demographics == b.demographics);
    CHECK(a.u == b.u);
    CHECK(pop.customer(8).id == 8);
    CHECK_THROWS_AS(pop.customer(-1), std::out_of_range);
    CHECK_THROWS_AS(pop.customer(pop.size()), std::out_of_range);
}

TEST_CASE("population: degenerate table is a point mass") {
    PopulationSpec spec;
    spec.size = 1000;
    spec.table.fill(0.0);
    spec.table[demographic_cell({2, 1, 0})] = 1.0;
    const Population pop(spec, 0.1);
    for (std::int64_t id = 0; id < 50; ++id) {
        const Customer c = pop.customer(id);
        CHECK(c.demographics == Demographics{2, 1, 0});
    }
}

TEST_CASE("population: cell frequencies match the table within 3 standard errors") {
    const Population pop = small_population(123);
    const auto& table = pop.spec().table;
    std::array<int, kDemographicCells> counts{};
    const int n = 100000;
    for (std::int64_t id = 0; id < n; ++id)
        ++counts[demographic_cell(pop.customer(id).demographics)];
    for (int c = 0; c < kDemographicCells; ++c) {
        const double p = table[c];
        const double se = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(counts[c] / static_cast<double>(n) - p) < 3.0 * se);
    }

    // u is N(0, tau^2): check the first two moments loosely
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t id = 0; id < n; ++id) {
        const double u = pop.customer(id).u;
        sum += u;
        sumsq += u * u;
    }
    CHECK(std::abs(sum / n) < 3.0 * 0.1 / std::sqrt(n));
    CHECK(sumsq / n == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("population: invalid tables are rejected") {
    PopulationSpec spec = default_population_spec();
    spec.table[0] += 0.1;  // sums to 1.1
    CHECK_THROWS_AS(Population(spec, 0.1), std::invalid_argument);
    spec = default_population_spec();
    spec.table[0] = -spec.table[0];
    CHECK_THROWS_AS(Population(spec, 0.1), std::invalid_argument);
    spec = default_population_spec();
    spec.size = 0;
    CHECK_THROWS_AS(Population(spec, 0.1), std::invalid_argument);
}

TEST_CASE("market: default price schedule follows the two raises") {
    const Population pop = small_population();
    MarketConfig market = small_market(30, 24);
    const MarketState state =
        simulate_purchase_history(pop, market, default_true_parameters(), 5);
    std::map<int, double> price_at;
    for (const Observation& rec : state.history) price_at[rec.time] = rec.price;
    for (int t = 1; t <= 24; ++t) {
        const double expected = t < 7 ? 16.0 : (t < 19 ? 16.5 : 17.0);
        CHECK(price_at.at(t) == expected);
    }
}

TEST_CASE("market: degenerate purchase probabilities") {
    const Population pop = small_population();

    // pi ~ 0: nobody subscribes, exactly n0 * T observations
    ParameterVector never = default_true_parameters();
    never.beta0 = 0.0;
    never.beta1 = {0, 0, 0, 0};
    never.beta2 = {0, 0};
    never.beta3 = {0, 0};
    never.alpha1 = 50.0;  // q ~ 1 vs price 16 pushes the predictor to -inf
    MarketConfig market = small_market(40, 6);
    const MarketState state = simulate_purchase_history(pop, market, never, 6);
    CHECK(state.history.size() == 40u * 6u);
    CHECK(state.subscribers.empty());
    for (const Observation& rec : state.history) CHECK_FALSE(rec.outcome);

    // pi ~ 1: a first-period entrant accumulates S = horizon by the end
    ParameterVector always = never;
    always.beta0 = 3.5;  // q ~ 33
    always.alpha1 = 20.0;
    const MarketState state2 = simulate_purchase_history(pop, market, always, 6);
    const std::int64_t first = state2.history.front().customer_id;
    CHECK(state2.s_counter.at(first) == market.horizon);
    for (const Observation& rec : state2.history) CHECK(rec.outcome);
}

TEST_CASE("market: S dynamics, domain flags and disjoint pools") {
    const Population pop = small_population(3);
    MarketConfig market = small_market(60, 10);
    const MarketState state =
        simulate_purchase_history(pop, market, default_true_parameters(), 42);

    // per period: no duplicate deciders, and D1 = previous-period purchasers
    std::map<int, std::set<std::int64_t>> per_period;
    std::map<int, std::set<std::int64_t>> purchasers;
    for (const Observation& rec : state.history) {
        CHECK(per_period[rec.time].insert(rec.customer_id).second);  // distinct
        if (rec.outcome) purchasers[rec.time].insert(rec.customer_id);
        CHECK(rec.domain_flag == (rec.s_periods > 0));
        CHECK_FALSE(rec.conjoint_flag);
    }
    for (int t = 2; t <= 10; ++t) {
        std::size_t expected = 60 + purchasers[t - 1].size();
        CHECK(per_period[t].size() == expected);
    }

    // S resets to 0 on a miss, increments by exactly 1 on a purchase
    std::unordered_map<std::int64_t, std::map<int, const Observation*>> by_customer;
    for (const Observation& rec : state.history)
        by_customer[rec.customer_id][rec.time] = &rec;
    for (const auto& [id, rows] : by_customer) {
        for (const auto& [t, rec] : rows) {
            const auto next = rows.find(t + 1);
            if (rec->outcome && t < 10) {
                REQUIRE(next != rows.end());  // subscribers always decide again
                CHECK(next->second->s_periods == rec->s_periods + 1);
            } else if (!rec->outcome && next != rows.end()) {
                CHECK(next->second->s_periods == 0);
            }
        }
    }

    // subscriber list matches the counter and the S > 0 invariant
    for (const std::int64_t id : state.subscribers) CHECK(state.s_counter.at(id) > 0);
    CHECK(state.subscribers.size() == state.s_counter.size());
}

TEST_CASE("market: bit-identical reruns and seed sensitivity") {
    const Population pop = small_population(9);
    MarketConfig market = small_market(25, 6);
    const ParameterVector truth = default_true_parameters();
    const MarketState a = simulate_purchase_history(pop, market, truth, 77);
    const MarketState b = simulate_purchase_history(pop, market, truth, 77);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].customer_id == b.history[i].customer_id);
        CHECK(a.history[i].outcome == b.history[i].outcome);
        CHECK(a.history[i].price == b.history[i].price);
        CHECK(a.history[i].s_periods == b.history[i].s_periods);
    }
    const MarketState c = simulate_purchase_history(pop, market, truth, 78);
    bool any_difference = c.history.size() != a.history.size();
    for (std::size_t i = 0; !any_difference && i < a.history.size(); ++i)
        any_difference = a.history[i].customer_id != c.history[i].customer_id ||
                         a.history[i].outcome != c.history[i].outcome;
    CHECK(any_difference);
}

TEST_CASE("market: n0 exceeding the remaining population fails") {
    PopulationSpec spec = default_population_spec();
    spec.size = 30;
    const Population pop(spec, 0.1);
    MarketConfig market = small_market(40, 2);
    CHECK_THROWS_AS(simulate_purchase_history(pop, market, default_true_parameters(), 1),
                    std::runtime_error);
}

TEST_CASE("simulator: empirical purchase frequency matches mean pi (3 SE)") {
    const Population pop = small_population(21);
    MarketConfig market = small_market(10000, 1);
    const ParameterVector truth = default_true_parameters();
    const MarketState state = simulate_purchase_history(pop, market, truth, 99);
    REQUIRE(state.history.size() == 10000);

    double mean_pi = 0.0, var_sum = 0.0, freq = 0.0;
    for (const Observation& rec : state.history) {
        const Customer cust = pop.customer(rec.customer_id);
        const double q = reference_price(truth, cust.demographics, cust.u);
        const double pi =
            purchase_probability(linear_predictor(truth, q, rec.price, 0, false));
        mean_pi += pi;
        var_sum += pi * (1.0 - pi);
        freq += rec.outcome ? 1.0 : 0.0;
    }
    mean_pi /= 10000.0;
    freq /= 10000.0;
    const double se = std::sqrt(var_sum) / 10000.0;
    CHECK(std::abs(freq - mean_pi) < 3.0 * se);
}

TEST_CASE("conjoint: groups, distinct prices, record counts") {
    const Population pop = small_population(4);
    MarketConfig market = small_market(80, 8);
    const ParameterVector truth = default_true_parameters();
    const MarketState state = simulate_purchase_history(pop, market, truth, 12);
    ConjointConfig cfg;
    cfg.participants_per_group = 15;
    cfg.tasks_per_participant = 10;
    REQUIRE(state.subscribers.size() >= 15);

    const ConjointStudy study = simulate_conjoint(pop, state, cfg, truth, 12);
    CHECK(study.rows.size() == 3u * 15u * 10u);

    const std::set<std::int64_t> d0(state.last_d0.begin(), state.last_d0.end());
    const std::set<std::int64_t> d1(state.subscribers.begin(), state.subscribers.end());
    std::map<std::int64_t, std::set<double>> prices_of;
    for (const ConjointRow& row : study.rows) {
        CHECK(prices_of[row.customer_id * 4 + row.group].insert(row.price).second);
        const bool subscribed = d1.contains(row.customer_id);
        CHECK(row.s_periods == (subscribed ? state.s_counter.at(row.customer_id) : 0));
        if (row.group == 0) CHECK(d0.contains(row.customer_id));
        if (row.group == 1) CHECK(subscribed);
        if (row.group == 2) {
            CHECK_FALSE(d0.contains(row.customer_id));
            CHECK_FALSE(subscribed);
        }
        CHECK(std::find(cfg.price_grid.begin(), cfg.price_grid.end(), row.price) !=
              cfg.price_grid.end());
    }

    // pool smaller than m
    cfg.participants_per_group =
        static_cast<int>(std::max(state.subscribers.size(), state.last_d0.size())) + 1;
    CHECK_THROWS_WITH_AS(simulate_conjoint(pop, state, cfg, truth, 12),
                         doctest::Contains("pool smaller"), std::runtime_error);

    // conjoint observations carry the conjoint flag
    cfg.participants_per_group = 5;
    const ConjointStudy small = simulate_conjoint(pop, state, cfg, truth, 12);
    const ObservationSet obs = conjoint_observations(pop, small);
    for (const Observation& rec : obs.records) {
        CHECK(rec.conjoint_flag);
        CHECK(rec.domain_flag == (rec.s_periods > 0));
    }
}

TEST_CASE("ground truth: zero margin, monotone retention, stability, errors") {
    const Population pop = small_population(31);
    MarketConfig market = small_market(100, 8);
    const ParameterVector truth = default_true_parameters();
    const MarketState state = simulate_purchase_history(pop, market, truth, 14);
    REQUIRE_FALSE(state.subscribers.empty());
    const auto grid = make_price_grid(14.0, 18.0, 0.25);

    const auto rows = compute_ground_truth(pop, state, grid, truth, 100, 5.0, 30, 14);
    REQUIRE(rows.size() == 17);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        CHECK(rows[j].mu0 > 0.0);
        CHECK(rows[j].mu0 < 1.0);
        CHECK(rows[j].mu1 > 0.0);
        CHECK(rows[j].mu1 < 1.0);
        if (j > 0) CHECK(rows[j].mu1 < rows[j - 1].mu1);  // decreasing in price
    }

    // profit is exactly zero when the price equals the variable cost
    const auto at_cost = compute_ground_truth(pop, state, {5.0}, truth, 100, 5.0, 5, 14);
    CHECK(at_cost[0].profit == 0.0);

    // mu0 stabilizes across seeds as replications grow
    const auto big_a = compute_ground_truth(pop, state, {16.0}, truth, 100, 5.0, 800, 1);
    const auto big_b = compute_ground_truth(pop, state, {16.0}, truth, 100, 5.0, 800, 2);
    CHECK(std::abs(big_a[0].mu0 - big_b[0].mu0) < 1e-3);

    CHECK_THROWS_AS(compute_ground_truth(pop, state, grid, truth, 100, 5.0, 0, 14),
                    std::invalid_argument);
    MarketState no_subs = state;
    no_subs.subscribers.clear();
    CHECK_THROWS_AS(compute_ground_truth(pop, no_subs, grid, truth, 100, 5.0, 5, 14),
                    std::runtime_error);
}

TEST_CASE("observation sets: history view carries demographics and flags") {
    const Population pop = small_population(8);
    MarketConfig market = small_market(30, 3);
    const MarketState state =
        simulate_purchase_history(pop, market, default_true_parameters(), 50);
    const ObservationSet set = history_observations(pop, state);
    CHECK(set.records.size() == state.history.size());
    for (const Observation& rec : set.records) {
        CHECK(set.demographics.contains(rec.customer_id));
        CHECK(set.demographics.at(rec.customer_id) ==
              pop.customer(rec.customer_id).demographics);
    }
}
