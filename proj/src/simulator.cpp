#include "priceopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "priceopt/model.hpp"

namespace priceopt {

void MarketConfig::validate() const {
    if (!(launch_price > 0.0)) throw std::invalid_argument("MarketConfig: launch_price must be > 0");
    if (horizon < 1) throw std::invalid_argument("MarketConfig: horizon must be >= 1");
    if (n0 < 1) throw std::invalid_argument("MarketConfig: n0 must be >= 1");
}

ConjointConfig::ConjointConfig() : price_grid(make_price_grid(12.0, 22.0, 0.5)) {}

void ConjointConfig::validate() const {
    if (participants_per_group < 1)
        throw std::invalid_argument("ConjointConfig: participants_per_group must be >= 1");
    if (tasks_per_participant < 1 ||
        tasks_per_participant > static_cast<int>(price_grid.size()))
        throw std::invalid_argument(
            "ConjointConfig: tasks_per_participant must be in [1, |price_grid|]");
    for (double p : price_grid)
        if (!(p > 0.0)) throw std::invalid_argument("ConjointConfig: prices must be > 0");
}

std::vector<double> make_price_grid(double lo, double hi, double step) {
    std::vector<double> grid;
    const int n = static_cast<int>(std::round((hi - lo) / step));
    for (int i = 0; i <= n; ++i) grid.push_back(lo + step * i);
    return grid;
}

namespace {

// n0 distinct ids from the population excluding `excluded`; rejection
// sampling is cheap because |excluded| << N.
std::vector<std::int64_t> sample_pool(const Population& pop, int n0,
                                      const std::unordered_set<std::int64_t>& excluded,
                                      RngStream& rng) {
    const auto population_size = static_cast<std::uint64_t>(pop.size());
    if (static_cast<std::int64_t>(excluded.size()) + n0 > pop.size())
        throw std::runtime_error("simulator: sample size exceeds remaining population");
    std::vector<std::int64_t> drawn;
    drawn.reserve(n0);
    std::unordered_set<std::int64_t> seen;
    seen.reserve(n0 * 2);
    while (static_cast<int>(drawn.size()) < n0) {
        const auto id = static_cast<std::int64_t>(rng.bounded(population_size));
        if (excluded.contains(id) || !seen.insert(id).second) continue;
        drawn.push_back(id);
    }
    return drawn;
}

// m draws without replacement via partial Fisher-Yates, in selection order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, int m, RngStream& rng) {
    std::vector<T> out;
    out.reserve(m);
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.bounded(pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace

MarketState simulate_purchase_history(const Population& pop, const MarketConfig& market,
                                      const ParameterVector& params, std::uint64_t seed) {
    market.validate();
    params.validate();
    RngStream rng(seed, kStreamHistory);

    MarketState state;
    state.price = market.launch_price;
    std::unordered_set<std::int64_t> subscriber_set;

    for (int t = 1; t <= market.horizon; ++t) {
        if (t > 1) {
            const auto change = market.price_changes.find(t);
            if (change != market.price_changes.end()) state.price += change->second;
        }

        state.last_d0 = sample_pool(pop, market.n0, subscriber_set, rng);

        // D = D0 in sampled order, then D1 ascending.
        std::vector<std::int64_t> deciders = state.last_d0;
        deciders.insert(deciders.end(), state.subscribers.begin(), state.subscribers.end());

        std::unordered_map<std::int64_t, int> next_counter;
        next_counter.reserve(state.s_counter.size() + market.n0);
        for (const std::int64_t id : deciders) {
            const auto s_it = state.s_counter.find(id);
            const int s = s_it == state.s_counter.end() ? 0 : s_it->second;
            const Customer cust = pop.customer(id);
            const double q = reference_price(params, cust.demographics, cust.u);
            const double pi =
                purchase_probability(linear_predictor(params, q, state.price, s, false));
            const bool y = rng.bernoulli(pi);

            Observation rec;
            rec.customer_id = id;
            rec.time = t;
            rec.price = state.price;
            rec.s_periods = s;
            rec.conjoint_flag = false;
            rec.domain_flag = s > 0;
            rec.outcome = y;
            state.history.push_back(rec);

            if (y) next_counter[id] = s + 1;
        }

        state.s_counter = std::move(next_counter);
        state.subscribers.clear();
        subscriber_set.clear();
        for (const auto& [id, s] : state.s_counter) {
            state.subscribers.push_back(id);
            subscriber_set.insert(id);
        }
        std::sort(state.subscribers.begin(), state.subscribers.end());
        state.period = t;
    }
    return state;
}

ConjointStudy simulate_conjoint(const Population& pop, const MarketState& state,
                                const ConjointConfig& cfg, const ParameterVector& params,
                                std::uint64_t seed) {
    cfg.validate();
    params.validate();
    RngStream rng(seed, kStreamConjoint);
    const int m = cfg.participants_per_group;
    const int k = cfg.tasks_per_participant;

    // Conjoint evaluation uses the study's kappa in place of the market one.
    ParameterVector study_params = params;
    study_params.kappa = cfg.kappa;

    std::unordered_set<std::int64_t> offered(state.last_d0.begin(), state.last_d0.end());
    offered.insert(state.subscribers.begin(), state.subscribers.end());

    std::vector<std::vector<std::int64_t>> groups(3);
    if (static_cast<int>(state.last_d0.size()) < m)
        throw std::runtime_error("simulate_conjoint: group C0 pool smaller than m");
    if (static_cast<int>(state.subscribers.size()) < m)
        throw std::runtime_error("simulate_conjoint: group C1 pool smaller than m");
    groups[0] = sample_without_replacement(state.last_d0, m, rng);
    groups[1] = sample_without_replacement(state.subscribers, m, rng);
    groups[2] = sample_pool(pop, m, offered, rng);

    std::vector<std::size_t> grid_index(cfg.price_grid.size());
    ConjointStudy study;
    study.rows.reserve(3 * m * k);
    for (int g = 0; g < 3; ++g) {
        for (const std::int64_t id : groups[g]) {
            const auto s_it = state.s_counter.find(id);
            const int s = s_it == state.s_counter.end() ? 0 : s_it->second;
            const Customer cust = pop.customer(id);
            const double q = reference_price(study_params, cust.demographics, cust.u);

            for (std::size_t i = 0; i < grid_index.size(); ++i) grid_index[i] = i;
            const auto tasks = sample_without_replacement(grid_index, k, rng);
            for (int task = 0; task < k; ++task) {
                const double price = cfg.price_grid[tasks[task]];
                const double pi = purchase_probability(
                    linear_predictor(study_params, q, price, s, true));
                ConjointRow row;
                row.customer_id = id;
                row.group = g;
                row.task_index = task + 1;
                row.price = price;
                row.s_periods = s;
                row.choice = rng.bernoulli(pi);
                study.rows.push_back(row);
            }
        }
    }
    return study;
}

std::vector<GroundTruthRow> compute_ground_truth(const Population& pop,
                                                 const MarketState& state,
                                                 const std::vector<double>& grid,
                                                 const ParameterVector& params, int n0,
                                                 double variable_cost, int replications,
                                                 std::uint64_t seed) {
    params.validate();
    if (replications < 1)
        throw std::invalid_argument("compute_ground_truth: replications must be >= 1");
    if (state.subscribers.empty())
        throw std::runtime_error("compute_ground_truth: no subscribers, mu1 undefined");
    if (grid.empty()) throw std::invalid_argument("compute_ground_truth: empty price grid");

    RngStream rng(seed, kStreamGroundTruth);
    const std::unordered_set<std::int64_t> subscriber_set(state.subscribers.begin(),
                                                          state.subscribers.end());

    std::vector<GroundTruthRow> rows(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) rows[j].price = grid[j];

    // mu0: exact probabilities averaged over fresh potential pools. The same
    // pools are reused across prices so the truth curve is smooth in price.
    for (int rep = 0; rep < replications; ++rep) {
        const auto pool = sample_pool(pop, n0, subscriber_set, rng);
        for (const std::int64_t id : pool) {
            const Customer cust = pop.customer(id);
            const double q = reference_price(params, cust.demographics, cust.u);
            for (std::size_t j = 0; j < grid.size(); ++j)
                rows[j].mu0 +=
                    purchase_probability(linear_predictor(params, q, grid[j], 0, false));
        }
    }

    // mu1: exact probabilities over the fixed final subscribers.
    for (const std::int64_t id : state.subscribers) {
        const Customer cust = pop.customer(id);
        const double q = reference_price(params, cust.demographics, cust.u);
        const int s = state.s_counter.at(id);
        for (std::size_t j = 0; j < grid.size(); ++j)
            rows[j].mu1 +=
                purchase_probability(linear_predictor(params, q, grid[j], s, false));
    }

    const double n1 = static_cast<double>(state.subscribers.size());
    for (auto& row : rows) {
        row.mu0 /= static_cast<double>(replications) * n0;
        row.mu1 /= n1;
        row.profit = (n0 * row.mu0 + n1 * row.mu1) * (row.price - variable_cost);
    }
    return rows;
}

std::vector<std::int64_t> sample_from_population(const Population& pop, int n,
                                                 const std::vector<std::int64_t>& excluded,
                                                 std::uint64_t seed,
                                                 std::uint64_t stream_tag) {
    RngStream rng(seed, stream_tag);
    const std::unordered_set<std::int64_t> excluded_set(excluded.begin(), excluded.end());
    return sample_pool(pop, n, excluded_set, rng);
}

ObservationSet history_observations(const Population& pop, const MarketState& state) {
    ObservationSet set;
    set.records = state.history;
    for (const Observation& rec : set.records)
        if (!set.demographics.contains(rec.customer_id))
            set.demographics.emplace(rec.customer_id,
                                     pop.customer(rec.customer_id).demographics);
    return set;
}

ObservationSet conjoint_observations(const Population& pop, const ConjointStudy& study) {
    ObservationSet set;
    set.records.reserve(study.rows.size());
    for (const ConjointRow& row : study.rows) {
        Observation rec;
        rec.customer_id = row.customer_id;
        rec.time = row.task_index;
        rec.price = row.price;
        rec.s_periods = row.s_periods;
        rec.conjoint_flag = true;
        rec.domain_flag = row.s_periods > 0;
        rec.outcome = row.choice;
        set.records.push_back(rec);
        if (!set.demographics.contains(row.customer_id))
            set.demographics.emplace(row.customer_id,
                                     pop.customer(row.customer_id).demographics);
    }
    return set;
}

}  // namespace priceopt
