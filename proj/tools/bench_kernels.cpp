// Benchmark of the OpenMP kernels against their serial counterparts:
// posterior gradient evaluation and the profit-curve sweep. Also verifies
// that parallel and serial paths agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "priceopt/decision.hpp"
#include "priceopt/inference.hpp"
#include "priceopt/population.hpp"
#include "priceopt/posterior.hpp"
#include "priceopt/simulator.hpp"

using namespace priceopt;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        f();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif

    const ParameterVector truth = default_true_parameters();
    PopulationSpec spec = default_population_spec();
    spec.seed = 7;
    const Population pop(spec, truth.tau);

    MarketConfig market;
    market.n0 = 400;
    const MarketState state = simulate_purchase_history(pop, market, truth, 7);
    ConjointConfig conjoint;
    conjoint.participants_per_group = 100;
    const ConjointStudy study = simulate_conjoint(pop, state, conjoint, truth, 7);

    ObservationSet data = history_observations(pop, state);
    data.append(conjoint_observations(pop, study));
    std::printf("dataset: %zu records, %zu customers\n", data.records.size(),
                data.demographics.size());

    const PosteriorModel model(data, ModelVariant::full);
    std::vector<double> x(model.dim(), 0.0);
    RngStream rng(11);
    const ParameterLayout& layout = model.layout();
    for (int i = 0; i < layout.n_globals; ++i) x[i] = rng.uniform(-0.3, 0.3);
    x[layout.idx_tau] = std::log(0.2);
    for (int i = layout.n_globals; i < model.dim(); ++i) x[i] = rng.normal();

    std::vector<double> grad_serial(model.dim()), grad_parallel(model.dim());
    const int grad_reps = 50;
    const double t_serial = time_best_of(5, [&] {
        for (int r = 0; r < grad_reps; ++r) model.logp_grad_serial(x, grad_serial);
    });
    const double t_parallel = time_best_of(5, [&] {
        for (int r = 0; r < grad_reps; ++r) model.logp_grad(x, grad_parallel);
    });
    const bool grad_identical =
        std::memcmp(grad_serial.data(), grad_parallel.data(),
                    grad_serial.size() * sizeof(double)) == 0 &&
        model.logp_grad_serial(x, grad_serial) == model.logp_grad(x, grad_parallel);
    std::printf("posterior gradient: serial %.3f ms, parallel %.3f ms, speedup %.2fx, "
                "bit-identical: %s\n",
                1e3 * t_serial / grad_reps, 1e3 * t_parallel / grad_reps,
                t_serial / t_parallel, grad_identical ? "yes" : "NO");

    // Decision sweep over a synthetic posterior.
    SamplerConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 700;
    cfg.warmup = 200;
    cfg.thinning = 1;
    cfg.seed = 3;
    const FitResult fit = fit_model(history_observations(pop, state),
                                    conjoint_observations(pop, study),
                                    ModelVariant::full, PriorConfig{}, cfg);

    DecisionInput input;
    input.n0 = 500;
    const auto d0_ids = sample_from_population(pop, input.n0, state.subscribers, 7,
                                               kStreamDecisionPool);
    for (const std::int64_t id : d0_ids)
        input.d0.push_back({pop.customer(id).demographics, 0});
    for (const std::int64_t id : state.subscribers)
        input.d1.push_back({pop.customer(id).demographics, state.s_counter.at(id)});
    input.n1 = static_cast<int>(input.d1.size());
    input.price_grid = make_price_grid(14.0, 18.0, 0.25);
    input.seed = 7;

    ProfitCurve serial_curve, parallel_curve;
    const double t_curve_serial =
        time_best_of(3, [&] { serial_curve = profit_curve(fit.draws, input, false); });
    const double t_curve_parallel =
        time_best_of(3, [&] { parallel_curve = profit_curve(fit.draws, input, true); });
    const bool curve_identical =
        serial_curve.draw_profits == parallel_curve.draw_profits;
    std::printf("profit curve (%d draws x %zu prices): serial %.1f ms, parallel %.1f ms, "
                "speedup %.2fx, bit-identical: %s\n",
                fit.draws.total_retained(), input.price_grid.size(),
                1e3 * t_curve_serial, 1e3 * t_curve_parallel,
                t_curve_serial / t_curve_parallel, curve_identical ? "yes" : "NO");

    return grad_identical && curve_identical ? 0 : 1;
}
